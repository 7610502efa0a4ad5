#include <cmath>
#include <numbers>
#include <random>

#include "sheafscope/error.hpp"
#include "sheafscope/io.hpp"

namespace sheafscope {

namespace {

std::vector<double> gaussian_vector(std::mt19937_64& rng, std::size_t dim) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> v(dim);
  for (double& x : v) x = normal(rng);
  return v;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void normalize(std::vector<double>& v) {
  const double n = std::sqrt(dot(v, v));
  for (double& x : v) x /= n;
}

}  // namespace

SynthData generate_synthetic(const SynthSpec& spec) {
  if (spec.parts < 1) throw Error(ErrorCode::InvalidArgument, "synth needs at least one part");
  if (spec.per_part < 2) throw Error(ErrorCode::InvalidArgument, "synth needs at least two elements per part");
  if (spec.dim < 2) throw Error(ErrorCode::InvalidArgument, "synth needs feature dimension >= 2");
  if (!(spec.separation >= 0.0) || !std::isfinite(spec.separation)) {
    throw Error(ErrorCode::InvalidArgument, "separation must be a finite non-negative number");
  }
  if (spec.defect_part && *spec.defect_part >= spec.parts) {
    throw Error(ErrorCode::InvalidArgument, "defect part index out of range");
  }

  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  SynthData out;
  out.dim = spec.dim;

  for (std::size_t p = 0; p < spec.parts; ++p) {
    // Random 2-plane by Gram-Schmidt, then a random direction inside it.
    auto u = gaussian_vector(rng, spec.dim);
    normalize(u);
    auto v = gaussian_vector(rng, spec.dim);
    const double proj = dot(u, v);
    for (std::size_t c = 0; c < spec.dim; ++c) v[c] -= proj * u[c];
    normalize(v);
    const double phi = angle(rng);
    std::vector<double> dir(spec.dim);
    for (std::size_t c = 0; c < spec.dim; ++c) dir[c] = std::cos(phi) * u[c] + std::sin(phi) * v[c];

    const std::size_t n_stem = (spec.per_part + 1) / 2;
    std::vector<ClassLabel> labels(spec.per_part);
    NamedSubset part{"part" + std::to_string(p), {}};
    for (std::size_t i = 0; i < spec.per_part; ++i) {
      labels[i] = i < n_stem ? ClassLabel::s : ClassLabel::ns;
      const double sign = labels[i] == ClassLabel::s ? 0.5 : -0.5;
      auto noise = gaussian_vector(rng, spec.dim);
      for (std::size_t c = 0; c < spec.dim; ++c) out.values.push_back(sign * spec.separation * dir[c] + noise[c]);
      std::string id = "part" + std::to_string(p) + "_" + std::to_string(i);
      part.labels.push_back(id);
      out.ids.push_back(std::move(id));
    }
    if (spec.defect_part && *spec.defect_part == p) {
      for (std::size_t i = labels.size(); i-- > 1;) {
        std::swap(labels[i], labels[static_cast<std::size_t>(rng() % (i + 1))]);
      }
    }
    out.labels.insert(out.labels.end(), labels.begin(), labels.end());
    out.subbasis.push_back(std::move(part));
  }
  return out;
}

}  // namespace sheafscope
