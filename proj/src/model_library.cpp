#include "sheafscope/model_library.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "sheafscope/error.hpp"

namespace sheafscope {

ModelPresheafSpec ModelPresheafSpec::identity() {
  ModelPresheafSpec s;
  s.family = ModelFamily::Identity;
  return s;
}

ModelPresheafSpec ModelPresheafSpec::average() {
  ModelPresheafSpec s;
  s.family = ModelFamily::Average;
  return s;
}

ModelPresheafSpec ModelPresheafSpec::scalar_statistic(Statistic which) {
  ModelPresheafSpec s;
  s.family = ModelFamily::Statistic;
  s.statistic = which;
  return s;
}

ModelPresheafSpec ModelPresheafSpec::graff(std::size_t q) {
  ModelPresheafSpec s;
  s.family = ModelFamily::Graff;
  s.q = q;
  return s;
}

ModelPresheafSpec ModelPresheafSpec::prototype_accuracy(PrototypeParams params) {
  if (params.shots < 1) throw Error(ErrorCode::InvalidArgument, "prototype shots must be at least 1");
  if (params.trials < 1) throw Error(ErrorCode::InvalidArgument, "prototype trials must be at least 1");
  ModelPresheafSpec s;
  s.family = ModelFamily::Prototype;
  s.prototype = std::move(params);
  return s;
}

std::string ModelPresheafSpec::name() const {
  switch (family) {
    case ModelFamily::Identity: return "identity";
    case ModelFamily::Average: return "average";
    case ModelFamily::Statistic:
      switch (statistic) {
        case Statistic::Median: return "median";
        case Statistic::Max: return "max";
        case Statistic::Min: return "min";
      }
      break;
    case ModelFamily::Graff: return "graff";
    case ModelFamily::Prototype: return "prototype";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// Scalar statistics

namespace {

void require_scalar_section(const Section& s) {
  if (s.dim() != 1) {
    throw Error(ErrorCode::DimMismatch, "scalar statistics need one-dimensional values, got " +
                                            std::to_string(s.dim()));
  }
}

}  // namespace

ModelValue model_average(const Section& s) {
  require_scalar_section(s);
  if (s.size() == 0) return Null{};
  double sum = 0.0;
  for (double v : s.values()) sum += v;
  return Scalar{sum / static_cast<double>(s.size())};
}

ModelValue model_statistic(const Section& s, Statistic which) {
  require_scalar_section(s);
  if (s.size() == 0) return Null{};
  std::vector<double> v = s.values();
  switch (which) {
    case Statistic::Max: return Scalar{*std::max_element(v.begin(), v.end())};
    case Statistic::Min: return Scalar{*std::min_element(v.begin(), v.end())};
    case Statistic::Median: {
      std::sort(v.begin(), v.end());
      const std::size_t n = v.size();
      if (n % 2 == 1) return Scalar{v[n / 2]};
      return Scalar{0.5 * (v[n / 2 - 1] + v[n / 2])};
    }
  }
  return Null{};
}

// ---------------------------------------------------------------------------
// Affine subspace fitting

namespace {

Eigen::MatrixXd as_matrix(const Section& s) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(s.size()), static_cast<Eigen::Index>(s.dim()));
  for (std::size_t k = 0; k < s.size(); ++k) {
    auto row = s.row(k);
    for (std::size_t c = 0; c < s.dim(); ++c) {
      x(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(c)) = row[c];
    }
  }
  return x;
}

void canonicalize_columns(Eigen::MatrixXd& w) {
  for (Eigen::Index c = 0; c < w.cols(); ++c) {
    Eigen::Index arg = 0;
    w.col(c).cwiseAbs().maxCoeff(&arg);
    if (w(arg, c) < 0) w.col(c) = -w.col(c);
  }
}

Eigen::MatrixXd lift(const AffineSubspace& a) {
  const auto r = a.base.size();
  const auto q = a.basis.cols();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(r + 1, q + 1);
  m.topLeftCorner(r, q) = a.basis;
  m.block(0, q, r, 1) = a.base;
  m(r, q) = 1.0;
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
  return qr.householderQ() * Eigen::MatrixXd::Identity(r + 1, q + 1);
}

}  // namespace

AffineSubspace model_graff_fit(const Section& s, std::size_t q) {
  if (q < 1 || s.dim() <= q) {
    throw Error(ErrorCode::DimMismatch, "affine fit needs 1 <= q < r, got q=" + std::to_string(q) +
                                            ", r=" + std::to_string(s.dim()));
  }
  if (s.size() == 0 || s.size() < q) {
    throw Error(ErrorCode::TooFewPoints, "affine fit of dimension " + std::to_string(q) + " on " +
                                             std::to_string(s.size()) + " points");
  }
  const Eigen::MatrixXd x = as_matrix(s);
  const Eigen::VectorXd centroid = x.colwise().mean().transpose();
  const Eigen::MatrixXd centered = x.rowwise() - centroid.transpose();

  Eigen::BDCSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const auto qi = static_cast<Eigen::Index>(q);

  AffineSubspace a;
  a.base = centroid;
  if (svd.matrixV().cols() >= qi) {
    a.basis = svd.matrixV().leftCols(qi);
  } else {
    // Fewer points than directions: complete the basis orthonormally.
    Eigen::MatrixXd seed = Eigen::MatrixXd::Identity(x.cols(), qi);
    seed.leftCols(svd.matrixV().cols()) = svd.matrixV();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(seed);
    a.basis = qr.householderQ() * Eigen::MatrixXd::Identity(x.cols(), qi);
  }
  canonicalize_columns(a.basis);

  const double last_kept = qi - 1 < sv.size() ? sv(qi - 1) : 0.0;
  const double next = qi < sv.size() ? sv(qi) : 0.0;
  a.degenerate = next <= 1e-9 || last_kept - next <= 1e-9;
  return a;
}

double graff_distance(const AffineSubspace& a, const AffineSubspace& b) {
  if (a.base.size() != b.base.size() || a.basis.cols() != b.basis.cols() || a.basis.rows() != a.base.size() ||
      b.basis.rows() != b.base.size()) {
    throw Error(ErrorCode::ShapeMismatch, "affine subspaces of different shapes");
  }
  const Eigen::MatrixXd qa = lift(a);
  const Eigen::MatrixXd qb = lift(b);
  const Eigen::MatrixXd c = qa.transpose() * qb;
  const Eigen::MatrixXd residual = qb - qa * c;

  // Cosines lose precision for small angles, so those come from the sines.
  const Eigen::VectorXd cosines = Eigen::JacobiSVD<Eigen::MatrixXd>(c).singularValues();
  const Eigen::VectorXd sines_desc = Eigen::JacobiSVD<Eigen::MatrixXd>(residual).singularValues();
  const auto k = cosines.size();
  double sum_sq = 0.0;
  for (Eigen::Index i = 0; i < k; ++i) {
    const double cosine = std::min(cosines(i), 1.0);
    const double sine = std::min(sines_desc(k - 1 - i), 1.0);
    const double theta = cosine * cosine >= 0.5 ? std::asin(sine) : std::acos(cosine);
    sum_sq += theta * theta;
  }
  return std::sqrt(sum_sq);
}

double orthogonal_residual(const AffineSubspace& a, const Eigen::MatrixXd& points) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const Eigen::VectorXd d = points.row(i).transpose() - a.base;
    const Eigen::VectorXd off = d - a.basis * (a.basis.transpose() * d);
    total += off.squaredNorm();
  }
  return total;
}

// ---------------------------------------------------------------------------
// Prototype accuracy

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Uniform integer in [0, n) by rejection; std distributions are not
// reproducible across standard libraries.
std::size_t bounded(std::mt19937_64& rng, std::size_t n) {
  const std::uint64_t range = n;
  const std::uint64_t threshold = (0 - range) % range;
  for (;;) {
    const std::uint64_t r = rng();
    if (r >= threshold) return static_cast<std::size_t>(r % range);
  }
}

void draw_support(std::mt19937_64& rng, std::vector<std::size_t>& pool, std::size_t shots) {
  for (std::size_t i = 0; i < shots; ++i) {
    std::swap(pool[i], pool[i + bounded(rng, pool.size() - i)]);
  }
}

}  // namespace

std::uint64_t prototype_stream_seed(std::uint64_t base_seed, const OpenSet& domain) {
  return splitmix64(base_seed ^ splitmix64(domain.stable_hash()));
}

std::variant<PrototypeStats, Undefined> prototype_episodes(const Section& s, const PrototypeParams& p) {
  if (p.shots < 1 || p.trials < 1) {
    throw Error(ErrorCode::InvalidArgument, "prototype shots and trials must be at least 1");
  }
  if (p.labels.size() != s.domain().universe()) {
    throw Error(ErrorCode::InvalidArgument, "prototype labels must cover every ground element");
  }
  const auto members = s.domain().members();
  std::vector<std::size_t> stem;
  std::vector<std::size_t> no_stem;
  for (std::size_t k = 0; k < members.size(); ++k) {
    (p.labels[members[k]] == ClassLabel::s ? stem : no_stem).push_back(k);
  }
  if (stem.size() < p.shots) return Undefined{"class s has fewer than " + std::to_string(p.shots) + " members"};
  if (no_stem.size() < p.shots) {
    return Undefined{"class ns has fewer than " + std::to_string(p.shots) + " members"};
  }
  const std::size_t queries = members.size() - 2 * p.shots;
  if (queries == 0) return Undefined{"no query elements"};

  const std::size_t dim = s.dim();
  std::mt19937_64 rng(prototype_stream_seed(p.seed, s.domain()));
  PrototypeStats stats;
  stats.episodes = p.trials;
  stats.queries_per_episode = queries;
  stats.episode_accuracy.reserve(p.trials);

  std::vector<double> proto_s(dim);
  std::vector<double> proto_ns(dim);
  std::vector<char> is_support(members.size());
  auto prototype = [&](const std::vector<std::size_t>& pool, std::vector<double>& out) {
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t i = 0; i < p.shots; ++i) {
      auto row = s.row(pool[i]);
      for (std::size_t c = 0; c < dim; ++c) out[c] += row[c];
      is_support[pool[i]] = 1;
    }
    for (double& v : out) v /= static_cast<double>(p.shots);
  };
  auto sq_dist = [dim](std::span<const double> x, const std::vector<double>& y) {
    double d = 0.0;
    for (std::size_t c = 0; c < dim; ++c) d += (x[c] - y[c]) * (x[c] - y[c]);
    return d;
  };

  double total = 0.0;
  for (std::size_t t = 0; t < p.trials; ++t) {
    draw_support(rng, stem, p.shots);
    draw_support(rng, no_stem, p.shots);
    std::fill(is_support.begin(), is_support.end(), 0);
    prototype(stem, proto_s);
    prototype(no_stem, proto_ns);

    std::size_t correct = 0;
    for (std::size_t k = 0; k < members.size(); ++k) {
      if (is_support[k]) continue;
      const double ds = sq_dist(s.row(k), proto_s);
      const double dns = sq_dist(s.row(k), proto_ns);
      if (ds == dns) ++stats.ties;
      const ClassLabel predicted = ds <= dns ? ClassLabel::s : ClassLabel::ns;
      if (predicted == p.labels[members[k]]) ++correct;
    }
    const double acc = static_cast<double>(correct) / static_cast<double>(queries);
    stats.episode_accuracy.push_back(acc);
    total += acc;
  }
  stats.accuracy = total / static_cast<double>(p.trials);
  return stats;
}

ModelValue model_prototype_accuracy(const Section& s, const PrototypeParams& p) {
  if (s.size() == 0) return Undefined{"empty domain"};
  auto result = prototype_episodes(s, p);
  if (auto* u = std::get_if<Undefined>(&result)) return *u;
  return UnitScore{std::get<PrototypeStats>(result).accuracy};
}

// ---------------------------------------------------------------------------
// Modeling map, metric, restriction

ModelValue evaluate_model(const ModelPresheafSpec& spec, const Section& s) {
  if (spec.family == ModelFamily::Identity) return s;
  if (s.size() == 0) return Null{};
  switch (spec.family) {
    case ModelFamily::Identity: return s;
    case ModelFamily::Average: return model_average(s);
    case ModelFamily::Statistic: return model_statistic(s, spec.statistic);
    case ModelFamily::Graff:
      if (s.size() < std::max<std::size_t>(spec.q, 1)) {
        return Undefined{"too few points for a " + std::to_string(spec.q) + "-dimensional fit"};
      }
      return model_graff_fit(s, spec.q);
    case ModelFamily::Prototype: return model_prototype_accuracy(s, spec.prototype);
  }
  return Undefined{"unknown model family"};
}

namespace {

struct MetricVisitor {
  const OpenSet& u;

  double operator()(const Null&, const Null&) const { return 0.0; }
  double operator()(const Scalar& a, const Scalar& b) const { return std::abs(a.value - b.value); }
  double operator()(const UnitScore& a, const UnitScore& b) const { return std::abs(a.value - b.value); }
  double operator()(const AffineSubspace& a, const AffineSubspace& b) const { return graff_distance(a, b); }
  double operator()(const Section& a, const Section& b) const {
    if (a.domain() != b.domain() || a.domain() != u || a.dim() != b.dim()) {
      throw Error(ErrorCode::SpaceMismatch, "sections over different domains");
    }
    double d = 0.0;
    for (std::size_t i = 0; i < a.values().size(); ++i) {
      d = std::max(d, std::abs(a.values()[i] - b.values()[i]));
    }
    return d;
  }
  template <typename A, typename B>
  double operator()(const A&, const B&) const {
    throw Error(ErrorCode::SpaceMismatch, "model values from different section spaces");
  }
};

}  // namespace

double metric(const ModelPresheafSpec&, const OpenSet& u, const ModelValue& a, const ModelValue& b) {
  if (is_undefined(a) || is_undefined(b)) {
    throw Error(ErrorCode::UndefinedOperand, "metric applied to an undefined model value");
  }
  return std::visit(MetricVisitor{u}, a, b);
}

ModelValue restrict_model(const ModelPresheafSpec& spec, const OpenSet& u, const OpenSet& v, const ModelValue& m) {
  if (!v.is_subset_of(u)) throw Error(ErrorCode::NotSubset, "model restriction target is not a subset");
  if (spec.family == ModelFamily::Identity) {
    if (const auto* s = std::get_if<Section>(&m)) return restrict(*s, v);
    return m;
  }
  if (v.empty()) return Null{};
  return m;
}

}  // namespace sheafscope
