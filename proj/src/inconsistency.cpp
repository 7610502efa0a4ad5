#include "sheafscope/inconsistency.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "parallel.hpp"
#include "sheafscope/error.hpp"

namespace sheafscope {

ModelCache::ModelCache(const Topology& topology, const ModelPresheafSpec& spec, const Assignment& assignment)
    : topology_(topology),
      spec_(spec),
      assignment_(assignment),
      values_(topology.size()),
      once_(std::make_unique<std::once_flag[]>(topology.size())) {
  if (assignment.size() != topology.size()) {
    throw Error(ErrorCode::DomainMismatch, "assignment does not match the topology");
  }
}

const ModelValue& ModelCache::get(std::size_t ordinal) const {
  if (ordinal >= values_.size()) throw Error(ErrorCode::NotOpen, "open-set ordinal out of range");
  std::call_once(once_[ordinal], [&] { values_[ordinal] = evaluate_model(spec_, assignment_.section(ordinal)); });
  return values_[ordinal];
}

// ---------------------------------------------------------------------------
// Local, filtered and global values

LocalResult max_gap(const ModelCache& cache, std::size_t root, const std::vector<std::size_t>& candidates) {
  const Topology& t = cache.topology();
  LocalResult out;
  const ModelValue& at_root = cache.get(root);
  if (const auto* u = std::get_if<Undefined>(&at_root)) {
    out.defined = false;
    out.skipped.push_back({root, u->reason});
    return out;
  }
  for (auto v : candidates) {
    const ModelValue& at_v = cache.get(v);
    if (const auto* u = std::get_if<Undefined>(&at_v)) {
      out.skipped.push_back({v, u->reason});
      continue;
    }
    const ModelValue restricted = restrict_model(cache.spec(), t.at(root), t.at(v), at_root);
    const double gap = metric(cache.spec(), t.at(v), restricted, at_v);
    if (!out.witness || gap > out.value) {
      out.value = gap;
      out.witness = v;
    }
  }
  return out;
}

LocalResult local_inconsistency(const ModelCache& cache, std::size_t root) {
  return max_gap(cache, root, order_ideal(cache.topology(), cache.topology().at(root)));
}

LocalResult local_inconsistency(const Topology& topology, const ModelPresheafSpec& spec, const Assignment& a,
                                const OpenSet& u) {
  const std::size_t root = topology.require_ordinal(u);
  ModelCache cache(topology, spec, a);
  return local_inconsistency(cache, root);
}

LocalResult filtered_inconsistency(const ModelCache& cache, std::size_t root, std::size_t j) {
  return max_gap(cache, root, lambda_j(cache.topology(), cache.topology().at(root), j));
}

LocalResult filtered_inconsistency(const Topology& topology, const ModelPresheafSpec& spec, const Assignment& a,
                                   const OpenSet& u, std::size_t j) {
  const std::size_t root = topology.require_ordinal(u);
  ModelCache cache(topology, spec, a);
  return filtered_inconsistency(cache, root, j);
}

namespace {

GlobalResult fold_global(const std::vector<LocalResult>& locals) {
  GlobalResult g;
  for (std::size_t u = 0; u < locals.size(); ++u) {
    if (!locals[u].defined) continue;
    if (!g.at || locals[u].value > g.value) {
      g.value = locals[u].value;
      g.at = u;
    }
  }
  return g;
}

}  // namespace

GlobalResult global_inconsistency(const ModelCache& cache, std::size_t threads) {
  std::vector<LocalResult> locals(cache.topology().size());
  detail::parallel_for(locals.size(), threads, [&](std::size_t u) { locals[u] = local_inconsistency(cache, u); });
  return fold_global(locals);
}

GlobalResult global_inconsistency(const Topology& topology, const ModelPresheafSpec& spec, const Assignment& a) {
  ModelCache cache(topology, spec, a);
  return global_inconsistency(cache);
}

// ---------------------------------------------------------------------------
// Attribution

namespace {

struct AttributionStep {
  bool eligible = false;
  std::optional<std::size_t> part;
};

AttributionStep attribution_step(const ModelCache& cache, std::size_t u) {
  const Topology& t = cache.topology();
  AttributionStep step;
  if (t.parts_of(t.at(u)).size() < 2) return step;
  step.eligible = true;
  // Level one of the filtration, minus U itself, is exactly the cover set.
  const LocalResult r = max_gap(cache, u, t.covers(u));
  if (!r.defined || !r.witness) return step;
  const OpenSet removed = t.at(u) - t.at(*r.witness);
  const auto& sb = t.subbasis();
  for (std::size_t p = 0; p < sb.size(); ++p) {
    if (sb[p].set == removed) {
      step.part = p;
      break;
    }
  }
  return step;
}

}  // namespace

AttributionResult attribution_tally(const ModelCache& cache, std::size_t threads) {
  const Topology& t = cache.topology();
  if (!t.is_disjoint_cover()) {
    throw Error(ErrorCode::NotDisjointCover,
                "attribution needs nonempty, pairwise disjoint subbasis elements covering the ground set");
  }
  std::vector<AttributionStep> steps(t.size());
  detail::parallel_for(t.size(), threads, [&](std::size_t u) { steps[u] = attribution_step(cache, u); });

  AttributionResult out;
  out.counts.assign(t.subbasis().size(), 0);
  for (std::size_t u = 0; u < steps.size(); ++u) {
    if (!steps[u].eligible) continue;
    if (steps[u].part) {
      ++out.counts[*steps[u].part];
      out.contributing.push_back(u);
    } else {
      out.skipped.push_back(u);
    }
  }
  return out;
}

AttributionResult attribution_tally(const Topology& topology, const ModelPresheafSpec& spec, const Assignment& a) {
  ModelCache cache(topology, spec, a);
  return attribution_tally(cache);
}

// ---------------------------------------------------------------------------
// Presheaf-morphism checks

namespace {

struct PairGap {
  std::size_t outer = 0;
  std::size_t inner = 0;
  double gap = 0.0;
};

// Largest commutativity gap over all cover pairs of a consistent assignment.
std::optional<PairGap> worst_cover_gap(const ModelCache& cache) {
  const Topology& t = cache.topology();
  std::optional<PairGap> worst;
  for (std::size_t u = 0; u < t.size(); ++u) {
    const LocalResult r = max_gap(cache, u, t.covers(u));
    if (!r.defined || !r.witness) continue;
    if (!worst || r.value > worst->gap) worst = PairGap{u, *r.witness, r.value};
  }
  return worst;
}

Section gaussian_section(std::mt19937_64& rng, const OpenSet& domain, std::size_t dim) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> values(domain.count() * dim);
  for (double& v : values) v = normal(rng);
  return Section(domain, dim, std::move(values));
}

}  // namespace

MorphismCheck check_morphism(const Topology& topology, const ModelPresheafSpec& spec,
                             const MorphismCheckOptions& options) {
  const std::size_t n = topology.ground().size();
  std::mt19937_64 rng(options.seed);
  MorphismCheck out;

  auto test_sample = [&](std::size_t index, const Section& global) {
    const Assignment a = assignment_from_global(topology, global);
    ModelCache cache(topology, spec, a);
    ++out.samples_checked;
    auto worst = worst_cover_gap(cache);
    if (worst && worst->gap > options.tol) {
      out.counterexample_found = true;
      out.counterexample = MorphismCounterexample{index, worst->outer, worst->inner, worst->gap, global};
      return true;
    }
    return false;
  };

  std::size_t index = 0;
  for (const auto& s : options.samples) {
    if (test_sample(index++, s)) return out;
  }
  const OpenSet full = OpenSet::full(n);
  for (std::size_t trial = 0; trial < options.trials; ++trial) {
    Section global;
    if (trial % 2 == 1 && topology.size() > 1) {
      // A section over a proper open, extended by a constant fill.
      const std::size_t w = static_cast<std::size_t>(rng() % (topology.size() - 1));
      const Section local = gaussian_section(rng, topology.at(w), options.dim);
      std::normal_distribution<double> normal(0.0, 1.0);
      std::vector<double> fill(options.dim);
      for (double& y : fill) y = normal(rng);
      global = extend_to_global(local, topology, fill);
    } else {
      global = gaussian_section(rng, full, options.dim);
    }
    if (test_sample(index++, global)) return out;
  }
  return out;
}

ExhaustiveMorphismCheck check_morphism_exhaustive(const Topology& topology, const ModelPresheafSpec& spec,
                                                  const std::vector<double>& grid, double tol) {
  if (grid.empty()) throw Error(ErrorCode::InvalidArgument, "value grid must not be empty");
  const std::size_t n = topology.ground().size();
  ExhaustiveMorphismCheck out;
  std::vector<std::size_t> digits(n, 0);
  const OpenSet full = OpenSet::full(n);
  for (;;) {
    std::vector<double> values(n);
    for (std::size_t i = 0; i < n; ++i) values[i] = grid[digits[i]];
    const Assignment a = assignment_from_global(topology, Section(full, 1, std::move(values)));
    ModelCache cache(topology, spec, a);
    ++out.sections_checked;
    for (std::size_t u = 0; u < topology.size(); ++u) {
      const LocalResult r = local_inconsistency(cache, u);
      if (r.defined && r.value > tol) out.zero_inconsistency = false;
    }
    if (auto worst = worst_cover_gap(cache); worst && worst->gap > tol) out.cover_commutes = false;

    std::size_t pos = 0;
    while (pos < n && ++digits[pos] == grid.size()) digits[pos++] = 0;
    if (pos == n) break;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Full analysis

InconsistencyReport analyze(const Topology& topology, const ModelPresheafSpec& spec, const Assignment& a,
                            const AnalyzeOptions& options) {
  ModelCache cache(topology, spec, a);
  InconsistencyReport report;
  report.opens.resize(topology.size());
  detail::parallel_for(topology.size(), options.threads, [&](std::size_t u) {
    OpenReport& r = report.opens[u];
    r.open = u;
    r.model = cache.get(u);
    r.local = local_inconsistency(cache, u);
    if (!options.filter_levels.empty()) {
      const IdealFiltration f = filtration(topology, topology.at(u));
      for (auto j : options.filter_levels) r.filtered.emplace(j, max_gap(cache, u, f.up_to(j)));
    }
  });

  std::vector<LocalResult> locals;
  locals.reserve(report.opens.size());
  for (const auto& r : report.opens) locals.push_back(r.local);
  report.global = fold_global(locals);

  if (options.attribution && topology.is_disjoint_cover()) {
    report.attribution = attribution_tally(cache, options.threads);
  }
  return report;
}

}  // namespace sheafscope
