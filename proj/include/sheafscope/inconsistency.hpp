#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "sheafscope/ground_topology.hpp"
#include "sheafscope/model_library.hpp"
#include "sheafscope/sheaf_core.hpp"

namespace sheafscope {

/// Lazily evaluated modeling map over every open set of an assignment. Each
/// entry is computed once; concurrent readers are safe.
class ModelCache {
 public:
  ModelCache(const Topology& topology, const ModelPresheafSpec& spec, const Assignment& assignment);

  const ModelValue& get(std::size_t ordinal) const;

  const Topology& topology() const noexcept { return topology_; }
  const ModelPresheafSpec& spec() const noexcept { return spec_; }
  const Assignment& assignment() const noexcept { return assignment_; }

 private:
  const Topology& topology_;
  const ModelPresheafSpec& spec_;
  const Assignment& assignment_;
  mutable std::vector<ModelValue> values_;
  mutable std::unique_ptr<std::once_flag[]> once_;
};

struct SkippedSet {
  std::size_t open = 0;
  std::string reason;
};

struct LocalResult {
  /// False when the model on the root set itself is undefined.
  bool defined = true;
  double value = 0.0;
  std::optional<std::size_t> witness;
  std::vector<SkippedSet> skipped;
};

/// max over the given candidates V of d_V(res_{U,V} Phi_U(a_U), Phi_V(a_V)).
/// Candidates must be in canonical order; ties keep the first.
LocalResult max_gap(const ModelCache& cache, std::size_t root, const std::vector<std::size_t>& candidates);

LocalResult local_inconsistency(const ModelCache& cache, std::size_t root);
LocalResult local_inconsistency(const Topology& topology, const ModelPresheafSpec& spec, const Assignment& a,
                                const OpenSet& u);

LocalResult filtered_inconsistency(const ModelCache& cache, std::size_t root, std::size_t j);
LocalResult filtered_inconsistency(const Topology& topology, const ModelPresheafSpec& spec, const Assignment& a,
                                   const OpenSet& u, std::size_t j);

struct GlobalResult {
  double value = 0.0;
  std::optional<std::size_t> at;
};

GlobalResult global_inconsistency(const ModelCache& cache, std::size_t threads = 1);
GlobalResult global_inconsistency(const Topology& topology, const ModelPresheafSpec& spec, const Assignment& a);

struct AttributionResult {
  /// Count per subbasis element, in subbasis order.
  std::vector<std::size_t> counts;
  /// Opens with at least two parts that produced an increment.
  std::vector<std::size_t> contributing;
  /// Opens with at least two parts whose candidates were all undefined.
  std::vector<std::size_t> skipped;
};

/// For every open U made of at least two parts, finds the remove-one-part
/// neighbour V with the largest gap and credits the removed part U \ V.
/// Requires a subbasis of pairwise disjoint parts covering the ground set.
AttributionResult attribution_tally(const ModelCache& cache, std::size_t threads = 1);
AttributionResult attribution_tally(const Topology& topology, const ModelPresheafSpec& spec, const Assignment& a);

struct MorphismCounterexample {
  std::size_t sample = 0;
  std::size_t outer = 0;
  std::size_t inner = 0;
  double gap = 0.0;
  Section global;
};

struct MorphismCheck {
  bool counterexample_found = false;
  std::optional<MorphismCounterexample> counterexample;
  std::size_t samples_checked = 0;
};

struct MorphismCheckOptions {
  std::size_t trials = 100;
  std::uint64_t seed = 0;
  std::size_t dim = 1;
  double tol = 1e-12;
  /// Global sections tested before the random ones.
  std::vector<Section> samples;
};

/// Searches for a cover pair (U, V) and a global section f with
/// res(Phi_U(f_U)) != Phi_V(f_V). Random samples alternate between plain
/// Gaussian global sections and sections of a random proper open extended
/// to the whole set with a random fill. The reported pair is the largest gap
/// of the first failing sample.
MorphismCheck check_morphism(const Topology& topology, const ModelPresheafSpec& spec,
                             const MorphismCheckOptions& options);

struct ExhaustiveMorphismCheck {
  /// Every consistent assignment from the grid has zero local inconsistency everywhere.
  bool zero_inconsistency = true;
  /// Every grid section commutes on every cover pair.
  bool cover_commutes = true;
  std::size_t sections_checked = 0;
};

/// Enumerates every global section with values drawn from `grid` (dim 1).
ExhaustiveMorphismCheck check_morphism_exhaustive(const Topology& topology, const ModelPresheafSpec& spec,
                                                  const std::vector<double>& grid, double tol = 1e-12);

struct OpenReport {
  std::size_t open = 0;
  ModelValue model;
  LocalResult local;
  std::map<std::size_t, LocalResult> filtered;
};

struct InconsistencyReport {
  std::vector<OpenReport> opens;
  GlobalResult global;
  std::optional<AttributionResult> attribution;
};

struct AnalyzeOptions {
  std::vector<std::size_t> filter_levels{1};
  /// 0 picks the hardware concurrency.
  std::size_t threads = 1;
  /// Attribution is computed when the subbasis is a disjoint cover.
  bool attribution = true;
};

InconsistencyReport analyze(const Topology& topology, const ModelPresheafSpec& spec, const Assignment& a,
                            const AnalyzeOptions& options = {});

}  // namespace sheafscope
