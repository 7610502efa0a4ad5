#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace sheafscope {

/// Ordered, duplicate-free element labels. The index of a label is its
/// position in the sequence.
class GroundSet {
 public:
  GroundSet() = default;
  explicit GroundSet(std::vector<std::string> labels);

  std::size_t size() const noexcept { return labels_.size(); }
  const std::string& label(std::size_t index) const { return labels_.at(index); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  std::optional<std::size_t> index_of(std::string_view label) const;

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Subset of a ground set of fixed size, stored as a packed bit vector.
class OpenSet {
 public:
  OpenSet() = default;
  explicit OpenSet(std::size_t universe);

  static OpenSet full(std::size_t universe);
  static OpenSet of(std::size_t universe, std::initializer_list<std::size_t> members);

  std::size_t universe() const noexcept { return universe_; }
  bool test(std::size_t i) const;
  void set(std::size_t i);
  void reset(std::size_t i);

  std::size_t count() const noexcept;
  bool empty() const noexcept;
  bool is_subset_of(const OpenSet& other) const;
  bool is_proper_subset_of(const OpenSet& other) const;
  bool intersects(const OpenSet& other) const;

  OpenSet operator&(const OpenSet& other) const;
  OpenSet operator|(const OpenSet& other) const;
  /// Set difference.
  OpenSet operator-(const OpenSet& other) const;

  /// Members in ascending order.
  std::vector<std::size_t> members() const;
  /// Number of members strictly below `i`; the row of `i` in dense storage.
  std::size_t rank(std::size_t i) const;

  /// FNV-1a over the universe size and packed words. Stable across runs and
  /// platforms, so it can seed per-set random streams.
  std::uint64_t stable_hash() const noexcept;

  friend bool operator==(const OpenSet& a, const OpenSet& b) = default;

  /// Canonical order: ascending cardinality, then lexicographic order of the
  /// ascending member lists.
  static bool canonical_less(const OpenSet& a, const OpenSet& b);

 private:
  void check_same_universe(const OpenSet& other) const;

  std::size_t universe_ = 0;
  std::vector<std::uint64_t> words_;
};

struct OpenSetHash {
  std::size_t operator()(const OpenSet& s) const noexcept {
    return static_cast<std::size_t>(s.stable_hash());
  }
};

struct NamedSubset {
  std::string name;
  std::vector<std::string> labels;
};

struct SubbasisElement {
  std::string name;
  OpenSet set;
};

inline constexpr std::size_t kDefaultOpenCap = 1'000'000;

/// Finite topology generated by a subbasis. Immutable once built; opens are
/// held in canonical order so ordinal 0 is the empty set and the last ordinal
/// is the whole ground set.
class Topology {
 public:
  const GroundSet& ground() const noexcept { return ground_; }
  const std::vector<OpenSet>& opens() const noexcept { return opens_; }
  std::size_t size() const noexcept { return opens_.size(); }
  const OpenSet& at(std::size_t ordinal) const { return opens_.at(ordinal); }

  std::size_t empty_ordinal() const noexcept { return 0; }
  std::size_t full_ordinal() const noexcept { return opens_.size() - 1; }

  const std::vector<SubbasisElement>& subbasis() const noexcept { return subbasis_; }

  /// Maximal proper open subsets of the open with this ordinal, ascending.
  const std::vector<std::size_t>& covers(std::size_t ordinal) const { return covers_.at(ordinal); }
  std::size_t cover_edge_count() const noexcept;

  std::optional<std::size_t> ordinal_of(const OpenSet& s) const;
  /// Throws NotOpen when `s` is not a member.
  std::size_t require_ordinal(const OpenSet& s) const;
  bool contains(const OpenSet& s) const { return index_.count(s) != 0; }

  /// True when the subbasis elements are nonempty, pairwise disjoint and
  /// cover the ground set.
  bool is_disjoint_cover() const noexcept { return disjoint_cover_; }
  /// Indices of the subbasis elements contained in `s`, ascending.
  std::vector<std::size_t> parts_of(const OpenSet& s) const;

  /// Length of the longest cover chain from the ground set down to the empty set.
  std::size_t height() const;

 private:
  friend Topology generate_topology(const GroundSet&, std::vector<SubbasisElement>, std::size_t);

  GroundSet ground_;
  std::vector<OpenSet> opens_;
  std::vector<SubbasisElement> subbasis_;
  std::vector<std::vector<std::size_t>> covers_;
  std::unordered_map<OpenSet, std::size_t, OpenSetHash> index_;
  bool disjoint_cover_ = false;
};

/// Resolves labels against the ground set; unknown labels raise
/// SubbasisOutOfRange, repeated names raise InvalidArgument.
std::vector<SubbasisElement> resolve_subbasis(const GroundSet& ground,
                                              const std::vector<NamedSubset>& subbasis);

OpenSet make_open_set(const GroundSet& ground, const std::vector<std::string>& labels);
/// Labels of the members, sorted lexicographically.
std::vector<std::string> sorted_labels(const GroundSet& ground, const OpenSet& s);

Topology generate_topology(const GroundSet& ground, std::vector<SubbasisElement> subbasis,
                           std::size_t cap = kDefaultOpenCap);
Topology generate_topology(const GroundSet& ground, const std::vector<NamedSubset>& subbasis,
                           std::size_t cap = kDefaultOpenCap);

OpenSet meet(const Topology& topology, const OpenSet& u, const OpenSet& v);
OpenSet join(const Topology& topology, const OpenSet& u, const OpenSet& v);

/// Ordinals of all opens contained in `u`, in canonical order.
std::vector<std::size_t> order_ideal(const Topology& topology, const OpenSet& u);

/// Order ideal of a root open set, graded by minimum cover distance from the root.
struct IdealFiltration {
  std::size_t root = 0;
  /// Members of the ideal in canonical order, with their levels alongside.
  std::vector<std::size_t> members;
  std::vector<std::size_t> levels;
  std::size_t max_level = 0;

  std::optional<std::size_t> level_of(std::size_t ordinal) const;
  /// Members with level <= j, in canonical order.
  std::vector<std::size_t> up_to(std::size_t j) const;
};

IdealFiltration filtration(const Topology& topology, const OpenSet& u);
std::vector<std::size_t> lambda_j(const Topology& topology, const OpenSet& u, std::size_t j);

}  // namespace sheafscope
