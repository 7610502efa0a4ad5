#include "sheafscope/ground_topology.hpp"

#include <algorithm>
#include <bit>
#include <deque>
#include <unordered_set>

#include "sheafscope/error.hpp"

namespace sheafscope {

namespace {

constexpr std::size_t kWordBits = 64;

std::size_t word_count(std::size_t universe) { return (universe + kWordBits - 1) / kWordBits; }

}  // namespace

// ---------------------------------------------------------------------------
// GroundSet

GroundSet::GroundSet(std::vector<std::string> labels) : labels_(std::move(labels)) {
  index_.reserve(labels_.size());
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i].empty()) {
      throw Error(ErrorCode::InvalidArgument, "empty element label at position " + std::to_string(i));
    }
    if (!index_.emplace(labels_[i], i).second) {
      throw Error(ErrorCode::InvalidArgument, "duplicate element label '" + labels_[i] + "'");
    }
  }
}

std::optional<std::size_t> GroundSet::index_of(std::string_view label) const {
  auto it = index_.find(std::string(label));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

// ---------------------------------------------------------------------------
// OpenSet

OpenSet::OpenSet(std::size_t universe) : universe_(universe), words_(word_count(universe), 0) {}

OpenSet OpenSet::full(std::size_t universe) {
  OpenSet s(universe);
  for (std::size_t w = 0; w < s.words_.size(); ++w) s.words_[w] = ~std::uint64_t{0};
  if (const std::size_t tail = universe % kWordBits; tail != 0) {
    s.words_.back() = (std::uint64_t{1} << tail) - 1;
  }
  return s;
}

OpenSet OpenSet::of(std::size_t universe, std::initializer_list<std::size_t> members) {
  OpenSet s(universe);
  for (std::size_t m : members) s.set(m);
  return s;
}

bool OpenSet::test(std::size_t i) const {
  if (i >= universe_) return false;
  return (words_[i / kWordBits] >> (i % kWordBits)) & 1U;
}

void OpenSet::set(std::size_t i) {
  if (i >= universe_) {
    throw Error(ErrorCode::InvalidArgument, "bit index " + std::to_string(i) + " outside universe of " +
                                                std::to_string(universe_));
  }
  words_[i / kWordBits] |= std::uint64_t{1} << (i % kWordBits);
}

void OpenSet::reset(std::size_t i) {
  if (i >= universe_) return;
  words_[i / kWordBits] &= ~(std::uint64_t{1} << (i % kWordBits));
}

std::size_t OpenSet::count() const noexcept {
  std::size_t c = 0;
  for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
  return c;
}

bool OpenSet::empty() const noexcept {
  return std::all_of(words_.begin(), words_.end(), [](auto w) { return w == 0; });
}

void OpenSet::check_same_universe(const OpenSet& other) const {
  if (universe_ != other.universe_) {
    throw Error(ErrorCode::ShapeMismatch, "open sets over universes of size " + std::to_string(universe_) +
                                              " and " + std::to_string(other.universe_));
  }
}

bool OpenSet::is_subset_of(const OpenSet& other) const {
  check_same_universe(other);
  for (std::size_t w = 0; w < words_.size(); ++w) {
    if (words_[w] & ~other.words_[w]) return false;
  }
  return true;
}

bool OpenSet::is_proper_subset_of(const OpenSet& other) const {
  return is_subset_of(other) && *this != other;
}

bool OpenSet::intersects(const OpenSet& other) const {
  check_same_universe(other);
  for (std::size_t w = 0; w < words_.size(); ++w) {
    if (words_[w] & other.words_[w]) return true;
  }
  return false;
}

OpenSet OpenSet::operator&(const OpenSet& other) const {
  check_same_universe(other);
  OpenSet r(*this);
  for (std::size_t w = 0; w < words_.size(); ++w) r.words_[w] &= other.words_[w];
  return r;
}

OpenSet OpenSet::operator|(const OpenSet& other) const {
  check_same_universe(other);
  OpenSet r(*this);
  for (std::size_t w = 0; w < words_.size(); ++w) r.words_[w] |= other.words_[w];
  return r;
}

OpenSet OpenSet::operator-(const OpenSet& other) const {
  check_same_universe(other);
  OpenSet r(*this);
  for (std::size_t w = 0; w < words_.size(); ++w) r.words_[w] &= ~other.words_[w];
  return r;
}

std::vector<std::size_t> OpenSet::members() const {
  std::vector<std::size_t> out;
  out.reserve(count());
  for (std::size_t w = 0; w < words_.size(); ++w) {
    auto bits = words_[w];
    while (bits) {
      const auto tz = static_cast<std::size_t>(std::countr_zero(bits));
      out.push_back(w * kWordBits + tz);
      bits &= bits - 1;
    }
  }
  return out;
}

std::size_t OpenSet::rank(std::size_t i) const {
  std::size_t r = 0;
  const std::size_t full_words = std::min(i / kWordBits, words_.size());
  for (std::size_t w = 0; w < full_words; ++w) r += static_cast<std::size_t>(std::popcount(words_[w]));
  if (full_words < words_.size() && i % kWordBits != 0) {
    const auto mask = (std::uint64_t{1} << (i % kWordBits)) - 1;
    r += static_cast<std::size_t>(std::popcount(words_[full_words] & mask));
  }
  return r;
}

std::uint64_t OpenSet::stable_hash() const noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::uint64_t v) {
    for (int b = 0; b < 8; ++b) {
      h ^= (v >> (8 * b)) & 0xffU;
      h *= 0x100000001b3ULL;
    }
  };
  mix(static_cast<std::uint64_t>(universe_));
  for (auto w : words_) mix(w);
  return h;
}

bool OpenSet::canonical_less(const OpenSet& a, const OpenSet& b) {
  const auto ca = a.count();
  const auto cb = b.count();
  if (ca != cb) return ca < cb;
  a.check_same_universe(b);
  // With equal cardinality, the set owning the lowest differing element has
  // the lexicographically smaller member list.
  for (std::size_t w = 0; w < a.words_.size(); ++w) {
    const auto diff = a.words_[w] ^ b.words_[w];
    if (diff) {
      const auto low = diff & (~diff + 1);
      return (a.words_[w] & low) != 0;
    }
  }
  return false;
}

// ---------------------------------------------------------------------------
// Topology

std::size_t Topology::cover_edge_count() const noexcept {
  std::size_t n = 0;
  for (const auto& c : covers_) n += c.size();
  return n;
}

std::optional<std::size_t> Topology::ordinal_of(const OpenSet& s) const {
  auto it = index_.find(s);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t Topology::require_ordinal(const OpenSet& s) const {
  if (s.universe() != ground_.size()) {
    throw Error(ErrorCode::NotOpen, "set is over a different ground set");
  }
  auto ord = ordinal_of(s);
  if (!ord) {
    throw Error(ErrorCode::NotOpen, "set with " + std::to_string(s.count()) + " elements is not open");
  }
  return *ord;
}

std::vector<std::size_t> Topology::parts_of(const OpenSet& s) const {
  std::vector<std::size_t> parts;
  for (std::size_t i = 0; i < subbasis_.size(); ++i) {
    if (!subbasis_[i].set.empty() && subbasis_[i].set.is_subset_of(s)) parts.push_back(i);
  }
  return parts;
}

std::size_t Topology::height() const {
  // Opens are in ascending cardinality, so covers always point to lower ordinals.
  std::vector<std::size_t> longest(opens_.size(), 0);
  for (std::size_t u = 0; u < opens_.size(); ++u) {
    for (auto v : covers_[u]) longest[u] = std::max(longest[u], longest[v] + 1);
  }
  return longest.empty() ? 0 : longest.back();
}

// ---------------------------------------------------------------------------
// Generation

std::vector<SubbasisElement> resolve_subbasis(const GroundSet& ground,
                                              const std::vector<NamedSubset>& subbasis) {
  std::vector<SubbasisElement> out;
  out.reserve(subbasis.size());
  std::unordered_set<std::string> names;
  for (const auto& named : subbasis) {
    if (!names.insert(named.name).second) {
      throw Error(ErrorCode::InvalidArgument, "duplicate subbasis name '" + named.name + "'");
    }
    OpenSet s(ground.size());
    for (const auto& label : named.labels) {
      auto idx = ground.index_of(label);
      if (!idx) {
        throw Error(ErrorCode::SubbasisOutOfRange,
                    "subbasis element '" + named.name + "' references unknown label '" + label + "'");
      }
      s.set(*idx);
    }
    out.push_back({named.name, std::move(s)});
  }
  return out;
}

OpenSet make_open_set(const GroundSet& ground, const std::vector<std::string>& labels) {
  OpenSet s(ground.size());
  for (const auto& label : labels) {
    auto idx = ground.index_of(label);
    if (!idx) throw Error(ErrorCode::InvalidArgument, "unknown label '" + label + "'");
    s.set(*idx);
  }
  return s;
}

std::vector<std::string> sorted_labels(const GroundSet& ground, const OpenSet& s) {
  std::vector<std::string> out;
  for (auto m : s.members()) out.push_back(ground.label(m));
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

using OpenFamily = std::unordered_set<OpenSet, OpenSetHash>;

[[noreturn]] void throw_cap(std::size_t reached, std::size_t cap) {
  throw Error(ErrorCode::CapExceeded, "topology closure reached " + std::to_string(reached) +
                                          " open sets, exceeding the cap of " + std::to_string(cap));
}

bool is_disjoint_cover(const std::vector<SubbasisElement>& subbasis, const OpenSet& full) {
  if (subbasis.empty()) return false;
  OpenSet seen(full.universe());
  for (const auto& e : subbasis) {
    if (e.set.empty() || e.set.intersects(seen)) return false;
    seen = seen | e.set;
  }
  return seen == full;
}

// Covers of `u` are the maximal sets among the interiors of u \ {x}, x in u:
// any proper open V of u misses some x and so lies inside interior(u \ {x}).
std::vector<OpenSet> covers_by_interiors(const OpenSet& u, const std::vector<OpenSet>& basis) {
  std::vector<const OpenSet*> inside;
  for (const auto& b : basis) {
    if (!b.empty() && b.is_subset_of(u)) inside.push_back(&b);
  }
  std::vector<OpenSet> candidates;
  for (auto x : u.members()) {
    OpenSet interior(u.universe());
    for (const auto* b : inside) {
      if (!b->test(x)) interior = interior | *b;
    }
    if (std::find(candidates.begin(), candidates.end(), interior) == candidates.end()) {
      candidates.push_back(std::move(interior));
    }
  }
  std::vector<OpenSet> maximal;
  for (const auto& c : candidates) {
    bool dominated = std::any_of(candidates.begin(), candidates.end(),
                                 [&](const OpenSet& o) { return c.is_proper_subset_of(o); });
    if (!dominated) maximal.push_back(c);
  }
  return maximal;
}

}  // namespace

Topology generate_topology(const GroundSet& ground, std::vector<SubbasisElement> subbasis,
                           std::size_t cap) {
  if (cap < 2) throw Error(ErrorCode::InvalidArgument, "open-set cap must be at least 2");
  const std::size_t n = ground.size();
  for (const auto& e : subbasis) {
    if (e.set.universe() != n) {
      throw Error(ErrorCode::SubbasisOutOfRange, "subbasis element '" + e.name + "' has the wrong universe");
    }
  }

  Topology t;
  t.ground_ = ground;
  const OpenSet full = OpenSet::full(n);
  const OpenSet none(n);
  t.disjoint_cover_ = is_disjoint_cover(subbasis, full);

  std::vector<OpenSet> basis;
  std::vector<OpenSet> opens;

  if (t.disjoint_cover_) {
    // Every open is a union of parts; no intersection pass needed.
    const std::size_t k = subbasis.size();
    if (k >= 63 || (std::size_t{1} << k) > cap) {
      throw_cap(k >= 63 ? cap + 1 : (std::size_t{1} << k), cap);
    }
    for (const auto& e : subbasis) basis.push_back(e.set);
    opens.reserve(std::size_t{1} << k);
    for (std::size_t mask = 0; mask < (std::size_t{1} << k); ++mask) {
      OpenSet u(n);
      for (std::size_t p = 0; p < k; ++p) {
        if (mask >> p & 1U) u = u | subbasis[p].set;
      }
      opens.push_back(std::move(u));
    }
  } else {
    // Finite intersections of subbasis elements, with the whole set as the
    // empty intersection.
    OpenFamily inter{full};
    std::deque<OpenSet> work{full};
    for (const auto& e : subbasis) {
      if (inter.insert(e.set).second) work.push_back(e.set);
    }
    if (inter.size() > cap) throw_cap(inter.size(), cap);
    while (!work.empty()) {
      OpenSet x = std::move(work.front());
      work.pop_front();
      for (const auto& e : subbasis) {
        OpenSet y = x & e.set;
        if (inter.insert(y).second) {
          if (inter.size() > cap) throw_cap(inter.size(), cap);
          work.push_back(std::move(y));
        }
      }
    }
    basis.assign(inter.begin(), inter.end());
    std::sort(basis.begin(), basis.end(), OpenSet::canonical_less);

    // Arbitrary unions of basis sets, with the empty set as the empty union.
    OpenFamily family(basis.begin(), basis.end());
    family.insert(none);
    if (family.size() > cap) throw_cap(family.size(), cap);
    std::deque<OpenSet> pending(family.begin(), family.end());
    while (!pending.empty()) {
      OpenSet x = std::move(pending.front());
      pending.pop_front();
      for (const auto& b : basis) {
        if (b.is_subset_of(x)) continue;
        OpenSet y = x | b;
        if (family.insert(y).second) {
          if (family.size() > cap) throw_cap(family.size(), cap);
          pending.push_back(std::move(y));
        }
      }
    }
    opens.assign(family.begin(), family.end());
  }

  std::sort(opens.begin(), opens.end(), OpenSet::canonical_less);
  t.opens_ = std::move(opens);
  t.index_.reserve(t.opens_.size());
  for (std::size_t i = 0; i < t.opens_.size(); ++i) t.index_.emplace(t.opens_[i], i);

  t.covers_.resize(t.opens_.size());
  for (std::size_t i = 0; i < t.opens_.size(); ++i) {
    const OpenSet& u = t.opens_[i];
    auto& out = t.covers_[i];
    if (t.disjoint_cover_) {
      for (const auto& e : subbasis) {
        if (e.set.is_subset_of(u)) out.push_back(t.index_.at(u - e.set));
      }
    } else {
      for (const auto& c : covers_by_interiors(u, basis)) out.push_back(t.index_.at(c));
    }
    std::sort(out.begin(), out.end());
  }

  t.subbasis_ = std::move(subbasis);
  return t;
}

Topology generate_topology(const GroundSet& ground, const std::vector<NamedSubset>& subbasis,
                           std::size_t cap) {
  return generate_topology(ground, resolve_subbasis(ground, subbasis), cap);
}

// ---------------------------------------------------------------------------
// Lattice queries

OpenSet meet(const Topology& topology, const OpenSet& u, const OpenSet& v) {
  topology.require_ordinal(u);
  topology.require_ordinal(v);
  return u & v;
}

OpenSet join(const Topology& topology, const OpenSet& u, const OpenSet& v) {
  topology.require_ordinal(u);
  topology.require_ordinal(v);
  return u | v;
}

std::vector<std::size_t> order_ideal(const Topology& topology, const OpenSet& u) {
  const std::size_t root = topology.require_ordinal(u);
  std::vector<std::size_t> out;
  // Subsets of u have cardinality <= |u|, so they all precede it canonically.
  for (std::size_t i = 0; i <= root; ++i) {
    if (topology.at(i).is_subset_of(u)) out.push_back(i);
  }
  return out;
}

std::optional<std::size_t> IdealFiltration::level_of(std::size_t ordinal) const {
  auto it = std::lower_bound(members.begin(), members.end(), ordinal);
  if (it == members.end() || *it != ordinal) return std::nullopt;
  return levels[static_cast<std::size_t>(it - members.begin())];
}

std::vector<std::size_t> IdealFiltration::up_to(std::size_t j) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < members.size(); ++i) {
    if (levels[i] <= j) out.push_back(members[i]);
  }
  return out;
}

IdealFiltration filtration(const Topology& topology, const OpenSet& u) {
  const std::size_t root = topology.require_ordinal(u);
  // Covers of a member of the ideal stay inside the ideal, so plain BFS over
  // the global cover relation visits exactly the ideal.
  std::unordered_map<std::size_t, std::size_t> depth{{root, 0}};
  std::deque<std::size_t> queue{root};
  while (!queue.empty()) {
    const auto cur = queue.front();
    queue.pop_front();
    for (auto v : topology.covers(cur)) {
      if (depth.emplace(v, depth[cur] + 1).second) queue.push_back(v);
    }
  }
  IdealFiltration f;
  f.root = root;
  f.members.reserve(depth.size());
  for (const auto& [ord, lvl] : depth) f.members.push_back(ord);
  std::sort(f.members.begin(), f.members.end());
  f.levels.reserve(f.members.size());
  for (auto m : f.members) {
    f.levels.push_back(depth[m]);
    f.max_level = std::max(f.max_level, depth[m]);
  }
  return f;
}

std::vector<std::size_t> lambda_j(const Topology& topology, const OpenSet& u, std::size_t j) {
  return filtration(topology, u).up_to(j);
}

}  // namespace sheafscope
