#pragma once

// Shared fixtures and brute-force oracles. The oracles work on plain
// std::set<std::set<int>> families and do not touch the library's bitset or
// cover machinery.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "sheafscope/ground_topology.hpp"
#include "sheafscope/sheaf_core.hpp"

namespace sheafscope::testing {

using NaiveSet = std::set<int>;
using NaiveFamily = std::set<NaiveSet>;

inline GroundSet letters(std::size_t n) {
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < n; ++i) labels.emplace_back(1, static_cast<char>('a' + i));
  return GroundSet(std::move(labels));
}

/// The researcher-publication toy: I = {a..f}, U1 = {a,b,c,d}, U2 = {c,d,e,f}.
inline Topology toy_topology() {
  return generate_topology(letters(6), std::vector<NamedSubset>{{"U1", {"a", "b", "c", "d"}},
                                                                {"U2", {"c", "d", "e", "f"}}});
}

/// Publication counts a..f.
inline Section toy_data() {
  return Section(OpenSet::full(6), 1, {5, 6, 8, 7, 4, 5});
}

/// Subbasis {a,b}, {a,c}, {a,d} over {a,b,c,d}.
inline Topology lattice_topology() {
  return generate_topology(letters(4), std::vector<NamedSubset>{{"ab", {"a", "b"}}, {"ac", {"a", "c"}},
                                                                {"ad", {"a", "d"}}});
}

inline OpenSet set_of(const Topology& t, const std::vector<std::string>& labels) {
  return make_open_set(t.ground(), labels);
}

inline NaiveSet to_naive(const OpenSet& s) {
  NaiveSet out;
  for (auto m : s.members()) out.insert(static_cast<int>(m));
  return out;
}

inline NaiveFamily to_naive(const Topology& t) {
  NaiveFamily f;
  for (const auto& u : t.opens()) f.insert(to_naive(u));
  return f;
}

/// Pairwise intersections and unions of subbasis + {empty, whole} to a fixpoint.
inline NaiveFamily brute_force_closure(int n, const std::vector<NaiveSet>& subbasis) {
  NaiveFamily family(subbasis.begin(), subbasis.end());
  NaiveSet whole;
  for (int i = 0; i < n; ++i) whole.insert(i);
  family.insert(whole);
  family.insert(NaiveSet{});
  for (bool grew = true; grew;) {
    grew = false;
    const std::vector<NaiveSet> snapshot(family.begin(), family.end());
    for (const auto& a : snapshot) {
      for (const auto& b : snapshot) {
        NaiveSet meet;
        NaiveSet join = a;
        std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::inserter(meet, meet.end()));
        join.insert(b.begin(), b.end());
        grew |= family.insert(meet).second;
        grew |= family.insert(join).second;
      }
    }
  }
  return family;
}

inline bool naive_subset(const NaiveSet& a, const NaiveSet& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

/// Cover relation by definition: V < U with nothing strictly between.
inline std::map<NaiveSet, std::vector<NaiveSet>> naive_covers(const NaiveFamily& family) {
  std::map<NaiveSet, std::vector<NaiveSet>> covers;
  for (const auto& u : family) {
    auto& out = covers[u];
    for (const auto& v : family) {
      if (v == u || !naive_subset(v, u)) continue;
      bool between = false;
      for (const auto& w : family) {
        if (w != u && w != v && naive_subset(v, w) && naive_subset(w, u)) {
          between = true;
          break;
        }
      }
      if (!between) out.push_back(v);
    }
  }
  return covers;
}

/// Shortest length of any cover chain from `root` down to each member of its
/// ideal, found by enumerating every chain depth-first.
inline std::map<NaiveSet, std::size_t> chain_enumeration_levels(const NaiveFamily& family, const NaiveSet& root) {
  const auto covers = naive_covers(family);
  std::map<NaiveSet, std::size_t> best;
  std::vector<std::pair<NaiveSet, std::size_t>> stack{{root, 0}};
  while (!stack.empty()) {
    auto [cur, depth] = stack.back();
    stack.pop_back();
    auto it = best.find(cur);
    if (it == best.end() || depth < it->second) best[cur] = depth;
    for (const auto& v : covers.at(cur)) stack.emplace_back(v, depth + 1);
  }
  return best;
}

// Direct evaluation of max over opens V inside U of |mean(U) - mean(V)|,
// skipping the empty set (Null vs Null contributes 0).
inline double oracle_average_incon(const NaiveFamily& family, const NaiveSet& u, const std::vector<double>& data) {
  auto mean = [&](const NaiveSet& s) {
    double sum = 0;
    for (int i : s) sum += data[static_cast<std::size_t>(i)];
    return sum / static_cast<double>(s.size());
  };
  double best = 0;
  if (u.empty()) return 0;
  for (const auto& v : family) {
    if (v.empty() || !naive_subset(v, u)) continue;
    best = std::max(best, std::abs(mean(u) - mean(v)));
  }
  return best;
}

struct RandomInstance {
  int n = 0;
  std::vector<NaiveSet> subbasis;
  GroundSet ground;
  std::vector<NamedSubset> named;
};

inline RandomInstance random_instance(std::mt19937_64& rng, int max_n, int max_k) {
  RandomInstance inst;
  inst.n = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(max_n));
  const int k = static_cast<int>(rng() % static_cast<std::uint64_t>(max_k + 1));
  inst.ground = letters(static_cast<std::size_t>(inst.n));
  for (int p = 0; p < k; ++p) {
    NaiveSet s;
    NamedSubset named{"S" + std::to_string(p), {}};
    for (int i = 0; i < inst.n; ++i) {
      if (rng() % 2) {
        s.insert(i);
        named.labels.push_back(inst.ground.label(static_cast<std::size_t>(i)));
      }
    }
    inst.subbasis.push_back(s);
    inst.named.push_back(std::move(named));
  }
  return inst;
}

inline Section random_global(std::mt19937_64& rng, std::size_t n, std::size_t dim) {
  std::normal_distribution<double> normal(0.0, 3.0);
  std::vector<double> v(n * dim);
  for (double& x : v) x = normal(rng);
  return Section(OpenSet::full(n), dim, std::move(v));
}

/// Definition-level consistency: every pair V subset of U, not just covers.
inline bool all_pairs_consistent(const Topology& t, const Assignment& a) {
  for (std::size_t u = 0; u < t.size(); ++u) {
    for (std::size_t v = 0; v < t.size(); ++v) {
      if (!t.at(v).is_subset_of(t.at(u))) continue;
      for (auto m : t.at(v).members()) {
        auto x = a.section(u).at(m);
        auto y = a.section(v).at(m);
        if (!std::equal(x.begin(), x.end(), y.begin())) return false;
      }
    }
  }
  return true;
}

}  // namespace sheafscope::testing
