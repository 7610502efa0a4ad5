#include <doctest.h>

#include <random>

#include "sheafscope/error.hpp"
#include "sheafscope/ground_topology.hpp"
#include "support.hpp"

using namespace sheafscope;
using namespace sheafscope::testing;

TEST_CASE("ground set rejects duplicate and empty labels") {
  CHECK_THROWS_AS(GroundSet({"a", "b", "a"}), Error);
  CHECK_THROWS_AS(GroundSet({"a", ""}), Error);
  GroundSet g({"x", "y", "z"});
  CHECK(g.index_of("z") == 2);
  CHECK_FALSE(g.index_of("w"));
}

TEST_CASE("open set bit operations span several words") {
  OpenSet a(130);
  OpenSet b(130);
  a.set(0);
  a.set(64);
  a.set(129);
  b.set(64);
  CHECK(a.count() == 3);
  CHECK(b.is_subset_of(a));
  CHECK(b.is_proper_subset_of(a));
  CHECK((a & b) == b);
  CHECK((a - b).members() == std::vector<std::size_t>{0, 129});
  CHECK(a.rank(129) == 2);
  CHECK(a.rank(65) == 2);
  CHECK(OpenSet::full(130).count() == 130);
  CHECK_THROWS_AS(a.set(130), Error);
}

TEST_CASE("canonical order is cardinality then member lists") {
  const auto a = OpenSet::of(4, {0, 3});
  const auto b = OpenSet::of(4, {1, 2});
  const auto c = OpenSet::of(4, {2});
  CHECK(OpenSet::canonical_less(c, a));
  CHECK(OpenSet::canonical_less(a, b));
  CHECK_FALSE(OpenSet::canonical_less(b, a));
  CHECK_FALSE(OpenSet::canonical_less(a, a));
}

TEST_CASE("toy subbasis yields five open sets") {
  const Topology t = toy_topology();
  REQUIRE(t.size() == 5);
  CHECK(t.at(0).empty());
  CHECK(t.at(1) == set_of(t, {"c", "d"}));
  CHECK(t.at(2) == set_of(t, {"a", "b", "c", "d"}));
  CHECK(t.at(3) == set_of(t, {"c", "d", "e", "f"}));
  CHECK(t.at(4) == OpenSet::full(6));
  CHECK(meet(t, t.at(2), t.at(3)) == set_of(t, {"c", "d"}));
  CHECK_FALSE(t.is_disjoint_cover());
}

TEST_CASE("empty subbasis yields the indiscrete topology") {
  const Topology t = generate_topology(letters(2), std::vector<NamedSubset>{});
  REQUIRE(t.size() == 2);
  CHECK(t.at(0).empty());
  CHECK(t.at(1).count() == 2);
  CHECK(t.covers(1) == std::vector<std::size_t>{0});
}

TEST_CASE("lattice example has nine open sets and the expected Hasse diagram") {
  const Topology t = lattice_topology();
  REQUIRE(t.size() == 9);
  const std::vector<std::vector<std::string>> expected{
      {}, {"a"}, {"a", "b"}, {"a", "c"}, {"a", "d"}, {"a", "b", "c"}, {"a", "b", "d"}, {"a", "c", "d"},
      {"a", "b", "c", "d"}};
  for (std::size_t i = 0; i < expected.size(); ++i) CHECK(t.at(i) == set_of(t, expected[i]));
  CHECK(t.cover_edge_count() == 13);
  CHECK(t.height() == 4);
  CHECK(meet(t, set_of(t, {"a", "b", "c"}), set_of(t, {"a", "b", "d"})) == set_of(t, {"a", "b"}));
}

TEST_CASE("lattice queries reject sets that are not open") {
  const Topology t = lattice_topology();
  const OpenSet not_open = set_of(t, {"b"});
  CHECK_THROWS_AS(meet(t, not_open, t.at(1)), Error);
  CHECK_THROWS_AS(join(t, t.at(1), not_open), Error);
  CHECK_THROWS_AS(order_ideal(t, not_open), Error);
  CHECK_THROWS_AS(filtration(t, not_open), Error);
  try {
    lambda_j(t, not_open, 1);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotOpen);
  }
}

TEST_CASE("join with the empty set is the identity") {
  const Topology t = lattice_topology();
  for (const auto& u : t.opens()) CHECK(join(t, u, t.at(0)) == u);
}

TEST_CASE("unknown subbasis labels and cap overflow are reported") {
  try {
    generate_topology(letters(3), std::vector<NamedSubset>{{"S", {"a", "q"}}});
    FAIL("expected SubbasisOutOfRange");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SubbasisOutOfRange);
  }
  try {
    generate_topology(letters(4), std::vector<NamedSubset>{{"ab", {"a", "b"}}, {"ac", {"a", "c"}}, {"ad", {"a", "d"}}},
                      5);
    FAIL("expected CapExceeded");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::CapExceeded);
  }
  // Disjoint covering subbasis: 2^12 opens would exceed a cap of 1000.
  std::vector<NamedSubset> parts;
  for (int p = 0; p < 12; ++p) parts.push_back({"P" + std::to_string(p), {std::string(1, static_cast<char>('a' + p))}});
  CHECK_THROWS_AS(generate_topology(letters(12), parts, 1000), Error);
  CHECK_THROWS_AS(generate_topology(letters(3), std::vector<NamedSubset>{{"S", {"a"}}, {"S", {"b"}}}), Error);
}

TEST_CASE("order ideals and filtration on the lattice example") {
  const Topology t = lattice_topology();
  const OpenSet u = set_of(t, {"a", "b", "d"});
  const auto ideal = order_ideal(t, u);
  std::vector<OpenSet> got;
  for (auto i : ideal) got.push_back(t.at(i));
  CHECK(got == std::vector<OpenSet>{t.at(0), set_of(t, {"a"}), set_of(t, {"a", "b"}), set_of(t, {"a", "d"}), u});

  const IdealFiltration f = filtration(t, u);
  CHECK(f.max_level == 3);
  CHECK(f.level_of(t.require_ordinal(u)) == 0);
  CHECK(f.level_of(t.require_ordinal(set_of(t, {"a", "d"}))) == 1);
  CHECK(f.level_of(t.require_ordinal(set_of(t, {"a", "b"}))) == 1);
  CHECK(f.level_of(t.require_ordinal(set_of(t, {"a"}))) == 2);
  CHECK(f.level_of(0) == 3);
  CHECK_FALSE(f.level_of(t.require_ordinal(set_of(t, {"a", "c"}))));

  const auto level2 = lambda_j(t, u, 2);
  CHECK(level2.size() == 4);
  CHECK(lambda_j(t, u, 0) == std::vector<std::size_t>{t.require_ordinal(u)});
  CHECK(lambda_j(t, u, 99) == ideal);

  CHECK(order_ideal(t, t.at(0)) == std::vector<std::size_t>{0});
  const IdealFiltration e = filtration(t, t.at(0));
  CHECK(e.max_level == 0);
  CHECK(e.members == std::vector<std::size_t>{0});
  CHECK(order_ideal(toy_topology(), OpenSet::full(6)).size() == 5);
}

TEST_CASE("disjoint subbasis gives all unions and remove-one neighbours") {
  std::vector<NamedSubset> parts{{"P0", {"a", "b"}}, {"P1", {"c"}}, {"P2", {"d", "e"}}, {"P3", {"f"}}};
  const Topology t = generate_topology(letters(6), parts);
  CHECK(t.is_disjoint_cover());
  REQUIRE(t.size() == 16);
  for (const auto& u : t.opens()) {
    const auto n_parts = t.parts_of(u).size();
    CHECK(lambda_j(t, u, 1).size() == n_parts + 1);
    for (auto v : t.covers(t.require_ordinal(u))) {
      const OpenSet removed = u - t.at(v);
      CHECK(std::any_of(t.subbasis().begin(), t.subbasis().end(),
                        [&](const SubbasisElement& e) { return e.set == removed; }));
    }
  }
}

TEST_CASE("generation matches the brute-force closure oracle on random instances") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 150; ++trial) {
    const auto inst = random_instance(rng, 8, 4);
    const Topology t = generate_topology(inst.ground, inst.named);
    CHECK(to_naive(t) == brute_force_closure(inst.n, inst.subbasis));
  }
}

TEST_CASE("closure, idempotence and cover properties on random topologies") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 60; ++trial) {
    const auto inst = random_instance(rng, 7, 4);
    const Topology t = generate_topology(inst.ground, inst.named);

    for (const auto& u : t.opens()) {
      for (const auto& v : t.opens()) {
        CHECK(t.contains(u & v));
        CHECK(t.contains(u | v));
      }
    }

    std::vector<SubbasisElement> all;
    for (std::size_t i = 0; i < t.size(); ++i) all.push_back({"O" + std::to_string(i), t.at(i)});
    const Topology again = generate_topology(inst.ground, all);
    CHECK(again.opens() == t.opens());

    const auto naive = naive_covers(to_naive(t));
    for (std::size_t u = 0; u < t.size(); ++u) {
      std::set<NaiveSet> got;
      for (auto v : t.covers(u)) got.insert(to_naive(t.at(v)));
      const auto& want = naive.at(to_naive(t.at(u)));
      CHECK(got == std::set<NaiveSet>(want.begin(), want.end()));
    }
  }
}

TEST_CASE("filtration levels equal shortest cover chains and are nested") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 60; ++trial) {
    const auto inst = random_instance(rng, 8, 4);
    const Topology t = generate_topology(inst.ground, inst.named);
    const NaiveFamily family = to_naive(t);
    for (std::size_t u = 0; u < t.size(); ++u) {
      const IdealFiltration f = filtration(t, t.at(u));
      const auto oracle = chain_enumeration_levels(family, to_naive(t.at(u)));
      CHECK(f.members.size() == oracle.size());
      for (std::size_t i = 0; i < f.members.size(); ++i) {
        CHECK(oracle.at(to_naive(t.at(f.members[i]))) == f.levels[i]);
      }
      CHECK(f.members == order_ideal(t, t.at(u)));
      for (std::size_t j = 0; j < f.max_level; ++j) {
        const auto lo = f.up_to(j);
        const auto hi = f.up_to(j + 1);
        CHECK(std::includes(hi.begin(), hi.end(), lo.begin(), lo.end()));
      }
    }
  }
}
