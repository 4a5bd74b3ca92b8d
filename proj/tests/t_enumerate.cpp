#include <doctest.h>

#include <cmath>
#include <set>

#include "dimerlab/dimer_graph.hpp"
#include "dimerlab/enumerate.hpp"

using namespace dimerlab;

TEST_CASE("domino tiling counts of small boards") {
  CHECK(count_domino_tilings(1, 2) == 1);
  CHECK(count_domino_tilings(2, 1) == 1);
  CHECK(count_domino_tilings(1, 3) == 0);
  CHECK(count_domino_tilings(3, 3) == 0);
  CHECK(count_domino_tilings(2, 2) == 2);
  CHECK(count_domino_tilings(2, 3) == 3);
  CHECK(count_domino_tilings(2, 4) == 5);
  CHECK(count_domino_tilings(4, 4) == 36);
  CHECK(count_domino_tilings(6, 6) == 6728);
  CHECK(count_domino_tilings(8, 8) == 12988816ull);
  CHECK(count_domino_tilings(4, 6) == count_domino_tilings(6, 4));
}

TEST_CASE("graph matchings agree with the transfer matrix") {
  for (auto [w, h] : {std::pair{2, 2}, {2, 4}, {3, 4}, {4, 4}, {5, 4}, {4, 6}, {6, 6}}) {
    auto g = build_square_lattice(w, h, Topology::plane, std::sqrt(2.0));
    CHECK(count_matchings(g) == count_domino_tilings(w, h));
  }
}

TEST_CASE("enumeration lists exactly the perfect matchings") {
  auto g = build_square_lattice(4, 4, Topology::plane, std::sqrt(2.0));
  auto all = enumerate_matchings(g);
  REQUIRE(all.size() == 36);
  std::set<Matching> uniq(all.begin(), all.end());
  CHECK(uniq.size() == all.size());
  for (const auto& m : all) {
    REQUIRE((int)m.size() == g.nW());
    std::set<int> blacks;
    for (int i = 0; i < (int)m.size(); ++i) {
      REQUIRE(m[i] >= 0);
      REQUIRE(m[i] < (int)g.edges.size());
      CHECK(g.edges[m[i]].w == i);
      blacks.insert(g.edges[m[i]].b);
    }
    CHECK((int)blacks.size() == g.nB());
  }
}

TEST_CASE("weighted sum reduces to counting at unit spacing scale") {
  for (auto [w, h] : {std::pair{2, 4}, {4, 4}, {3, 4}}) {
    auto g = build_square_lattice(w, h, Topology::plane, std::sqrt(2.0));
    // every edge weight is the spacing, here 1
    CHECK(weighted_matching_sum(g) ==
          doctest::Approx((double)count_domino_tilings(w, h)).epsilon(1e-12));
    auto gs = build_square_lattice(w, h, Topology::plane, 2.0 * std::sqrt(2.0));
    double scale = std::pow(2.0, g.nW());
    CHECK(weighted_matching_sum(gs) ==
          doctest::Approx(scale * (double)count_domino_tilings(w, h)).epsilon(1e-12));
  }
}

TEST_CASE("torus matchings enumerate consistently") {
  for (auto [w, h] : {std::pair{2, 2}, {2, 4}, {4, 4}}) {
    auto g = build_square_lattice(w, h, Topology::torus, std::sqrt(2.0));
    auto all = enumerate_matchings(g);
    CHECK(all.size() == count_matchings(g));
    CHECK(all.size() > count_domino_tilings(w, h));  // wrapping adds configurations
    std::set<Matching> uniq(all.begin(), all.end());
    CHECK(uniq.size() == all.size());
  }
}
