#include <cmath>

#include "doctest.h"
#include "z2lab/surfaces.hpp"

using namespace z2lab;

TEST_CASE("negative plaquettes") {
  const Box b = cube(0, 4);
  SpinConfig s(b);
  CHECK(negative_plaquettes(s).is_zero());
  const CellId e = make_edge({2, 2, 2, 2}, 1);
  s.flip(e);
  const Surface neg = negative_plaquettes(s);
  CHECK(neg.count() == 6);
  for (const auto& p : edge_plaquettes(e)) CHECK(neg.at(p));

  HeatBathChain chain(b, Boundary::free, 0.2, CounterRng(3));
  chain.sweeps(2);
  CHECK(negative_plaquettes(chain) == negative_plaquettes(chain.snapshot()));
}

TEST_CASE("vortex decomposition") {
  const Box b = cube(0, 8);
  SpinConfig s(b);
  CHECK(vortex_decompose(s).empty());

  s.flip(make_edge({2, 2, 2, 2}, 0));
  auto vs = vortex_decompose(s);
  REQUIRE(vs.size() == 1);
  CHECK(vs[0].size() == 6);
  CHECK_FALSE(vs[0].touches_boundary);
  CHECK(is_minimal_vortex(s, make_edge({2, 2, 2, 2}, 0)));

  s.flip(make_edge({6, 6, 5, 6}, 3));
  vs = vortex_decompose(s);
  REQUIRE(vs.size() == 2);
  CHECK(vs[0].size() == 6);
  CHECK(vs[1].size() == 6);
  CHECK(vs[0].plaquettes.front() < vs[1].plaquettes.front());

  // two adjacent flipped edges share a plaquette: one larger vortex
  SpinConfig t(b);
  t.flip(make_edge({3, 3, 3, 3}, 0));
  t.flip(make_edge({3, 3, 3, 3}, 1));
  vs = vortex_decompose(t);
  REQUIRE(vs.size() == 1);
  CHECK(vs[0].size() == 10);
  CHECK_FALSE(is_minimal_vortex(t, make_edge({3, 3, 3, 3}, 0)));
  CHECK_FALSE(is_minimal_vortex(SpinConfig(b), make_edge({3, 3, 3, 3}, 0)));
  CHECK_THROWS_AS((void)is_minimal_vortex(t, make_edge({0, 0, 0, 0}, 1)), std::invalid_argument);

  // a flipped boundary edge gives a boundary-touching component
  SpinConfig u(b);
  u.flip(make_edge({0, 0, 0, 0}, 0));
  vs = vortex_decompose(u);
  REQUIRE(vs.size() == 1);
  CHECK(vs[0].touches_boundary);
  CHECK(vs[0].size() == 3);
}

TEST_CASE("decomposition is a closed partition on sampled configurations") {
  const Box b = cube(0, 5);
  HeatBathChain chain(b, Boundary::free, 0.45, CounterRng(99));
  chain.sweeps(20);
  for (int i = 0; i < 20; ++i) {
    chain.sweep();
    const Surface neg = negative_plaquettes(chain);
    const auto vs = vortex_decompose(neg);
    Surface un(2, b);
    std::size_t total = 0;
    for (const auto& v : vs) {
      total += v.size();
      for (auto p : v.plaquettes) un.flip(p);
      if (!v.touches_boundary) {
        CHECK(dual_closed(neg, v.plaquettes));
        CHECK(v.size() >= 6);
      }
    }
    CHECK(total == neg.count());
    CHECK(un == neg);
  }
}

TEST_CASE("a non-closed interior component is rejected") {
  const Box b = cube(0, 6);
  Surface bad(2, b, {make_plaquette({3, 3, 3, 3}, 0, 1)});
  CHECK_THROWS_AS((void)vortex_decompose(bad), InvariantError);
}

TEST_CASE("census bookkeeping") {
  const Box b = cube(0, 14);
  const Box w = cube(6, 8);
  CHECK_THROWS_AS(CensusAccumulator(b, cube(5, 8)), std::invalid_argument);

  CensusAccumulator acc(b, w);
  SpinConfig s(b);
  acc.add(s);
  s.flip(make_edge({7, 7, 7, 7}, 2));
  s.flip(make_edge({1, 1, 1, 1}, 2));  // outside the window
  acc.add(s);
  const VortexCensus c = acc.result();
  CHECK(c.configs == 2);
  CHECK(c.minimal_vortex_count == 1);
  CHECK(c.histogram.at(6) == 1);
  CHECK(c.negative_plaquette_count == 6);
  CHECK(c.large_vortex_fraction() == 0.0);
  CHECK(c.minimal_density.mean > 0.0);

  const VortexCensus empty = census({SpinConfig(b)}, w);
  CHECK(empty.histogram.empty());
  CHECK(std::isnan(empty.large_vortex_fraction()));
}

TEST_CASE("no vortices at large beta") {
  const Box b = cube(0, 13);
  HeatBathChain chain(b, Boundary::free, 3.0, CounterRng(5));
  CensusAccumulator acc(b, cube(6, 7));
  for (int i = 0; i < 20; ++i) {
    chain.sweep();
    acc.add(negative_plaquettes(chain));
  }
  CHECK(acc.result().histogram.empty());
}

TEST_CASE("half the plaquettes are negative at beta zero") {
  const Box b = cube(0, 14);
  HeatBathChain chain(b, Boundary::free, 0.0, CounterRng(6));
  CensusAccumulator acc(b, cube(6, 8));
  for (int i = 0; i < 64; ++i) {
    chain.sweep();
    acc.add(negative_plaquettes(chain));
  }
  const Estimate d = acc.result().negative_density;
  CHECK(std::fabs(d.mean - 0.5) <= 3.0 * d.std_error);
}
