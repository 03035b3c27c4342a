#include <cmath>

#include "doctest.h"
#include "z2lab/duality.hpp"
#include "z2lab/gauge.hpp"

using namespace z2lab;

TEST_CASE("plaquette products and the hamiltonian") {
  const Box b = cube(0, 1);
  SpinConfig sigma(b);
  CHECK(hamiltonian(sigma) == -24.0);
  const CellId p = make_plaquette({0, 0, 0, 0}, 0, 1);
  CHECK(plaquette_product(sigma, p) == 1);
  sigma.flip(make_edge({0, 0, 0, 0}, 0));
  CHECK(plaquette_product(sigma, p) == -1);
  sigma.flip(make_edge({0, 0, 0, 0}, 1));
  CHECK(plaquette_product(sigma, p) == 1);

  SpinConfig big(cube(0, 4));
  const double h0 = hamiltonian(big);
  big.flip(make_edge({2, 2, 2, 2}, 3));
  CHECK(hamiltonian(big) - h0 == 12.0);
  CHECK_THROWS_AS((void)plaquette_product(big, make_plaquette({4, 0, 0, 0}, 0, 1)), std::out_of_range);
}

TEST_CASE("local fields") {
  SpinConfig sigma(cube(0, 4));
  CHECK(local_field(sigma, make_edge({2, 2, 2, 2}, 0)) == 6);
  // corner edge: plaquettes only toward +e_j for the three other directions
  CHECK(local_field(sigma, make_edge({0, 0, 0, 0}, 0)) == 3);
  // one partner edge flipped in one plaquette: 5 - 1
  sigma.flip(make_edge({2, 2, 2, 2}, 1));
  CHECK(local_field(sigma, make_edge({2, 2, 2, 2}, 0)) == 4);
  // two plaquettes negative: 4 - 2
  sigma.flip(make_edge({2, 2, 2, 2}, 2));
  CHECK(local_field(sigma, make_edge({2, 2, 2, 2}, 0)) == 2);
}

TEST_CASE("heat-bath conditional law") {
  CHECK(heat_bath_plus_probability(0.0, 6) == doctest::Approx(0.5));
  CHECK(heat_bath_plus_probability(1.0, 6) == doctest::Approx(0.9999938558253978).epsilon(1e-14));
  CHECK(heat_bath_plus_probability(0.5, 6) == doctest::Approx(0.9975273768433652).epsilon(1e-14));
  CHECK(heat_bath_plus_probability(0.5, -6) == doctest::Approx(1.0 - 0.9975273768433652).epsilon(1e-12));
  CHECK(heat_bath_plus_probability(40.0, 6) == 1.0);
}

TEST_CASE("chain local field matches the generic one") {
  const Box b{{0, -1, 0, 1}, {3, 2, 2, 4}};
  HeatBathChain chain(b, Boundary::free, 0.0, CounterRng(4));
  chain.sweep();
  const SpinConfig sigma = chain.snapshot();
  const auto cells = enumerate_cells(b, 1);
  const auto& entries = chain.geometry().entries();
  REQUIRE(entries.size() == cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    CHECK(entries[i].slot == chain.geometry().slot_of(cells[i]));
    CHECK(chain.local_field(entries[i]) == local_field(sigma, cells[i]));
  }
}

TEST_CASE("snapshot and load round trip") {
  const Box b = cube(0, 3);
  HeatBathChain chain(b, Boundary::free, 0.0, CounterRng(1));
  chain.sweeps(2);
  const SpinConfig s = chain.snapshot();
  HeatBathChain other(b, Boundary::free, 0.7, CounterRng(2));
  other.load(s);
  CHECK(other.snapshot() == s);

  HeatBathChain pinned(b, Boundary::zero, 0.7, CounterRng(2));
  CHECK_THROWS_AS(pinned.load(s), std::invalid_argument);
}

TEST_CASE("sweep at beta zero gives fair coins") {
  const Box b = cube(0, 6);
  SpinConfig sigma(b);
  CounterRng rng(8);
  heat_bath_sweep(sigma, 0.0, rng);
  const double n = static_cast<double>(sigma.edge_count());
  const double frac = static_cast<double>(sigma.negative_edges().count()) / n;
  CHECK(std::fabs(frac - 0.5) < 4.0 * std::sqrt(0.25 / n));
}

TEST_CASE("zero boundary condition pins the boundary") {
  const Box b = cube(0, 3);
  HeatBathChain chain(b, Boundary::zero, 0.0, CounterRng(11));
  chain.sweeps(3);
  const SpinConfig s = chain.snapshot();
  for (const auto& e : enumerate_cells(b, 1))
    if (classify_cell(b, e) == CellClass::Boundary) CHECK(s.spin(e) == 1);
  CHECK(s.negative_edges().count() > 0);
  for (const auto& p : enumerate_cells(b, 2))
    if (classify_cell(b, p) == CellClass::Boundary) CHECK(plaquette_product(s, p) == 1);
}

TEST_CASE("gauge flips leave invariants alone") {
  const Box b = cube(0, 3);
  HeatBathChain chain(b, Boundary::free, 0.0, CounterRng(21));
  chain.sweep();
  SpinConfig s = chain.snapshot();
  const LoopSpec loop = make_rectangle_loop(2, 3, 1, 3);
  const double h = hamiltonian(s);
  const int w = wilson_loop(s, loop);
  gauge_flip(s, {1, 2, 0, 1});
  gauge_flip(s, {0, 0, 0, 0});
  CHECK(hamiltonian(s) == h);
  CHECK(wilson_loop(s, loop) == w);
  CHECK_FALSE(s == chain.snapshot());
}

TEST_CASE("loop geometry") {
  const LoopSpec unit = make_rectangle_loop(1, 1, 0, 1);
  CHECK(unit.ell == 4);
  CHECK(unit.ell0 == 4);
  const LoopSpec r32 = make_rectangle_loop(3, 2, 0, 2);
  CHECK(r32.ell == 10);
  CHECK(r32.ell0 == 8);
  const LoopSpec r45 = make_rectangle_loop(4, 5, 0, 1);
  CHECK(r45.ell0 == 8);
  // the corner edges are the edges touching the four corners
  for (const auto& e : corner_edges(r45.edges)) {
    bool at_corner = false;
    for (const auto& v : e.vertices())
      at_corner = at_corner || ((v[0] == 0 || v[0] == 4) && (v[1] == 0 || v[1] == 5));
    CHECK(at_corner);
  }

  auto both = make_rectangle_loop(3, 3, 0, 1).edges;
  for (const auto& e : make_rectangle_loop(3, 3, 2, 3, {10, 10, 10, 10}).edges) both.push_back(e);
  const LoopSpec two = LoopSpec::from_edges(both);
  CHECK(two.ell == 24);
  CHECK(two.ell0 == 16);

  // interior edges of a straight segment share no plaquette
  std::vector<CellId> segment;
  for (int i = 0; i < 5; ++i) segment.push_back(make_edge({i, 0, 0, 0}, 0));
  CHECK(corner_edges(segment).empty());

  CHECK_THROWS_AS((void)LoopSpec::from_edges(segment), std::invalid_argument);
  CHECK(unit.bounding_box() == Box{{0, 0, 0, 0}, {1, 1, 0, 0}});
}

TEST_CASE("wilson loops and predictions") {
  const Box b = cube(0, 3);
  SpinConfig s(b);
  const LoopSpec loop = make_rectangle_loop(2, 2, 0, 1, {1, 1, 1, 1});
  CHECK(wilson_loop(s, loop) == 1);
  s.flip(loop.edges.front());
  CHECK(wilson_loop(s, loop) == -1);
  CHECK(wilson_prediction(0.7, 0) == 1.0);
  const double beta = std::log(2.0 * 50.0) / 12.0;
  CHECK(wilson_prediction(beta, 50) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
  CHECK(wilson_prediction(0.5, 100) == doctest::Approx(0.6091136353473129).epsilon(1e-12));
  CHECK(wilson_prediction(0.5, 40) == doctest::Approx(0.8201236362839869).epsilon(1e-12));
  CHECK(edge_factor(0.5) == doctest::Approx(std::tanh(3.0)));
}

TEST_CASE("run config validation") {
  RunConfig rc;
  rc.box = cube(0, 2);
  rc.n_samples = 10;
  CHECK_NOTHROW(rc.validate());
  rc.beta = -1.0;
  CHECK_THROWS_AS(rc.validate(), std::invalid_argument);
  rc.beta = 0.5;
  rc.replicas = 0;
  CHECK_THROWS_AS(rc.validate(), std::invalid_argument);
  rc.replicas = 1;
  rc.n_samples = -1;
  CHECK_THROWS_AS(rc.validate(), std::invalid_argument);
}

TEST_CASE("single plaquette mean matches exact enumeration") {
  // exact <sigma_p> on [0,1]^4 at beta = 0.3 from an independent brute force
  const double exact = 0.2952993488594986;
  const CellId p = make_plaquette({0, 0, 0, 0}, 0, 1);
  CHECK(exact_plaquette_product(cube(0, 1), 0.3, {p}) == doctest::Approx(exact).epsilon(1e-12));
  RunConfig rc;
  rc.beta = 0.3;
  rc.box = cube(0, 1);
  rc.burn_in_sweeps = 100;
  rc.n_samples = 40000;
  rc.seed = 12;
  const Estimate e = estimate_observable(rc, plaquette_product_observable({p}, rc.box));
  CHECK(e.std_error > 0.0);
  CHECK(std::fabs(e.mean - exact) <= 3.0 * e.std_error);
}

TEST_CASE("three-plaquette marginal is close in total variation") {
  // exact law of the signs of plaquettes 0, 1 and 5 of [0,1]^4 at beta = 0.3
  const std::vector<double> exact = {0.2737473413177768, 0.1472642905394925, 0.1457524324263172,
                                     0.08088561014616286, 0.14726429053949247, 0.07937375203298755,
                                     0.08088561014616286, 0.0448266728516078};
  const Box b = cube(0, 1);
  const std::vector<CellId> ps = {make_plaquette({0, 0, 0, 0}, 0, 1), make_plaquette({0, 0, 0, 0}, 0, 2),
                                  make_plaquette({0, 0, 0, 0}, 2, 3)};
  const auto law = exact_plaquette_distribution(b, 0.3, ps);
  REQUIRE(law.size() == 8);
  for (std::size_t i = 0; i < 8; ++i) CHECK(law[i] == doctest::Approx(exact[i]).epsilon(1e-12));

  HeatBathChain chain(b, Boundary::free, 0.3, CounterRng(77));
  chain.sweeps(100);
  std::vector<double> counts(8, 0.0);
  const int n = 40000;
  for (int i = 0; i < n; ++i) {
    chain.sweep();
    const SpinConfig s = chain.snapshot();
    std::size_t pattern = 0;
    for (std::size_t k = 0; k < ps.size(); ++k)
      if (plaquette_product(s, ps[k]) < 0) pattern |= std::size_t{1} << k;
    counts[pattern] += 1.0;
  }
  double tv = 0.0;
  for (std::size_t i = 0; i < 8; ++i) tv += 0.5 * std::fabs(counts[i] / n - exact[i]);
  // sampling noise alone gives about 0.005 here
  CHECK(tv < 0.02);
}

TEST_CASE("pinned and gauge-augmented zero boundary samplers agree") {
  // The augmented chain also applies a gauge flip at a random boundary vertex
  // before each sweep, so boundary edges take both signs while every boundary
  // plaquette stays +1.
  const Box primal = cube(0, 1);
  const double beta = 0.6;
  const double lambda = dual_coupling(beta).lambda;
  const Box dual = dual_box(primal);
  const CellId q = hodge_cell(make_plaquette({0, 0, 0, 0}, 0, 1));
  const double exact = 0.6258692447306833;  // <sigma_p> at beta = 0.6, brute force

  std::vector<Vec4> boundary_vertices;
  for (const auto& v : enumerate_cells(dual, 0))
    if (is_boundary_vertex(dual, v.base)) boundary_vertices.push_back(v.base);
  std::vector<CellId> boundary_edges, boundary_plaquettes;
  for (const auto& e : enumerate_cells(dual, 1))
    if (classify_cell(dual, e) == CellClass::Boundary) boundary_edges.push_back(e);
  for (const auto& bp : enumerate_cells(dual, 2))
    if (classify_cell(dual, bp) == CellClass::Boundary) boundary_plaquettes.push_back(bp);

  struct Outcome {
    Estimate estimate;
    bool negative_boundary_edge = false;
    bool constraint_held = true;
  };
  const auto run = [&](bool augmented, std::uint64_t seed) {
    HeatBathChain chain(dual, Boundary::zero, lambda, CounterRng(seed));
    CounterRng pick(seed ^ 0xABCDEFull);
    Outcome out;
    std::vector<double> xs;
    for (int i = 0; i < 40200; ++i) {
      if (augmented) chain.gauge_flip(boundary_vertices[pick() % boundary_vertices.size()]);
      chain.sweep();
      if (i < 200) continue;
      const SpinConfig s = chain.snapshot();
      xs.push_back(std::exp(-2.0 * lambda * plaquette_product(s, q)));
      if (i % 100 == 0) {
        for (const auto& e : boundary_edges) out.negative_boundary_edge |= s.spin(e) < 0;
        for (const auto& bp : boundary_plaquettes) out.constraint_held &= plaquette_product(s, bp) == 1;
      }
    }
    out.estimate = batch_means(xs);
    return out;
  };
  const Outcome pinned = run(false, 31);
  const Outcome augmented = run(true, 32);
  CHECK_FALSE(pinned.negative_boundary_edge);
  CHECK(augmented.negative_boundary_edge);
  CHECK(augmented.constraint_held);
  const Estimate& a = pinned.estimate;
  const Estimate& b = augmented.estimate;
  CHECK(std::fabs(a.mean - exact) <= 3.0 * a.std_error);
  CHECK(std::fabs(b.mean - exact) <= 3.0 * b.std_error);
  CHECK(std::fabs(a.mean - b.mean) <= 3.0 * std::hypot(a.std_error, b.std_error));
}
