#include "doctest.h"
#include "z2lab/forms.hpp"
#include "z2lab/gauge.hpp"
#include "z2lab/rng.hpp"

using namespace z2lab;

namespace {

Form random_form(int k, const Box& box, CounterRng& rng) {
  Form f(k, box);
  for (std::size_t i = 0; i < f.size(); ++i) f.set(i, rng() & 1);
  return f;
}

}  // namespace

TEST_CASE("exterior derivative of a vertex indicator") {
  const Box b = cube(0, 2);
  Form v(0, b, {make_vertex({1, 1, 1, 1})});
  const Form dv = d(v);
  CHECK(dv.count() == 8);
  for (const auto& e : incident_up(make_vertex({1, 1, 1, 1}))) CHECK(dv.at(e));
  CHECK(d(Form(1, b)).is_zero());
}

TEST_CASE("d and delta square to zero") {
  CounterRng rng(17);
  for (const Box& b : {cube(0, 1), cube(-1, 2), Box{{0, 0, 0, 0}, {3, 1, 2, 0}}}) {
    for (int k = 0; k <= 2; ++k) CHECK(d(d(random_form(k, b, rng))).is_zero());
    for (int k = 2; k <= 4; ++k) CHECK(delta(delta(random_form(k, b, rng))).is_zero());
  }
}

TEST_CASE("coderivative of surfaces") {
  const Box b = cube(0, 3);
  const CellId p = make_plaquette({1, 1, 1, 1}, 0, 1);
  Form one(2, b, {p});
  CHECK(surface_boundary(one).count() == 4);

  Form two(2, b, {p, make_plaquette({1, 1, 1, 1}, 0, 2)});
  CHECK(surface_boundary(two).count() == 6);

  // boundary of a 3-cell
  Form closed(2, b, incident_down(CellId{{1, 1, 1, 1}, 0b0111, Lattice::primal}));
  CHECK(closed.count() == 6);
  CHECK(surface_boundary(closed).is_zero());

  const LoopSpec loop = make_rectangle_loop(2, 1, 0, 3, {1, 1, 1, 1});
  CHECK(delta(loop.as_form(b)).is_zero());
}

TEST_CASE("hodge dual") {
  const Box b = cube(0, 2);
  const CellId p = make_plaquette({0, 1, 0, 1}, 1, 3);
  const Form h = hodge(Form(2, b, {p}));
  CHECK(h.box() == dual_box(b));
  CHECK(h.count() == 1);
  CHECK(h.at(hodge_cell(p)));

  CounterRng rng(3);
  for (int k = 0; k <= 4; ++k) {
    const Form f = random_form(k, b, rng);
    CHECK(transfer(hodge(hodge(f)), b) == f);
  }
}

TEST_CASE("poincare solvers") {
  CounterRng rng(99);
  const Box b = cube(0, 3);
  for (int k = 1; k <= 3; ++k) {
    const Form f = d(random_form(k - 1, b, rng));
    CHECK(d(poincare_solve(f)) == f);
  }
  CHECK(poincare_solve(Form(2, b)).degree() == 1);
  CHECK(d(poincare_solve(Form(2, b))).is_zero());

  Form not_closed(2, b, {make_plaquette({1, 1, 1, 1}, 0, 1)});
  CHECK_THROWS_AS((void)poincare_solve(not_closed), NotClosedError);

  // boundary variant
  Form g(1, b);
  for (std::size_t i = 0; i < g.size(); ++i)
    if (classify_cell(b, g.table().cell(i)) == CellClass::Internal) g.set(i, rng() & 1);
  const Form f = d(g);
  REQUIRE(vanishes_on_boundary(f));
  const Form h = poincare_solve(f, true);
  CHECK(d(h) == f);
  CHECK(vanishes_on_boundary(h));

  Form on_boundary = d(Form(1, b, {make_edge({0, 0, 0, 0}, 0)}));
  CHECK_THROWS_AS((void)poincare_solve(on_boundary, true), BoundaryConditionError);

  // coderivative solver keeps support in the box
  const Form c = delta(random_form(3, b, rng));
  const Form s = copoincare_solve(c);
  CHECK(s.box() == b);
  CHECK(delta(s) == c);
  Form not_coclosed(1, b, {make_edge({1, 1, 1, 1}, 0)});
  CHECK_THROWS_AS((void)copoincare_solve(not_coclosed), NotCoclosedError);
}

TEST_CASE("surface spanning a rectangle") {
  const Box b = cube(0, 6);
  const LoopSpec loop = make_rectangle_loop(4, 3, 1, 2, {1, 1, 1, 1});
  const Form gamma = loop.as_form(b);
  const Form q = copoincare_solve(gamma);
  CHECK(surface_boundary(q) == gamma);
}

TEST_CASE("gf2 linear algebra") {
  CHECK(gf2_rank(Gf2Matrix::identity(5)) == 5);
  CHECK(gf2_kernel_basis(Gf2Matrix::identity(5)).empty());
  const Gf2Matrix zero(3, 4);
  CHECK(gf2_rank(zero) == 0);
  CHECK(gf2_kernel_basis(zero).size() == 4);

  const Gf2Matrix d0 = d_matrix(cube(0, 1), 0);
  CHECK(d0.rows() == 32);
  CHECK(d0.cols() == 16);
  CHECK(gf2_rank(d0) == 15);
  const auto kernel = gf2_kernel_basis(d0);
  REQUIRE(kernel.size() == 1);
  CHECK(kernel[0].count() == 16);

  // solve reproduces a known right-hand side
  CounterRng rng(5);
  BitVector x(16);
  for (std::size_t i = 0; i < 16; ++i) x.set(i, rng() & 1);
  const auto sol = gf2_solve(d0, d0.multiply(x));
  REQUIRE(sol.has_value());
  CHECK(d0.multiply(*sol) == d0.multiply(x));
  BitVector odd(32);
  for (const auto& e : incident_up(make_vertex({0, 0, 0, 0})))
    if (auto i = cell_table(cube(0, 1), 1)->index_of(e); i >= 0) {
      odd.set(static_cast<std::size_t>(i));
      break;
    }
  CHECK_FALSE(gf2_solve(d0, odd).has_value());
}
