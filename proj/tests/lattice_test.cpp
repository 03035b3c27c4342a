#include <algorithm>
#include <set>

#include "doctest.h"
#include "z2lab/lattice.hpp"

using namespace z2lab;

TEST_CASE("cell counts on small boxes") {
  CHECK(enumerate_cells(cube(0, 1), 0).size() == 16);
  CHECK(enumerate_cells(cube(0, 1), 1).size() == 32);
  CHECK(enumerate_cells(cube(0, 1), 2).size() == 24);
  CHECK(enumerate_cells(cube(0, 1), 3).size() == 8);
  CHECK(enumerate_cells(cube(0, 1), 4).size() == 1);
  CHECK(enumerate_cells(cube(0, 0), 0).size() == 1);
  CHECK(enumerate_cells(cube(0, 0), 1).empty());
  // [0,2]^4: 4 * 2 * 27 edges
  CHECK(enumerate_cells(cube(0, 2), 1).size() == 216);
}

TEST_CASE("enumeration is lexicographic and indexable") {
  const Box b{{0, -1, 0, 2}, {2, 1, 1, 3}};
  for (int k = 0; k <= 4; ++k) {
    const auto cells = enumerate_cells(b, k);
    CHECK(std::is_sorted(cells.begin(), cells.end()));
    const auto table = cell_table(b, k);
    for (std::size_t i = 0; i < cells.size(); ++i) CHECK(table->index_of(cells[i]) == static_cast<std::int64_t>(i));
  }
  CHECK(cell_table(b, 1)->index_of(make_edge({2, 0, 0, 2}, 0)) == -1);
}

TEST_CASE("direction sets in lexicographic order") {
  const auto& two = dir_sets(2);
  REQUIRE(two.size() == 6);
  CHECK(two[0] == 0b0011);
  CHECK(two[1] == 0b0101);
  CHECK(two[2] == 0b1001);
  CHECK(two[3] == 0b0110);
  CHECK(two[4] == 0b1010);
  CHECK(two[5] == 0b1100);
  for (int k = 0; k <= 4; ++k)
    for (std::size_t i = 0; i < dir_sets(k).size(); ++i) CHECK(dir_rank(dir_sets(k)[i]) == static_cast<int>(i));
}

TEST_CASE("classification") {
  CHECK(classify_cell(cube(0, 2), make_vertex({1, 1, 1, 1})) == CellClass::Internal);
  CHECK(classify_cell(cube(0, 2), make_vertex({0, 1, 1, 1})) == CellClass::Boundary);
  for (const auto& p : enumerate_cells(cube(0, 1), 2)) CHECK(classify_cell(cube(0, 1), p) == CellClass::Boundary);
  CHECK(classify_cell(cube(0, 2), make_edge({2, 1, 1, 1}, 0)) == CellClass::Outside);
  // an edge from the boundary into the interior is internal
  CHECK(classify_cell(cube(0, 2), make_edge({0, 1, 1, 1}, 0)) == CellClass::Internal);
  CHECK(classify_cell(cube(0, 2), make_edge({0, 0, 1, 1}, 2)) == CellClass::Boundary);
}

TEST_CASE("incidence") {
  const CellId e = make_edge({3, -1, 0, 2}, 0);
  const auto up = incident_up(e);
  CHECK(up.size() == 6);
  for (const auto& p : up) {
    CHECK(p.degree() == 2);
    CHECK(p.spans(0));
    const auto down = incident_down(p);
    CHECK(std::find(down.begin(), down.end(), e) != down.end());
  }
  CHECK(incident_down(make_plaquette({0, 0, 0, 0}, 0, 1)).size() == 4);
  CHECK(incident_up(make_vertex({0, 0, 0, 0})).size() == 8);
  CHECK(incident_down(make_vertex({0, 0, 0, 0})).empty());
  CHECK(incident_up(CellId{{0, 0, 0, 0}, 0xF, Lattice::primal}).empty());
}

TEST_CASE("hodge map on cells") {
  const CellId hyper{{2, 3, 4, 5}, 0xF, Lattice::primal};
  const CellId v = hodge_cell(hyper);
  CHECK(v.lattice == Lattice::dual);
  CHECK(v.degree() == 0);
  CHECK(v.base == Vec4{2, 3, 4, 5});

  const CellId p = make_plaquette({1, 1, 1, 1}, 0, 1);
  const CellId q = hodge_cell(p);
  CHECK(q == make_plaquette({1, 1, 0, 0}, 2, 3, Lattice::dual));
  // the dual vertices of *p are the centers of the four 4-cells containing p
  std::set<Vec4> centers;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) centers.insert(Vec4{1, 1, 1 - a, 1 - b});
  for (const auto& x : q.vertices()) CHECK(centers.count(x) == 1);

  for (int k = 0; k <= 4; ++k)
    for (const auto& c : enumerate_cells(Box{{-1, 0, 0, 1}, {1, 1, 2, 2}}, k)) {
      CHECK(hodge_cell(hodge_cell(c)) == c);
      CHECK(hodge_cell(c).degree() == 4 - k);
    }
}

TEST_CASE("dual boxes") {
  const Box d = dual_box(cube(0, 1));
  CHECK(d == cube(-1, 1, Lattice::dual));
  CHECK(d.vertex_count() == 81);
  CHECK(double_dual_box(cube(0, 1)) == cube(-1, 2));
  CHECK(dual_box(d) == cube(-1, 2));
  CHECK(cube(0, 1).describe() == "0..1x0..1x0..1x0..1");
  CHECK(d.describe() == "dual:-1..1x-1..1x-1..1x-1..1");
}

TEST_CASE("box helpers") {
  const Box b = cube(2, 5);
  CHECK(b.is_cube());
  CHECK(b.expanded(2) == cube(0, 7));
  CHECK(b.contains_box(cube(3, 4)));
  CHECK_FALSE(b.contains_box(cube(1, 4)));
  CHECK(Box{{0, 0, 0, 0}, {1, 0, 2, 0}}.active_dirs() == 0b0101);
  CHECK_FALSE(Box{{0, 0, 0, 0}, {1, 2, 1, 1}}.is_cube());
}
