#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

// Cell complex of Z^4 restricted to finite boxes, and the Hodge pairing
// between primal and dual cells.
//
// Dual cells are stored on integer coordinates: a dual cell with base z
// denotes the geometric cell anchored at z + (1/2, 1/2, 1/2, 1/2).

namespace z2lab {

inline constexpr int kDim = 4;

using Vec4 = std::array<int, kDim>;

enum class Lattice : std::uint8_t { primal = 0, dual = 1 };

[[nodiscard]] constexpr Lattice opposite(Lattice l) noexcept {
  return l == Lattice::primal ? Lattice::dual : Lattice::primal;
}

/// Bitmask of spanned directions (bit i set <=> direction i spanned).
using DirMask = std::uint8_t;

[[nodiscard]] constexpr int dir_count(DirMask m) noexcept {
  return ((m >> 0) & 1) + ((m >> 1) & 1) + ((m >> 2) & 1) + ((m >> 3) & 1);
}

[[nodiscard]] constexpr DirMask complement(DirMask m) noexcept {
  return static_cast<DirMask>(~m & 0xF);
}

/// Number of direction sets of size k (binomial(4, k)).
[[nodiscard]] int dir_set_count(int k);

/// Direction sets of size k in lexicographic order of their sorted tuples,
/// e.g. k = 2: {0,1} {0,2} {0,3} {1,2} {1,3} {2,3}.
[[nodiscard]] const std::vector<DirMask>& dir_sets(int k);

/// Position of `m` within dir_sets(dir_count(m)).
[[nodiscard]] int dir_rank(DirMask m);

struct CellId {
  Vec4 base{};
  DirMask dirs = 0;
  Lattice lattice = Lattice::primal;

  [[nodiscard]] int degree() const noexcept { return dir_count(dirs); }
  [[nodiscard]] bool spans(int dir) const noexcept { return (dirs >> dir) & 1; }

  /// Vertices of the cell (2^k of them), in stored coordinates.
  [[nodiscard]] std::vector<Vec4> vertices() const;

  friend bool operator==(const CellId&, const CellId&) = default;
};

/// Lexicographic (base, dirs) order; only meaningful within one lattice.
bool operator<(const CellId& a, const CellId& b);

[[nodiscard]] CellId make_vertex(Vec4 x, Lattice l = Lattice::primal);
[[nodiscard]] CellId make_edge(Vec4 x, int dir, Lattice l = Lattice::primal);
[[nodiscard]] CellId make_plaquette(Vec4 x, int dir_a, int dir_b,
                                    Lattice l = Lattice::primal);

struct Box {
  Vec4 lo{};
  Vec4 hi{};
  Lattice lattice = Lattice::primal;

  [[nodiscard]] int side(int i) const noexcept { return hi[i] - lo[i]; }
  [[nodiscard]] bool is_cube() const noexcept;
  [[nodiscard]] bool contains(const Vec4& x) const noexcept;
  [[nodiscard]] bool contains_cell(const CellId& c) const noexcept;
  [[nodiscard]] bool contains_box(const Box& inner) const noexcept;
  [[nodiscard]] std::size_t vertex_count() const noexcept;
  /// Directions with positive side length.
  [[nodiscard]] DirMask active_dirs() const noexcept;
  /// Box grown by `margin` on every side.
  [[nodiscard]] Box expanded(int margin) const;
  /// "a..bxc..d..." with a "dual:" prefix for dual boxes.
  [[nodiscard]] std::string describe() const;

  friend bool operator==(const Box&, const Box&) = default;
};

/// [a, b]^4 on the given lattice.
[[nodiscard]] Box cube(int a, int b, Lattice l = Lattice::primal);

enum class CellClass : std::uint8_t { Internal, Boundary, Outside };

[[nodiscard]] bool is_boundary_vertex(const Box& box, const Vec4& x) noexcept;

/// Every k-cell whose vertices all lie in `box`, in lexicographic (base, dirs)
/// order. The position in this list is the cell's index in bit layouts.
[[nodiscard]] std::vector<CellId> enumerate_cells(const Box& box, int k);

[[nodiscard]] CellClass classify_cell(const Box& box, const CellId& c);

/// (k+1)-cells of the infinite lattice containing c; 2(4-k) of them.
[[nodiscard]] std::vector<CellId> incident_up(const CellId& c);
/// (k-1)-cells contained in c; 2k of them.
[[nodiscard]] std::vector<CellId> incident_down(const CellId& c);

/// Primal (x, S) -> dual (x - sum_{j not in S} e_j, S^c); dual (z, T) ->
/// primal (z + sum_{j in T} e_j, T^c). An involution.
[[nodiscard]] CellId hodge_cell(const CellId& c);

/// Primal [a, b] -> dual stored [a - 1, b]; dual stored [c, d] -> primal
/// [c, d + 1].
[[nodiscard]] Box dual_box(const Box& box);
[[nodiscard]] Box double_dual_box(const Box& box);

/// Index table for the k-cells of a box. Shared and immutable once built.
class CellTable {
 public:
  CellTable(const Box& box, int k);

  [[nodiscard]] int degree() const noexcept { return k_; }
  [[nodiscard]] const Box& box() const noexcept { return box_; }
  [[nodiscard]] std::size_t size() const noexcept { return cells_.size(); }
  [[nodiscard]] const std::vector<CellId>& cells() const noexcept { return cells_; }
  [[nodiscard]] const CellId& cell(std::size_t i) const { return cells_[i]; }

  /// Index of (x, dirs) in the enumeration, or -1 if the cell is not in the
  /// box. Lattice flags are ignored.
  [[nodiscard]] std::int64_t index_of(const Vec4& x, DirMask dirs) const noexcept;
  [[nodiscard]] std::int64_t index_of(const CellId& c) const noexcept {
    return index_of(c.base, c.dirs);
  }

 private:
  Box box_;
  int k_;
  std::array<std::int64_t, kDim> stride_{};
  std::vector<CellId> cells_;
  std::vector<std::int32_t> slot_;  // vertex * C(4,k) + dir_rank -> index
};

/// Cached table for (box geometry, k); the lattice flag of the returned cells
/// follows `box`.
[[nodiscard]] std::shared_ptr<const CellTable> cell_table(const Box& box, int k);

}  // namespace z2lab
