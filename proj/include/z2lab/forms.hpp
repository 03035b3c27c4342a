#pragma once

#include <memory>
#include <stdexcept>
#include <vector>

#include "z2lab/gf2.hpp"
#include "z2lab/lattice.hpp"

// Z2-valued k-forms on boxes. Bit i of a form is its value on the i-th cell of
// enumerate_cells(box, k); a 1-form is an edge set, a 2-form a surface.
// Orientation signs vanish mod 2, so d sums over faces and delta over cofaces.

namespace z2lab {

struct NotClosedError : std::domain_error {
  using std::domain_error::domain_error;
};
struct NotCoclosedError : std::domain_error {
  using std::domain_error::domain_error;
};
struct BoundaryConditionError : std::domain_error {
  using std::domain_error::domain_error;
};

class Form {
 public:
  Form(int k, const Box& box);
  Form(int k, const Box& box, const std::vector<CellId>& support);

  [[nodiscard]] int degree() const noexcept { return k_; }
  [[nodiscard]] const Box& box() const noexcept { return table_->box(); }
  [[nodiscard]] const CellTable& table() const noexcept { return *table_; }
  [[nodiscard]] std::size_t size() const noexcept { return bits_.size(); }

  [[nodiscard]] bool get(std::size_t i) const noexcept { return bits_.get(i); }
  void set(std::size_t i, bool v = true) noexcept { bits_.set(i, v); }
  void flip(std::size_t i) noexcept { bits_.flip(i); }

  /// Value on a cell; cells outside the box read as zero.
  [[nodiscard]] bool at(const CellId& c) const noexcept;
  /// Throws std::out_of_range if the cell is not in the box.
  void set(const CellId& c, bool v = true);
  void flip(const CellId& c);

  [[nodiscard]] std::vector<CellId> support() const;
  [[nodiscard]] std::size_t count() const noexcept { return bits_.count(); }
  [[nodiscard]] bool is_zero() const noexcept { return bits_.none(); }

  [[nodiscard]] const BitVector& bits() const noexcept { return bits_; }
  [[nodiscard]] BitVector& bits() noexcept { return bits_; }

  Form& operator^=(const Form& o);
  friend bool operator==(const Form& a, const Form& b) {
    return a.k_ == b.k_ && a.box() == b.box() && a.bits_ == b.bits_;
  }

 private:
  int k_;
  std::shared_ptr<const CellTable> table_;
  BitVector bits_;
};

[[nodiscard]] inline Form operator^(Form a, const Form& b) {
  a ^= b;
  return a;
}

/// Exterior derivative: (df)(c') = sum of f over the 2(k+1) faces of c'.
/// Throws std::domain_error for k = 4.
[[nodiscard]] Form d(const Form& f);

/// Coderivative with f extended by zero outside its box: (delta f)(c) = sum of
/// f over the cofaces of c, restricted to the (k-1)-cells of the box. The
/// coderivative of a 0-form is the zero 0-form.
[[nodiscard]] Form delta(const Form& f);

/// (4-k)-form on dual_box(f.box()) with value f(c) on hodge_cell(c) and zero
/// on boundary cells of the dual box.
[[nodiscard]] Form hodge(const Form& f);

/// Same degree, values copied onto `box`; cells of `box` outside f's box
/// read as zero.
[[nodiscard]] Form transfer(const Form& f, const Box& box);

/// True if f vanishes on every boundary cell of its box.
[[nodiscard]] bool vanishes_on_boundary(const Form& f);

/// Some g with dg = f, built by the slice recursion over the last active
/// coordinate. With vanish_boundary, f must vanish on the boundary and the
/// returned g does too (needs 1 <= k <= active dimensions - 1).
/// Throws NotClosedError, BoundaryConditionError.
[[nodiscard]] Form poincare_solve(const Form& f, bool vanish_boundary = false);

/// Some (k+1)-form h supported in f's box with delta h = f, via the dual
/// box: h = *g where dg = *f and g vanishes on the boundary of the dual box.
/// Throws NotCoclosedError.
[[nodiscard]] Form copoincare_solve(const Form& f);

/// Edges lying in an odd number of plaquettes of P (the coderivative of P).
[[nodiscard]] Form surface_boundary(const Form& plaquettes);

/// Matrix of d from k-forms to (k+1)-forms on a box.
[[nodiscard]] Gf2Matrix d_matrix(const Box& box, int k);
/// Matrix of delta from k-forms to (k-1)-forms on a box.
[[nodiscard]] Gf2Matrix delta_matrix(const Box& box, int k);

}  // namespace z2lab
