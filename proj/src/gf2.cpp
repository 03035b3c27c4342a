#include "z2lab/gf2.hpp"

#include <stdexcept>

namespace z2lab {

BitVector& BitVector::operator^=(const BitVector& o) {
  if (o.size_ != size_) throw std::invalid_argument("BitVector size mismatch");
  for (std::size_t i = 0; i < words_.size(); ++i) words_[i] ^= o.words_[i];
  return *this;
}

bool BitVector::parity_and(const BitVector& o) const {
  if (o.size_ != size_) throw std::invalid_argument("BitVector size mismatch");
  std::uint64_t acc = 0;
  for (std::size_t i = 0; i < words_.size(); ++i) acc ^= words_[i] & o.words_[i];
  return std::popcount(acc) & 1;
}

Gf2Matrix::Gf2Matrix(std::size_t rows, std::size_t cols)
    : cols_(cols), rows_(rows, BitVector(cols)) {}

BitVector Gf2Matrix::multiply(const BitVector& x) const {
  if (x.size() != cols_) throw std::invalid_argument("gf2 multiply: dimension mismatch");
  BitVector out(rows());
  for (std::size_t r = 0; r < rows(); ++r)
    if (rows_[r].parity_and(x)) out.set(r);
  return out;
}

Gf2Matrix Gf2Matrix::identity(std::size_t n) {
  Gf2Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m.set(i, i);
  return m;
}

namespace {

// Reduced row echelon form in place. Returns pivot column of each pivot row.
// When `rhs` is non-null its bits follow the row operations.
std::vector<std::size_t> reduce(std::vector<BitVector>& rows, std::size_t cols,
                                BitVector* rhs) {
  std::vector<std::size_t> pivots;
  std::size_t r = 0;
  for (std::size_t c = 0; c < cols && r < rows.size(); ++c) {
    std::size_t p = r;
    while (p < rows.size() && !rows[p].get(c)) ++p;
    if (p == rows.size()) continue;
    if (p != r) {
      std::swap(rows[p], rows[r]);
      if (rhs) {
        const bool a = rhs->get(p), b = rhs->get(r);
        rhs->set(p, b);
        rhs->set(r, a);
      }
    }
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (i != r && rows[i].get(c)) {
        rows[i] ^= rows[r];
        if (rhs && rhs->get(r)) rhs->flip(i);
      }
    }
    pivots.push_back(c);
    ++r;
  }
  return pivots;
}

std::vector<BitVector> copy_rows(const Gf2Matrix& m) {
  std::vector<BitVector> rows;
  rows.reserve(m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) rows.push_back(m.row(r));
  return rows;
}

}  // namespace

std::size_t gf2_rank(const Gf2Matrix& m) {
  auto rows = copy_rows(m);
  return reduce(rows, m.cols(), nullptr).size();
}

std::vector<BitVector> gf2_kernel_basis(const Gf2Matrix& m) {
  auto rows = copy_rows(m);
  const auto pivots = reduce(rows, m.cols(), nullptr);
  std::vector<bool> is_pivot(m.cols(), false);
  for (auto c : pivots) is_pivot[c] = true;

  std::vector<BitVector> basis;
  for (std::size_t free = 0; free < m.cols(); ++free) {
    if (is_pivot[free]) continue;
    BitVector v(m.cols());
    v.set(free);
    for (std::size_t r = 0; r < pivots.size(); ++r)
      if (rows[r].get(free)) v.set(pivots[r]);
    basis.push_back(std::move(v));
  }
  return basis;
}

std::optional<BitVector> gf2_solve(const Gf2Matrix& m, const BitVector& b) {
  if (b.size() != m.rows()) throw std::invalid_argument("gf2_solve: dimension mismatch");
  auto rows = copy_rows(m);
  BitVector rhs = b;
  const auto pivots = reduce(rows, m.cols(), &rhs);
  for (std::size_t r = pivots.size(); r < rows.size(); ++r)
    if (rhs.get(r)) return std::nullopt;
  BitVector x(m.cols());
  for (std::size_t r = 0; r < pivots.size(); ++r)
    if (rhs.get(r)) x.set(pivots[r]);
  return x;
}

}  // namespace z2lab
