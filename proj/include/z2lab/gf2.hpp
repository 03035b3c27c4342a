#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace z2lab {

/// Packed bit vector over GF(2).
class BitVector {
 public:
  BitVector() = default;
  explicit BitVector(std::size_t n) : size_(n), words_((n + 63) / 64, 0) {}

  [[nodiscard]] std::size_t size() const noexcept { return size_; }
  [[nodiscard]] bool get(std::size_t i) const noexcept {
    return (words_[i >> 6] >> (i & 63)) & 1u;
  }
  void set(std::size_t i, bool v = true) noexcept {
    const std::uint64_t bit = std::uint64_t{1} << (i & 63);
    if (v)
      words_[i >> 6] |= bit;
    else
      words_[i >> 6] &= ~bit;
  }
  void flip(std::size_t i) noexcept { words_[i >> 6] ^= std::uint64_t{1} << (i & 63); }

  [[nodiscard]] std::size_t count() const noexcept {
    std::size_t c = 0;
    for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
    return c;
  }
  [[nodiscard]] bool none() const noexcept {
    for (auto w : words_)
      if (w) return false;
    return true;
  }

  BitVector& operator^=(const BitVector& o);
  [[nodiscard]] bool parity_and(const BitVector& o) const;

  [[nodiscard]] std::span<std::uint64_t> words() noexcept { return words_; }
  [[nodiscard]] std::span<const std::uint64_t> words() const noexcept { return words_; }

  friend bool operator==(const BitVector&, const BitVector&) = default;

 private:
  std::size_t size_ = 0;
  std::vector<std::uint64_t> words_;
};

[[nodiscard]] inline BitVector operator^(BitVector a, const BitVector& b) {
  a ^= b;
  return a;
}

/// Dense matrix over GF(2); rows are BitVectors of length cols().
class Gf2Matrix {
 public:
  Gf2Matrix(std::size_t rows, std::size_t cols);

  [[nodiscard]] std::size_t rows() const noexcept { return rows_.size(); }
  [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
  [[nodiscard]] bool get(std::size_t r, std::size_t c) const { return rows_[r].get(c); }
  void set(std::size_t r, std::size_t c, bool v = true) { rows_[r].set(c, v); }
  void flip(std::size_t r, std::size_t c) { rows_[r].flip(c); }
  [[nodiscard]] const BitVector& row(std::size_t r) const { return rows_[r]; }

  /// M x over GF(2).
  [[nodiscard]] BitVector multiply(const BitVector& x) const;

  [[nodiscard]] static Gf2Matrix identity(std::size_t n);

 private:
  std::size_t cols_;
  std::vector<BitVector> rows_;
};

[[nodiscard]] std::size_t gf2_rank(const Gf2Matrix& m);

/// Basis of {x : M x = 0}; has cols - rank elements.
[[nodiscard]] std::vector<BitVector> gf2_kernel_basis(const Gf2Matrix& m);

/// Some x with M x = b, or nullopt when the system is inconsistent.
/// Throws std::invalid_argument if b.size() != rows.
[[nodiscard]] std::optional<BitVector> gf2_solve(const Gf2Matrix& m, const BitVector& b);

}  // namespace z2lab
