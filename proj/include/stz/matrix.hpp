#pragma once

#include "stz/measure_algebra.hpp"
#include "stz/steinitz.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace stz {

class RationalMatrix {
 public:
  RationalMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, Rational(0)) {
    if (rows == 0 || cols == 0) throw std::domain_error("matrix: empty dimensions");
  }

  static RationalMatrix identity(std::size_t n) {
    RationalMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1;
    return m;
  }

  // Diagonal projection onto the first k coordinates.
  static RationalMatrix diagonal_projection(std::size_t n, std::size_t k) {
    if (k > n) throw std::domain_error("diagonal_projection: k <= n required");
    RationalMatrix m(n, n);
    for (std::size_t i = 0; i < k; ++i) m.at(i, i) = 1;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  Rational& at(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const Rational& at(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  friend bool operator==(const RationalMatrix& a, const RationalMatrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }
  friend bool operator!=(const RationalMatrix& a, const RationalMatrix& b) { return !(a == b); }

  RationalMatrix operator*(const RationalMatrix& o) const {
    if (cols_ != o.rows_) throw std::domain_error("matrix product: shape mismatch");
    RationalMatrix r(rows_, o.cols_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t k = 0; k < cols_; ++k) {
        const Rational& v = at(i, k);
        if (v == 0) continue;
        for (std::size_t j = 0; j < o.cols_; ++j) r.at(i, j) += v * o.at(k, j);
      }
    return r;
  }

  RationalMatrix operator+(const RationalMatrix& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_) throw std::domain_error("matrix sum: shape mismatch");
    RationalMatrix r(rows_, cols_);
    for (std::size_t i = 0; i < data_.size(); ++i) r.data_[i] = data_[i] + o.data_[i];
    return r;
  }

  RationalMatrix operator-(const RationalMatrix& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_) throw std::domain_error("matrix difference: shape mismatch");
    RationalMatrix r(rows_, cols_);
    for (std::size_t i = 0; i < data_.size(); ++i) r.data_[i] = data_[i] - o.data_[i];
    return r;
  }

  bool is_idempotent() const { return rows_ == cols_ && *this * *this == *this; }

  std::string to_string() const {
    std::string s;
    for (std::size_t i = 0; i < rows_; ++i) {
      if (i) s += "; ";
      for (std::size_t j = 0; j < cols_; ++j) {
        if (j) s += " ";
        s += stz::to_string(at(i, j));
      }
    }
    return s;
  }

 private:
  std::size_t rows_, cols_;
  std::vector<Rational> data_;
};

// Exact rank: rows are cleared to integers, then fraction-free elimination.
inline std::size_t matrix_rank(const RationalMatrix& a) {
  std::size_t rows = a.rows(), cols = a.cols();
  std::vector<std::vector<BigInt>> m(rows, std::vector<BigInt>(cols));
  for (std::size_t i = 0; i < rows; ++i) {
    BigInt common = 1;
    for (std::size_t j = 0; j < cols; ++j)
      common = boost::multiprecision::lcm(common, denominator(a.at(i, j)));
    for (std::size_t j = 0; j < cols; ++j)
      m[i][j] = numerator(a.at(i, j)) * (common / denominator(a.at(i, j)));
  }
  std::size_t rank = 0;
  BigInt prev = 1;
  for (std::size_t col = 0; col < cols && rank < rows; ++col) {
    std::size_t pivot = rank;
    while (pivot < rows && m[pivot][col] == 0) ++pivot;
    if (pivot == rows) continue;
    std::swap(m[rank], m[pivot]);
    for (std::size_t i = rank + 1; i < rows; ++i) {
      for (std::size_t j = col + 1; j < cols; ++j)
        m[i][j] = (m[i][j] * m[rank][col] - m[i][col] * m[rank][j]) / prev;
      m[i][col] = 0;
    }
    prev = m[rank][col];
    ++rank;
  }
  return rank;
}

// Relative rank of a square matrix: rank / n.
inline Rational relative_range(const RationalMatrix& a) {
  if (a.rows() != a.cols()) throw std::domain_error("relative_range: square matrix required");
  return Rational(matrix_rank(a), a.rows());
}

// Embedding of n x n matrices into N x N: a block diagonal of `copies` copies
// of the argument, zero-padded at the bottom right.
class BlockEmbedding {
 public:
  BlockEmbedding(std::size_t source_dim, std::size_t copies, std::size_t target_dim)
      : n_(source_dim), copies_(copies), target_(target_dim) {
    if (n_ == 0 || copies_ == 0) throw std::domain_error("BlockEmbedding: empty blocks");
    if (copies_ * n_ > target_) throw std::domain_error("BlockEmbedding: blocks exceed target");
  }

  std::size_t source_dim() const { return n_; }
  std::size_t copies() const { return copies_; }
  std::size_t target_dim() const { return target_; }
  bool unital() const { return copies_ * n_ == target_; }

  RationalMatrix apply(const RationalMatrix& a) const {
    if (a.rows() != n_ || a.cols() != n_) throw std::domain_error("BlockEmbedding: shape mismatch");
    RationalMatrix r(target_, target_);
    for (std::size_t c = 0; c < copies_; ++c)
      for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t j = 0; j < n_; ++j) r.at(c * n_ + i, c * n_ + j) = a.at(i, j);
    return r;
  }

  RationalMatrix unit_image() const { return apply(RationalMatrix::identity(n_)); }

 private:
  std::size_t n_, copies_, target_;
};

// The multiplicative relation between relative ranks along an embedding:
// relative_range(f(a)) = relative_range(a) * relative_range(f(1)).
struct RangeCheck {
  RationalMatrix image;
  Rational lhs, rhs;
  bool holds;
};

inline RangeCheck embed_and_check(const RationalMatrix& a, const BlockEmbedding& f) {
  RationalMatrix image = f.apply(a);
  Rational lhs = relative_range(image);
  Rational rhs = relative_range(a) * relative_range(f.unit_image());
  bool holds = lhs == rhs;
  return RangeCheck{std::move(image), std::move(lhs), std::move(rhs), holds};
}

// Boolean algebra of diagonal projections of M_n: standard with weights 1/n.
inline AlgebraPtr cartan_extract(std::size_t n) { return MeasureAlgebra::standard(n); }

// Corner invariants realized by idempotents of M_n: the naturals 1..n, as
// scaled values over base 1.
inline std::vector<ScaledSteinitz> matrix_spectrum(std::size_t n) {
  std::vector<ScaledSteinitz> out;
  out.reserve(n);
  for (std::size_t k = 1; k <= n; ++k)
    out.emplace_back(Rational(k), SteinitzNumber::one());
  return out;
}

// Idempotent of the given rank, conjugated away from diagonal form by random
// elementary matrices (exact arithmetic, rank preserved).
inline RationalMatrix random_idempotent(std::size_t n, std::size_t rank, std::mt19937_64& rng) {
  if (rank > n) throw std::domain_error("random_idempotent: rank <= n required");
  RationalMatrix a = RationalMatrix::diagonal_projection(n, rank);
  for (int step = 0; step < 8 && n >= 2; ++step) {
    std::size_t i = rng() % n;
    std::size_t j = rng() % (n - 1);
    if (j >= i) ++j;
    std::int64_t c = static_cast<std::int64_t>(rng() % 5) - 2;
    if (c == 0) c = 1;
    // a <- E a E^{-1} with E = I + c e_{ij}: row_i += c row_j, then col_j -= c col_i.
    for (std::size_t t = 0; t < n; ++t) a.at(i, t) += c * a.at(j, t);
    for (std::size_t t = 0; t < n; ++t) a.at(t, j) -= c * a.at(t, i);
  }
  return a;
}

}  // namespace stz
