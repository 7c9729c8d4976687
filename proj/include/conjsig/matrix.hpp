#pragma once

#include <gmpxx.h>

#include <algorithm>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <vector>

namespace conjsig {

using IntVector = std::vector<mpz_class>;

/// Dense square matrix over Z, row-major.
class IntMatrix {
 public:
  IntMatrix() = default;
  explicit IntMatrix(std::size_t n) : n_(n), a_(n * n) {}

  IntMatrix(std::initializer_list<std::initializer_list<long>> rows) : n_(rows.size()), a_() {
    a_.reserve(n_ * n_);
    for (const auto& row : rows) {
      if (row.size() != n_) throw std::invalid_argument("IntMatrix: rows must form a square");
      for (long v : row) a_.emplace_back(v);
    }
  }

  static IntMatrix identity(std::size_t n) {
    IntMatrix m(n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
    return m;
  }

  std::size_t size() const noexcept { return n_; }

  mpz_class& operator()(std::size_t i, std::size_t j) { return a_[i * n_ + j]; }
  const mpz_class& operator()(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }

  std::span<const mpz_class> entries() const noexcept { return a_; }

  bool is_identity() const {
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < n_; ++j)
        if ((*this)(i, j) != (i == j ? 1 : 0)) return false;
    return true;
  }

  // Bit length of the largest entry; a cheap size measure.
  std::size_t max_entry_bits() const {
    std::size_t bits = 0;
    for (const auto& v : a_)
      if (sgn(v) != 0) bits = std::max(bits, mpz_sizeinbase(v.get_mpz_t(), 2));
    return bits;
  }

  mpz_class max_abs_entry() const {
    mpz_class best = 0;
    for (const auto& v : a_)
      if (abs(v) > best) best = abs(v);
    return best;
  }

  friend bool operator==(const IntMatrix&, const IntMatrix&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<mpz_class> a_;
};

inline IntMatrix operator*(const IntMatrix& a, const IntMatrix& b) {
  const std::size_t n = a.size();
  if (b.size() != n) throw std::invalid_argument("IntMatrix product: size mismatch");
  IntMatrix c(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      mpz_ptr acc = c(i, j).get_mpz_t();
      for (std::size_t k = 0; k < n; ++k) mpz_addmul(acc, a(i, k).get_mpz_t(), b(k, j).get_mpz_t());
    }
  }
  return c;
}

inline IntVector operator*(const IntMatrix& a, std::span<const mpz_class> v) {
  const std::size_t n = a.size();
  if (v.size() != n) throw std::invalid_argument("IntMatrix * vector: size mismatch");
  IntVector out(n);
  for (std::size_t i = 0; i < n; ++i) {
    mpz_ptr acc = out[i].get_mpz_t();
    for (std::size_t k = 0; k < n; ++k) mpz_addmul(acc, a(i, k).get_mpz_t(), v[k].get_mpz_t());
  }
  return out;
}

inline IntMatrix square(const IntMatrix& a) {
  // 2x2 squaring needs five products instead of eight.
  if (a.size() == 2) {
    IntMatrix c(2);
    mpz_class bc = a(0, 1) * a(1, 0);
    mpz_class trace = a(0, 0) + a(1, 1);
    c(0, 0) = a(0, 0) * a(0, 0) + bc;
    c(1, 1) = a(1, 1) * a(1, 1) + bc;
    c(0, 1) = a(0, 1) * trace;
    c(1, 0) = a(1, 0) * trace;
    return c;
  }
  return a * a;
}

inline mpz_class determinant(const IntMatrix& m) {
  // Bareiss fraction-free elimination; exact over Z.
  const std::size_t n = m.size();
  if (n == 0) return 1;
  IntMatrix a = m;
  mpz_class sign = 1;
  mpz_class prev = 1;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (a(k, k) == 0) {
      std::size_t swap = k + 1;
      while (swap < n && a(swap, k) == 0) ++swap;
      if (swap == n) return 0;
      for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(swap, j));
      sign = -sign;
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      for (std::size_t j = k + 1; j < n; ++j) {
        mpz_class v = a(i, j) * a(k, k) - a(i, k) * a(k, j);
        mpz_divexact(a(i, j).get_mpz_t(), v.get_mpz_t(), prev.get_mpz_t());
      }
    }
    prev = a(k, k);
  }
  return sign * a(n - 1, n - 1);
}

/// Inverse over Q by Gauss-Jordan elimination, row-major.
inline std::vector<mpq_class> rational_inverse(const IntMatrix& m) {
  const std::size_t n = m.size();
  const std::size_t w = 2 * n;
  std::vector<mpq_class> a(n * w);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) a[i * w + j] = m(i, j);
    a[i * w + n + i] = 1;
  }
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    while (pivot < n && a[pivot * w + col] == 0) ++pivot;
    if (pivot == n) throw std::invalid_argument("matrix is singular");
    if (pivot != col)
      for (std::size_t j = 0; j < w; ++j) std::swap(a[pivot * w + j], a[col * w + j]);
    mpq_class inv = 1 / a[col * w + col];
    for (std::size_t j = 0; j < w; ++j) a[col * w + j] *= inv;
    for (std::size_t i = 0; i < n; ++i) {
      if (i == col || a[i * w + col] == 0) continue;
      mpq_class f = a[i * w + col];
      for (std::size_t j = 0; j < w; ++j) a[i * w + j] -= f * a[col * w + j];
    }
  }
  std::vector<mpq_class> out(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] = a[i * w + n + j];
  return out;
}

/// Inverse of a unimodular matrix (|det| = 1); throws if the inverse is not
/// integral.
inline IntMatrix unimodular_inverse(const IntMatrix& m) {
  const auto q = rational_inverse(m);
  IntMatrix out(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    for (std::size_t j = 0; j < m.size(); ++j) {
      const mpq_class& v = q[i * m.size() + j];
      if (v.get_den() != 1) throw std::invalid_argument("matrix is not unimodular");
      out(i, j) = v.get_num();
    }
  }
  return out;
}

/// adj(M) = det(M) M^-1 for nonsingular M, given det(M).
inline IntMatrix adjugate(const IntMatrix& m, const mpz_class& det) {
  const std::size_t n = m.size();
  IntMatrix adj(n);
  if (n == 2) {
    adj(0, 0) = m(1, 1);
    adj(0, 1) = -m(0, 1);
    adj(1, 0) = -m(1, 0);
    adj(1, 1) = m(0, 0);
    return adj;
  }
  const auto q = rational_inverse(m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      mpq_class v = q[i * n + j] * det;
      adj(i, j) = v.get_num();
    }
  return adj;
}

/// base^e for e >= 0 by square-and-multiply.
inline IntMatrix power(const IntMatrix& base, unsigned long e) {
  IntMatrix result = IntMatrix::identity(base.size());
  if (e == 0) return result;
  int top = 63;
  while (!((e >> top) & 1UL)) --top;
  result = base;
  for (int bit = top - 1; bit >= 0; --bit) {
    result = square(result);
    if ((e >> bit) & 1UL) result = result * base;
  }
  return result;
}

}  // namespace conjsig
