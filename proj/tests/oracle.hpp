#pragma once

// Independent reference arithmetic for tests. Nothing here calls into the
// library's group code: matrix powers are formed by repeated multiplication,
// the 2x2 inverse by the adjugate formula, and group powers by repeated
// products. Only usable for small shifts and exponents.

#include "conjsig/platform_group.hpp"

#include <gmpxx.h>

#include <cmath>
#include <map>
#include <stdexcept>
#include <vector>

namespace oracle {

using Vec = std::vector<mpz_class>;
using Mat = std::vector<Vec>;

inline Mat mat_mul(const Mat& a, const Mat& b) {
  const std::size_t n = a.size();
  Mat c(n, Vec(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k) c[i][j] += a[i][k] * b[k][j];
  return c;
}

inline Vec mat_vec(const Mat& a, const Vec& v) {
  Vec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t k = 0; k < v.size(); ++k) out[i] += a[i][k] * v[k];
  return out;
}

inline Mat eye(std::size_t n) {
  Mat m(n, Vec(n));
  for (std::size_t i = 0; i < n; ++i) m[i][i] = 1;
  return m;
}

struct Group {
  Mat a;
  Mat a_inv;

  // 2x2 only: A^-1 = det * adj(A) when det = +-1.
  static Group two_by_two(long a00, long a01, long a10, long a11) {
    long det = a00 * a11 - a01 * a10;
    if (det != 1 && det != -1) throw std::invalid_argument("oracle: not unimodular");
    Group g;
    g.a = {{a00, a01}, {a10, a11}};
    g.a_inv = {{det * a11, -det * a01}, {-det * a10, det * a00}};
    return g;
  }

  Mat act(const mpz_class& k) const {
    if (!k.fits_slong_p() || abs(k) > 100000) throw std::range_error("oracle: shift too large");
    long steps = k.get_si();
    Mat m = eye(a.size());
    const Mat& step = steps >= 0 ? a : a_inv;
    for (long i = 0; i < std::labs(steps); ++i) m = mat_mul(m, step);
    return m;
  }

  conjsig::GroupElement mul(const conjsig::GroupElement& x, const conjsig::GroupElement& y) const {
    Vec moved = mat_vec(act(x.shift), y.translation);
    conjsig::GroupElement out{x.translation, x.shift + y.shift};
    for (std::size_t i = 0; i < out.translation.size(); ++i) out.translation[i] += moved[i];
    return out;
  }

  conjsig::GroupElement inv(const conjsig::GroupElement& x) const {
    Vec moved = mat_vec(act(-x.shift), x.translation);
    for (auto& c : moved) c = -c;
    return {moved, -x.shift};
  }

  conjsig::GroupElement one(std::size_t n) const { return {Vec(n), 0}; }

  conjsig::GroupElement conj(const conjsig::GroupElement& g, const conjsig::GroupElement& h) const {
    return mul(mul(inv(h), g), h);
  }

  conjsig::GroupElement pow(const conjsig::GroupElement& g, long e) const {
    conjsig::GroupElement base = e >= 0 ? g : inv(g);
    conjsig::GroupElement out = one(g.dimension());
    for (long i = 0; i < std::labs(e); ++i) out = mul(out, base);
    return out;
  }
};

inline Group default_group() { return Group::two_by_two(2, 1, 1, 1); }

inline std::vector<long> divisors_by_trial(long n) {
  std::vector<long> out;
  for (long d = 1; d <= n; ++d)
    if (n % d == 0) out.push_back(d);
  return out;
}

/// True when every bucket count lies within `sigmas` standard deviations of
/// its binomial expectation (trials * p, p = 1 / buckets).
inline bool uniform_within(const std::map<long, long>& counts, long buckets, long trials, double sigmas) {
  const double p = 1.0 / static_cast<double>(buckets);
  const double mean = static_cast<double>(trials) * p;
  const double sd = std::sqrt(static_cast<double>(trials) * p * (1.0 - p));
  if (static_cast<long>(counts.size()) > buckets) return false;
  for (long b = 0; b < buckets; ++b) {
    auto it = counts.find(b);
    const double c = it == counts.end() ? 0.0 : static_cast<double>(it->second);
    if (std::fabs(c - mean) > sigmas * sd) return false;
  }
  return true;
}

}  // namespace oracle
