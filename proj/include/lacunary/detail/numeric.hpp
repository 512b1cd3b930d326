#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <vector>

namespace lacunary::detail {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Gauss-Legendre rule on [-1, 1], nodes found by Newton iteration on P_N.
template <std::size_t N>
struct GaussLegendre {
  std::array<double, N> nodes{};
  std::array<double, N> weights{};

  GaussLegendre() {
    for (std::size_t i = 0; i < N; ++i) {
      double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                          (static_cast<double>(N) + 0.5));
      double dp = 0.0;
      for (int iter = 0; iter < 100; ++iter) {
        double p0 = 1.0;
        double p1 = x;
        for (std::size_t k = 2; k <= N; ++k) {
          const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
          p0 = p1;
          p1 = pk;
        }
        dp = static_cast<double>(N) * (x * p1 - p0) / (x * x - 1.0);
        const double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-16) break;
      }
      nodes[i] = x;
      weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
  }

  /// Integral of f over [a, b].
  template <class F>
  double integrate(F&& f, double a, double b) const {
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    double s = 0.0;
    for (std::size_t i = 0; i < N; ++i) s += weights[i] * f(mid + half * nodes[i]);
    return s * half;
  }
};

template <std::size_t N>
const GaussLegendre<N>& gauss_legendre() {
  static const GaussLegendre<N> rule;
  return rule;
}

/// Standard normal distribution function, accurate to a few ulp through erfc.
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// Upper tail P[N(0,1) >= x].
inline double normal_tail(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

inline double normal_density(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

/// Exact fractional part of m * x for integer m and a double x >= 0.
///
/// x is split into its 53-bit integer mantissa and a power of two, the product
/// is formed in 128-bit arithmetic and only the fractional bits are kept, so
/// no precision is lost however large m is.
inline double frac_mul(std::uint64_t m, double x) {
  double fx = x - std::floor(x);
  if (fx == 0.0 || m == 0) return 0.0;
  int exponent = 0;
  const double mant = std::frexp(fx, &exponent);  // fx = mant * 2^exponent, mant in [0.5, 1)
  const auto mantissa = static_cast<std::uint64_t>(std::ldexp(mant, 53));
  const int shift = 53 - exponent;  // fx = mantissa * 2^-shift, shift >= 53
  const unsigned __int128 product = static_cast<unsigned __int128>(m) * mantissa;
  double r = 0.0;
  if (shift >= 128) {
    r = std::ldexp(static_cast<double>(product), -shift);
  } else {
    const unsigned __int128 mask = (static_cast<unsigned __int128>(1) << shift) - 1;
    r = std::ldexp(static_cast<double>(product & mask), -shift);
  }
  if (r >= 1.0) r = std::nextafter(1.0, 0.0);
  return r;
}

/// Fraction in [0, 1) represented by a 64-bit fixed point word.
inline double fixed_to_double(std::uint64_t word) {
  return std::ldexp(static_cast<double>(word >> 11), -53);
}

/// Table of log(k!) for k = 0..n.
class LogFactorials {
 public:
  explicit LogFactorials(std::size_t n) : table_(n + 1, 0.0) {
    for (std::size_t k = 1; k <= n; ++k) table_[k] = std::lgamma(static_cast<double>(k) + 1.0);
  }

  std::size_t size() const { return table_.size(); }
  double operator()(std::size_t k) const { return table_[k]; }

  /// log C(n, k); -infinity outside 0 <= k <= n.
  double log_choose(long long n, long long k) const {
    if (n < 0 || k < 0 || k > n) return -INFINITY;
    return table_[static_cast<std::size_t>(n)] - table_[static_cast<std::size_t>(k)] -
           table_[static_cast<std::size_t>(n - k)];
  }

 private:
  std::vector<double> table_;
};

/// C(n, k) in 64-bit arithmetic; valid whenever the result fits (n <= 62 always does).
inline std::uint64_t choose_u64(unsigned n, unsigned k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  unsigned __int128 r = 1;
  for (unsigned i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return static_cast<std::uint64_t>(r);
}

inline unsigned bit_length(std::uint64_t v) { return static_cast<unsigned>(std::bit_width(v)); }

/// Bits of j (L of them) in reverse order.
inline std::uint64_t reverse_bits(std::uint64_t j, unsigned L) {
  std::uint64_t r = 0;
  for (unsigned i = 0; i < L; ++i) {
    r = (r << 1) | (j & 1u);
    j >>= 1;
  }
  return r;
}

/// Neumaier compensated summation.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v))
      comp_ += (sum_ - t) + v;
    else
      comp_ += (v - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace lacunary::detail
