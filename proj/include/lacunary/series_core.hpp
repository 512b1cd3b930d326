#pragma once

// Rademacher and Walsh functions, lacunary frequency sequences, coefficient
// triangles and the partial sums built from them.

#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lacunary/detail/numeric.hpp"
#include "lacunary/errors.hpp"

namespace lacunary {

// ---------------------------------------------------------------------------
// Elementary dyadic functions
// ---------------------------------------------------------------------------

/// Binary digit d (d >= 1) of x in [0, 1); digits past the double mantissa are 0.
inline int binary_digit(double x, std::size_t d) {
  if (d > 1100) return 0;
  const double shifted = std::floor(std::ldexp(x, static_cast<int>(d)));
  return static_cast<int>(std::fmod(shifted, 2.0));
}

inline void check_unit_interval(double x) {
  if (!(x >= 0.0 && x < 1.0)) throw DomainError("x must lie in [0, 1)");
}

/// r_n(x) = r_0(2^n x); +1 when binary digit n+1 of x is 0, -1 otherwise.
inline int rademacher(std::size_t n, double x) {
  check_unit_interval(x);
  return binary_digit(x, n + 1) == 0 ? 1 : -1;
}

/// W_m(x): product of r_i(x) over the set bits i of m (bit i pairs with r_i).
inline int walsh(std::uint64_t m, double x) {
  check_unit_interval(x);
  int sign = 1;
  for (std::uint64_t bits = m; bits != 0; bits &= bits - 1) {
    const auto i = static_cast<std::size_t>(std::countr_zero(bits));
    if (binary_digit(x, i + 1) != 0) sign = -sign;
  }
  return sign;
}

/// Carry-free binary addition.
constexpr std::uint64_t dyadic_xor(std::uint64_t k, std::uint64_t l) noexcept { return k ^ l; }

/// First Bernoulli polynomial extended with period 1: x - floor(x) - 1/2.
inline double bernoulli1(double x) { return x - std::floor(x) - 0.5; }

// ---------------------------------------------------------------------------
// Periodic profiles
// ---------------------------------------------------------------------------

/// A 1-periodic function together with its Hölder data.
struct PeriodicFunction {
  std::function<double(double)> eval;
  double holder_constant = 0.0;
  double holder_exponent = 1.0;
  /// Dyadic level of the discontinuities on [0, 1); -1 when continuous.
  int jump_level = -1;
  std::string name;
  /// Fourier cosine/sine coefficients (k, a_k, b_k) when the profile is a trigonometric polynomial.
  std::vector<std::tuple<std::uint64_t, double, double>> fourier;

  double operator()(double x) const { return eval(x); }

  static PeriodicFunction cosine() {
    return {[](double x) { return std::cos(detail::two_pi * (x - std::floor(x))); },
            detail::two_pi,
            1.0,
            -1,
            "cos",
            {{1, 1.0, 0.0}}};
  }

  /// Lipschitz with constant 1 on every dyadic cell of [0, 1); the only jump is at the integers.
  static PeriodicFunction bernoulli() {
    return {[](double x) { return bernoulli1(x); }, 1.0, 1.0, 0, "bernoulli", {}};
  }

  static PeriodicFunction rademacher0() {
    return {[](double x) { return (x - std::floor(x)) < 0.5 ? 1.0 : -1.0; }, 0.0, 1.0, 1,
            "rademacher", {}};
  }

  static PeriodicFunction constant(double c) {
    return {[c](double) { return c; }, 0.0, 1.0, -1, "constant", {}};
  }

  /// f(x) = sum_k a_k cos(2 pi k x) + b_k sin(2 pi k x).
  static PeriodicFunction trigonometric(std::vector<std::tuple<std::uint64_t, double, double>> terms) {
    double lipschitz = 0.0;
    for (const auto& [k, a, b] : terms)
      lipschitz += detail::two_pi * static_cast<double>(k) * (std::abs(a) + std::abs(b));
    auto eval = [terms](double x) {
      double s = 0.0;
      for (const auto& [k, a, b] : terms) {
        const double phase = detail::two_pi * detail::frac_mul(k, x - std::floor(x));
        s += a * std::cos(phase) + b * std::sin(phase);
      }
      return s;
    };
    return {eval, lipschitz, 1.0, -1, "custom-fourier", std::move(terms)};
  }
};

// ---------------------------------------------------------------------------
// LacunarySequence
// ---------------------------------------------------------------------------

enum class SequenceKind { power, interleaved_example, big_gap, custom };

inline const char* to_string(SequenceKind kind) {
  switch (kind) {
    case SequenceKind::power: return "power";
    case SequenceKind::interleaved_example: return "interleaved-example";
    case SequenceKind::big_gap: return "big-gap";
    case SequenceKind::custom: return "custom";
  }
  return "custom";
}

/// Strictly increasing frequencies m_1 < m_2 < ... with a certified ratio bound q.
///
/// Terms are indexed from 1. Geometric sequences are kept symbolic so that very
/// long ones (m_k = 2^k with k in the tens of thousands) can still certify q.
class LacunarySequence {
 public:
  /// m_k = base^k, k = 1..length.
  static LacunarySequence power(std::uint64_t base, std::size_t length) {
    if (base < 2) throw ConstraintError("power sequence needs base >= 2");
    LacunarySequence s;
    s.kind_ = SequenceKind::power;
    s.base_ = base;
    s.length_ = length;
    s.q_ = static_cast<double>(base);
    s.integral_ = true;
    return s;
  }

  /// 2, 3, 4, 6, 8, 12, ...: the powers 2^k interleaved with 2^k + 2^(k-1); ratio bound 4/3.
  static LacunarySequence interleaved(std::size_t length) {
    std::vector<std::uint64_t> t;
    t.reserve(length);
    for (std::size_t i = 0; i < length; ++i) {
      const std::size_t k = i / 2 + 1;
      if (k >= 63) throw SizeError("interleaved sequence overflows 64-bit terms");
      const std::uint64_t p = std::uint64_t{1} << k;
      t.push_back(i % 2 == 0 ? p : p + p / 2);
    }
    auto s = from_integers(std::move(t), 4.0 / 3.0, SequenceKind::interleaved_example);
    return s;
  }

  /// Materialised integer terms. q defaults to the smallest observed ratio.
  static LacunarySequence from_integers(std::vector<std::uint64_t> terms, std::optional<double> q = {},
                                        SequenceKind kind = SequenceKind::custom) {
    std::vector<double> r(terms.begin(), terms.end());
    LacunarySequence s = certify(std::move(r), q, kind);
    s.ints_ = std::move(terms);
    s.integral_ = true;
    if (!s.ints_.empty() && s.ints_.front() == 0) throw ConstraintError("frequencies must be positive");
    for (std::size_t k = 1; k < s.ints_.size(); ++k)
      if (s.ints_[k] <= s.ints_[k - 1]) throw ConstraintError("frequencies must be strictly increasing");
    return s;
  }

  static LacunarySequence from_reals(std::vector<double> terms, std::optional<double> q = {}) {
    bool all_int = true;
    for (double t : terms)
      if (t != std::floor(t) || t >= 1.8e19) all_int = false;
    if (all_int) {
      std::vector<std::uint64_t> ints(terms.begin(), terms.end());
      return from_integers(std::move(ints), q);
    }
    return certify(std::move(terms), q, SequenceKind::custom);
  }

  std::size_t size() const { return kind_ == SequenceKind::power ? length_ : reals_.size(); }
  double q() const { return q_; }
  SequenceKind kind() const { return kind_; }
  bool integral() const { return integral_; }
  std::uint64_t base() const { return base_; }

  /// m_k as a double (may be +inf for enormous powers).
  double term(std::size_t k) const {
    check_index(k);
    if (kind_ == SequenceKind::power)
      return std::pow(static_cast<double>(base_), static_cast<double>(k));
    return reals_[k - 1];
  }

  /// True when m_1..m_n are integers representable in 64 bits.
  bool integer_terms_fit(std::size_t n) const {
    if (!integral_) return false;
    if (kind_ != SequenceKind::power) return n <= ints_.size();
    unsigned __int128 v = 1;
    for (std::size_t k = 1; k <= n; ++k) {
      v *= base_;
      if (v > std::numeric_limits<std::uint64_t>::max()) return false;
    }
    return true;
  }

  std::uint64_t integer_term(std::size_t k) const {
    check_index(k);
    if (!integral_) throw TypeError("sequence has non-integral terms");
    if (kind_ != SequenceKind::power) return ints_[k - 1];
    if (!integer_terms_fit(k)) throw SizeError("term does not fit in 64 bits");
    std::uint64_t v = 1;
    for (std::size_t i = 0; i < k; ++i) v *= base_;
    return v;
  }

  std::vector<std::uint64_t> integer_terms(std::size_t n) const {
    std::vector<std::uint64_t> out;
    out.reserve(n);
    for (std::size_t k = 1; k <= n; ++k) out.push_back(integer_term(k));
    return out;
  }

  /// Integer ratios m_{k+1}/m_k for k = 1..n-1, if every ratio is an integer.
  std::optional<std::vector<std::uint64_t>> integer_ratios(std::size_t n) const {
    if (!integral_ || n > size()) return std::nullopt;
    if (kind_ == SequenceKind::power) return std::vector<std::uint64_t>(n > 0 ? n - 1 : 0, base_);
    std::vector<std::uint64_t> out;
    for (std::size_t k = 1; k < n; ++k) {
      if (ints_[k] % ints_[k - 1] != 0) return std::nullopt;
      out.push_back(ints_[k] / ints_[k - 1]);
    }
    return out;
  }

 private:
  static LacunarySequence certify(std::vector<double> terms, std::optional<double> q, SequenceKind kind) {
    double min_ratio = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < terms.size(); ++k) {
      if (!(terms[k] > 0.0)) throw ConstraintError("frequencies must be positive");
      if (k > 0) {
        if (!(terms[k] > terms[k - 1])) throw ConstraintError("frequencies must be strictly increasing");
        min_ratio = std::min(min_ratio, terms[k] / terms[k - 1]);
      }
    }
    const double declared = q.value_or(terms.size() > 1 ? min_ratio : 2.0);
    if (!(declared > 1.0)) throw ConstraintError("ratio bound q must exceed 1");
    if (terms.size() > 1 && min_ratio < declared * (1.0 - 1e-14))
      throw ConstraintError("a ratio m_{k+1}/m_k falls below the declared q");
    LacunarySequence s;
    s.kind_ = kind;
    s.q_ = declared;
    s.reals_ = std::move(terms);
    return s;
  }

  void check_index(std::size_t k) const {
    if (k == 0 || k > size()) throw SizeError("sequence index out of range");
  }

  SequenceKind kind_ = SequenceKind::custom;
  double q_ = 2.0;
  bool integral_ = false;
  std::uint64_t base_ = 0;
  std::size_t length_ = 0;
  std::vector<double> reals_;
  std::vector<std::uint64_t> ints_;
};

/// m_1 = 1, m_{k+1} = b_k m_k.
inline LacunarySequence big_gap_sequence(std::span<const std::uint64_t> gaps) {
  std::vector<std::uint64_t> terms{1};
  double q = std::numeric_limits<double>::infinity();
  for (std::uint64_t b : gaps) {
    if (b < 2) throw ConstraintError("big-gap ratios must be integers >= 2");
    const unsigned __int128 next = static_cast<unsigned __int128>(terms.back()) * b;
    if (next > std::numeric_limits<std::uint64_t>::max()) throw SizeError("big-gap sequence overflows 64 bits");
    terms.push_back(static_cast<std::uint64_t>(next));
    q = std::min(q, static_cast<double>(b));
  }
  if (gaps.empty()) q = 2.0;
  return LacunarySequence::from_integers(std::move(terms), q, SequenceKind::big_gap);
}

// ---------------------------------------------------------------------------
// CoefficientTriangle
// ---------------------------------------------------------------------------

/// Walsh sums normalise by (sum a^2)^(1/2), cosine sums by (sum a^2 / 2)^(1/2).
enum class NormalizerConvention { walsh, trig };

enum class CoefficientScheme { flat, unit, custom };

/// Triangular array a_{k,n}, 1 <= k <= n.
class CoefficientTriangle {
 public:
  /// a_{k,n} = n^(-alpha).
  static CoefficientTriangle flat(double alpha, NormalizerConvention conv) {
    CoefficientTriangle t;
    t.scheme_ = CoefficientScheme::flat;
    t.alpha_ = alpha;
    t.convention_ = conv;
    return t;
  }

  static CoefficientTriangle unit(NormalizerConvention conv) {
    CoefficientTriangle t;
    t.scheme_ = CoefficientScheme::unit;
    t.convention_ = conv;
    return t;
  }

  /// rows[n-1] holds a_{1,n}..a_{n,n}.
  static CoefficientTriangle custom(std::vector<std::vector<double>> rows, NormalizerConvention conv) {
    for (std::size_t i = 0; i < rows.size(); ++i)
      if (rows[i].size() != i + 1) throw ConstraintError("row n of a coefficient triangle needs n entries");
    CoefficientTriangle t;
    t.scheme_ = CoefficientScheme::custom;
    t.rows_ = std::move(rows);
    t.convention_ = conv;
    return t;
  }

  /// The same array under the other normaliser convention.
  CoefficientTriangle with_convention(NormalizerConvention conv) const {
    CoefficientTriangle t = *this;
    t.convention_ = conv;
    return t;
  }

  CoefficientScheme scheme() const { return scheme_; }
  NormalizerConvention convention() const { return convention_; }
  double alpha() const { return alpha_; }

  /// Rows available; flat and unit schemes are unbounded.
  std::size_t max_rows() const {
    return scheme_ == CoefficientScheme::custom ? rows_.size() : std::numeric_limits<std::size_t>::max();
  }

  /// True when every coefficient of row n is the same number.
  bool row_is_constant(std::size_t n) const {
    if (scheme_ != CoefficientScheme::custom) return true;
    check_row(n);
    for (double a : rows_[n - 1])
      if (a != rows_[n - 1].front()) return false;
    return true;
  }

  double coefficient(std::size_t k, std::size_t n) const {
    check_row(n);
    if (k == 0 || k > n) throw SizeError("coefficient index out of range");
    switch (scheme_) {
      case CoefficientScheme::flat: return std::pow(static_cast<double>(n), -alpha_);
      case CoefficientScheme::unit: return 1.0;
      case CoefficientScheme::custom: return rows_[n - 1][k - 1];
    }
    return 0.0;
  }

  std::vector<double> row(std::size_t n) const {
    check_row(n);
    if (scheme_ == CoefficientScheme::custom) return rows_[n - 1];
    return std::vector<double>(n, coefficient(1, n));
  }

  /// A_n under the active convention.
  double normalizer(std::size_t n) const {
    double s = power_sum(n, 2);
    if (convention_ == NormalizerConvention::trig) s *= 0.5;
    return std::sqrt(s);
  }

  /// d_n = max_k |a_{k,n}|.
  double max_abs(std::size_t n) const {
    if (n == 0) return 0.0;
    if (scheme_ != CoefficientScheme::custom) return std::abs(coefficient(1, n));
    check_row(n);
    double d = 0.0;
    for (double a : rows_[n - 1]) d = std::max(d, std::abs(a));
    return d;
  }

  /// c_{k,n} = a_{k,n} / A_n.
  double normalized(std::size_t k, std::size_t n) const {
    const double A = normalizer(n);
    if (A == 0.0) throw DomainError("normalizer vanishes");
    return coefficient(k, n) / A;
  }

  /// Sum of a_{k,n}^4, the finite-n estimate of kappa_4.
  double fourth_power_sum(std::size_t n) const { return power_sum(n, 4); }

  double power_sum(std::size_t n, int p) const {
    if (n == 0) return 0.0;
    if (scheme_ != CoefficientScheme::custom)
      return static_cast<double>(n) * std::pow(std::abs(coefficient(1, n)), p);
    check_row(n);
    double s = 0.0;
    for (double a : rows_[n - 1]) s += std::pow(std::abs(a), p);
    return s;
  }

 private:
  void check_row(std::size_t n) const {
    if (n > max_rows()) throw SizeError("coefficient row not available");
  }

  CoefficientScheme scheme_ = CoefficientScheme::unit;
  double alpha_ = 0.0;
  NormalizerConvention convention_ = NormalizerConvention::walsh;
  std::vector<std::vector<double>> rows_;
};

// ---------------------------------------------------------------------------
// DyadicStepFunction
// ---------------------------------------------------------------------------

inline constexpr unsigned max_dyadic_resolution = 28;

/// Function constant on the half-open cells [j/2^L, (j+1)/2^L).
class DyadicStepFunction {
 public:
  DyadicStepFunction() : values_(1, 0.0) {}

  DyadicStepFunction(unsigned resolution, std::vector<double> values)
      : resolution_(resolution), values_(std::move(values)) {
    if (resolution_ > max_dyadic_resolution) throw SizeError("dyadic resolution too large");
    if (values_.size() != (std::size_t{1} << resolution_))
      throw SizeError("a dyadic step function of resolution L needs 2^L values");
  }

  static DyadicStepFunction constant(double c, unsigned resolution = 0) {
    if (resolution > max_dyadic_resolution) throw SizeError("dyadic resolution too large");
    return {resolution, std::vector<double>(std::size_t{1} << resolution, c)};
  }

  unsigned resolution() const { return resolution_; }
  std::size_t cells() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  double cell_value(std::size_t j) const { return values_.at(j); }

  double operator()(double x) const {
    check_unit_interval(x);
    const auto j = static_cast<std::size_t>(std::ldexp(x, static_cast<int>(resolution_)));
    return values_[std::min(j, values_.size() - 1)];
  }

  /// Lebesgue integral over [0, 1).
  double integral() const {
    detail::CompensatedSum s;
    for (double v : values_) s.add(v);
    return std::ldexp(s.value(), -static_cast<int>(resolution_));
  }

  double l2_norm_squared() const {
    detail::CompensatedSum s;
    for (double v : values_) s.add(v * v);
    return std::ldexp(s.value(), -static_cast<int>(resolution_));
  }

  /// Cell averages at the coarser resolution r (conditional expectation on D_r).
  DyadicStepFunction coarsen(unsigned r) const {
    if (r > resolution_) throw SizeError("cannot coarsen to a finer resolution");
    const std::size_t block = std::size_t{1} << (resolution_ - r);
    std::vector<double> out(std::size_t{1} << r);
    for (std::size_t j = 0; j < out.size(); ++j) {
      detail::CompensatedSum s;
      for (std::size_t i = 0; i < block; ++i) s.add(values_[j * block + i]);
      out[j] = s.value() / static_cast<double>(block);
    }
    return {r, std::move(out)};
  }

  /// The same function written at a finer resolution.
  DyadicStepFunction refine(unsigned L) const {
    if (L < resolution_) throw SizeError("cannot refine to a coarser resolution");
    const std::size_t block = std::size_t{1} << (L - resolution_);
    std::vector<double> out;
    out.reserve(values_.size() * block);
    for (double v : values_) out.insert(out.end(), block, v);
    return {L, std::move(out)};
  }

  /// Distinct values with the number of cells carrying them; counts sum to 2^L.
  std::vector<std::pair<double, std::uint64_t>> induced_law() const {
    std::vector<double> sorted(values_);
    std::sort(sorted.begin(), sorted.end());
    std::vector<std::pair<double, std::uint64_t>> law;
    double scale = 0.0;
    for (double v : sorted) scale = std::max(scale, std::abs(v));
    const double tol = 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, scale);
    for (double v : sorted) {
      if (!law.empty() && v - law.back().first <= tol)
        ++law.back().second;
      else
        law.emplace_back(v, 1);
    }
    return law;
  }

  friend DyadicStepFunction operator-(const DyadicStepFunction& a, const DyadicStepFunction& b) {
    const unsigned L = std::max(a.resolution_, b.resolution_);
    DyadicStepFunction fa = a.refine(L);
    const DyadicStepFunction fb = b.refine(L);
    for (std::size_t j = 0; j < fa.values_.size(); ++j) fa.values_[j] -= fb.values_[j];
    return fa;
  }

 private:
  unsigned resolution_ = 0;
  std::vector<double> values_;
};

// ---------------------------------------------------------------------------
// Partial sums
// ---------------------------------------------------------------------------

inline void check_rows(const CoefficientTriangle& coeffs, const LacunarySequence& seq, std::size_t n) {
  if (n > coeffs.max_rows()) throw SizeError("not enough coefficient rows");
  if (n > seq.size()) throw SizeError("not enough sequence terms");
}

/// frac(m_k x), exact for integral terms.
inline double scaled_phase(const LacunarySequence& seq, std::size_t k, double x) {
  if (seq.integral() && seq.integer_terms_fit(k)) return detail::frac_mul(seq.integer_term(k), x);
  const double v = seq.term(k) * x;
  return v - std::floor(v);
}

/// sum_k a_{k,n} cos(2 pi m_k x).
inline double trig_partial_sum(const LacunarySequence& seq, const CoefficientTriangle& coeffs,
                               std::size_t n, double x) {
  if (!(x >= 0.0 && x <= 1.0)) throw DomainError("x must lie in [0, 1]");
  check_rows(coeffs, seq, n);
  double s = 0.0;
  for (std::size_t k = 1; k <= n; ++k)
    s += coeffs.coefficient(k, n) * std::cos(detail::two_pi * scaled_phase(seq, k, x));
  return s;
}

/// sum_k a_{k,n} f(m_k x) for a 1-periodic f.
inline double holder_partial_sum(const PeriodicFunction& f, const LacunarySequence& seq,
                                 const CoefficientTriangle& coeffs, std::size_t n, double x) {
  check_rows(coeffs, seq, n);
  double s = 0.0;
  for (std::size_t k = 1; k <= n; ++k) s += coeffs.coefficient(k, n) * f(scaled_phase(seq, k, x));
  return s;
}

/// The same sum at the point x = X / 2^64; frac(m_k x) is exact by wrapping multiplication.
inline double holder_partial_sum_fixed(const PeriodicFunction& f, std::span<const std::uint64_t> terms,
                                       std::span<const double> coefficients, std::uint64_t X) {
  double s = 0.0;
  for (std::size_t k = 0; k < terms.size(); ++k)
    s += coefficients[k] * f(detail::fixed_to_double(terms[k] * X));
  return s;
}

/// sum_k a_{k,n} W_{m_k}, exactly, at resolution L = 1 + bit_length(m_n).
inline DyadicStepFunction walsh_partial_sum(const LacunarySequence& seq, const CoefficientTriangle& coeffs,
                                            std::size_t n) {
  if (!seq.integral()) throw TypeError("Walsh sums need integral frequencies");
  check_rows(coeffs, seq, n);
  if (n == 0) return DyadicStepFunction::constant(0.0);
  if (!seq.integer_terms_fit(n)) throw SizeError("Walsh frequency exceeds 64 bits");
  const auto m = seq.integer_terms(n);
  const unsigned L = 1 + detail::bit_length(m.back());
  if (L > max_dyadic_resolution) throw SizeError("Walsh sum needs a dyadic resolution above the limit");
  const auto a = coeffs.row(n);
  std::vector<double> values(std::size_t{1} << L);
  for (std::size_t j = 0; j < values.size(); ++j) {
    // bit i of the reversed index is binary digit i+1 of the cell, the digit read by r_i
    const std::uint64_t digits = detail::reverse_bits(j, L);
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) s += (std::popcount(m[k] & digits) & 1) ? -a[k] : a[k];
    values[j] = s;
  }
  return {L, std::move(values)};
}

// ---------------------------------------------------------------------------
// Rademacher expansion of sum_k f(2^k x), f the first Bernoulli polynomial
// ---------------------------------------------------------------------------

inline constexpr std::size_t default_bernoulli_tail = 64;

/// Weights w with sum_{k=1}^n f(2^k x) = sum_i w_i r_i(x) up to 2^-tail.
///
/// weights[j] multiplies the Rademacher function r_{j+1}, which reads binary
/// digit j+2. The first n weights are -(1/2 - 2^-(j+2)); the following `tail`
/// ones are -(2^-(j+2-n) - 2^-(j+2)).
struct BernoulliExpansion {
  std::size_t n = 0;
  std::size_t tail = 0;
  std::vector<double> weights;

  static constexpr std::size_t first_rademacher_index = 1;

  double evaluate(double x) const {
    check_unit_interval(x);
    double s = 0.0;
    for (std::size_t j = 0; j < weights.size(); ++j)
      s += weights[j] * (binary_digit(x, j + 2) == 0 ? 1.0 : -1.0);
    return s;
  }

  double sum_of_squares() const {
    detail::CompensatedSum s;
    for (double w : weights) s.add(w * w);
    return s.value();
  }

  /// n/4 - 1/3 + 1/(3 2^n): the untruncated sum of squared weights.
  static double closed_form_variance(std::size_t n) {
    const double nn = static_cast<double>(n);
    return nn / 4.0 - 1.0 / 3.0 + std::ldexp(1.0 / 3.0, -static_cast<int>(std::min<std::size_t>(n, 2000)));
  }
};

inline BernoulliExpansion bernoulli_expansion_weights(std::size_t n, std::size_t tail = default_bernoulli_tail) {
  if (tail < 1) throw DomainError("tail must be at least 1");
  BernoulliExpansion e{n, tail, {}};
  if (n == 0) return e;
  e.weights.reserve(n + tail);
  for (std::size_t p = 2; p <= n + 1; ++p)
    e.weights.push_back(-(0.5 - std::ldexp(1.0, -static_cast<int>(p))));
  for (std::size_t p = n + 2; p <= n + 1 + tail; ++p)
    e.weights.push_back(-(std::ldexp(1.0, -static_cast<int>(p - n)) - std::ldexp(1.0, -static_cast<int>(p))));
  return e;
}

// ---------------------------------------------------------------------------
// Step approximation on b equal cells
// ---------------------------------------------------------------------------

enum class SampleRule { left, midpoint };

struct StepApproximation {
  std::vector<double> values;
  /// h * b^(-alpha) from the Hölder data.
  double error_bound = 0.0;

  double operator()(double x) const {
    const double fx = x - std::floor(x);
    const auto j = static_cast<std::size_t>(fx * static_cast<double>(values.size()));
    return values[std::min(j, values.size() - 1)];
  }
};

inline StepApproximation step_approximation(const PeriodicFunction& f, std::uint64_t b, SampleRule rule) {
  if (b < 2) throw ConstraintError("step approximation needs b >= 2");
  StepApproximation g;
  g.values.resize(b);
  const double offset = rule == SampleRule::midpoint ? 0.5 : 0.0;
  for (std::uint64_t j = 0; j < b; ++j)
    g.values[j] = f((static_cast<double>(j) + offset) / static_cast<double>(b));
  g.error_bound = f.holder_constant * std::pow(static_cast<double>(b), -f.holder_exponent);
  return g;
}

}  // namespace lacunary
