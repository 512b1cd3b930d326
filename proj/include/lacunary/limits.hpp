#pragma once

// Laws of lacunary partial sums and the statistics of the limit theorems:
// Kolmogorov distance, local limit windows, tail ratios and moderate deviations.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "lacunary/charfn.hpp"
#include "lacunary/detail/numeric.hpp"
#include "lacunary/errors.hpp"
#include "lacunary/series_core.hpp"

namespace lacunary {

// ---------------------------------------------------------------------------
// Interval sets
// ---------------------------------------------------------------------------

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Finite union of half-open intervals [lo, hi), kept sorted and disjoint.
class IntervalSet {
 public:
  IntervalSet() = default;
  IntervalSet(std::initializer_list<Interval> parts) : IntervalSet(std::vector<Interval>(parts)) {}
  explicit IntervalSet(std::vector<Interval> parts) {
    std::vector<Interval> kept;
    for (const auto& p : parts) {
      if (!(p.hi >= p.lo)) throw DomainError("interval with hi < lo");
      if (p.hi > p.lo) kept.push_back(p);
    }
    std::sort(kept.begin(), kept.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
    for (const auto& p : kept) {
      if (!parts_.empty() && p.lo <= parts_.back().hi)
        parts_.back().hi = std::max(parts_.back().hi, p.hi);
      else
        parts_.push_back(p);
    }
  }

  bool empty() const { return parts_.empty(); }
  const std::vector<Interval>& parts() const { return parts_; }

  double measure() const {
    double m = 0.0;
    for (const auto& p : parts_) m += p.hi - p.lo;
    return m;
  }

  /// { shift + factor * b : b in B } for factor > 0.
  IntervalSet affine(double shift, double factor) const {
    if (!(factor > 0.0)) throw DomainError("scale factor must be positive");
    std::vector<Interval> out;
    for (const auto& p : parts_) out.push_back({shift + factor * p.lo, shift + factor * p.hi});
    return IntervalSet(std::move(out));
  }

 private:
  std::vector<Interval> parts_;
};

// ---------------------------------------------------------------------------
// DiscreteLaw
// ---------------------------------------------------------------------------

enum class LawSource { walsh_exact, binomial, dyadic_cells, monte_carlo };

inline const char* to_string(LawSource s) {
  switch (s) {
    case LawSource::walsh_exact: return "walsh-exact";
    case LawSource::binomial: return "binomial";
    case LawSource::dyadic_cells: return "dyadic-cells";
    case LawSource::monte_carlo: return "monte-carlo";
  }
  return "unknown";
}

struct Atom {
  double value = 0.0;
  double mass = 0.0;
  /// Exact numerator over 2^log2_denominator when the law carries exact counts.
  std::uint64_t count = 0;
};

/// Finitely supported law with strictly increasing atoms.
///
/// When exact counts are present the masses are count / 2^log2_denominator.
class DiscreteLaw {
 public:
  DiscreteLaw() = default;

  /// Atoms with double masses; equal values are merged, zero masses dropped.
  static DiscreteLaw from_masses(std::vector<std::pair<double, double>> atoms, LawSource source) {
    std::sort(atoms.begin(), atoms.end());
    DiscreteLaw law;
    law.source_ = source;
    for (const auto& [v, m] : atoms) {
      if (!(m >= 0.0)) throw DomainError("atom masses must be nonnegative");
      if (m == 0.0) continue;
      if (!law.atoms_.empty() && law.atoms_.back().value == v)
        law.atoms_.back().mass += m;
      else
        law.atoms_.push_back({v, m, 0});
    }
    law.finish();
    return law;
  }

  /// Atoms with exact counts over 2^log2_denominator.
  static DiscreteLaw from_counts(std::vector<std::pair<double, std::uint64_t>> atoms, unsigned log2_denominator,
                                 LawSource source) {
    if (log2_denominator > 63) throw SizeError("exact denominators are limited to 2^63");
    std::sort(atoms.begin(), atoms.end());
    DiscreteLaw law;
    law.source_ = source;
    law.log2_denominator_ = log2_denominator;
    for (const auto& [v, c] : atoms) {
      if (c == 0) continue;
      if (!law.atoms_.empty() && law.atoms_.back().value == v)
        law.atoms_.back().count += c;
      else
        law.atoms_.push_back({v, 0.0, c});
    }
    for (auto& a : law.atoms_) a.mass = std::ldexp(static_cast<double>(a.count), -static_cast<int>(log2_denominator));
    law.finish();
    return law;
  }

  const std::vector<Atom>& atoms() const { return atoms_; }
  std::size_t size() const { return atoms_.size(); }
  LawSource source() const { return source_; }
  bool exact() const { return log2_denominator_.has_value(); }
  std::optional<unsigned> log2_denominator() const { return log2_denominator_; }
  std::optional<std::uint64_t> seed() const { return seed_; }
  std::optional<std::uint64_t> samples() const { return samples_; }

  void set_sampling(std::uint64_t seed, std::uint64_t samples) {
    seed_ = seed;
    samples_ = samples;
  }

  /// True when exact counts add up to the denominator.
  bool exactly_normalized() const {
    if (!exact()) return false;
    unsigned __int128 s = 0;
    for (const auto& a : atoms_) s += a.count;
    return s == (static_cast<unsigned __int128>(1) << *log2_denominator_);
  }

  double total_mass() const { return atoms_.empty() ? 0.0 : prefix_.back(); }

  /// P[X <= t].
  double cdf(double t) const {
    const auto it = std::upper_bound(atoms_.begin(), atoms_.end(), t,
                                     [](double v, const Atom& a) { return v < a.value; });
    return mass_below(static_cast<std::size_t>(it - atoms_.begin()));
  }

  /// P[X < t].
  double cdf_left(double t) const {
    const auto it = std::lower_bound(atoms_.begin(), atoms_.end(), t,
                                     [](const Atom& a, double v) { return a.value < v; });
    return mass_below(static_cast<std::size_t>(it - atoms_.begin()));
  }

  /// P[X >= t].
  double survival(double t) const {
    const auto it = std::lower_bound(atoms_.begin(), atoms_.end(), t,
                                     [](const Atom& a, double v) { return a.value < v; });
    const auto i = static_cast<std::size_t>(it - atoms_.begin());
    return i == atoms_.size() ? 0.0 : suffix_[i];
  }

  /// P[X in B] for a union of half-open intervals.
  double mass_in(const IntervalSet& B) const {
    double m = 0.0;
    for (const auto& p : B.parts()) {
      const auto first = std::lower_bound(atoms_.begin(), atoms_.end(), p.lo,
                                          [](const Atom& a, double v) { return a.value < v; });
      for (auto it = first; it != atoms_.end() && it->value < p.hi; ++it) m += it->mass;
    }
    return m;
  }

  double mean() const {
    detail::CompensatedSum s;
    for (const auto& a : atoms_) s.add(a.value * a.mass);
    return s.value();
  }

  double variance() const {
    const double mu = mean();
    detail::CompensatedSum s;
    for (const auto& a : atoms_) s.add((a.value - mu) * (a.value - mu) * a.mass);
    return s.value();
  }

  /// Law of c X for c > 0.
  DiscreteLaw scaled(double c) const {
    if (!(c > 0.0)) throw DomainError("scale must be positive");
    DiscreteLaw out = *this;
    for (auto& a : out.atoms_) a.value *= c;
    return out;
  }

 private:
  void finish() {
    prefix_.assign(atoms_.size(), 0.0);
    suffix_.assign(atoms_.size(), 0.0);
    detail::CompensatedSum s;
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
      s.add(atoms_[i].mass);
      prefix_[i] = s.value();
    }
    detail::CompensatedSum r;
    for (std::size_t i = atoms_.size(); i-- > 0;) {
      r.add(atoms_[i].mass);
      suffix_[i] = r.value();
    }
  }

  /// Mass of the first i atoms, read from whichever end is smaller.
  double mass_below(std::size_t i) const {
    if (i == 0) return 0.0;
    if (i == atoms_.size()) return prefix_.back();
    if (prefix_[i - 1] <= 0.5) return prefix_[i - 1];
    return prefix_.back() - suffix_[i];
  }

  std::vector<Atom> atoms_;
  std::vector<double> prefix_;
  std::vector<double> suffix_;
  LawSource source_ = LawSource::dyadic_cells;
  std::optional<unsigned> log2_denominator_;
  std::optional<std::uint64_t> seed_;
  std::optional<std::uint64_t> samples_;
};

// ---------------------------------------------------------------------------
// Law constructors
// ---------------------------------------------------------------------------

/// Lebesgue pushforward of an exact step function: cell counts over 2^L.
inline DiscreteLaw exact_law(const DyadicStepFunction& S, LawSource source = LawSource::dyadic_cells) {
  auto law = S.induced_law();
  return DiscreteLaw::from_counts(std::move(law), S.resolution(), source);
}

/// Normalised binomial probabilities C(n, j) / 2^n by the ratio recurrence from the mode.
inline std::vector<double> binomial_pmf(std::size_t n) {
  std::vector<double> p(n + 1, 0.0);
  const std::size_t mode = n / 2;
  p[mode] = 1.0;
  for (std::size_t j = mode; j < n; ++j)
    p[j + 1] = p[j] * static_cast<double>(n - j) / static_cast<double>(j + 1);
  for (std::size_t j = mode; j > 0; --j) p[j - 1] = p[j] * static_cast<double>(j) / static_cast<double>(n - j + 1);
  detail::CompensatedSum s;
  for (double v : p) s.add(v);
  const double total = s.value();
  for (double& v : p) v /= total;
  return p;
}

/// Law of a * sum of n independent signs: atoms a (n - 2j) with mass C(n, j) / 2^n.
inline DiscreteLaw binomial_sign_law(std::size_t n, double a) {
  if (!(a > 0.0)) throw DomainError("coefficient must be positive");
  if (n <= 62) {
    std::vector<std::pair<double, std::uint64_t>> atoms;
    for (std::size_t j = 0; j <= n; ++j)
      atoms.emplace_back(a * (static_cast<double>(n) - 2.0 * static_cast<double>(j)),
                         detail::choose_u64(static_cast<unsigned>(n), static_cast<unsigned>(j)));
    return DiscreteLaw::from_counts(std::move(atoms), static_cast<unsigned>(n), LawSource::binomial);
  }
  const auto p = binomial_pmf(n);
  std::vector<std::pair<double, double>> atoms;
  atoms.reserve(n + 1);
  for (std::size_t j = 0; j <= n; ++j)
    atoms.emplace_back(a * (static_cast<double>(n) - 2.0 * static_cast<double>(j)), p[j]);
  return DiscreteLaw::from_masses(std::move(atoms), LawSource::binomial);
}

inline constexpr std::size_t max_convolution_atoms = std::size_t{1} << 22;

/// Law of sum_k w_k eps_k for independent fair signs eps_k, by repeated convolution.
inline DiscreteLaw weighted_sign_law(const std::vector<double>& weights) {
  std::vector<std::pair<double, double>> law{{0.0, 1.0}};
  for (double w : weights) {
    std::vector<std::pair<double, double>> next;
    next.reserve(2 * law.size());
    for (const auto& [v, m] : law) {
      next.emplace_back(v - w, 0.5 * m);
      next.emplace_back(v + w, 0.5 * m);
    }
    std::sort(next.begin(), next.end());
    law.clear();
    for (const auto& a : next) {
      if (!law.empty() && a.first == law.back().first)
        law.back().second += a.second;
      else
        law.push_back(a);
    }
    if (law.size() > max_convolution_atoms) throw SizeError("convolution law has too many atoms");
  }
  return DiscreteLaw::from_masses(std::move(law), LawSource::walsh_exact);
}

/// Law of sum_k a_{k,n} W_{m_k} when q >= 2 makes the terms independent signs.
inline DiscreteLaw walsh_independent_law(const LacunarySequence& seq, const CoefficientTriangle& coeffs,
                                         std::size_t n) {
  require_independence(seq);
  check_rows(coeffs, seq, n);
  if (n == 0) return DiscreteLaw::from_counts({{0.0, 1}}, 0, LawSource::walsh_exact);
  if (coeffs.row_is_constant(n) && coeffs.coefficient(1, n) > 0.0) return binomial_sign_law(n, coeffs.coefficient(1, n));
  return weighted_sign_law(coeffs.row(n));
}

/// Exact Walsh law: cell counts when the step function is small enough, the sign law otherwise.
inline DiscreteLaw walsh_law(const LacunarySequence& seq, const CoefficientTriangle& coeffs, std::size_t n) {
  if (seq.integer_terms_fit(std::min(n, seq.size())) && n <= seq.size() && n > 0) {
    const unsigned L = 1 + detail::bit_length(seq.integer_term(n));
    if (L <= 22) return exact_law(walsh_partial_sum(seq, coeffs, n), LawSource::walsh_exact);
  }
  return walsh_independent_law(seq, coeffs, n);
}

/// SplitMix64 step; used to derive one independent offset per stratum.
inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline constexpr unsigned default_strata_log2 = 22;

/// Stratified Monte-Carlo law of sum_k a_{k,n} f(m_k x): one uniform point in each of 2^log2_strata cells.
///
/// Points are 64-bit fixed-point numbers, so frac(m_k x) is exact. The result does
/// not depend on the thread count.
inline DiscreteLaw monte_carlo_law(const PeriodicFunction& f, const LacunarySequence& seq,
                                   const CoefficientTriangle& coeffs, std::size_t n, std::uint64_t seed = 0,
                                   unsigned log2_strata = default_strata_log2, unsigned threads = 0) {
  check_rows(coeffs, seq, n);
  if (log2_strata > 30) throw SizeError("too many strata");
  if (!seq.integer_terms_fit(n)) throw SizeError("Monte-Carlo path needs integral frequencies below 2^64");
  const auto terms = seq.integer_terms(n);
  const auto a = coeffs.row(n);
  const std::size_t N = std::size_t{1} << log2_strata;
  std::vector<double> values(N);
  unsigned workers = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, N));
  auto job = [&](std::size_t begin, std::size_t end) {
    for (std::size_t j = begin; j < end; ++j) {
      const std::uint64_t offset = log2_strata == 0 ? splitmix64(seed ^ j)
                                                    : splitmix64(seed ^ j) >> log2_strata;
      const std::uint64_t X = log2_strata == 0 ? offset : (static_cast<std::uint64_t>(j) << (64 - log2_strata)) | offset;
      values[j] = holder_partial_sum_fixed(f, terms, a, X);
    }
  };
  if (workers <= 1) {
    job(0, N);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (N + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
      const std::size_t b = w * chunk;
      const std::size_t e = std::min(N, b + chunk);
      if (b < e) pool.emplace_back(job, b, e);
    }
    for (auto& t : pool) t.join();
  }
  std::vector<std::pair<double, double>> atoms;
  atoms.reserve(N);
  const double m = 1.0 / static_cast<double>(N);
  for (double v : values) atoms.emplace_back(v, m);
  auto law = DiscreteLaw::from_masses(std::move(atoms), LawSource::monte_carlo);
  law.set_sampling(seed, N);
  return law;
}

// ---------------------------------------------------------------------------
// Exact law of sum_{k=1}^n f(2^k x), f the first Bernoulli polynomial
// ---------------------------------------------------------------------------

/// Continuous law of X = scale * sum_{k=1}^n f(2^k x).
///
/// With N the integer formed by binary digits 2..n+1 of x, K = popcount(N),
/// Y = N / 2^n and U the uniform tail of the digits, the sum equals
/// K - Y + (1 - 2^-n) U - n/2. The distribution function is assembled from
/// binomial sums and a digit recursion for E[(Y - theta)_+ ; K = k].
class BernoulliSumLaw {
 public:
  explicit BernoulliSumLaw(std::size_t n, double scale = 1.0)
      : n_(n), scale_(scale), logf_(n + 1), c_(1.0 - std::ldexp(1.0, -static_cast<int>(std::min<std::size_t>(n, 2000)))) {
    if (n == 0) throw DomainError("Bernoulli law needs n >= 1");
    if (!(scale > 0.0)) throw DomainError("scale must be positive");
    pmf_ = binomial_pmf(n);
    below_.assign(n + 1, 0.0);
    detail::CompensatedSum s;
    for (std::size_t k = 0; k <= n; ++k) {
      s.add(pmf_[k]);
      below_[k] = s.value();
    }
  }

  std::size_t n() const { return n_; }
  double scale() const { return scale_; }

  /// Variance of the raw sum: n/4 - 1/3 + 1/(3 2^n).
  double raw_variance() const { return BernoulliExpansion::closed_form_variance(n_); }
  double variance() const { return scale_ * scale_ * raw_variance(); }

  /// P[X <= t].
  double cdf(double t) const {
    const double s = t / scale_;
    return s <= 0.0 ? raw_cdf(s) : 1.0 - raw_cdf(-s);
  }
  double cdf_left(double t) const { return cdf(t); }

  /// P[X >= t].
  double survival(double t) const {
    const double s = t / scale_;
    return s >= 0.0 ? raw_cdf(-s) : 1.0 - raw_cdf(s);
  }

  double mass_in(const IntervalSet& B) const {
    double m = 0.0;
    for (const auto& p : B.parts()) {
      if (p.hi <= 0.0)
        m += cdf(p.hi) - cdf(p.lo);
      else if (p.lo >= 0.0)
        m += survival(p.lo) - survival(p.hi);
      else
        m += (0.5 - cdf(p.lo)) + (0.5 - survival(p.hi));
    }
    return m;
  }

  /// P[S <= s] for the unscaled sum.
  double raw_cdf(double s_raw) const {
    const double s = s_raw + 0.5 * static_cast<double>(n_);
    const double full = std::floor(s - c_);
    double F = 0.0;
    if (full >= 0.0) F = full >= static_cast<double>(n_) ? 1.0 : below_[static_cast<std::size_t>(full)];
    const long k_lo = static_cast<long>(std::max(0.0, full + 1.0));
    const long k_hi = static_cast<long>(std::min(static_cast<double>(n_), std::ceil(s + c_)));
    for (long k = k_lo; k <= k_hi; ++k) {
      const double a = s - static_cast<double>(k);
      if (a >= c_) continue;  // already in the full part
      F += (partial_moment(k, -a) - partial_moment(k, c_ - a)) / c_;
    }
    return std::clamp(F, 0.0, 1.0);
  }

  /// E[(Y - theta)_+ ; K = k].
  double partial_moment(long k, double theta) const {
    const auto n = static_cast<long>(n_);
    if (k < 0 || k > n) return 0.0;
    const double nd = static_cast<double>(n_);
    if (theta < 0.0) return pmf_[static_cast<std::size_t>(k)] * (static_cast<double>(k) / nd * c_ - theta);
    if (theta >= c_) return 0.0;
    const double ln2 = std::numbers::ln2;
    double total = 0.0;
    double rem = theta;
    long ones = 0;
    for (long d = 1; d <= n; ++d) {
      rem *= 2.0;
      const bool digit = rem >= 1.0;
      if (digit) rem -= 1.0;
      if (!digit) {
        const long R = n - d;
        const long r = k - ones - 1;
        if (r >= 0 && r <= R) {
          const double lw = logf_.log_choose(R, r) - (nd + static_cast<double>(d)) * ln2;
          double bracket = 1.0 - rem;
          if (R > 0) bracket += static_cast<double>(r) / static_cast<double>(R) * -std::expm1(-static_cast<double>(R) * ln2);
          total += std::exp(lw) * bracket;
        }
      } else if (++ones > k) {
        return total;
      }
      if (rem == 0.0) {
        const long Z = n - d;
        const long rr = k - ones;
        if (Z >= 1 && rr >= 1) {
          const double lw = logf_.log_choose(Z - 1, rr - 1) - (nd + static_cast<double>(d)) * ln2;
          total += std::exp(lw) * -std::expm1(-static_cast<double>(Z) * ln2);
        }
        return total;
      }
    }
    return total;
  }

 private:
  std::size_t n_;
  double scale_;
  detail::LogFactorials logf_;
  double c_;
  std::vector<double> pmf_;
  std::vector<double> below_;
};

// ---------------------------------------------------------------------------
// Statistics
// ---------------------------------------------------------------------------

/// sup_t |F(t) - Phi(t / A)| over the atoms of a discrete law, using both one-sided limits.
inline double kolmogorov_distance(const DiscreteLaw& law, double A = 1.0) {
  if (!(A > 0.0)) throw DomainError("normaliser must be positive");
  double d = 0.0;
  const auto& atoms = law.atoms();
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    const double phi = detail::normal_cdf(atoms[i].value / A);
    const double left = law.cdf_left(atoms[i].value);
    const double right = law.cdf(atoms[i].value);
    d = std::max({d, std::abs(left - phi), std::abs(right - phi)});
  }
  return d;
}

struct KolmogorovOptions {
  /// Grid step in units of the unscaled sum.
  double step = 1.0 / 64.0;
  /// Half-width of the scanned window in standard deviations.
  double width = 6.0;
  std::size_t refine_candidates = 8;
};

/// sup_t |F(t) - Phi(t / A)| for the continuous Bernoulli law: grid scan, then golden-section refinement.
inline double kolmogorov_distance(const BernoulliSumLaw& law, double A, const KolmogorovOptions& opt = {}) {
  if (!(A > 0.0)) throw DomainError("normaliser must be positive");
  auto gap = [&](double t) { return std::abs(law.cdf(t) - detail::normal_cdf(t / A)); };
  const double h = opt.step * law.scale();
  const double half = opt.width * std::sqrt(law.variance());
  const auto steps = static_cast<long>(std::ceil(half / h));
  std::vector<std::pair<double, double>> scan;
  scan.reserve(2 * static_cast<std::size_t>(steps) + 1);
  for (long i = -steps; i <= steps; ++i) {
    const double t = static_cast<double>(i) * h;
    scan.emplace_back(gap(t), t);
  }
  double best = 0.0;
  for (const auto& [g, t] : scan) best = std::max(best, g);
  std::vector<std::pair<double, double>> local;
  for (std::size_t i = 1; i + 1 < scan.size(); ++i)
    if (scan[i].first >= scan[i - 1].first && scan[i].first >= scan[i + 1].first) local.push_back(scan[i]);
  std::sort(local.begin(), local.end(), std::greater<>());
  if (local.size() > opt.refine_candidates) local.resize(opt.refine_candidates);
  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  for (const auto& [g0, t0] : local) {
    double a = t0 - h, b = t0 + h;
    double x1 = b - ratio * (b - a), x2 = a + ratio * (b - a);
    double f1 = gap(x1), f2 = gap(x2);
    for (int it = 0; it < 60; ++it) {
      if (f1 > f2) {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - ratio * (b - a);
        f1 = gap(x1);
      } else {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + ratio * (b - a);
        f2 = gap(x2);
      }
    }
    best = std::max({best, f1, f2, g0});
  }
  return best;
}

struct LltResult {
  double statistic = 0.0;
  double target = 0.0;
  double abs_error = 0.0;
};

/// A^{2 delta} P[X / A - y in A^{-2 delta} B], with A^2 = t_n; target e^{-y^2/2} |B| / sqrt(2 pi).
///
/// delta = 1/2 and y = 0 gives the weak form A P[X in B].
template <class Law>
LltResult llt_statistic(const Law& law, double A, double y, const IntervalSet& B, double delta = 0.5) {
  if (B.empty() || !(B.measure() > 0.0)) throw DomainError("window B must have positive measure");
  if (!(A > 0.0)) throw DomainError("normaliser must be positive");
  if (!(delta > 0.0)) throw DomainError("delta must be positive");
  const double shrink = std::pow(A, -2.0 * delta);
  const IntervalSet window = B.affine(A * y, A * shrink);
  LltResult r;
  r.statistic = law.mass_in(window) / shrink;
  r.target = B.measure() * detail::normal_density(y);
  r.abs_error = std::abs(r.statistic - r.target);
  return r;
}

/// P[X / A >= y] divided by the Gaussian tail at y.
template <class Law>
double tail_ratio_extended_clt(const Law& law, double A, double y) {
  if (!(y >= 0.0)) throw DomainError("y must be nonnegative");
  if (!(A > 0.0)) throw DomainError("normaliser must be positive");
  const double gauss = detail::normal_tail(y);
  if (gauss < 1e-300) throw RangeError("Gaussian tail underflows");
  return law.survival(A * y) / gauss;
}

struct ModerateDeviation {
  double observed = 0.0;
  double predicted = 0.0;
  double ratio() const { return observed / predicted; }
};

/// Observed P[X >= A^2 y] (P[X <= A^2 y] for y < 0) against e^{-A^2 y^2/2} psi(y) / (|y| A sqrt(2 pi)).
template <class Law>
ModerateDeviation moderate_deviation_check(const Law& law, double A, double y, const LimitingFunction& psi) {
  if (y == 0.0) throw DomainError("y must be nonzero");
  if (!(A > 0.0)) throw DomainError("normaliser must be positive");
  ModerateDeviation md;
  const double edge = A * A * y;
  md.observed = y > 0.0 ? law.survival(edge) : law.cdf(edge);
  md.predicted = std::exp(-0.5 * A * A * y * y) / (std::abs(y) * A * std::sqrt(2.0 * std::numbers::pi)) *
                 psi(complex(y, 0.0)).real();
  return md;
}

struct RatePoint {
  double A_n = 0.0;
  double distance = 0.0;
};

/// Least-squares slope of log distance against log A_n.
inline double berry_esseen_rate_fit(const std::vector<RatePoint>& points) {
  if (points.size() < 3) throw DomainError("rate fit needs at least three points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& p : points) {
    if (!(p.distance > 0.0) || !(p.A_n > 0.0)) throw DomainError("distances and normalisers must be positive");
    const double x = std::log(p.A_n), y = std::log(p.distance);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double m = static_cast<double>(points.size());
  const double denom = m * sxx - sx * sx;
  if (!(denom > 0.0)) throw DomainError("normalisers must not all coincide");
  return (m * sxy - sx * sy) / denom;
}

}  // namespace lacunary
