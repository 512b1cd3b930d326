#pragma once

// Dyadic filtration machinery: conditional expectations f_r = E[f | D_r],
// remainders phi_r = f - f_r, increments, the shifted-sum inequality and the
// variance limit of sum_k f(2^k x).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "lacunary/detail/numeric.hpp"
#include "lacunary/errors.hpp"
#include "lacunary/series_core.hpp"

namespace lacunary {

namespace detail {

/// Average of f over [a, b) by Gauss-Legendre with adaptive bisection.
inline double cell_average(const PeriodicFunction& f, double a, double b, double rel_tol = 1e-10) {
  const auto& rule = gauss_legendre<8>();
  auto gl = [&](double lo, double hi) { return rule.integrate([&](double x) { return f(x); }, lo, hi); };
  auto adapt = [&](auto&& self, double lo, double hi, double whole, int depth) -> double {
    const double mid = 0.5 * (lo + hi);
    const double left = gl(lo, mid);
    const double right = gl(mid, hi);
    const double refined = left + right;
    const double scale = std::max(std::abs(refined), (hi - lo) * 1e-6);
    if (std::abs(refined - whole) <= rel_tol * scale) return refined;
    if (depth >= 40) throw ConvergenceError("cell average did not converge", whole, refined);
    return self(self, lo, mid, left, depth + 1) + self(self, mid, hi, right, depth + 1);
  };
  return adapt(adapt, a, b, gl(a, b), 0) / (b - a);
}

}  // namespace detail

/// E[f | D_r]: the averages of f over the 2^r cells [j/2^r, (j+1)/2^r).
inline DyadicStepFunction dyadic_condexp(const PeriodicFunction& f, unsigned r) {
  if (r > max_dyadic_resolution) throw SizeError("resolution too large for a stored step function");
  const std::size_t cells = std::size_t{1} << r;
  std::vector<double> v(cells);
  const double w = std::ldexp(1.0, -static_cast<int>(r));
  for (std::size_t j = 0; j < cells; ++j) v[j] = detail::cell_average(f, static_cast<double>(j) * w, static_cast<double>(j + 1) * w);
  return {r, std::move(v)};
}

/// sum_{s > r} h 2^{-s beta} = h 2^{-(r+1) beta} / (1 - 2^{-beta}), a bound for sum_{s > r} ||phi_s||_2.
inline double norm_series_tail(const PeriodicFunction& f, unsigned r) {
  if (!(f.holder_exponent > 0.0)) throw DomainError("Hölder exponent must be positive");
  return f.holder_constant * std::pow(2.0, -static_cast<double>(r + 1) * f.holder_exponent) /
         (1.0 - std::pow(2.0, -f.holder_exponent));
}

inline constexpr unsigned default_decomposition_depth = 24;
inline constexpr unsigned default_stored_depth = 14;

/// f_r, phi_r norms and increments of a periodic function along the dyadic filtration.
///
/// Norms ||phi_s||_2 for s <= depth come from one depth-first pass over the
/// 2^depth finest cells, merging cell means and within-cell variances upward,
/// so no norm is formed as a difference of nearly equal numbers. Step
/// functions f_r are kept only up to stored_depth.
class DyadicDecomposition {
 public:
  DyadicDecomposition(PeriodicFunction f, unsigned depth = default_decomposition_depth,
                      unsigned stored_depth = default_stored_depth, unsigned threads = 1)
      : f_(std::move(f)), depth_(depth) {
    if (depth > 30) throw SizeError("decomposition depth must not exceed 30");
    if (f_.jump_level > static_cast<int>(depth)) throw DomainError("depth must resolve the jumps of f");
    const unsigned stored = std::min(stored_depth, depth);
    for (unsigned r = 0; r <= stored; ++r) levels_.push_back(dyadic_condexp(f_, r));
    compute_norms(threads);
  }

  const PeriodicFunction& function() const { return f_; }
  unsigned depth() const { return depth_; }
  unsigned stored_depth() const { return static_cast<unsigned>(levels_.size() - 1); }

  /// f_r for r <= stored_depth.
  const DyadicStepFunction& level(unsigned r) const {
    if (r >= levels_.size()) throw SizeError("level not stored");
    return levels_[r];
  }

  /// Delta_r = f_r - f_{r-1}, for 1 <= r <= stored_depth.
  DyadicStepFunction increment(unsigned r) const {
    if (r == 0) throw DomainError("increments start at r = 1");
    return level(r) - level(r - 1);
  }

  /// ||phi_s||_2 for s <= depth.
  double phi_norm(unsigned s) const { return std::sqrt(phi_norm_squared(s)); }
  double phi_norm_squared(unsigned s) const {
    if (s > depth_) throw SizeError("norm beyond the decomposition depth");
    return phi_sq_[s];
  }

  double mean() const { return mean_; }
  double l2_norm_squared() const { return phi_sq_[0] + mean_ * mean_; }

  /// sum_{s=r+1}^{depth} ||phi_s||_2, without the tail beyond the depth.
  double phi_norm_sum(unsigned r) const {
    double s = 0.0;
    for (unsigned k = r + 1; k <= depth_; ++k) s += phi_norm(k);
    return s;
  }

  /// Least-squares slope of log2 ||phi_s||_2 over s in [lo, hi]; about -beta for Hölder f.
  double decay_exponent(unsigned lo, unsigned hi) const {
    double sx = 0, sy = 0, sxx = 0, sxy = 0, m = 0;
    for (unsigned s = lo; s <= std::min(hi, depth_); ++s) {
      const double v = phi_norm(s);
      if (!(v > 0.0)) continue;
      const double x = s, y = std::log2(v);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
      m += 1;
    }
    if (m < 2) return 0.0;
    return (m * sxy - sx * sy) / (m * sxx - sx * sx);
  }

 private:
  struct CellStats {
    double mean;
    double var;  // average of (f - mean)^2 over the cell
  };

  CellStats leaf(double a, double b) const {
    const auto& rule = detail::gauss_legendre<8>();
    const double c = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = f_(c);
    double s1 = 0.0, s2 = 0.0, sf = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      const double fx = f_(c + half * rule.nodes[i]);
      const double d = fx - fc;
      sf += rule.weights[i] * fx;
      s1 += rule.weights[i] * d;
      s2 += rule.weights[i] * d * d;
    }
    s1 *= 0.5;
    s2 *= 0.5;
    return {0.5 * sf, std::max(0.0, s2 - s1 * s1)};
  }

  /// Visits the subtree of cell j at level r, adding 2^-s var to sums[s].
  CellStats visit(unsigned r, std::uint64_t j, std::vector<detail::CompensatedSum>& sums) const {
    CellStats st{};
    if (r == depth_) {
      const double w = std::ldexp(1.0, -static_cast<int>(r));
      st = leaf(static_cast<double>(j) * w, static_cast<double>(j + 1) * w);
    } else {
      const CellStats a = visit(r + 1, 2 * j, sums);
      const CellStats b = visit(r + 1, 2 * j + 1, sums);
      const double d = 0.5 * (a.mean - b.mean);
      st = {0.5 * (a.mean + b.mean), 0.5 * (a.var + b.var) + d * d};
    }
    sums[r].add(std::ldexp(st.var, -static_cast<int>(r)));
    return st;
  }

  void compute_norms(unsigned threads) {
    // split at a fixed level so the result does not depend on the thread count
    const unsigned split = std::min(depth_, 6u);
    const std::size_t roots = std::size_t{1} << split;
    std::vector<std::vector<detail::CompensatedSum>> partial(roots, std::vector<detail::CompensatedSum>(depth_ + 1));
    std::vector<CellStats> top(roots);
    unsigned workers = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, roots));
    auto job = [&](unsigned w) {
      for (std::size_t j = w; j < roots; j += workers) top[j] = visit(split, j, partial[j]);
    };
    if (workers <= 1) {
      job(0);
    } else {
      std::vector<std::thread> pool;
      for (unsigned w = 0; w < workers; ++w) pool.emplace_back(job, w);
      for (auto& t : pool) t.join();
    }
    std::vector<double> sums(depth_ + 1, 0.0);
    for (unsigned s = split; s <= depth_; ++s) {
      detail::CompensatedSum acc;
      for (std::size_t j = 0; j < roots; ++j) acc.add(partial[j][s].value());
      sums[s] = acc.value();
    }
    // merge the top cells below the split level
    std::vector<CellStats> layer = top;
    for (unsigned s = split; s-- > 0;) {
      std::vector<CellStats> up(layer.size() / 2);
      detail::CompensatedSum acc;
      for (std::size_t j = 0; j < up.size(); ++j) {
        const double d = 0.5 * (layer[2 * j].mean - layer[2 * j + 1].mean);
        up[j] = {0.5 * (layer[2 * j].mean + layer[2 * j + 1].mean), 0.5 * (layer[2 * j].var + layer[2 * j + 1].var) + d * d};
        acc.add(std::ldexp(up[j].var, -static_cast<int>(s)));
      }
      sums[s] = acc.value();
      layer = std::move(up);
    }
    mean_ = layer.front().mean;
    phi_sq_ = std::move(sums);
  }

  PeriodicFunction f_;
  unsigned depth_;
  std::vector<DyadicStepFunction> levels_;
  std::vector<double> phi_sq_;
  double mean_ = 0.0;
};

struct MartingaleCheck {
  unsigned r = 0;
  std::size_t n = 0;
  /// (1/n) ||phi_r(x) + phi_r(2x) + ... + phi_r(2^{n-1} x)||_2^2
  double lhs = 0.0;
  /// ||phi_r||^2 + 2 ||phi_r|| (sum_{s=r+1}^{depth} ||phi_s|| + tail)
  double rhs = 0.0;
  double tail_bound = 0.0;
  /// Rounding allowance for the comparison, 1e-13 ||f||^2.
  double rounding = 0.0;
  double margin() const { return rhs - lhs; }
  bool holds() const { return lhs <= rhs + rounding; }
};

namespace detail {

/// (1/n) ||sum_{k<n} phi_r(2^k x)||^2 by 3-point Gauss-Legendre on cells at level r + n + 4.
inline double shifted_remainder_energy(const PeriodicFunction& f, const DyadicStepFunction& fr, std::size_t n,
                                       unsigned threads) {
  const unsigned r = fr.resolution();
  const unsigned L = r + static_cast<unsigned>(n) + 4;
  if (L > 32) throw SizeError("quadrature level r + n + 4 exceeds 32");
  const auto& rule = gauss_legendre<3>();
  const std::uint64_t cells = std::uint64_t{1} << L;
  const double w = std::ldexp(1.0, -static_cast<int>(L));
  const double scale_r = std::ldexp(1.0, static_cast<int>(r));
  auto phi = [&](double y) {
    const auto j = static_cast<std::size_t>(y * scale_r);
    return f(y) - fr.cell_value(std::min(j, fr.cells() - 1));
  };
  const std::uint64_t blocks = std::min<std::uint64_t>(cells, 64);
  const std::uint64_t per_block = cells / blocks;
  std::vector<double> partial(blocks, 0.0);
  auto job = [&](std::uint64_t b) {
    CompensatedSum acc;
    for (std::uint64_t j = b * per_block; j < (b + 1) * per_block; ++j) {
      const double c = (static_cast<double>(j) + 0.5) * w;
      double cell = 0.0;
      for (std::size_t i = 0; i < 3; ++i) {
        double y = c + 0.5 * w * rule.nodes[i];
        double s = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          s += phi(y);
          y = 2.0 * y;
          if (y >= 1.0) y -= 1.0;
        }
        cell += rule.weights[i] * s * s;
      }
      acc.add(cell * 0.5 * w);
    }
    partial[b] = acc.value();
  };
  unsigned workers = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
  workers = static_cast<unsigned>(std::min<std::uint64_t>(workers, blocks));
  if (workers <= 1) {
    for (std::uint64_t b = 0; b < blocks; ++b) job(b);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < workers; ++t)
      pool.emplace_back([&, t] {
        for (std::uint64_t b = t; b < blocks; b += workers) job(b);
      });
    for (auto& t : pool) t.join();
  }
  CompensatedSum total;
  for (double v : partial) total.add(v);
  return total.value() / static_cast<double>(n);
}

}  // namespace detail

/// Both sides of (1/n)||sum_{k<n} phi_r(2^k x)||^2 <= ||phi_r||^2 + 2||phi_r|| sum_{s>r} ||phi_s||.
///
/// The series on the right is truncated at the decomposition depth and the
/// Hölder tail bound is added.
inline MartingaleCheck martingale_inequality_check(const DyadicDecomposition& dec, unsigned r, std::size_t n,
                                                   unsigned threads = 1) {
  if (n < 1) throw DomainError("n must be at least 1");
  if (r >= dec.depth()) throw SizeError("r must lie below the decomposition depth");
  const PeriodicFunction& f = dec.function();
  MartingaleCheck c;
  c.r = r;
  c.n = n;
  const DyadicStepFunction fr = r <= dec.stored_depth() ? dec.level(r) : dyadic_condexp(f, r);
  c.lhs = detail::shifted_remainder_energy(f, fr, n, threads);
  c.tail_bound = norm_series_tail(f, dec.depth());
  c.rounding = 1e-13 * dec.l2_norm_squared();
  const double pr = dec.phi_norm(r);
  const double measured = pr * pr + 2.0 * pr * dec.phi_norm_sum(r);
  c.rhs = measured + 2.0 * pr * c.tail_bound;
  if (2.0 * pr * c.tail_bound > measured && measured > 0.0)
    throw PrecisionError("the truncation remainder dominates the right-hand side");
  return c;
}

inline MartingaleCheck martingale_inequality_check(const PeriodicFunction& f, unsigned r, std::size_t n,
                                                   unsigned depth = default_decomposition_depth, unsigned threads = 1) {
  return martingale_inequality_check(DyadicDecomposition(f, depth, std::min(r, default_stored_depth), threads), r, n,
                                     threads);
}

// ---------------------------------------------------------------------------
// Variance limit
// ---------------------------------------------------------------------------

struct SigmaPoint {
  std::size_t n = 0;
  double value = 0.0;
};

struct SigmaEstimate {
  std::vector<SigmaPoint> points;
  /// Intercept of value ~ sigma^2 + c / n fitted over the last entries.
  double sigma_squared = 0.0;
  /// The limit is (numerically) zero, which the central limit theorem excludes.
  bool degenerate = false;
};

inline constexpr std::size_t max_sigma_n = 20;

/// <f, f(2^j .)> by Gauss-Legendre on cells fine enough to isolate every jump.
inline double shift_correlation(const PeriodicFunction& f, std::size_t j) {
  const unsigned L = static_cast<unsigned>(j) + static_cast<unsigned>(std::max(f.jump_level, 0)) + 3;
  const auto& rule = detail::gauss_legendre<8>();
  const std::uint64_t cells = std::uint64_t{1} << L;
  const double w = std::ldexp(1.0, -static_cast<int>(L));
  const double m = std::ldexp(1.0, static_cast<int>(j));
  detail::CompensatedSum acc;
  for (std::uint64_t c = 0; c < cells; ++c) {
    const double a = static_cast<double>(c) * w;
    acc.add(rule.integrate(
        [&](double x) {
          const double y = m * x;
          return f(x) * f(y - std::floor(y));
        },
        a, a + w));
  }
  return acc.value();
}

/// (1/n) ||sum_{k<n} f(2^k x)||^2 for each n, via n||f||^2 + 2 sum_j (n - j) <f, f(2^j .)>.
inline SigmaEstimate sigma_estimate(const PeriodicFunction& f, const std::vector<std::size_t>& n_list) {
  SigmaEstimate est;
  if (n_list.empty()) return est;
  const std::size_t top = *std::max_element(n_list.begin(), n_list.end());
  if (top > max_sigma_n) throw SizeError("sigma_estimate supports n <= 20");
  std::vector<double> corr(top, 0.0);
  for (std::size_t j = 0; j < top; ++j) corr[j] = shift_correlation(f, j);
  for (std::size_t n : n_list) {
    if (n == 0) throw DomainError("n must be positive");
    double s = static_cast<double>(n) * corr[0];
    for (std::size_t j = 1; j < n; ++j) s += 2.0 * static_cast<double>(n - j) * corr[j];
    est.points.push_back({n, s / static_cast<double>(n)});
  }
  // value = sigma^2 + c / n over the last (up to) four points
  const std::size_t k = std::min<std::size_t>(4, est.points.size());
  if (k >= 2) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = est.points.size() - k; i < est.points.size(); ++i) {
      const double x = 1.0 / static_cast<double>(est.points[i].n), y = est.points[i].value;
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    const double m = static_cast<double>(k);
    const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    est.sigma_squared = (sy - slope * sx) / m;
  } else {
    est.sigma_squared = est.points.back().value;
  }
  est.degenerate = std::abs(est.sigma_squared) <= 1e-6 * std::max(corr[0], 1e-300);
  return est;
}

}  // namespace lacunary
