#pragma once

// Characteristic and moment generating functions of lacunary sums, their
// mod-Gaussian residuals, zone-of-control fits and the weak L1 check.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lacunary/detail/numeric.hpp"
#include "lacunary/errors.hpp"
#include "lacunary/series_core.hpp"

namespace lacunary {

using complex = std::complex<double>;

inline constexpr complex imaginary_unit{0.0, 1.0};

// ---------------------------------------------------------------------------
// Grid functions
// ---------------------------------------------------------------------------

/// Complex values on an ordered grid, tagged with the sum they describe.
struct ComplexGridFunction {
  std::vector<complex> grid;
  std::vector<complex> values;
  std::string label;
  std::size_t n = 0;
  /// Variance parameter t_n; 0 when not applicable.
  double t_n = 0.0;

  std::size_t size() const { return grid.size(); }

  /// Throws unless a real grid is strictly increasing.
  void check_order() const {
    if (grid.size() != values.size()) throw SizeError("grid and values differ in length");
    bool real = std::all_of(grid.begin(), grid.end(), [](complex z) { return z.imag() == 0.0; });
    if (!real) return;
    for (std::size_t i = 1; i < grid.size(); ++i)
      if (!(grid[i].real() > grid[i - 1].real())) throw ConstraintError("real grid must be strictly increasing");
  }
};

template <class F>
ComplexGridFunction tabulate(const std::vector<complex>& grid, F&& f, std::string label = {}, std::size_t n = 0,
                             double t_n = 0.0) {
  ComplexGridFunction g{grid, {}, std::move(label), n, t_n};
  g.values.reserve(grid.size());
  for (complex z : grid) g.values.push_back(f(z));
  g.check_order();
  return g;
}

/// count points evenly spaced on the real segment [lo, hi].
inline std::vector<complex> real_grid(double lo, double hi, std::size_t count) {
  std::vector<complex> out;
  if (count == 0) return out;
  if (count == 1) return {complex(lo, 0.0)};
  for (std::size_t i = 0; i < count; ++i)
    out.emplace_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1), 0.0);
  return out;
}

// ---------------------------------------------------------------------------
// Quadrature
// ---------------------------------------------------------------------------

/// A 1-periodic integrable sum together with its largest frequency (used to seed the node count).
struct PeriodicSum {
  std::function<double(double)> eval;
  double max_frequency = 1.0;

  static PeriodicSum trig(const LacunarySequence& seq, const CoefficientTriangle& coeffs, std::size_t n) {
    check_rows(coeffs, seq, n);
    return {[seq, coeffs, n](double x) { return trig_partial_sum(seq, coeffs, n, x); },
            n == 0 ? 1.0 : seq.term(n)};
  }

  static PeriodicSum holder(const PeriodicFunction& f, const LacunarySequence& seq,
                            const CoefficientTriangle& coeffs, std::size_t n) {
    check_rows(coeffs, seq, n);
    return {[f, seq, coeffs, n](double x) { return holder_partial_sum(f, seq, coeffs, n, x); },
            n == 0 ? 1.0 : seq.term(n)};
  }
};

inline constexpr std::size_t default_max_nodes = std::size_t{1} << 24;

/// E[e^{z S}] for x uniform on [0, 1): periodic trapezoid rule with node doubling.
///
/// Stops once two consecutive doublings change the estimate by less than tol.
inline complex mgf_quadrature(const PeriodicSum& S, complex z, double tol = 1e-12,
                              std::size_t max_nodes = default_max_nodes) {
  if (!(tol > 0.0)) throw DomainError("tol must be positive");
  if (z == complex(0.0, 0.0)) return 1.0;
  const double bits = std::isfinite(S.max_frequency) && S.max_frequency >= 1.0
                          ? std::floor(std::log2(S.max_frequency)) + 1.0
                          : 1.0;
  std::size_t N = 64 * (1 + static_cast<std::size_t>(bits));
  complex sum = 0.0;
  for (std::size_t j = 0; j < N; ++j) sum += std::exp(z * S.eval(static_cast<double>(j) / static_cast<double>(N)));
  complex estimate = sum / static_cast<double>(N);
  int agreed = 0;
  while (true) {
    if (2 * N > max_nodes) throw ConvergenceError("trapezoid rule did not converge", std::abs(estimate), std::abs(estimate));
    complex odd = 0.0;
    for (std::size_t j = 0; j < N; ++j)
      odd += std::exp(z * S.eval((2.0 * static_cast<double>(j) + 1.0) / (2.0 * static_cast<double>(N))));
    sum += odd;
    N *= 2;
    const complex next = sum / static_cast<double>(N);
    const double change = std::abs(next - estimate);
    if (change < tol) {
      if (++agreed >= 2) return next;
    } else {
      agreed = 0;
    }
    if (2 * N > max_nodes && change >= tol)
      throw ConvergenceError("trapezoid rule did not converge within the node budget", std::abs(estimate), std::abs(next));
    estimate = next;
  }
}

inline complex char_fn_quadrature(const PeriodicSum& S, double lambda, double tol = 1e-12,
                                  std::size_t max_nodes = default_max_nodes) {
  return mgf_quadrature(S, imaginary_unit * lambda, tol, max_nodes);
}

/// Exact cell summation for a dyadic step function.
inline complex mgf_quadrature(const DyadicStepFunction& S, complex z) {
  if (z == complex(0.0, 0.0)) return 1.0;
  complex s = 0.0;
  for (double v : S.values()) s += std::exp(z * v);
  return s / static_cast<double>(S.cells());
}

inline complex char_fn_quadrature(const DyadicStepFunction& S, double lambda) {
  return mgf_quadrature(S, imaginary_unit * lambda);
}

// ---------------------------------------------------------------------------
// Closed-form products
// ---------------------------------------------------------------------------

/// log cosh(w), stable for large |Re w|.
inline complex log_cosh(complex w) {
  const double s = w.real() >= 0.0 ? 1.0 : -1.0;
  return s * w + std::log((1.0 + std::exp(-2.0 * s * w)) * 0.5);
}

inline void require_independence(const LacunarySequence& seq) {
  if (!seq.integral() || !(seq.q() >= 2.0))
    throw PreconditionError("the product formula needs integral frequencies with ratio q >= 2");
}

/// log of prod_k cosh(z a_{k,n}); defined up to multiples of 2 pi i.
inline complex log_mgf_walsh_exact(const LacunarySequence& seq, const CoefficientTriangle& coeffs,
                                   std::size_t n, complex z) {
  require_independence(seq);
  check_rows(coeffs, seq, n);
  if (n == 0) return 0.0;
  if (coeffs.row_is_constant(n)) return static_cast<double>(n) * log_cosh(z * coeffs.coefficient(1, n));
  complex s = 0.0;
  for (double a : coeffs.row(n)) s += log_cosh(z * a);
  return s;
}

/// prod_k cosh(z a_{k,n}), the moment generating function of a Walsh sum with independent terms.
inline complex mgf_walsh_exact(const LacunarySequence& seq, const CoefficientTriangle& coeffs, std::size_t n,
                               complex z) {
  return std::exp(log_mgf_walsh_exact(seq, coeffs, n, z));
}

/// d^2/dz^2 log prod_k cosh(z a_k) = sum_k a_k^2 sech^2(z a_k).
inline complex log_mgf_walsh_second_derivative(const LacunarySequence& seq, const CoefficientTriangle& coeffs,
                                               std::size_t n, complex z) {
  require_independence(seq);
  check_rows(coeffs, seq, n);
  complex s = 0.0;
  for (std::size_t k = 1; k <= n; ++k) {
    const double a = coeffs.coefficient(k, n);
    const complex c = std::cosh(z * a);
    s += a * a / (c * c);
  }
  return s;
}

/// Central second difference with step h.
template <class F>
complex second_difference(F&& f, complex z, double h = 1e-5) {
  return (f(z + h) - 2.0 * f(z) + f(z - h)) / (h * h);
}

inline constexpr std::size_t min_bernoulli_mgf_tail = 40;

/// log E[e^{z scale S}], S = sum_{k=1}^n f(2^k x) with f the first Bernoulli polynomial.
inline complex log_mgf_bernoulli_exact(std::size_t n, complex z, std::size_t tail = default_bernoulli_tail,
                                       double scale = 1.0) {
  if (tail < min_bernoulli_mgf_tail) throw DomainError("Bernoulli MGF needs tail >= 40");
  const auto e = bernoulli_expansion_weights(n, tail);
  complex s = 0.0;
  // most leading weights round to -1/2; runs of equal weights are summed at once
  for (std::size_t i = 0; i < e.weights.size();) {
    std::size_t j = i;
    while (j < e.weights.size() && e.weights[j] == e.weights[i]) ++j;
    s += static_cast<double>(j - i) * log_cosh(z * (scale * e.weights[i]));
    i = j;
  }
  return s;
}

/// prod_p cosh(z w_p) over the Rademacher weights of the Bernoulli sum.
inline complex mgf_bernoulli_exact(std::size_t n, complex z, std::size_t tail = default_bernoulli_tail,
                                   double scale = 1.0) {
  return std::exp(log_mgf_bernoulli_exact(n, z, tail, scale));
}

// ---------------------------------------------------------------------------
// Transfer-operator characteristic function for integer-ratio frequency chains
// ---------------------------------------------------------------------------

/// Fourier coefficients of y -> exp(i u g(y)) for a fixed profile g, indexed -J..J.
using ProfileSpectrum = std::function<std::vector<complex>(double u)>;

/// Spectrum of exp(i u cos(2 pi y)): coefficient j is i^j J_j(u).
inline std::vector<complex> cosine_spectrum(double u) {
  const double au = std::abs(u);
  const int J = static_cast<int>(std::ceil(au + 12.0 * std::cbrt(au + 1.0) + 12.0));
  std::vector<complex> c(2 * static_cast<std::size_t>(J) + 1);
  static const complex powers[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  for (int j = 0; j <= J; ++j) {
    double bessel = std::cyl_bessel_j(static_cast<double>(j), au);
    if (u < 0.0 && (j % 2 == 1)) bessel = -bessel;  // J_j(-x) = (-1)^j J_j(x)
    const complex v = powers[j % 4] * bessel;
    c[static_cast<std::size_t>(J + j)] = v;
    // coefficient -j: i^{-j} J_{-j}(u) = i^{-j} (-1)^j J_j(u) = i^j J_j(u)
    c[static_cast<std::size_t>(J - j)] = v;
  }
  return c;
}

/// Spectrum of exp(i u g) for a trigonometric polynomial g, by a discrete Fourier transform.
inline ProfileSpectrum trigonometric_spectrum(const PeriodicFunction& g) {
  if (g.fourier.empty()) throw DomainError("profile has no Fourier description");
  std::uint64_t top = 0;
  double sup = 0.0;
  for (const auto& [k, a, b] : g.fourier) {
    top = std::max(top, k);
    sup += std::abs(a) + std::abs(b);
  }
  return [g, top, sup](double u) {
    const double reach = std::abs(u) * sup;
    const auto J = static_cast<std::size_t>(static_cast<double>(top) * (reach + 12.0 * std::cbrt(reach + 1.0) + 12.0));
    std::size_t N = 1;
    while (N < 4 * J + 8) N *= 2;
    std::vector<complex> samples(N);
    for (std::size_t s = 0; s < N; ++s)
      samples[s] = std::exp(imaginary_unit * u * g(static_cast<double>(s) / static_cast<double>(N)));
    std::vector<complex> c(2 * J + 1);
    for (std::size_t idx = 0; idx < c.size(); ++idx) {
      const double j = static_cast<double>(idx) - static_cast<double>(J);
      complex acc = 0.0;
      for (std::size_t s = 0; s < N; ++s)
        acc += samples[s] * std::polar(1.0, -detail::two_pi * j * static_cast<double>(s) / static_cast<double>(N));
      c[idx] = acc / static_cast<double>(N);
    }
    return c;
  };
}

/// E[exp(i lambda sum_k a_k g(m_k x))] when every ratio m_{k+1}/m_k is an integer.
///
/// Runs the transfer operator of y -> b y through the chain in Fourier space.
/// Spectra for equal coefficients are computed once.
inline complex char_fn_transfer(const LacunarySequence& seq, const CoefficientTriangle& coeffs, std::size_t n,
                                double lambda, const ProfileSpectrum& spectrum = cosine_spectrum) {
  check_rows(coeffs, seq, n);
  if (n == 0 || lambda == 0.0) return 1.0;
  if (!seq.integral()) throw TypeError("transfer operator needs integral frequencies");
  const auto ratios = seq.integer_ratios(n);
  if (!ratios) throw ConstraintError("transfer operator needs integer ratios m_{k+1}/m_k");
  const auto a = coeffs.row(n);
  std::map<double, std::vector<complex>> cache;
  std::vector<complex> rho{1.0};  // centred: index i is frequency i - (size-1)/2
  std::vector<complex> h;
  for (std::size_t k = 0; k < n; ++k) {
    auto [it, fresh] = cache.try_emplace(a[k]);
    if (fresh) it->second = spectrum(lambda * a[k]);
    const auto& g = it->second;
    const long R = static_cast<long>(rho.size() / 2);
    const long G = static_cast<long>(g.size() / 2);
    h.assign(rho.size() + g.size() - 1, 0.0);
    for (std::size_t i = 0; i < rho.size(); ++i) {
      if (rho[i] == complex(0.0, 0.0)) continue;
      for (std::size_t j = 0; j < g.size(); ++j) h[i + j] += rho[i] * g[j];
    }
    const long H = R + G;
    if (k + 1 == n) return h[static_cast<std::size_t>(H)];
    const long b = static_cast<long>((*ratios)[k]);
    const long Rn = H / b;
    rho.assign(2 * static_cast<std::size_t>(Rn) + 1, 0.0);
    for (long j = -Rn; j <= Rn; ++j) rho[static_cast<std::size_t>(j + Rn)] = h[static_cast<std::size_t>(H + b * j)];
    // drop negligible outer frequencies
    std::size_t trim = 0;
    while (rho.size() > 2 * trim + 1 && std::abs(rho[trim]) < 1e-18 && std::abs(rho[rho.size() - 1 - trim]) < 1e-18) ++trim;
    if (trim > 0) rho = std::vector<complex>(rho.begin() + static_cast<long>(trim), rho.end() - static_cast<long>(trim));
  }
  return 1.0;
}

// ---------------------------------------------------------------------------
// Mod-Gaussian residuals and limiting functions
// ---------------------------------------------------------------------------

/// phi(z) exp(-t_n z^2 / 2) pointwise.
inline ComplexGridFunction mod_gaussian_residual(const ComplexGridFunction& phi, double t_n) {
  if (!(t_n > 0.0)) throw DomainError("t_n must be positive");
  ComplexGridFunction r = phi;
  r.t_n = t_n;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const complex z = r.grid[i];
    const complex v = phi.values[i];
    r.values[i] = v == complex(0.0, 0.0) ? complex(0.0, 0.0) : std::exp(std::log(v) - t_n * z * z * 0.5);
  }
  return r;
}

/// exp(log phi - t_n z^2 / 2), which avoids overflow of phi itself.
inline complex residual_from_log(complex log_phi, double t_n, complex z) {
  return std::exp(log_phi - t_n * z * z * 0.5);
}

enum class LimitKind { walsh, bernoulli, trivial };

struct LimitingFunction {
  LimitKind kind = LimitKind::trivial;
  double kappa4 = 1.0;

  static LimitingFunction walsh(double kappa4) {
    if (!(kappa4 >= 0.0)) throw DomainError("kappa4 must be nonnegative");
    return {LimitKind::walsh, kappa4};
  }
  static LimitingFunction bernoulli() { return {LimitKind::bernoulli, 0.0}; }
  static LimitingFunction trivial() { return {LimitKind::trivial, 0.0}; }

  complex operator()(complex z) const {
    const complex z4 = z * z * z * z;
    switch (kind) {
      case LimitKind::walsh: return std::exp(-z4 * kappa4 / 12.0);
      case LimitKind::bernoulli: return std::exp(-z4 / 192.0);
      case LimitKind::trivial: return 1.0;
    }
    return 1.0;
  }
};

inline complex limiting_function(const LimitingFunction& psi, complex z) { return psi(z); }

/// Smallest |psi| on a grid over the window |Re z| <= re, |Im z| <= im.
inline double min_modulus_on_window(const LimitingFunction& psi, double re = 2.0, double im = 2.0,
                                    std::size_t per_axis = 81) {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < per_axis; ++i)
    for (std::size_t j = 0; j < per_axis; ++j) {
      const double x = -re + 2.0 * re * static_cast<double>(i) / static_cast<double>(per_axis - 1);
      const double y = -im + 2.0 * im * static_cast<double>(j) / static_cast<double>(per_axis - 1);
      m = std::min(m, std::abs(psi(complex(x, y))));
    }
  return m;
}

inline constexpr double nonvanishing_threshold = 1e-6;

inline bool nonvanishing_on_window(const LimitingFunction& psi, double re = 2.0, double im = 2.0) {
  return min_modulus_on_window(psi, re, im) >= nonvanishing_threshold;
}

// ---------------------------------------------------------------------------
// Zone of control
// ---------------------------------------------------------------------------

struct ZoneOfControlReport {
  double v = 0.0;
  double w = 0.0;
  double gamma = 0.0;
  double D = 1.0;
  double K1 = 0.0;
  double K2 = 0.0;
  /// Unclamped least-squares value of K2.
  double K2_fit = 0.0;
  /// (1/(4 K2))^(1/(w-2)), the largest admissible D.
  double D_max = std::numeric_limits<double>::infinity();
  bool z1 = false;
  bool z2 = false;
  bool pass = false;
  std::optional<std::size_t> offending_n;
  std::optional<double> offending_lambda;
  std::string message;
};

struct ZoneOfControlOptions {
  std::size_t fit_points = 256;
  std::size_t check_density = 4;
  /// Lower edge of the sampled window as a fraction of its upper edge.
  double inner_fraction = 1.0 / 32.0;
  /// Floor on K2 so that D_max stays finite and meaningful.
  double k2_floor = 1e-6;
  /// K1 above this value is treated as unbounded growth.
  double k1_cap = 1e6;
};

/// Fits K1, K2 with |phi_n(i lambda) e^{t_n lambda^2/2} - 1| <= K1 |lambda|^v e^{K2 |lambda|^w}.
///
/// log_phi(n, lambda) returns log E[exp(i lambda X_n)].
inline ZoneOfControlReport zone_of_control_check(const std::function<complex(std::size_t, double)>& log_phi,
                                                 const std::function<double(std::size_t)>& t_n, double v, double w,
                                                 double gamma, double D, const std::vector<std::size_t>& n_list,
                                                 const ZoneOfControlOptions& opt = {}) {
  if (!(w >= 2.0)) throw DomainError("zone of control needs w >= 2");
  ZoneOfControlReport rep;
  rep.v = v;
  rep.w = w;
  rep.gamma = gamma;
  rep.D = D;

  auto residual = [&](std::size_t n, double lambda) {
    return std::abs(std::exp(log_phi(n, lambda) + t_n(n) * lambda * lambda * 0.5) - 1.0);
  };
  auto grid = [&](double zone, std::size_t count) {
    std::vector<double> g(count);
    const double lo = zone * opt.inner_fraction;
    for (std::size_t i = 0; i < count; ++i)
      g[i] = lo * std::pow(zone / lo, static_cast<double>(i) / static_cast<double>(count - 1));
    return g;
  };

  // pooled least squares: log|res| - v log|lambda| = c + K2 |lambda|^w
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t m = 0;
  for (std::size_t n : n_list) {
    const double zone = D * std::pow(t_n(n), gamma);
    for (double lambda : grid(zone, opt.fit_points)) {
      const double r = residual(n, lambda);
      if (!(r > 0.0) || !std::isfinite(r)) continue;
      const double x = std::pow(lambda, w);
      const double y = std::log(r) - v * std::log(lambda);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
      ++m;
    }
  }
  const double denom = static_cast<double>(m) * sxx - sx * sx;
  rep.K2_fit = (m >= 2 && denom > 0.0) ? (static_cast<double>(m) * sxy - sx * sy) / denom : 0.0;
  rep.K2 = std::max(rep.K2_fit, opt.k2_floor);

  // K1: supremum of the ratio on a denser grid, both signs of lambda
  double K1 = 0.0;
  bool finite = true;
  for (std::size_t n : n_list) {
    const double zone = D * std::pow(t_n(n), gamma);
    for (double mag : grid(zone, opt.fit_points * opt.check_density)) {
      for (double lambda : {mag, -mag}) {
        const double r = residual(n, lambda);
        const double ratio = r / (std::pow(mag, v) * std::exp(rep.K2 * std::pow(mag, w)));
        if (!std::isfinite(ratio) || ratio > opt.k1_cap) {
          if (finite) {
            rep.offending_n = n;
            rep.offending_lambda = lambda;
          }
          finite = false;
        } else if (ratio > K1) {
          K1 = ratio;
          if (finite) {
            rep.offending_n = n;
            rep.offending_lambda = lambda;
          }
        }
      }
    }
  }
  rep.K1 = finite ? K1 : std::numeric_limits<double>::infinity();
  rep.z1 = finite;

  const bool gamma_ok = gamma >= -0.5 && (w == 2.0 || gamma <= 1.0 / (w - 2.0));
  if (w == 2.0)
    rep.D_max = 4.0 * rep.K2 < 1.0 ? std::numeric_limits<double>::infinity() : 0.0;
  else
    rep.D_max = std::pow(1.0 / (4.0 * rep.K2), 1.0 / (w - 2.0));
  rep.z2 = gamma_ok && D <= rep.D_max;
  rep.pass = rep.z1 && rep.z2;
  if (!rep.z1)
    rep.message = "residual grows without bound";
  else if (!gamma_ok)
    rep.message = "gamma outside [-1/2, 1/(w-2)]";
  else if (!rep.z2)
    rep.message = "D exceeds (1/(4 K2))^(1/(w-2))";
  else
    rep.message = "ok";
  if (rep.pass && K1 == 0.0) {
    rep.offending_n.reset();
    rep.offending_lambda.reset();
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Weak mod-Gaussian L1 check
// ---------------------------------------------------------------------------

struct L1Point {
  std::size_t n = 0;
  double A_n = 0.0;
  double error = 0.0;
};

/// For each n: integral over [-K A_n, K A_n] of |phi_n(lambda / A_n) - e^{-lambda^2/2}|.
///
/// phi(n, t) returns E[exp(i t S_n)]; conjugate symmetry halves the work.
inline std::vector<L1Point> weak_modgauss_l1_check(const std::function<complex(std::size_t, double)>& phi,
                                                   const std::function<double(std::size_t)>& A_n, double K,
                                                   const std::vector<std::size_t>& n_list, std::size_t panels = 32) {
  if (!(K > 0.0)) throw DomainError("K must be positive");
  const auto& rule = detail::gauss_legendre<8>();
  std::vector<L1Point> out;
  for (std::size_t n : n_list) {
    const double A = A_n(n);
    if (!(A > 0.0)) throw DomainError("A_n must be positive");
    const double top = K * A;
    double total = 0.0;
    for (std::size_t p = 0; p < panels; ++p) {
      const double lo = top * static_cast<double>(p) / static_cast<double>(panels);
      const double hi = top * static_cast<double>(p + 1) / static_cast<double>(panels);
      total += rule.integrate(
          [&](double lambda) { return std::abs(phi(n, lambda / A) - std::exp(-0.5 * lambda * lambda)); }, lo, hi);
    }
    out.push_back({n, A, 2.0 * total});
  }
  return out;
}

inline bool strictly_decreasing(const std::vector<L1Point>& seq) {
  for (std::size_t i = 1; i < seq.size(); ++i)
    if (!(seq[i].error < seq[i - 1].error)) return false;
  return true;
}

}  // namespace lacunary
