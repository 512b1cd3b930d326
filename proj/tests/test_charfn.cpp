#include <gtest/gtest.h>

#include <cmath>

#include "lacunary/charfn.hpp"

using namespace lacunary;

namespace {

// E[exp(z sum_{k=1}^n f(2^k x))]: the sum is affine with slope 2^{n+1} - 2 on each cell of size 2^-n.
complex bernoulli_mgf_by_cells(std::size_t n, complex z) {
  const std::size_t cells = std::size_t{1} << n;
  const double h = 1.0 / static_cast<double>(cells);
  const double slope = std::ldexp(1.0, static_cast<int>(n) + 1) - 2.0;
  complex total = 0.0;
  for (std::size_t j = 0; j < cells; ++j) {
    const double x = static_cast<double>(j) * h;
    double start = 0.0;
    for (std::size_t k = 1; k <= n; ++k) start += bernoulli1(std::ldexp(x, static_cast<int>(k)));
    const complex w = z * slope * h;
    const complex integral = std::abs(w) < 1e-12 ? complex(h) : h * (std::exp(w) - 1.0) / w;
    total += std::exp(z * start) * integral;
  }
  return total;
}

}  // namespace

TEST(WalshMgf, AgreesWithExactCellQuadrature) {
  const auto seq = LacunarySequence::power(2, 12);
  const auto coeffs = CoefficientTriangle::flat(0.25, NormalizerConvention::walsh);
  for (std::size_t n : {1u, 5u, 10u}) {
    const auto S = walsh_partial_sum(seq, coeffs, n);
    for (double x : {-2.0, -0.3, 0.7, 1.9}) {
      const complex exact = mgf_walsh_exact(seq, coeffs, n, x);
      EXPECT_LT(std::abs(exact - mgf_quadrature(S, x)), 1e-12 * std::abs(exact));
      EXPECT_LT(std::abs(mgf_walsh_exact(seq, coeffs, n, complex(0, x)) - char_fn_quadrature(S, x)), 1e-12);
    }
  }
}

TEST(WalshMgf, SecondDerivativeAtZeroIsVariance) {
  const auto seq = LacunarySequence::power(3, 40);
  const auto coeffs = CoefficientTriangle::custom(
      [] {
        std::vector<std::vector<double>> rows;
        for (std::size_t n = 1; n <= 40; ++n) {
          std::vector<double> r;
          for (std::size_t k = 1; k <= n; ++k) r.push_back(1.0 / std::sqrt(static_cast<double>(k)));
          rows.push_back(r);
        }
        return rows;
      }(),
      NormalizerConvention::walsh);
  for (std::size_t n : {3u, 17u, 40u}) {
    const double var = coeffs.power_sum(n, 2);
    EXPECT_NEAR(log_mgf_walsh_second_derivative(seq, coeffs, n, 0.0).real(), var, 1e-12 * var);
    const auto f = [&](complex z) { return log_mgf_walsh_exact(seq, coeffs, n, z); };
    EXPECT_NEAR(second_difference(f, 0.0).real(), var, 1e-4 * var);
  }
}

TEST(WalshMgf, RequiresIndependence) {
  const auto coeffs = CoefficientTriangle::unit(NormalizerConvention::walsh);
  EXPECT_THROW(log_mgf_walsh_exact(LacunarySequence::interleaved(8), coeffs, 4, 0.5), PreconditionError);
}

TEST(WalshMgf, LogCoshIsStableForLargeArguments) {
  EXPECT_NEAR(log_cosh(800.0).real(), 800.0 - std::log(2.0), 1e-12);
  EXPECT_NEAR(log_cosh(-800.0).real(), 800.0 - std::log(2.0), 1e-12);
  EXPECT_NEAR(std::abs(log_cosh(complex(0.3, 0.2)) - std::log(std::cosh(complex(0.3, 0.2)))), 0.0, 1e-15);
}

TEST(BernoulliMgf, AgreesWithCellIntegration) {
  for (std::size_t n : {1u, 3u, 8u}) {
    for (complex z : {complex(0.7, 0.0), complex(-1.3, 0.0), complex(0.0, 2.5), complex(0.4, -0.9)}) {
      const complex exact = mgf_bernoulli_exact(n, z);
      EXPECT_LT(std::abs(exact - bernoulli_mgf_by_cells(n, z)), 1e-12 * std::max(1.0, std::abs(exact)));
    }
  }
}

TEST(BernoulliMgf, SecondDerivativeMatchesClosedFormVariance) {
  for (std::size_t n : {1u, 2u, 8u, 20u}) {
    const auto f = [n](complex z) { return log_mgf_bernoulli_exact(n, z); };
    const double var = BernoulliExpansion::closed_form_variance(n);
    EXPECT_NEAR(second_difference(f, 0.0, 1e-4).real(), var, 1e-5 * std::max(1.0, var));
  }
  EXPECT_THROW(log_mgf_bernoulli_exact(4, 0.5, 10), DomainError);
}

TEST(TrigCharFn, TransferMatchesQuadrature) {
  const auto seq = LacunarySequence::power(2, 32);
  const auto coeffs = CoefficientTriangle::flat(0.4, NormalizerConvention::trig);
  for (std::size_t n : {1u, 4u, 9u})
    for (double lambda : {-2.0, 0.5, 3.0})
      EXPECT_LT(std::abs(char_fn_transfer(seq, coeffs, n, lambda) -
                         char_fn_quadrature(PeriodicSum::trig(seq, coeffs, n), lambda)),
                1e-11);
}

TEST(TrigCharFn, SingleCosineIsBesselJ0) {
  const auto unit = CoefficientTriangle::unit(NormalizerConvention::trig);
  for (double lambda : {0.5, 2.0, 7.5})
    EXPECT_NEAR(char_fn_transfer(LacunarySequence::power(3, 2), unit, 1, lambda).real(),
                std::cyl_bessel_j(0.0, lambda), 1e-13);
}

TEST(TrigCharFn, CustomProfileSpectrum) {
  const auto g = PeriodicFunction::trigonometric({{1, 0.5, 0.0}, {2, 0.0, 0.25}});
  const auto seq = LacunarySequence::power(3, 8);
  const auto unit = CoefficientTriangle::unit(NormalizerConvention::trig);
  const std::size_t n = 4;
  for (double lambda : {0.8, 2.2}) {
    const complex transfer = char_fn_transfer(seq, unit, n, lambda, trigonometric_spectrum(g));
    const complex quad = char_fn_quadrature(PeriodicSum::holder(g, seq, unit, n), lambda);
    EXPECT_LT(std::abs(transfer - quad), 1e-10);
  }
}

TEST(TrigCharFn, ConjugateSymmetry) {
  const auto seq = LacunarySequence::power(2, 8);
  const auto coeffs = CoefficientTriangle::flat(0.4, NormalizerConvention::trig);
  const auto S = PeriodicSum::trig(seq, coeffs, 6);
  const complex a = char_fn_quadrature(S, 1.7), b = char_fn_quadrature(S, -1.7);
  EXPECT_LT(std::abs(a - std::conj(b)), 1e-12);
  EXPECT_EQ(char_fn_quadrature(S, 0.0), complex(1.0));
}

TEST(Quadrature, ReportsNonConvergence) {
  const auto seq = LacunarySequence::power(2, 40);
  const auto unit = CoefficientTriangle::unit(NormalizerConvention::trig);
  EXPECT_THROW(char_fn_quadrature(PeriodicSum::trig(seq, unit, 30), 3.0, 1e-14, 1 << 12), ConvergenceError);
}

TEST(Residual, GaussianGivesOne) {
  const double t_n = 3.5;
  const auto grid = real_grid(-2.0, 2.0, 41);
  const auto phi = tabulate(grid, [&](complex z) { return std::exp(t_n * z * z * 0.5); }, "gauss", 0, t_n);
  const auto r = mod_gaussian_residual(phi, t_n);
  for (const auto& v : r.values) EXPECT_LT(std::abs(v - 1.0), 1e-14);
  EXPECT_THROW(mod_gaussian_residual(phi, 0.0), DomainError);
  EXPECT_THROW(tabulate({complex(1.0), complex(0.0)}, [](complex) { return complex(1.0); }), ConstraintError);
}

TEST(Residual, WalshApproachesQuarticLimit) {
  const auto seq = LacunarySequence::power(2, 1 << 16);
  const auto coeffs = CoefficientTriangle::flat(0.25, NormalizerConvention::walsh);
  const auto psi = LimitingFunction::walsh(1.0);
  double previous = 1e300;
  for (std::size_t n : {256u, 4096u, 65536u}) {
    const double t_n = coeffs.power_sum(n, 2);
    double worst = 0.0;
    for (double z = -1.0; z <= 1.0; z += 0.05)
      worst = std::max(worst, std::abs(residual_from_log(log_mgf_walsh_exact(seq, coeffs, n, z), t_n, z) - psi(z)));
    EXPECT_LT(worst, previous);
    previous = worst;
  }
  EXPECT_LT(previous, 1e-3);
}

TEST(LimitingFunction, NonvanishingOnWindow) {
  EXPECT_TRUE(nonvanishing_on_window(LimitingFunction::walsh(1.0)));
  EXPECT_TRUE(nonvanishing_on_window(LimitingFunction::bernoulli()));
  EXPECT_DOUBLE_EQ(min_modulus_on_window(LimitingFunction::trivial()), 1.0);
  EXPECT_NEAR(LimitingFunction::bernoulli()(2.0).real(), std::exp(-16.0 / 192.0), 1e-15);
  EXPECT_THROW(LimitingFunction::walsh(-1.0), DomainError);
}

TEST(ZoneOfControl, WalshFlatFamilyPasses) {
  const auto seq = LacunarySequence::power(2, 1 << 12);
  const auto coeffs = CoefficientTriangle::flat(0.25, NormalizerConvention::walsh);
  const auto rep = zone_of_control_check(
      [&](std::size_t n, double l) { return log_mgf_walsh_exact(seq, coeffs, n, complex(0, l)); },
      [&](std::size_t n) { return coeffs.power_sum(n, 2); }, 4.0, 4.0, 0.1, 1.0, {256, 1024, 4096});
  EXPECT_TRUE(rep.pass) << rep.message;
  EXPECT_TRUE(rep.z1);
  EXPECT_TRUE(rep.z2);
  EXPECT_GT(rep.K1, 0.0);
  EXPECT_LE(rep.D, rep.D_max);
}

TEST(ZoneOfControl, RejectsSmallW) {
  EXPECT_THROW(zone_of_control_check([](std::size_t, double) { return complex(0.0); },
                                     [](std::size_t) { return 1.0; }, 2.0, 1.5, 0.1, 1.0, {4}),
               DomainError);
}

TEST(WeakL1, ErrorsDecreaseForTrigFlatFamily) {
  const auto seq = LacunarySequence::power(2, 1 << 10);
  const auto coeffs = CoefficientTriangle::flat(0.4, NormalizerConvention::trig);
  const auto pts = weak_modgauss_l1_check(
      [&](std::size_t n, double t) { return char_fn_transfer(seq, coeffs, n, t); },
      [&](std::size_t n) { return coeffs.normalizer(n); }, 2.0, {64, 128, 256});
  ASSERT_EQ(pts.size(), 3u);
  EXPECT_TRUE(strictly_decreasing(pts));
  for (const auto& p : pts) EXPECT_GT(p.error, 0.0);
}
