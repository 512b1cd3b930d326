#include <gtest/gtest.h>

#include <cmath>

#include "lacunary/martingale.hpp"

using namespace lacunary;

TEST(DyadicCondexp, CellAveragesOfCosine) {
  const auto f = PeriodicFunction::cosine();
  const auto e = dyadic_condexp(f, 3);
  for (std::size_t j = 0; j < 8; ++j) {
    const double a = j / 8.0, b = (j + 1) / 8.0;
    const double exact = (std::sin(detail::two_pi * b) - std::sin(detail::two_pi * a)) / (detail::two_pi / 8.0);
    EXPECT_NEAR(e.cell_value(j), exact, 1e-12);
  }
  EXPECT_NEAR(e.integral(), 0.0, 1e-14);
  EXPECT_THROW(dyadic_condexp(f, 29), SizeError);
}

TEST(DyadicCondexp, TowerProperty) {
  const auto f = PeriodicFunction::bernoulli();
  const auto fine = dyadic_condexp(f, 10);
  for (unsigned r : {0u, 3u, 7u}) {
    const auto direct = dyadic_condexp(f, r);
    EXPECT_LT((fine.coarsen(r) - direct).l2_norm_squared(), 1e-24);
  }
}

TEST(DyadicDecomposition, PythagorasAndNormDecay) {
  const DyadicDecomposition cos_dec(PeriodicFunction::cosine(), 16, 8);
  EXPECT_NEAR(cos_dec.l2_norm_squared(), 0.5, 1e-10);
  for (unsigned r = 0; r <= 8; ++r)
    EXPECT_NEAR(cos_dec.level(r).l2_norm_squared() + cos_dec.phi_norm_squared(r), 0.5, 1e-9);
  EXPECT_NEAR(cos_dec.decay_exponent(4, 16), -1.0, 0.02);

  const DyadicDecomposition b_dec(PeriodicFunction::bernoulli(), 16, 8);
  EXPECT_NEAR(b_dec.l2_norm_squared(), 1.0 / 12.0, 1e-10);
  // f - f_r is a sawtooth of height 2^-r on every cell
  for (unsigned r : {0u, 5u, 12u}) EXPECT_NEAR(b_dec.phi_norm_squared(r), std::ldexp(1.0 / 12.0, -2 * static_cast<int>(r)), 1e-12);
  EXPECT_NEAR(b_dec.decay_exponent(2, 16), -1.0, 1e-6);
}

TEST(DyadicDecomposition, IncrementsCarryTheNormDrops) {
  const DyadicDecomposition dec(PeriodicFunction::cosine(), 14, 10);
  EXPECT_EQ(dec.stored_depth(), 10u);
  for (unsigned r = 1; r <= 10; ++r) {
    const auto inc = dec.increment(r);
    const double drop = dec.phi_norm_squared(r - 1) - dec.phi_norm_squared(r);
    EXPECT_NEAR(inc.integral(), 0.0, 1e-13);
    EXPECT_NEAR(inc.l2_norm_squared(), drop, 1e-9 * drop + 1e-15);
  }
  EXPECT_THROW(dec.level(11), SizeError);
  EXPECT_THROW(dec.increment(0), DomainError);
}

TEST(DyadicDecomposition, RademacherIsResolvedAtLevelOne) {
  const DyadicDecomposition dec(PeriodicFunction::rademacher0(), 8, 4);
  EXPECT_NEAR(dec.phi_norm_squared(0), 1.0, 1e-12);
  for (unsigned r = 1; r <= 8; ++r) EXPECT_NEAR(dec.phi_norm(r), 0.0, 1e-12);
  const auto c = martingale_inequality_check(dec, 2, 4);
  EXPECT_NEAR(c.lhs, 0.0, 1e-20);
  EXPECT_TRUE(c.holds());
}

TEST(DyadicDecomposition, ThreadCountDoesNotChangeNorms) {
  const DyadicDecomposition a(PeriodicFunction::bernoulli(), 14, 4, 1);
  const DyadicDecomposition b(PeriodicFunction::bernoulli(), 14, 4, 3);
  for (unsigned s = 0; s <= 14; ++s) EXPECT_NEAR(a.phi_norm_squared(s), b.phi_norm_squared(s), 1e-15);
}

TEST(NormSeriesTail, GeometricSum) {
  const auto f = PeriodicFunction::cosine();
  EXPECT_NEAR(norm_series_tail(f, 3), detail::two_pi * std::pow(2.0, -4.0) / 0.5, 1e-12);
  PeriodicFunction bad = f;
  bad.holder_exponent = 0.0;
  EXPECT_THROW(norm_series_tail(bad, 3), DomainError);
}

TEST(MartingaleInequality, HoldsOnSmallGrid) {
  for (const auto& f : {PeriodicFunction::cosine(), PeriodicFunction::bernoulli()}) {
    const DyadicDecomposition dec(f, 20, 6);
    for (unsigned r : {2u, 4u, 6u}) {
      for (std::size_t n : {2u, 5u, 8u}) {
        const auto c = martingale_inequality_check(dec, r, n);
        EXPECT_TRUE(c.holds()) << f.name << " r=" << r << " n=" << n << " lhs=" << c.lhs << " rhs=" << c.rhs;
        EXPECT_GT(c.lhs, 0.0);
        EXPECT_GE(c.margin(), 0.0);
      }
    }
  }
}

TEST(MartingaleInequality, SingleShiftIsRemainderEnergy) {
  const DyadicDecomposition dec(PeriodicFunction::cosine(), 20, 6);
  for (unsigned r : {1u, 4u}) {
    const auto c = martingale_inequality_check(dec, r, 1);
    EXPECT_NEAR(c.lhs, dec.phi_norm_squared(r), 1e-6 * dec.phi_norm_squared(r));
  }
}

TEST(MartingaleInequality, RejectsShallowDecomposition) {
  const DyadicDecomposition dec(PeriodicFunction::cosine(), 8, 4);
  EXPECT_THROW(martingale_inequality_check(dec, 8, 2), SizeError);
  EXPECT_THROW(martingale_inequality_check(dec, 2, 0), DomainError);
}

TEST(SigmaEstimate, KnownLimits) {
  const auto cos_est = sigma_estimate(PeriodicFunction::cosine(), {4, 8, 12, 16});
  EXPECT_NEAR(cos_est.sigma_squared, 0.5, 1e-9);
  EXPECT_FALSE(cos_est.degenerate);

  // <f, f(2^j .)> = 2^-j / 12, so sigma^2 = 1/12 (1 + 2 sum_j 2^-j) = 1/4
  const auto b_est = sigma_estimate(PeriodicFunction::bernoulli(), {14, 16, 18, 20});
  EXPECT_NEAR(b_est.sigma_squared, 0.25, 1e-5);
  EXPECT_NEAR(shift_correlation(PeriodicFunction::bernoulli(), 3), 1.0 / 96.0, 1e-12);

  // cos(2 pi x) - cos(4 pi x) telescopes along x -> 2x
  const auto tele = sigma_estimate(PeriodicFunction::trigonometric({{1, 1.0, 0.0}, {2, -1.0, 0.0}}), {4, 8, 12, 16});
  EXPECT_TRUE(tele.degenerate);
  EXPECT_THROW(sigma_estimate(PeriodicFunction::cosine(), {21}), SizeError);
}
