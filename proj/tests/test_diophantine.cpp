#include <gtest/gtest.h>

#include <map>

#include "lacunary/diophantine.hpp"

using namespace lacunary;

namespace {

// Independent enumeration over index subsets, coefficient words and sign words.
std::map<int128, std::uint64_t> brute_signed(const std::vector<std::uint64_t>& m, std::size_t l, std::size_t r) {
  std::map<int128, std::uint64_t> out;
  const std::size_t n = m.size();
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    if (static_cast<std::size_t>(std::popcount(mask)) != l) continue;
    std::vector<std::uint64_t> chosen;
    for (std::size_t k = n; k-- > 0;)
      if ((mask >> k) & 1u) chosen.push_back(m[k]);
    std::uint64_t words = 1;
    for (std::size_t i = 0; i < l; ++i) words *= r;
    for (std::uint64_t w = 0; w < words; ++w) {
      for (std::uint64_t s = 0; s < (std::uint64_t{1} << (l - 1)); ++s) {
        int128 A = 0;
        std::uint64_t rest = w;
        for (std::size_t i = 0; i < l; ++i) {
          const auto eps = static_cast<int128>(rest % r + 1);
          rest /= r;
          const bool negative = i > 0 && ((s >> (i - 1)) & 1u);
          A += (negative ? -eps : eps) * static_cast<int128>(chosen[i]);
        }
        ++out[A];
      }
    }
  }
  return out;
}

std::map<int128, std::uint64_t> flatten(const SolutionCountReport& rep) {
  std::map<int128, std::uint64_t> out;
  for (const auto& c : rep.classes)
    for (const auto& [A, k] : c.per_A) out[A] += k;
  return out;
}

}  // namespace

TEST(Bounds, SmallRatioFormula) {
  const double q = 4.0 / 3.0;
  const double base = 8.0 * 10 * log_base(q, 2.0 * 3) * log_base(q, 2.0 * 4 * 3 * q / ((q - 1) * (q - 1)));
  EXPECT_NEAR(signed_count_bound_small_ratio(3, 1, q, 10, 2), std::pow(base, 4.0 / 3.0), 1e-9 * std::pow(base, 4.0 / 3.0));
  EXPECT_THROW(signed_count_bound_small_ratio(3, 1, 2.5, 10, 2), DomainError);
  EXPECT_THROW(signed_count_bound_small_ratio(1, 0, 1.5, 10, 2), DomainError);
}

TEST(Bounds, LargeRatioVariantsDiffer) {
  const double a = signed_count_bound_large_ratio(3, 1, 1, 3.0, 12, 3, LargeRatioVariant::statement);
  const double b = signed_count_bound_large_ratio(3, 1, 1, 3.0, 12, 3, LargeRatioVariant::proof);
  EXPECT_GT(a, 0.0);
  EXPECT_GT(b, 0.0);
  EXPECT_NE(a, b);
  EXPECT_THROW(signed_count_bound_large_ratio(3, 0, 0, 2.0, 12, 1), DomainError);
  EXPECT_THROW(signed_count_bound_large_ratio(3, 2, 2, 3.0, 12, 1), DomainError);
}

TEST(Bounds, XorGammaBrackets) {
  for (double q : {1.01, 1.2, 4.0 / 3.0, 1.5, 1.99}) {
    const int g = xor_gamma(q);
    EXPECT_LE(1.0 + std::ldexp(1.0, -g), q);
    EXPECT_LT(q, 1.0 + std::ldexp(1.0, -(g - 1)));
  }
  EXPECT_EQ(xor_gamma(1.5), 1);
  EXPECT_EQ(xor_gamma(4.0 / 3.0), 2);
  EXPECT_THROW(xor_gamma(2.0), DomainError);
  EXPECT_GT(xor_count_bound(3, 1.5, 20), 0.0);
}

TEST(SignedCounts, AgreeWithBruteForce) {
  for (const auto& seq : {LacunarySequence::interleaved(10), LacunarySequence::power(3, 10)}) {
    for (std::size_t l : {1u, 2u, 3u}) {
      for (std::size_t r : {1u, 2u}) {
        const auto rep = count_signed_solutions(seq, 9, l, r);
        EXPECT_EQ(flatten(rep), brute_signed(seq.integer_terms(9), l, r));
        std::uint64_t total = 0;
        for (const auto& [A, k] : flatten(rep)) total += k;
        EXPECT_EQ(total, rep.configurations);
      }
    }
  }
}

TEST(SignedCounts, ThreadCountDoesNotChangeResult) {
  const auto seq = LacunarySequence::power(2, 14);
  EnumerationOptions one, many;
  many.threads = 4;
  EXPECT_EQ(flatten(count_signed_solutions(seq, 14, 3, 2, one)), flatten(count_signed_solutions(seq, 14, 3, 2, many)));
}

TEST(SignedCounts, FreeLeadingSignIsSymmetric) {
  EnumerationOptions opt;
  opt.free_first_sign = true;
  const auto counts = flatten(count_signed_solutions(LacunarySequence::interleaved(10), 10, 3, 2, opt));
  for (const auto& [A, k] : counts) {
    const auto it = counts.find(-A);
    ASSERT_NE(it, counts.end());
    EXPECT_EQ(it->second, k);
  }
}

TEST(SignedCounts, ClassesFollowTheRatioRegime) {
  const auto small = count_signed_solutions(LacunarySequence::interleaved(12), 12, 3, 2);
  EXPECT_EQ(small.rule, BoundRule::small_ratio);
  for (const auto& c : small.classes) {
    EXPECT_GE(c.p, 0);
    EXPECT_FALSE(std::isnan(c.bound));
  }
  EXPECT_TRUE(small.verdict());

  const auto large = count_signed_solutions(LacunarySequence::power(3, 12), 12, 3, 3);
  EXPECT_EQ(large.rule, BoundRule::large_ratio);
  for (const auto& c : large.classes) EXPECT_GE(c.p2, 0);
  EXPECT_TRUE(large.verdict());

  const auto single = count_signed_solutions(LacunarySequence::power(2, 6), 6, 1, 1);
  EXPECT_EQ(single.rule, BoundRule::none);
  EXPECT_TRUE(single.verdict());
}

TEST(SignedCounts, DistinctPowersHaveUniqueRepresentations) {
  const auto rep = count_signed_solutions(LacunarySequence::power(3, 10), 10, 3, 1);
  EXPECT_EQ(rep.max_count(), 1u);
}

TEST(SignedCounts, BudgetAndDomainChecks) {
  EnumerationOptions tight;
  tight.budget = 100;
  EXPECT_THROW(count_signed_solutions(LacunarySequence::power(2, 20), 20, 3, 1, tight), BudgetError);
  EXPECT_THROW(count_signed_solutions(LacunarySequence::power(2, 5), 5, 6, 1), DomainError);
  EXPECT_THROW(count_signed_solutions(LacunarySequence::power(2, 5), 6, 2, 1), SizeError);
  EXPECT_THROW(count_signed_solutions(LacunarySequence::from_reals({1.5, 4.0}), 2, 1, 1), TypeError);
}

TEST(XorCounts, NoZeroSumForRatioAtLeastTwo) {
  for (const auto& seq : {LacunarySequence::power(2, 14), LacunarySequence::power(3, 14)}) {
    for (std::size_t l = 1; l <= 5; ++l) {
      const auto rep = count_xor_solutions(seq, 14, l);
      EXPECT_EQ(rep.rule, BoundRule::xor_impossibility);
      EXPECT_EQ(rep.count(0), 0u);
      EXPECT_TRUE(rep.verdict());
    }
  }
}

TEST(XorCounts, SmallRatioExcludesZero) {
  const auto rep = count_xor_solutions(LacunarySequence::interleaved(16), 16, 3);
  EXPECT_EQ(rep.rule, BoundRule::xor_small_ratio);
  ASSERT_EQ(rep.classes.size(), 1u);
  EXPECT_EQ(rep.classes[0].excluded_A, std::optional<int128>(0));
  // 2 xor 4 xor 6 = 0
  EXPECT_GT(rep.count(0), 0u);
  EXPECT_TRUE(rep.verdict());
}

TEST(XorCounts, TotalEqualsSubsetCount) {
  const auto rep = count_xor_solutions(LacunarySequence::interleaved(12), 12, 4);
  std::uint64_t total = 0;
  for (const auto& [A, k] : rep.classes[0].per_A) total += k;
  EXPECT_EQ(total, 495u);
}

TEST(Int128, Printing) {
  EXPECT_EQ(to_string(int128{0}), "0");
  EXPECT_EQ(to_string(int128{-42}), "-42");
  EXPECT_EQ(to_string(static_cast<int128>(1) << 100), "1267650600228229401496703205376");
}
