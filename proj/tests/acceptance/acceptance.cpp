// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "lacunary/charfn.hpp"
#include "lacunary/diophantine.hpp"
#include "lacunary/limits.hpp"
#include "lacunary/martingale.hpp"

using namespace lacunary;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::vector<std::size_t> powers_of_two(int lo, int hi) {
  std::vector<std::size_t> out;
  for (int e = lo; e <= hi; ++e) out.push_back(std::size_t{1} << e);
  return out;
}

Outcome exact_vs_quadrature_mgf() {
  const auto seq = LacunarySequence::power(2, 12);
  const auto coeffs = CoefficientTriangle::flat(0.25, NormalizerConvention::walsh);
  double worst = 0.0;
  for (std::size_t n : {4u, 8u, 12u}) {
    const auto S = walsh_partial_sum(seq, coeffs, n);
    for (int i = 0; i < 25; ++i) {
      const double lambda = -3.0 + 0.25 * i;
      worst = std::max(worst, std::abs(mgf_walsh_exact(seq, coeffs, n, complex(0.0, lambda)) - char_fn_quadrature(S, lambda)));
    }
  }
  return {worst <= 1e-10, fmt("max |exact - quadrature| = %.3g (tol 1e-10)", worst)};
}

Outcome xor_zero_impossible() {
  std::uint64_t zero_solutions = 0, cases = 0;
  for (std::uint64_t base : {2u, 3u}) {
    const auto seq = LacunarySequence::power(base, 18);
    for (std::size_t n = 1; n <= 18; ++n)
      for (std::size_t l = 1; l <= std::min<std::size_t>(6, n); ++l) {
        zero_solutions += count_xor_solutions(seq, n, l).count(0);
        ++cases;
      }
  }
  return {zero_solutions == 0, std::to_string(cases) + " cases, zero-sum solutions found: " + std::to_string(zero_solutions)};
}

Outcome solution_bounds() {
  std::size_t cases = 0, violations = 0;
  double worst_ratio = 0.0;
  auto record = [&](const SolutionCountReport& rep) {
    ++cases;
    if (!rep.verdict()) ++violations;
    for (const auto& c : rep.classes)
      if (!std::isnan(c.bound)) worst_ratio = std::max(worst_ratio, static_cast<double>(c.max_count()) / c.bound);
  };
  const auto inter = LacunarySequence::interleaved(24);
  const auto pow2 = LacunarySequence::power(2, 24);
  const auto pow3 = LacunarySequence::power(3, 24);
  for (std::size_t l = 2; l <= 4; ++l)
    for (std::size_t n = l; n <= 24; ++n) {
      for (std::size_t r = 1; r <= 3; ++r) {
        record(count_signed_solutions(inter, n, l, r));
        record(count_signed_solutions(pow2, n, l, r));
        record(count_signed_solutions(pow3, n, l, r));
      }
      record(count_xor_solutions(inter, n, l));
    }
  return {violations == 0 && cases > 0,
          std::to_string(cases) + " reports, " + std::to_string(violations) + " violations, largest count/bound " +
              fmt("%.3g", worst_ratio)};
}

Outcome sharpness_trend() {
  const auto seq = LacunarySequence::interleaved(48);
  const auto c24 = count_signed_solutions(seq, 24, 3, 1).count(0);
  const auto c48 = count_signed_solutions(seq, 48, 3, 1).count(0);
  const double ratio = static_cast<double>(c48) / static_cast<double>(c24);
  return {c24 > 0 && ratio >= 1.8,
          "count(A=0) n=24: " + std::to_string(c24) + ", n=48: " + std::to_string(c48) + fmt(", ratio %.3f (need >= 1.8)", ratio)};
}

Outcome bernoulli_variance_identity() {
  double worst = 0.0;
  for (std::size_t n : {1u, 2u, 8u, 20u}) {
    const double nn = static_cast<double>(n);
    const double closed = nn / 4.0 - 1.0 / 3.0 + 1.0 / (3.0 * std::ldexp(1.0, static_cast<int>(n)));
    worst = std::max(worst, std::abs(bernoulli_expansion_weights(n).sum_of_squares() - closed));
  }
  return {worst <= 1e-12, fmt("max |sum w^2 - closed form| = %.3g (tol 1e-12)", worst)};
}

Outcome bernoulli_residual_rate() {
  std::vector<double> sups;
  const auto psi = LimitingFunction::bernoulli();
  for (std::size_t n : {256u, 1024u, 4096u}) {
    const double scale = std::pow(static_cast<double>(n), -0.25);
    const double t_n = std::sqrt(static_cast<double>(n)) / 4.0;
    double sup = 0.0;
    for (int i = 0; i <= 200; ++i) {
      const double z = -1.0 + 0.01 * i;
      const complex r = residual_from_log(log_mgf_bernoulli_exact(n, z, default_bernoulli_tail, scale), t_n, z);
      sup = std::max(sup, std::abs(r - psi(z)));
    }
    sups.push_back(sup);
  }
  const double r1 = sups[0] / sups[1], r2 = sups[1] / sups[2];
  const bool ok = r1 >= 1.6 && r1 <= 2.6 && r2 >= 1.6 && r2 <= 2.6;
  return {ok, fmt("sup errors %.4g", sups[0]) + fmt(", %.4g", sups[1]) + fmt(", %.4g", sups[2]) + fmt("; ratios %.3f", r1) +
                  fmt(", %.3f (need [1.6, 2.6])", r2)};
}

Outcome walsh_llt() {
  const std::size_t n = std::size_t{1} << 16;
  const double a = std::pow(static_cast<double>(n), -0.25);
  const auto law = binomial_sign_law(n, a);
  const double A = std::sqrt(static_cast<double>(n)) * a;
  const auto r = llt_statistic(law, A, 0.0, IntervalSet{{-0.5, 0.5}});
  const double target = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  const double rel = std::abs(r.statistic - target) / target;
  return {rel <= 0.05, fmt("A_n P[S in B] = %.6f", r.statistic) + fmt(", relative error %.3g (tol 0.05)", rel)};
}

Outcome berry_esseen_rates() {
  const auto seq = LacunarySequence::power(2, std::size_t{1} << 16);
  const auto coeffs = CoefficientTriangle::flat(0.25, NormalizerConvention::walsh);
  std::vector<RatePoint> walsh_pts;
  for (std::size_t n : powers_of_two(8, 16)) {
    const double A = coeffs.normalizer(n);
    walsh_pts.push_back({A, kolmogorov_distance(walsh_independent_law(seq, coeffs, n), A)});
  }
  std::vector<RatePoint> bern_pts;
  for (std::size_t n : powers_of_two(8, 14)) {
    const BernoulliSumLaw law(n);
    const double A = std::sqrt(static_cast<double>(n)) / 2.0;
    bern_pts.push_back({A, kolmogorov_distance(law, A)});
  }
  const double sw = berry_esseen_rate_fit(walsh_pts), sb = berry_esseen_rate_fit(bern_pts);
  const double bern_limit = -13.0 / 24.0 + 0.1;
  return {sw <= -1.1 && sb <= bern_limit,
          fmt("Walsh slope %.4f (need <= -1.1)", sw) + fmt(", Bernoulli slope %.4f", sb) + fmt(" (need <= %.4f)", bern_limit)};
}

Outcome zone_of_control() {
  const auto seq = LacunarySequence::power(2, std::size_t{1} << 14);
  const auto coeffs = CoefficientTriangle::flat(0.25, NormalizerConvention::walsh);
  const auto ns = powers_of_two(8, 14);
  const auto zw = zone_of_control_check(
      [&](std::size_t n, double l) { return log_mgf_walsh_exact(seq, coeffs, n, complex(0.0, l)); },
      [&](std::size_t n) { return coeffs.power_sum(n, 2); }, 4.0, 4.0, 0.1, 1.0, ns);
  const auto zb = zone_of_control_check(
      [](std::size_t n, double l) {
        return log_mgf_bernoulli_exact(n, complex(0.0, l), default_bernoulli_tail, std::pow(static_cast<double>(n), -0.25));
      },
      [](std::size_t n) { return std::sqrt(static_cast<double>(n)) / 4.0; }, 2.0, 4.0, 1.0 / 24.0, 1.0, ns);
  return {zw.pass && zb.pass, fmt("Walsh K1=%.4g", zw.K1) + fmt(" K2=%.3g", zw.K2) + (zw.pass ? " pass" : " fail") +
                                  fmt("; Bernoulli K1=%.4g", zb.K1) + fmt(" K2=%.3g", zb.K2) + (zb.pass ? " pass" : " fail")};
}

Outcome martingale_inequality() {
  std::size_t cases = 0, failures = 0;
  double min_margin = INFINITY;
  for (const auto& f : {PeriodicFunction::cosine(), PeriodicFunction::bernoulli()}) {
    const DyadicDecomposition dec(f, default_decomposition_depth, 8);
    for (unsigned r = 2; r <= 8; ++r)
      for (std::size_t n = 2; n <= 10; ++n) {
        const auto c = martingale_inequality_check(dec, r, n);
        ++cases;
        if (!c.holds()) ++failures;
        min_margin = std::min(min_margin, c.margin() / c.rhs);
      }
  }
  return {failures == 0, std::to_string(cases) + " cases, " + std::to_string(failures) + " failures, smallest relative margin " +
                             fmt("%.3g", min_margin)};
}

Outcome extended_clt_tail() {
  const std::size_t n = std::size_t{1} << 16;
  const double a = std::pow(static_cast<double>(n), -0.25);
  const double ratio = tail_ratio_extended_clt(binomial_sign_law(n, a), std::sqrt(static_cast<double>(n)) * a, 1.0);
  return {ratio >= 0.95 && ratio <= 1.05, fmt("tail ratio at y=1: %.5f (need [0.95, 1.05])", ratio)};
}

Outcome trig_weak_l1() {
  const auto seq = LacunarySequence::power(2, std::size_t{1} << 12);
  const auto coeffs = CoefficientTriangle::flat(0.4, NormalizerConvention::trig);
  const auto pts = weak_modgauss_l1_check([&](std::size_t n, double t) { return char_fn_transfer(seq, coeffs, n, t); },
                                          [&](std::size_t n) { return coeffs.normalizer(n); }, 2.0, powers_of_two(6, 12));
  std::string d = "L1 errors";
  for (const auto& p : pts) d += fmt(" %.4f", p.error);
  return {strictly_decreasing(pts), d};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    double budget_seconds;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {"exact vs quadrature Walsh MGF", 5, exact_vs_quadrature_mgf},
      {"no zero-sum XOR solutions for q >= 2", 60, xor_zero_impossible},
      {"solution counts within their bounds", 300, solution_bounds},
      {"sharpness trend of the small-ratio bound", 60, sharpness_trend},
      {"Bernoulli variance identity", 1, bernoulli_variance_identity},
      {"Bernoulli mod-Gaussian residual rate", 10, bernoulli_residual_rate},
      {"Walsh local limit theorem", 10, walsh_llt},
      {"Berry-Esseen rates", 120, berry_esseen_rates},
      {"zone of control", 60, zone_of_control},
      {"martingale inequality", 120, martingale_inequality},
      {"extended CLT tail ratio", 10, extended_clt_tail},
      {"trig weak mod-Gaussian L1 errors", 300, trig_weak_l1},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto& c = criteria[i];
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs <= c.budget_seconds;
    const bool ok = o.pass && in_time;
    if (!ok) ++failed;
    std::printf("%s %2zu %s: %s [%.2f s, budget %.0f s%s]\n", ok ? "PASS" : "FAIL", i + 1, c.name, o.detail.c_str(), secs,
                c.budget_seconds, in_time ? "" : ", over budget");
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
