#pragma once

// Exhaustive counts of solutions of eps_1 m_{k_1} +- ... +- eps_l m_{k_l} = A and
// m_{k_1} xor ... xor m_{k_l} = A over a lacunary sequence, with the closed-form
// bounds they are certified against.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "lacunary/errors.hpp"
#include "lacunary/series_core.hpp"

namespace lacunary {

using int128 = __int128;

inline std::string to_string(int128 v) {
  if (v == 0) return "0";
  const bool negative = v < 0;
  unsigned __int128 u = negative ? -static_cast<unsigned __int128>(v) : static_cast<unsigned __int128>(v);
  std::string s;
  while (u > 0) {
    s.push_back(static_cast<char>('0' + static_cast<int>(u % 10)));
    u /= 10;
  }
  if (negative) s.push_back('-');
  std::reverse(s.begin(), s.end());
  return s;
}

// ---------------------------------------------------------------------------
// Closed-form bounds
// ---------------------------------------------------------------------------

inline double log_base(double q, double x) { return std::log(x) / std::log(q); }

/// Bound for the signed equation when 1 < q <= 2; p counts the coefficients different from 1.
///
/// (8 n log_q(r l) log_q(2 r^2 l q / (q-1)^2))^((l+p)/3)
inline double signed_count_bound_small_ratio(std::size_t l, std::size_t p, double q, std::size_t n, std::size_t r) {
  if (!(q > 1.0 && q <= 2.0)) throw DomainError("small-ratio bound needs 1 < q <= 2");
  if (l < 2) throw DomainError("small-ratio bound needs l >= 2");
  if (p > l) throw DomainError("p cannot exceed l");
  if (r < 1) throw DomainError("r must be at least 1");
  const double L = static_cast<double>(l), R = static_cast<double>(r);
  const double base = 8.0 * static_cast<double>(n) * log_base(q, R * L) *
                      log_base(q, 2.0 * R * R * L * q / ((q - 1.0) * (q - 1.0)));
  return std::pow(base, (L + static_cast<double>(p)) / 3.0);
}

/// Which of the two published log arguments the large-ratio bound uses.
enum class LargeRatioVariant { statement, proof };

/// Bound for the signed equation when q > 2; p2 counts coefficients equal to 2, p3 those >= 3.
///
/// statement: (20 n log_q(2lr) log_q(qlr/(q-2)) log_q(4 l^2 q^2 r^3/(q-2)))^(l/4 + p2/4 + p3/2)
/// proof:     (20 n log_q(2lrq/(q-2)) log_q(qlr) log_q(4 l^2 q^2 r^2/(q-2)))^(same)
inline double signed_count_bound_large_ratio(std::size_t l, std::size_t p2, std::size_t p3, double q, std::size_t n,
                                             std::size_t r,
                                             LargeRatioVariant variant = LargeRatioVariant::statement) {
  if (!(q > 2.0)) throw DomainError("large-ratio bound needs q > 2");
  if (l < 1 || p2 + p3 > l) throw DomainError("need p2 + p3 <= l and l >= 1");
  if (r < 1) throw DomainError("r must be at least 1");
  const double L = static_cast<double>(l), R = static_cast<double>(r), N = static_cast<double>(n);
  double base = 0.0;
  if (variant == LargeRatioVariant::statement)
    base = 20.0 * N * log_base(q, 2.0 * L * R) * log_base(q, q * L * R / (q - 2.0)) *
           log_base(q, 4.0 * L * L * q * q * R * R * R / (q - 2.0));
  else
    base = 20.0 * N * log_base(q, 2.0 * L * R * q / (q - 2.0)) * log_base(q, q * L * R) *
           log_base(q, 4.0 * L * L * q * q * R * R / (q - 2.0));
  return std::pow(base, L / 4.0 + static_cast<double>(p2) / 4.0 + static_cast<double>(p3) / 2.0);
}

/// The integer gamma with 1 + 2^-gamma <= q < 1 + 2^-(gamma-1), for 1 < q < 2.
inline int xor_gamma(double q) {
  if (!(q > 1.0 && q < 2.0)) throw DomainError("xor bound needs 1 < q < 2");
  int g = static_cast<int>(std::ceil(-std::log2(q - 1.0)));
  while (1.0 + std::ldexp(1.0, -g) > q) ++g;
  while (g > 1 && q >= 1.0 + std::ldexp(1.0, -(g - 1))) --g;
  return g;
}

/// (2 (gamma + 7) n log_q(2)^2)^(l/3): bound for the xor equation with A > 0 when 1 < q < 2.
inline double xor_count_bound(std::size_t l, double q, std::size_t n) {
  const int g = xor_gamma(q);
  const double lq2 = log_base(q, 2.0);
  return std::pow(2.0 * (g + 7) * static_cast<double>(n) * lq2 * lq2, static_cast<double>(l) / 3.0);
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

enum class EquationMode { signed_sum, xor_sum };

enum class BoundRule {
  /// 1 < q <= 2, signed, classes by p.
  small_ratio,
  /// q > 2, signed, classes by (p2, p3).
  large_ratio,
  /// 1 < q < 2, xor, A > 0.
  xor_small_ratio,
  /// q >= 2, xor: no solution with A = 0.
  xor_impossibility,
  /// No bound applies (for instance l = 1 in the small-ratio regime).
  none
};

inline const char* to_string(BoundRule rule) {
  switch (rule) {
    case BoundRule::small_ratio: return "signed-small-ratio";
    case BoundRule::large_ratio: return "signed-large-ratio";
    case BoundRule::xor_small_ratio: return "xor-small-ratio";
    case BoundRule::xor_impossibility: return "xor-impossibility";
    case BoundRule::none: return "none";
  }
  return "none";
}

/// Solution counts of one coefficient class.
struct SolutionClass {
  /// Number of coefficients different from 1 (small-ratio classes), else -1.
  int p = -1;
  /// Number of coefficients equal to 2 and at least 3 (large-ratio classes), else -1.
  int p2 = -1;
  int p3 = -1;
  /// Achievable A with their counts, sorted by A.
  std::vector<std::pair<int128, std::uint64_t>> per_A;
  /// NaN when no bound applies.
  double bound = std::nan("");
  /// Buckets excluded from the verdict (A = 0 in the xor small-ratio regime).
  std::optional<int128> excluded_A;

  std::uint64_t count(int128 A) const {
    const auto it = std::lower_bound(per_A.begin(), per_A.end(), A,
                                     [](const auto& e, int128 v) { return e.first < v; });
    return it != per_A.end() && it->first == A ? it->second : 0;
  }

  std::uint64_t max_count() const {
    std::uint64_t m = 0;
    for (const auto& [A, c] : per_A)
      if (!excluded_A || A != *excluded_A) m = std::max(m, c);
    return m;
  }

  /// max_count <= bound; true when no bound applies.
  bool verdict() const { return std::isnan(bound) || static_cast<double>(max_count()) <= bound; }

  std::vector<std::pair<int128, std::uint64_t>> top_buckets(std::size_t k) const {
    auto v = per_A;
    std::stable_sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    if (v.size() > k) v.resize(k);
    return v;
  }

  std::string label() const {
    if (p >= 0) return "p=" + std::to_string(p);
    if (p2 >= 0) return "p2=" + std::to_string(p2) + ",p3=" + std::to_string(p3);
    return "all";
  }
};

struct SolutionCountReport {
  EquationMode mode = EquationMode::signed_sum;
  std::size_t n = 0;
  std::size_t l = 0;
  std::size_t r = 1;
  double q = 0.0;
  BoundRule rule = BoundRule::none;
  LargeRatioVariant variant = LargeRatioVariant::statement;
  std::uint64_t configurations = 0;
  std::vector<SolutionClass> classes;

  std::uint64_t max_count() const {
    std::uint64_t m = 0;
    for (const auto& c : classes) m = std::max(m, c.max_count());
    return m;
  }

  /// Count of A summed over every class.
  std::uint64_t count(int128 A) const {
    std::uint64_t s = 0;
    for (const auto& c : classes) s += c.count(A);
    return s;
  }

  bool verdict() const {
    if (rule == BoundRule::xor_impossibility) return count(0) == 0;
    return std::all_of(classes.begin(), classes.end(), [](const SolutionClass& c) { return c.verdict(); });
  }

  /// Largest buckets over all classes, merged by A.
  std::vector<std::pair<int128, std::uint64_t>> top_buckets(std::size_t k) const {
    std::vector<std::pair<int128, std::uint64_t>> all;
    for (const auto& c : classes) all.insert(all.end(), c.per_A.begin(), c.per_A.end());
    std::sort(all.begin(), all.end());
    std::vector<std::pair<int128, std::uint64_t>> merged;
    for (const auto& e : all) {
      if (!merged.empty() && merged.back().first == e.first)
        merged.back().second += e.second;
      else
        merged.push_back(e);
    }
    std::stable_sort(merged.begin(), merged.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    if (merged.size() > k) merged.resize(k);
    return merged;
  }
};

inline constexpr std::uint64_t default_enumeration_budget = 1'000'000'000ull;

struct EnumerationOptions {
  std::uint64_t budget = default_enumeration_budget;
  unsigned threads = 1;
  /// Let the leading sign be negative too (used to check A -> -A symmetry).
  bool free_first_sign = false;
  LargeRatioVariant variant = LargeRatioVariant::statement;
};

namespace detail {

inline double choose_double(std::size_t n, std::size_t k) {
  if (k > n) return 0.0;
  return std::round(std::exp(std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
                              std::lgamma(static_cast<double>(n - k) + 1.0)));
}

inline std::vector<std::pair<int128, std::uint64_t>> run_length(std::vector<int128>& values) {
  std::sort(values.begin(), values.end());
  std::vector<std::pair<int128, std::uint64_t>> out;
  for (int128 v : values) {
    if (!out.empty() && out.back().first == v)
      ++out.back().second;
    else
      out.emplace_back(v, 1);
  }
  return out;
}

/// Runs job(k1) for k1 = 1..n on up to `threads` workers, each with its own output slot.
template <class Slot, class Job>
std::vector<Slot> partition_by_leading_index(std::size_t n, unsigned threads, Job job) {
  std::vector<Slot> slots(n);
  unsigned workers = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(n, 1)));
  if (workers <= 1) {
    for (std::size_t k1 = 1; k1 <= n; ++k1) job(k1, slots[k1 - 1]);
    return slots;
  }
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      for (std::size_t k1 = 1 + w; k1 <= n; k1 += workers) job(k1, slots[k1 - 1]);
    });
  for (auto& t : pool) t.join();
  return slots;
}

}  // namespace detail

inline void check_enumeration(const LacunarySequence& seq, std::size_t n, std::size_t l) {
  if (!seq.integral()) throw TypeError("enumeration needs integral frequencies");
  if (l < 1 || l > n) throw DomainError("need 1 <= l <= n");
  if (n > seq.size()) throw SizeError("not enough sequence terms");
  if (!seq.integer_terms_fit(n)) throw SizeError("sequence terms exceed 64 bits");
}

/// Number of (indices, coefficients, signs) configurations of the signed equation.
inline double signed_configurations(std::size_t n, std::size_t l, std::size_t r, bool free_first_sign = false) {
  return detail::choose_double(n, l) * std::pow(static_cast<double>(r), static_cast<double>(l)) *
         std::ldexp(1.0, static_cast<int>(free_first_sign ? l : l - 1));
}

/// Exhaustive solution counts of eps_1 m_{k_1} +- eps_2 m_{k_2} +- ... +- eps_l m_{k_l} = A.
///
/// Indices are strictly decreasing, eps_i in {1..r}, the leading sign is +.
/// Classes follow the bound that applies to seq.q().
inline SolutionCountReport count_signed_solutions(const LacunarySequence& seq, std::size_t n, std::size_t l,
                                                  std::size_t r, const EnumerationOptions& opt = {}) {
  check_enumeration(seq, n, l);
  if (r < 1 || r > 64) throw DomainError("r must lie in 1..64");
  const double configs = signed_configurations(n, l, r, opt.free_first_sign);
  if (configs > static_cast<double>(opt.budget))
    throw BudgetError("enumeration exceeds the configuration budget",
                      configs >= 1.8e19 ? UINT64_MAX : static_cast<std::uint64_t>(configs));

  SolutionCountReport rep;
  rep.mode = EquationMode::signed_sum;
  rep.n = n;
  rep.l = l;
  rep.r = r;
  rep.q = seq.q();
  rep.variant = opt.variant;
  rep.configurations = static_cast<std::uint64_t>(configs);
  const bool large = seq.q() > 2.0;
  rep.rule = large ? BoundRule::large_ratio : (l >= 2 ? BoundRule::small_ratio : BoundRule::none);

  const auto m = seq.integer_terms(n);
  const std::size_t width = l + 1;
  // class slot p2 * width + p3 collects the values of A
  using Slot = std::vector<std::vector<int128>>;
  auto job = [&](std::size_t k1, Slot& slot) {
    slot.assign(width * width, {});
    if (k1 < l) return;
    std::vector<std::size_t> idx(l);
    idx[0] = k1;
    // coefficients, then signs, for the current index tuple
    auto emit = [&] {
      std::vector<std::size_t> eps(l, 1);
      const std::size_t sign_bits = opt.free_first_sign ? l : l - 1;
      while (true) {
        std::size_t p2 = 0, p3 = 0;
        for (std::size_t e : eps) {
          if (e == 2) ++p2;
          if (e >= 3) ++p3;
        }
        auto& out = slot[p2 * width + p3];
        for (std::uint64_t s = 0; s < (std::uint64_t{1} << sign_bits); ++s) {
          int128 A = 0;
          for (std::size_t i = 0; i < l; ++i) {
            const bool negative = opt.free_first_sign ? ((s >> i) & 1u) : (i > 0 && ((s >> (i - 1)) & 1u));
            const int128 term = static_cast<int128>(eps[i]) * static_cast<int128>(m[idx[i] - 1]);
            A += negative ? -term : term;
          }
          out.push_back(A);
        }
        std::size_t i = 0;
        while (i < l && eps[i] == r) eps[i++] = 1;
        if (i == l) break;
        ++eps[i];
      }
    };
    // strictly decreasing idx[1..l-1] drawn from {1..k1-1}
    auto rec = [&](auto&& self, std::size_t depth, std::size_t upper) -> void {
      if (depth == l) {
        emit();
        return;
      }
      for (std::size_t k = upper; k >= l - depth; --k) {
        idx[depth] = k;
        self(self, depth + 1, k - 1);
        if (k == 1) break;
      }
    };
    rec(rec, 1, k1 - 1);
  };
  auto slots = detail::partition_by_leading_index<Slot>(n, opt.threads, job);

  std::vector<std::vector<int128>> merged(width * width);
  for (auto& slot : slots)
    for (std::size_t c = 0; c < slot.size(); ++c) {
      merged[c].insert(merged[c].end(), slot[c].begin(), slot[c].end());
      std::vector<int128>().swap(slot[c]);
    }

  if (large) {
    for (std::size_t p2 = 0; p2 <= l; ++p2)
      for (std::size_t p3 = 0; p2 + p3 <= l; ++p3) {
        auto& values = merged[p2 * width + p3];
        if (values.empty()) continue;
        SolutionClass c;
        c.p2 = static_cast<int>(p2);
        c.p3 = static_cast<int>(p3);
        c.per_A = detail::run_length(values);
        c.bound = signed_count_bound_large_ratio(l, p2, p3, seq.q(), n, r, opt.variant);
        rep.classes.push_back(std::move(c));
      }
  } else {
    for (std::size_t p = 0; p <= l; ++p) {
      std::vector<int128> values;
      for (std::size_t p2 = 0; p2 <= p; ++p2) {
        auto& v = merged[p2 * width + (p - p2)];
        values.insert(values.end(), v.begin(), v.end());
      }
      if (values.empty()) continue;
      SolutionClass c;
      c.p = static_cast<int>(p);
      c.per_A = detail::run_length(values);
      if (rep.rule == BoundRule::small_ratio) c.bound = signed_count_bound_small_ratio(l, p, seq.q(), n, r);
      rep.classes.push_back(std::move(c));
    }
  }
  return rep;
}

/// Exhaustive counts of m_{k_1} xor ... xor m_{k_l} = A over strictly decreasing indices.
inline SolutionCountReport count_xor_solutions(const LacunarySequence& seq, std::size_t n, std::size_t l,
                                               const EnumerationOptions& opt = {}) {
  check_enumeration(seq, n, l);
  const double configs = detail::choose_double(n, l);
  if (configs > static_cast<double>(opt.budget))
    throw BudgetError("enumeration exceeds the configuration budget",
                      configs >= 1.8e19 ? UINT64_MAX : static_cast<std::uint64_t>(configs));
  SolutionCountReport rep;
  rep.mode = EquationMode::xor_sum;
  rep.n = n;
  rep.l = l;
  rep.r = 1;
  rep.q = seq.q();
  rep.configurations = static_cast<std::uint64_t>(configs);
  rep.rule = seq.q() >= 2.0 ? BoundRule::xor_impossibility : BoundRule::xor_small_ratio;

  const auto m = seq.integer_terms(n);
  using Slot = std::vector<int128>;
  auto job = [&](std::size_t k1, Slot& out) {
    if (k1 < l) return;
    auto rec = [&](auto&& self, std::size_t depth, std::size_t upper, std::uint64_t acc) -> void {
      if (depth == l) {
        out.push_back(static_cast<int128>(acc));
        return;
      }
      for (std::size_t k = upper; k >= l - depth; --k) {
        self(self, depth + 1, k - 1, acc ^ m[k - 1]);
        if (k == 1) break;
      }
    };
    rec(rec, 1, k1 - 1, m[k1 - 1]);
  };
  auto slots = detail::partition_by_leading_index<Slot>(n, opt.threads, job);
  std::vector<int128> values;
  for (auto& s : slots) values.insert(values.end(), s.begin(), s.end());
  SolutionClass c;
  c.per_A = detail::run_length(values);
  if (rep.rule == BoundRule::xor_small_ratio) {
    c.bound = xor_count_bound(l, seq.q(), n);
    c.excluded_A = 0;
  }
  rep.classes.push_back(std::move(c));
  return rep;
}

}  // namespace lacunary
