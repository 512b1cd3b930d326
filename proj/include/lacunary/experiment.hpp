#pragma once

// Experiment configuration, input mini-languages and report writers behind the
// `lacunary` command line tool. Needs nlohmann/json (vendor/json.hpp).

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <optional>
#include <tuple>
#include <variant>
#include <vector>

#include "json.hpp"
#include "lacunary/charfn.hpp"
#include "lacunary/diophantine.hpp"
#include "lacunary/limits.hpp"
#include "lacunary/martingale.hpp"
#include "lacunary/series_core.hpp"

namespace lacunary {

inline std::string report_schema_version() { return "1.0.0"; }

enum class ExitCode : int { ok = 0, verdict_failure = 1, usage = 2 };

// ---------------------------------------------------------------------------
// Mini-languages
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

inline bool starts_with(const std::string& s, const std::string& prefix) {
  return s.compare(0, prefix.size(), prefix) == 0;
}

inline std::uint64_t parse_u64(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const unsigned long long v = std::stoull(s, &pos);
    if (pos != s.size() || (!s.empty() && s[0] == '-')) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw UsageError("invalid " + what + ": '" + s + "'");
  }
}

inline double parse_double(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw UsageError("invalid " + what + ": '" + s + "'");
  }
}

inline std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read '" + path + "'");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    lines.push_back(line);
  }
  return lines;
}

/// "N" or "B^K".
inline std::uint64_t parse_size_token(const std::string& t) {
  const auto caret = t.find('^');
  if (caret == std::string::npos) return parse_u64(t, "size");
  const std::uint64_t b = parse_u64(t.substr(0, caret), "base");
  const std::uint64_t e = parse_u64(t.substr(caret + 1), "exponent");
  unsigned __int128 v = 1;
  for (std::uint64_t i = 0; i < e; ++i) {
    v *= b;
    if (v > (static_cast<unsigned __int128>(1) << 62)) throw UsageError("size '" + t + "' too large");
  }
  return static_cast<std::uint64_t>(v);
}

}  // namespace detail

/// Sequence of sizes: comma separated items, each "N", "B^K", "a..b" (step 1) or "B^i..B^j" (powers of B).
inline std::vector<std::size_t> parse_size_grid(const std::string& spec) {
  std::vector<std::size_t> out;
  for (const auto& item : detail::split(spec, ',')) {
    const auto dots = item.find("..");
    if (dots == std::string::npos) {
      out.push_back(detail::parse_size_token(item));
      continue;
    }
    const std::string lo = item.substr(0, dots), hi = item.substr(dots + 2);
    const auto caret_lo = lo.find('^'), caret_hi = hi.find('^');
    if (caret_lo != std::string::npos && caret_hi != std::string::npos) {
      const std::uint64_t b = detail::parse_u64(lo.substr(0, caret_lo), "base");
      if (b != detail::parse_u64(hi.substr(0, caret_hi), "base")) throw UsageError("range '" + item + "' mixes bases");
      for (std::uint64_t e = detail::parse_u64(lo.substr(caret_lo + 1), "exponent");
           e <= detail::parse_u64(hi.substr(caret_hi + 1), "exponent"); ++e)
        out.push_back(detail::parse_size_token(std::to_string(b) + "^" + std::to_string(e)));
    } else {
      for (std::uint64_t v = detail::parse_size_token(lo); v <= detail::parse_size_token(hi); ++v) out.push_back(v);
    }
  }
  if (out.empty()) throw UsageError("empty size grid");
  for (std::size_t i = 1; i < out.size(); ++i)
    if (out[i] <= out[i - 1]) throw UsageError("size grid must be strictly increasing");
  return out;
}

/// "lo:hi:step", inclusive of hi up to rounding.
inline std::vector<double> parse_real_grid(const std::string& spec) {
  const auto parts = detail::split(spec, ':');
  if (parts.size() != 3) throw UsageError("grid must read lo:hi:step");
  const double lo = detail::parse_double(parts[0], "grid start");
  const double hi = detail::parse_double(parts[1], "grid end");
  const double step = detail::parse_double(parts[2], "grid step");
  if (!(step > 0.0) || !(hi >= lo)) throw UsageError("grid needs step > 0 and hi >= lo");
  const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  std::vector<double> g;
  for (std::size_t i = 0; i < count; ++i) g.push_back(lo + step * static_cast<double>(i));
  return g;
}

/// "lo:hi" items separated by commas; each is the half-open interval [lo, hi).
inline IntervalSet parse_interval_set(const std::string& spec) {
  std::vector<Interval> parts;
  for (const auto& item : detail::split(spec, ',')) {
    const auto p = detail::split(item, ':');
    if (p.size() != 2) throw UsageError("window must read lo:hi[,lo:hi...]");
    parts.push_back({detail::parse_double(p[0], "window"), detail::parse_double(p[1], "window")});
  }
  IntervalSet B(parts);
  if (B.empty()) throw UsageError("window has zero measure");
  return B;
}

/// "pow:B", "example:interleaved", "biggap:b1,b2,...", "file:PATH" (one integer per line).
inline LacunarySequence parse_sequence_spec(const std::string& spec, std::size_t length) {
  try {
    if (detail::starts_with(spec, "pow:"))
      return LacunarySequence::power(detail::parse_u64(spec.substr(4), "base"), length);
    if (spec == "example:interleaved") return LacunarySequence::interleaved(length);
    if (detail::starts_with(spec, "biggap:")) {
      std::vector<std::uint64_t> gaps;
      for (const auto& t : detail::split(spec.substr(7), ',')) gaps.push_back(detail::parse_u64(t, "gap"));
      return big_gap_sequence(gaps);
    }
    if (detail::starts_with(spec, "file:")) {
      std::vector<std::uint64_t> terms;
      for (const auto& line : detail::read_lines(spec.substr(5))) {
        std::istringstream in(line);
        std::string tok;
        in >> tok;
        terms.push_back(detail::parse_u64(tok, "frequency"));
      }
      return LacunarySequence::from_integers(std::move(terms));
    }
  } catch (const ConstraintError& e) {
    throw UsageError(std::string("sequence '") + spec + "': " + e.what());
  }
  throw UsageError("unknown sequence spec '" + spec + "'");
}

/// "flat:ALPHA", "unit", "file:PATH" (line n holds a_{1,n} .. a_{n,n}).
inline CoefficientTriangle parse_coefficient_spec(const std::string& spec, NormalizerConvention conv) {
  if (spec == "unit") return CoefficientTriangle::unit(conv);
  if (detail::starts_with(spec, "flat:")) return CoefficientTriangle::flat(detail::parse_double(spec.substr(5), "alpha"), conv);
  if (detail::starts_with(spec, "file:")) {
    std::vector<std::vector<double>> rows;
    for (const auto& line : detail::read_lines(spec.substr(5))) {
      std::istringstream in(line);
      std::vector<double> row;
      std::string tok;
      while (in >> tok) row.push_back(detail::parse_double(tok, "coefficient"));
      rows.push_back(std::move(row));
    }
    try {
      return CoefficientTriangle::custom(std::move(rows), conv);
    } catch (const ConstraintError& e) {
      throw UsageError(std::string("coefficients '") + spec + "': " + e.what());
    }
  }
  throw UsageError("unknown coefficient spec '" + spec + "'");
}

/// "cos", "bernoulli", "rademacher", "custom-fourier:FILE" (lines "k a_k b_k").
inline PeriodicFunction parse_profile_spec(const std::string& spec) {
  if (spec == "cos") return PeriodicFunction::cosine();
  if (spec == "bernoulli") return PeriodicFunction::bernoulli();
  if (spec == "rademacher") return PeriodicFunction::rademacher0();
  if (detail::starts_with(spec, "custom-fourier:")) {
    std::vector<std::tuple<std::uint64_t, double, double>> terms;
    for (const auto& line : detail::read_lines(spec.substr(15))) {
      std::istringstream in(line);
      std::string k, a, b;
      if (!(in >> k >> a >> b)) throw UsageError("Fourier lines must read 'k a_k b_k'");
      terms.emplace_back(detail::parse_u64(k, "frequency"), detail::parse_double(a, "a_k"), detail::parse_double(b, "b_k"));
    }
    if (terms.empty()) throw UsageError("Fourier file is empty");
    return PeriodicFunction::trigonometric(std::move(terms));
  }
  throw UsageError("unknown function spec '" + spec + "'");
}

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

struct ExperimentConfig {
  std::string subcommand;
  std::string seq = "pow:2";
  std::string coeff = "flat:0.25";
  /// walsh, bernoulli, trig or holder.
  std::string family = "walsh";
  std::string profile = "cos";
  std::string n_grid = "256";
  std::size_t l = 2;
  std::size_t r = 1;
  std::string mode = "signed";
  std::string variant = "statement";
  std::string grid = "-1:1:0.05";
  bool imaginary = false;
  double y = 0.0;
  std::string window = "-0.5:0.5";
  double delta = 0.5;
  double v = 4.0;
  double w = 4.0;
  double gamma = 0.1;
  double D = 1.0;
  double K = 2.0;
  unsigned depth = default_decomposition_depth;
  unsigned strata_log2 = default_strata_log2;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  std::uint64_t budget = default_enumeration_budget;
  std::string out = "-";
  /// csv, jsonl or json; empty picks the subcommand default.
  std::string format;
  /// Verdict thresholds; NaN disables them.
  double tol = std::nan("");
  double max_slope = std::nan("");

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["subcommand"] = subcommand;
    j["seq"] = seq;
    j["coeff"] = coeff;
    j["family"] = family;
    j["f"] = profile;
    j["n"] = n_grid;
    j["l"] = l;
    j["r"] = r;
    j["mode"] = mode;
    j["variant"] = variant;
    j["grid"] = grid;
    j["imaginary"] = imaginary;
    j["y"] = y;
    j["window"] = window;
    j["delta"] = delta;
    j["v"] = v;
    j["w"] = w;
    j["gamma"] = gamma;
    j["D"] = D;
    j["K"] = K;
    j["depth"] = depth;
    j["strata_log2"] = strata_log2;
    j["seed"] = seed;
    j["threads"] = threads;
    j["budget"] = budget;
    j["format"] = format;
    j["tol"] = std::isnan(tol) ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(tol);
    j["max_slope"] = std::isnan(max_slope) ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(max_slope);
    return j;
  }
};

// ---------------------------------------------------------------------------
// Report writers
// ---------------------------------------------------------------------------

inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

using Cell = std::variant<double, long long, std::string>;

/// Tabular report: CSV with a leading comment line, or JSON lines.
class TableWriter {
 public:
  TableWriter(std::ostream& out, std::string format, const nlohmann::ordered_json& config,
              std::vector<std::string> columns)
      : out_(out), format_(std::move(format)), columns_(std::move(columns)) {
    nlohmann::ordered_json head;
    head["schema_version"] = report_schema_version();
    head["config"] = config;
    if (format_ == "csv") {
      out_ << "# " << head.dump() << '\n';
      for (std::size_t i = 0; i < columns_.size(); ++i) out_ << (i ? "," : "") << columns_[i];
      out_ << '\n';
    } else {
      out_ << head.dump() << '\n';
    }
  }

  void row(const std::vector<Cell>& cells) {
    if (cells.size() != columns_.size()) throw Error("row width does not match the header");
    if (format_ == "csv") {
      for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << text(cells[i]);
      out_ << '\n';
    } else {
      nlohmann::ordered_json j;
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (const auto* d = std::get_if<double>(&cells[i]))
          j[columns_[i]] = std::isfinite(*d) ? nlohmann::ordered_json(*d) : nlohmann::ordered_json(format_number(*d));
        else if (const auto* k = std::get_if<long long>(&cells[i]))
          j[columns_[i]] = *k;
        else
          j[columns_[i]] = std::get<std::string>(cells[i]);
      }
      out_ << j.dump() << '\n';
    }
  }

  /// Trailing summary: a comment line in CSV, a final object in JSON lines.
  void summary(const nlohmann::ordered_json& s) {
    if (format_ == "csv")
      out_ << "# summary " << s.dump() << '\n';
    else
      out_ << nlohmann::ordered_json{{"summary", s}}.dump() << '\n';
  }

 private:
  static std::string text(const Cell& c) {
    if (const auto* d = std::get_if<double>(&c)) return format_number(*d);
    if (const auto* k = std::get_if<long long>(&c)) return std::to_string(*k);
    return std::get<std::string>(c);
  }

  std::ostream& out_;
  std::string format_;
  std::vector<std::string> columns_;
};

/// Single-object report with the schema version and config embedded.
inline void write_document(std::ostream& out, const std::string& format, const nlohmann::ordered_json& config,
                           nlohmann::ordered_json body) {
  nlohmann::ordered_json doc;
  doc["schema_version"] = report_schema_version();
  doc["config"] = config;
  for (auto it = body.begin(); it != body.end(); ++it) doc[it.key()] = it.value();
  if (format == "json")
    out << doc.dump(2) << '\n';
  else
    out << doc.dump() << '\n';
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

namespace detail {

/// Law and normaliser of the requested family at size n.
struct FamilyLaw {
  std::optional<DiscreteLaw> discrete;
  std::optional<BernoulliSumLaw> bernoulli;
  double A = 1.0;

  template <class F>
  auto visit(F&& f) const {
    return discrete ? f(*discrete) : f(*bernoulli);
  }
};

inline std::size_t grid_top(const std::vector<std::size_t>& ns) { return ns.back(); }

inline FamilyLaw family_law(const ExperimentConfig& cfg, std::size_t n, std::size_t top) {
  FamilyLaw fl;
  if (cfg.family == "walsh") {
    const auto seq = parse_sequence_spec(cfg.seq, top);
    const auto coeffs = parse_coefficient_spec(cfg.coeff, NormalizerConvention::walsh);
    fl.A = coeffs.normalizer(n);
    if (seq.q() >= 2.0 && seq.integral())
      fl.discrete = walsh_independent_law(seq, coeffs, n);
    else
      fl.discrete = exact_law(walsh_partial_sum(seq, coeffs, n), LawSource::walsh_exact);
  } else if (cfg.family == "bernoulli") {
    // Moderate deviations use X = n^{-1/4} S_n with A^2 = sqrt(n)/4; the
    // other statistics use S_n itself with A = sqrt(n)/2.
    const double s = cfg.subcommand == "mdp" ? std::pow(static_cast<double>(n), -0.25) : 1.0;
    fl.bernoulli.emplace(n, s);
    fl.A = std::sqrt(static_cast<double>(n)) / 2.0 * s;
  } else if (cfg.family == "trig" || cfg.family == "holder") {
    const auto seq = parse_sequence_spec(cfg.seq, top);
    const auto coeffs = parse_coefficient_spec(cfg.coeff, NormalizerConvention::trig);
    const PeriodicFunction f = cfg.family == "trig" ? PeriodicFunction::cosine() : parse_profile_spec(cfg.profile);
    fl.discrete = monte_carlo_law(f, seq, coeffs, n, cfg.seed, cfg.strata_log2, cfg.threads);
    if (cfg.family == "trig") {
      fl.A = coeffs.normalizer(n);
    } else {
      const double var = fl.discrete->variance();
      fl.A = std::sqrt(var);
    }
  } else {
    throw UsageError("unknown family '" + cfg.family + "'");
  }
  return fl;
}

inline bool within(double value, double target, double tol) {
  return std::isnan(tol) || std::abs(value - target) <= tol * std::max(std::abs(target), 1e-300);
}

}  // namespace detail

inline int run_simulate(const ExperimentConfig& cfg, std::ostream& out) {
  const auto ns = parse_size_grid(cfg.n_grid);
  TableWriter t(out, cfg.format, cfg.to_json(), {"n", "A_n", "atoms", "mean", "variance", "source"});
  for (std::size_t n : ns) {
    const auto fl = detail::family_law(cfg, n, detail::grid_top(ns));
    if (fl.discrete) {
      t.row({static_cast<long long>(n), fl.A, static_cast<long long>(fl.discrete->size()), fl.discrete->mean(),
             fl.discrete->variance(), std::string(to_string(fl.discrete->source()))});
    } else {
      t.row({static_cast<long long>(n), fl.A, -1LL, 0.0, fl.bernoulli->variance(), std::string("bernoulli-exact")});
    }
  }
  return 0;
}

inline int run_mgf(const ExperimentConfig& cfg, std::ostream& out) {
  const auto ns = parse_size_grid(cfg.n_grid);
  const auto pts = parse_real_grid(cfg.grid);
  TableWriter t(out, cfg.format, cfg.to_json(),
                {"n", "t_n", "z_re", "z_im", "phi_re", "phi_im", "residual_re", "residual_im", "target_re", "target_im",
                 "abs_error"});
  double worst = 0.0;
  for (std::size_t n : ns) {
    std::function<complex(complex)> log_phi;
    double t_n = 0.0;
    LimitingFunction psi = LimitingFunction::trivial();
    bool imag = cfg.imaginary;
    if (cfg.family == "bernoulli") {
      const double s = std::pow(static_cast<double>(n), -0.25);
      t_n = std::sqrt(static_cast<double>(n)) / 4.0;
      psi = LimitingFunction::bernoulli();
      log_phi = [n, s](complex z) { return log_mgf_bernoulli_exact(n, z, default_bernoulli_tail, s); };
    } else if (cfg.family == "walsh") {
      const auto seq = parse_sequence_spec(cfg.seq, detail::grid_top(ns));
      const auto coeffs = parse_coefficient_spec(cfg.coeff, NormalizerConvention::walsh);
      t_n = coeffs.power_sum(n, 2);
      psi = LimitingFunction::walsh(coeffs.fourth_power_sum(n));
      log_phi = [seq, coeffs, n](complex z) { return log_mgf_walsh_exact(seq, coeffs, n, z); };
    } else if (cfg.family == "trig") {
      const auto seq = parse_sequence_spec(cfg.seq, detail::grid_top(ns));
      const auto coeffs = parse_coefficient_spec(cfg.coeff, NormalizerConvention::trig);
      t_n = coeffs.power_sum(n, 2) / 2.0;
      imag = true;
      const bool chain = seq.integral() && seq.integer_ratios(n).has_value();
      log_phi = [seq, coeffs, n, chain](complex z) {
        const double lambda = z.imag();
        return std::log(chain ? char_fn_transfer(seq, coeffs, n, lambda)
                              : char_fn_quadrature(PeriodicSum::trig(seq, coeffs, n), lambda));
      };
    } else {
      throw UsageError("mgf supports families walsh, bernoulli and trig");
    }
    for (double g : pts) {
      const complex z = imag ? complex(0.0, g) : complex(g, 0.0);
      const complex lp = log_phi(z);
      const complex phi = std::exp(lp);
      const complex res = residual_from_log(lp, t_n, z);
      const complex target = psi(z);
      const double err = std::abs(res - target);
      worst = std::max(worst, err);
      t.row({static_cast<long long>(n), t_n, z.real(), z.imag(), phi.real(), phi.imag(), res.real(), res.imag(),
             target.real(), target.imag(), err});
    }
  }
  t.summary({{"max_abs_error", worst}});
  return std::isnan(cfg.tol) || worst <= cfg.tol ? 0 : 1;
}

inline int run_count_solutions(const ExperimentConfig& cfg, std::ostream& out) {
  const auto ns = parse_size_grid(cfg.n_grid);
  if (ns.size() != 1) throw UsageError("count-solutions takes a single n");
  const std::size_t n = ns.front();
  const auto seq = parse_sequence_spec(cfg.seq, n);
  EnumerationOptions opt;
  opt.budget = cfg.budget;
  opt.threads = cfg.threads;
  if (cfg.variant == "proof")
    opt.variant = LargeRatioVariant::proof;
  else if (cfg.variant != "statement")
    throw UsageError("variant must be statement or proof");
  SolutionCountReport rep;
  if (cfg.mode == "signed")
    rep = count_signed_solutions(seq, n, cfg.l, cfg.r, opt);
  else if (cfg.mode == "xor")
    rep = count_xor_solutions(seq, n, cfg.l, opt);
  else
    throw UsageError("mode must be signed or xor");

  auto bound_json = [](double b) { return std::isnan(b) ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(b); };
  if (cfg.format == "csv") {
    TableWriter t(out, "csv", cfg.to_json(), {"class", "max_count", "bound", "verdict", "achievable_A"});
    for (const auto& c : rep.classes)
      t.row({c.label(), static_cast<long long>(c.max_count()), c.bound, std::string(c.verdict() ? "pass" : "fail"),
             static_cast<long long>(c.per_A.size())});
    t.summary({{"max_count", rep.max_count()}, {"zero_count", rep.count(0)}, {"verdict", rep.verdict() ? "pass" : "fail"}});
    return rep.verdict() ? 0 : 1;
  }
  double bound = std::nan("");
  for (const auto& c : rep.classes)
    if (!std::isnan(c.bound) && (std::isnan(bound) || c.bound < bound)) bound = c.bound;
  nlohmann::ordered_json body;
  body["params"] = {{"seq", cfg.seq},        {"n", n},          {"l", cfg.l},
                    {"r", rep.r},            {"mode", cfg.mode}, {"q", rep.q},
                    {"rule", to_string(rep.rule)}, {"configurations", rep.configurations}};
  body["max_count"] = rep.max_count();
  body["bound"] = bound_json(bound);
  body["zero_count"] = rep.count(0);
  body["verdict"] = rep.verdict() ? "pass" : "fail";
  nlohmann::ordered_json top = nlohmann::ordered_json::array();
  for (const auto& [A, c] : rep.top_buckets(10)) top.push_back({to_string(A), c});
  body["top_buckets"] = top;
  nlohmann::ordered_json classes = nlohmann::ordered_json::array();
  for (const auto& c : rep.classes)
    classes.push_back({{"class", c.label()},
                       {"max_count", c.max_count()},
                       {"bound", bound_json(c.bound)},
                       {"verdict", c.verdict() ? "pass" : "fail"},
                       {"achievable_A", c.per_A.size()}});
  body["classes"] = classes;
  write_document(out, cfg.format, cfg.to_json(), body);
  return rep.verdict() ? 0 : 1;
}

/// Shared driver of llt, kolmogorov, tails and mdp: one row per n.
inline int run_limit_statistic(const ExperimentConfig& cfg, std::ostream& out) {
  const auto ns = parse_size_grid(cfg.n_grid);
  TableWriter t(out, cfg.format, cfg.to_json(), {"n", "A_n", "statistic", "target", "abs_error"});
  std::vector<RatePoint> rates;
  bool ok = true;
  const IntervalSet B = cfg.subcommand == "llt" ? parse_interval_set(cfg.window) : IntervalSet{};
  for (std::size_t n : ns) {
    const auto fl = detail::family_law(cfg, n, detail::grid_top(ns));
    double stat = 0.0, target = 0.0;
    if (cfg.subcommand == "llt") {
      const auto r = fl.visit([&](const auto& law) { return llt_statistic(law, fl.A, cfg.y, B, cfg.delta); });
      stat = r.statistic;
      target = r.target;
    } else if (cfg.subcommand == "kolmogorov") {
      stat = fl.visit([&](const auto& law) { return kolmogorov_distance(law, fl.A); });
      rates.push_back({fl.A, stat});
    } else if (cfg.subcommand == "tails") {
      stat = fl.visit([&](const auto& law) { return tail_ratio_extended_clt(law, fl.A, cfg.y); });
      target = 1.0;
    } else {
      const LimitingFunction psi = cfg.family == "bernoulli" ? LimitingFunction::bernoulli()
                                   : cfg.family == "walsh"
                                       ? LimitingFunction::walsh(parse_coefficient_spec(cfg.coeff, NormalizerConvention::walsh).fourth_power_sum(n))
                                       : LimitingFunction::trivial();
      const auto md = fl.visit([&](const auto& law) { return moderate_deviation_check(law, fl.A, cfg.y, psi); });
      stat = md.observed;
      target = md.predicted;
    }
    const double err = std::abs(stat - target);
    t.row({static_cast<long long>(n), fl.A, stat, target, err});
    if (n == ns.back() && cfg.subcommand != "kolmogorov") ok = detail::within(stat, target, cfg.tol);
  }
  if (cfg.subcommand == "kolmogorov" && rates.size() >= 3) {
    const double slope = berry_esseen_rate_fit(rates);
    t.summary({{"fitted_slope", slope}});
    if (!std::isnan(cfg.max_slope) && slope > cfg.max_slope) ok = false;
  }
  return ok ? 0 : 1;
}

inline int run_martingale_check(const ExperimentConfig& cfg, std::ostream& out) {
  const auto ns = parse_size_grid(cfg.n_grid);
  if (ns.size() != 1) throw UsageError("martingale-check takes a single n");
  const PeriodicFunction f = parse_profile_spec(cfg.profile);
  const DyadicDecomposition dec(f, cfg.depth, std::min<unsigned>(static_cast<unsigned>(cfg.r), default_stored_depth),
                                cfg.threads);
  const auto c = martingale_inequality_check(dec, static_cast<unsigned>(cfg.r), ns.front(), cfg.threads);
  if (cfg.format == "csv") {
    TableWriter t(out, "csv", cfg.to_json(), {"r", "n", "lhs", "rhs", "margin", "tail_bound", "decay_exponent"});
    t.row({static_cast<long long>(c.r), static_cast<long long>(c.n), c.lhs, c.rhs, c.margin(), c.tail_bound,
           dec.decay_exponent(4, cfg.depth)});
  } else {
    write_document(out, cfg.format, cfg.to_json(),
                   {{"lhs", c.lhs},
                    {"rhs", c.rhs},
                    {"margin", c.margin()},
                    {"tail_bound", c.tail_bound},
                    {"decay_exponent", dec.decay_exponent(4, cfg.depth)},
                    {"verdict", c.holds() ? "pass" : "fail"}});
  }
  return c.holds() ? 0 : 1;
}

inline int run_zone_check(const ExperimentConfig& cfg, std::ostream& out) {
  const auto ns = parse_size_grid(cfg.n_grid);
  std::function<complex(std::size_t, double)> log_phi;
  std::function<double(std::size_t)> t_n;
  if (cfg.family == "walsh") {
    const auto seq = parse_sequence_spec(cfg.seq, ns.back());
    const auto coeffs = parse_coefficient_spec(cfg.coeff, NormalizerConvention::walsh);
    log_phi = [seq, coeffs](std::size_t n, double l) { return log_mgf_walsh_exact(seq, coeffs, n, complex(0.0, l)); };
    t_n = [coeffs](std::size_t n) { return coeffs.power_sum(n, 2); };
  } else if (cfg.family == "bernoulli") {
    log_phi = [](std::size_t n, double l) {
      return log_mgf_bernoulli_exact(n, complex(0.0, l), default_bernoulli_tail, std::pow(static_cast<double>(n), -0.25));
    };
    t_n = [](std::size_t n) { return std::sqrt(static_cast<double>(n)) / 4.0; };
  } else {
    throw UsageError("zone-check supports families walsh and bernoulli");
  }
  const auto rep = zone_of_control_check(log_phi, t_n, cfg.v, cfg.w, cfg.gamma, cfg.D, ns);
  auto opt_json = [](const auto& o) { return o ? nlohmann::ordered_json(*o) : nlohmann::ordered_json(nullptr); };
  if (cfg.format == "csv") {
    TableWriter t(out, "csv", cfg.to_json(), {"v", "w", "gamma", "D", "K1", "K2", "K2_fit", "D_max", "verdict"});
    t.row({rep.v, rep.w, rep.gamma, rep.D, rep.K1, rep.K2, rep.K2_fit, rep.D_max, std::string(rep.pass ? "pass" : "fail")});
  } else {
    write_document(out, cfg.format, cfg.to_json(),
                   {{"v", rep.v},
                    {"w", rep.w},
                    {"gamma", rep.gamma},
                    {"D", rep.D},
                    {"K1", std::isfinite(rep.K1) ? nlohmann::ordered_json(rep.K1) : nlohmann::ordered_json("inf")},
                    {"K2", rep.K2},
                    {"K2_fit", rep.K2_fit},
                    {"D_max", std::isfinite(rep.D_max) ? nlohmann::ordered_json(rep.D_max) : nlohmann::ordered_json("inf")},
                    {"z1", rep.z1},
                    {"z2", rep.z2},
                    {"verdict", rep.pass ? "pass" : "fail"},
                    {"message", rep.message},
                    {"extreme_n", opt_json(rep.offending_n)},
                    {"extreme_lambda", opt_json(rep.offending_lambda)}});
  }
  return rep.pass ? 0 : 1;
}

inline const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{"simulate", "mgf",  "count-solutions",  "llt",       "kolmogorov",
                                              "tails",    "mdp",  "martingale-check", "zone-check"};
  return names;
}

inline bool document_subcommand(const std::string& s) {
  return s == "count-solutions" || s == "martingale-check" || s == "zone-check";
}

/// Runs one experiment, writing the report to out. Returns the exit status.
///
/// Usage problems (bad specs, impossible parameters) throw UsageError; other
/// library errors propagate.
inline int run(ExperimentConfig cfg, std::ostream& out) {
  if (cfg.format.empty()) cfg.format = document_subcommand(cfg.subcommand) ? "json" : "csv";
  if (cfg.format != "csv" && cfg.format != "jsonl" && cfg.format != "json")
    throw UsageError("format must be csv, jsonl or json");
  if (cfg.format == "json" && !document_subcommand(cfg.subcommand)) cfg.format = "jsonl";
  if (!(std::isnan(cfg.tol) || cfg.tol > 0.0)) throw UsageError("tolerance must be positive");
  const auto& s = cfg.subcommand;
  if (s == "simulate") return run_simulate(cfg, out);
  if (s == "mgf") return run_mgf(cfg, out);
  if (s == "count-solutions") return run_count_solutions(cfg, out);
  if (s == "llt" || s == "kolmogorov" || s == "tails" || s == "mdp") return run_limit_statistic(cfg, out);
  if (s == "martingale-check") return run_martingale_check(cfg, out);
  if (s == "zone-check") return run_zone_check(cfg, out);
  throw UsageError("unknown subcommand '" + s + "'");
}

}  // namespace lacunary
