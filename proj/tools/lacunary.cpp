#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "lacunary/experiment.hpp"

namespace {

void add_common(CLI::App* sub, lacunary::ExperimentConfig& cfg) {
  sub->add_option("--seq", cfg.seq, "Frequency sequence: pow:B, example:interleaved, biggap:b1,b2,..., file:PATH");
  sub->add_option("--coeff", cfg.coeff, "Coefficients: flat:ALPHA, unit, file:PATH");
  sub->add_option("--kind,--family", cfg.family, "Series family: walsh, bernoulli, trig, holder");
  sub->add_option("--f,--function", cfg.profile, "Periodic profile: cos, bernoulli, rademacher, custom-fourier:FILE");
  sub->add_option("--n", cfg.n_grid, "Sizes, e.g. 256,1024 or 2^8..2^16");
  sub->add_option("--tol", cfg.tol, "Relative tolerance for the pass verdict");
}

}  // namespace

int main(int argc, char** argv) {
  lacunary::ExperimentConfig cfg;
  CLI::App app{"Numerical experiments on lacunary trigonometric and Walsh series"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--out", cfg.out, "Report path, - for stdout");
  app.add_option("--format", cfg.format, "csv, jsonl or json")->check(CLI::IsMember({"csv", "jsonl", "json"}));
  app.add_option("--seed", cfg.seed, "Seed for randomized estimators");
  app.add_option("--threads", cfg.threads, "Worker threads, 0 = auto");
  app.add_option("--budget", cfg.budget, "Enumeration budget in configurations");

  auto* simulate = app.add_subcommand("simulate", "Law summary per n");
  add_common(simulate, cfg);
  simulate->add_option("--strata-log2", cfg.strata_log2, "log2 of Monte-Carlo strata");

  auto* mgf = app.add_subcommand("mgf", "Moment generating function and mod-Gaussian residual");
  add_common(mgf, cfg);
  mgf->add_option("--grid", cfg.grid, "lo:hi:step");
  mgf->add_flag("--imaginary", cfg.imaginary, "Evaluate at z = i*lambda");

  auto* count = app.add_subcommand("count-solutions", "Exhaustive Diophantine solution counts");
  add_common(count, cfg);
  count->add_option("--l", cfg.l, "Number of terms");
  count->add_option("--r", cfg.r, "Coefficient bound");
  count->add_option("--mode", cfg.mode, "signed or xor");
  count->add_option("--variant", cfg.variant, "Large-ratio bound: statement or proof");

  for (const char* name : {"llt", "kolmogorov", "tails", "mdp"}) {
    auto* sub = app.add_subcommand(name, std::string("Limit statistic: ") + name);
    add_common(sub, cfg);
    sub->add_option("--y", cfg.y, "Shift or threshold");
    sub->add_option("--window", cfg.window, "Window B as lo:hi[,lo:hi...]");
    sub->add_option("--delta", cfg.delta, "Window scaling exponent");
    sub->add_option("--strata-log2", cfg.strata_log2, "log2 of Monte-Carlo strata");
    sub->add_option("--max-slope", cfg.max_slope, "Fail when the fitted rate slope exceeds this");
  }

  auto* mart = app.add_subcommand("martingale-check", "Dyadic martingale inequality");
  add_common(mart, cfg);
  mart->add_option("--r", cfg.r, "Truncation level");
  mart->add_option("--depth", cfg.depth, "Decomposition depth");

  auto* zone = app.add_subcommand("zone-check", "Zone of control fit");
  add_common(zone, cfg);
  zone->add_option("--v", cfg.v);
  zone->add_option("--w", cfg.w);
  zone->add_option("--gamma", cfg.gamma);
  zone->add_option("--D", cfg.D);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  cfg.subcommand = app.get_subcommands().front()->get_name();

  std::ofstream file;
  if (cfg.out != "-") {
    file.open(cfg.out, std::ios::binary);
    if (!file) {
      std::cerr << "error: cannot write '" << cfg.out << "'\n";
      return 2;
    }
  }
  std::ostream& out = cfg.out == "-" ? std::cout : file;
  try {
    const int status = lacunary::run(cfg, out);
    if (!out.flush()) {
      std::cerr << "error: cannot write '" << cfg.out << "'\n";
      return 2;
    }
    return status;
  } catch (const lacunary::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
