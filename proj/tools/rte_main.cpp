// Command-line front end: solve one configuration, sweep parameter axes,
// run the analysis check suite, or emit a benchmark-table reproduction.
// Exit codes: 0 success, 1 usage/input, 2 convergence or failed checks,
// 3 factorization.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rte/errors.hpp"
#include "rte/harness.hpp"

namespace {

// Every value is captured as text and routed through RunConfig::set so the
// CLI flags and the config-file keys share one parser and one validator.
struct CommonOpts {
  std::string config_file;
  // (flag name without dashes, value) in the order CLI11 stored them
  std::vector<std::pair<std::string, std::string>> kv;
};

void add_common(CLI::App* sub, CommonOpts& o) {
  sub->add_option("--config", o.config_file,
                  "flat key=value config file; explicit flags override it");
  for (const char* key :
       {"problem", "backend", "n", "eps", "medium", "mu-s", "mu-a", "rho",
        "phase", "phase-a", "modes", "source", "out-dir", "seed"}) {
    const std::string k = key;
    sub->add_option_function<std::string>(
        "--" + k, [&o, k](const std::string& v) { o.kv.emplace_back(k, v); });
  }
  sub->add_flag_function("--plot", [&o](int64_t) { o.kv.emplace_back("plot", "1"); },
                         "also render the solution as a PNG");
}

rte::RunConfig build_config(const CommonOpts& o) {
  rte::RunConfig cfg = o.config_file.empty()
                           ? rte::RunConfig{}
                           : rte::RunConfig::from_file(o.config_file);
  for (const auto& [k, v] : o.kv) cfg.set(k, v);
  return cfg;
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stoi(item));
  return out;
}

std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"2D steady-state radiative transfer: dense, FFT, and "
               "skeletonization backends"};
  app.require_subcommand(1);

  CommonOpts solve_opts;
  CLI::App* cmd_solve = app.add_subcommand("solve", "run one configuration");
  add_common(cmd_solve, solve_opts);

  CommonOpts sweep_opts;
  std::string sweep_ns, sweep_epss, sweep_rhos, sweep_table = "sweep";
  CLI::App* cmd_sweep =
      app.add_subcommand("sweep", "one table row per axis combination");
  add_common(cmd_sweep, sweep_opts);
  cmd_sweep->add_option("--n-list", sweep_ns, "comma list of grid sizes");
  cmd_sweep->add_option("--eps-list", sweep_epss, "comma list of tolerances");
  cmd_sweep->add_option("--rho-list", sweep_rhos, "comma list of rho values");
  cmd_sweep->add_option("--table", sweep_table, "output table name");

  std::string check_dir = ".";
  CLI::App* cmd_check =
      app.add_subcommand("check", "analysis invariants battery");
  cmd_check->add_option("--out-dir", check_dir);

  std::string repro_preset, repro_dir = ".";
  int repro_n = 0;
  CLI::App* cmd_repro =
      app.add_subcommand("repro", "emit a benchmark table preset");
  cmd_repro->add_option("preset", repro_preset, "table preset name")->required();
  cmd_repro->add_option("--out-dir", repro_dir);
  cmd_repro->add_option("--n", repro_n, "override the preset grid sizes");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // help/version
    app.exit(e);
    return 1;
  }

  try {
    if (*cmd_solve) {
      const rte::RunConfig cfg = build_config(solve_opts);
      const rte::RunResult res = rte::run(cfg);
      std::printf("%s  t_pre=%.4fs t_sol=%.4fs", cfg.slug().c_str(), res.t_pre,
                  res.t_sol);
      if (res.iterations > 0) std::printf(" iters=%d", res.iterations);
      if (res.error) {
        std::printf(" err=%.3e (ref %s)", *res.error, res.reference.c_str());
      }
      std::printf("\n");
      if (!res.solution_path.empty()) {
        std::printf("solution: %s\n", res.solution_path.c_str());
      }
      if (!res.report_path.empty()) {
        std::printf("report:   %s\n", res.report_path.c_str());
      }
      if (!res.plot_path.empty()) {
        std::printf("plot:     %s\n", res.plot_path.c_str());
      }
    } else if (*cmd_sweep) {
      const rte::RunConfig base = build_config(sweep_opts);
      rte::SweepAxes axes;
      if (!sweep_ns.empty()) axes.n = parse_int_list(sweep_ns);
      if (!sweep_epss.empty()) axes.eps = parse_double_list(sweep_epss);
      if (!sweep_rhos.empty()) axes.rho = parse_double_list(sweep_rhos);
      const std::string path = rte::sweep(base, axes, sweep_table);
      std::printf("table: %s\n", path.c_str());
    } else if (*cmd_check) {
      std::string summary;
      const bool ok = rte::check_suite(check_dir, &summary);
      std::fputs(summary.c_str(), stdout);
      if (!ok) {
        std::fprintf(stderr, "analysis checks failed\n");
        return 2;
      }
    } else if (*cmd_repro) {
      const std::string path = rte::repro(repro_preset, repro_dir, repro_n);
      std::printf("table: %s\n", path.c_str());
    }
  } catch (const rte::ConvergenceError& e) {
    std::fprintf(stderr, "convergence failure: %s\n", e.what());
    if (!e.residual_history.empty()) {
      std::fprintf(stderr, "last residuals:");
      const size_t start =
          e.residual_history.size() > 5 ? e.residual_history.size() - 5 : 0;
      for (size_t i = start; i < e.residual_history.size(); ++i) {
        std::fprintf(stderr, " %.3e", e.residual_history[i]);
      }
      std::fprintf(stderr, "\n");
    }
    return 2;
  } catch (const rte::FactorizationError& e) {
    std::fprintf(stderr, "factorization failure: %s\n", e.what());
    return 3;
  } catch (const rte::ConsistencyError& e) {
    std::fprintf(stderr, "consistency failure: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
