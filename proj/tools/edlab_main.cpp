// Command-line front end: run configured experiments, query K for a
// catalog system, or list what the catalog offers.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "edlab/catalog.hpp"
#include "edlab/config.hpp"
#include "edlab/errors.hpp"
#include "edlab/format.hpp"
#include "edlab/harness.hpp"

namespace {

void print_report(const edlab::ExperimentReport& rep) {
  std::cout << "k_fit = " << edlab::format_double(rep.k_fit) << '\n';
  std::cout << "k_formula = " << edlab::format_double(rep.k_formula) << '\n';
  std::cout << "k_closed = " << edlab::format_double(rep.k_closed) << '\n';
  std::cout << "gap_fit_formula = " << edlab::format_double(rep.gap_fit_formula) << '\n';
  std::cout << "gap_fit_closed = " << edlab::format_double(rep.gap_fit_closed) << '\n';
  std::cout << "max_residual = " << edlab::format_double(rep.max_residual) << '\n';
  std::cout << "status = " << rep.status << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"density-evolution laboratory"};
  app.require_subcommand(1);

  std::string config_path;
  CLI::App* run = app.add_subcommand("run", "run the experiment described by a config file");
  run->add_option("--config", config_path, "path to a TOML config")->required();

  std::string system_kind = "circle";
  double omega = 0.5;
  double contraction = 0.5;
  double t_max = 10.0;
  std::uint64_t seed = 1;
  CLI::App* k = app.add_subcommand("k", "fit the growth rate of nu(log rho_t) for one system");
  k->add_option("--system", system_kind, "circle or baker")
      ->check(CLI::IsMember({"circle", "baker"}));
  k->add_option("--omega", omega, "circle drive strength");
  k->add_option("--a", contraction, "baker contraction in (0, 1/2]");
  k->add_option("--t-max", t_max, "largest time in the fitted series");
  k->add_option("--seed", seed, "seed for any sampled measure");

  CLI::App* list = app.add_subcommand("list-systems", "show the system catalog");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      const edlab::ExperimentConfig cfg = edlab::load_config(config_path);
      const edlab::ExperimentReport rep = edlab::run_experiment(cfg);
      print_report(rep);
      return rep.passed ? 0 : 1;
    }

    if (k->parsed()) {
      edlab::ExperimentConfig cfg;
      cfg.experiment_kind = "k-slope";
      cfg.seed = seed;
      if (system_kind == "circle") {
        cfg.system = edlab::CircleFlowSpec{omega};
      } else {
        cfg.system = edlab::BakerSpec{contraction};
        if (contraction < 0.5) cfg.measure_kind = "empirical";
      }
      if (!(t_max > 0.0)) throw edlab::ConfigValueError("--t-max must be positive");
      const long steps = std::max<long>(1, static_cast<long>(std::llround(t_max)));
      for (long i = 0; i <= steps; ++i)
        cfg.times.push_back(t_max * static_cast<double>(i) / static_cast<double>(steps));
      edlab::validate_config(cfg);
      const edlab::KSlopeResult result = edlab::k_slope_run(cfg);
      print_report(result.report);
      return result.report.passed ? 0 : 1;
    }

    if (list->parsed()) {
      for (const edlab::CatalogEntry& entry : edlab::catalog_entries())
        std::cout << entry.pattern << "\n    " << entry.summary << '\n';
      return 0;
    }
  } catch (const edlab::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
