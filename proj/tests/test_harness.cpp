#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "edlab/harness.hpp"

using namespace edlab;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& leaf)
      : path(std::filesystem::temp_directory_path() / ("edlab-harness-" + leaf)) {
    std::filesystem::remove_all(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

std::vector<double> unit_times(int up_to) {
  std::vector<double> t;
  for (int i = 0; i <= up_to; ++i) t.push_back(static_cast<double>(i));
  return t;
}

}  // namespace

TEST_CASE("growth-rate run on the circle flow passes its gates") {
  TempDir tmp("k-slope");
  ExperimentConfig cfg;
  cfg.system = CircleFlowSpec{0.5};
  cfg.experiment_kind = "k-slope";
  cfg.times = unit_times(5);
  cfg.output_dir = (tmp.path / "run").string();

  const ExperimentReport rep = run_experiment(cfg);
  CHECK(rep.passed);
  CHECK(rep.status == "pass");
  CHECK(rep.k_fit == Catch::Approx(std::sqrt(3.0) / 2.0).margin(1e-9));
  CHECK(rep.gap_fit_formula < 1e-9);
  CHECK(rep.gap_fit_closed < 1e-9);
  CHECK(rep.max_residual < 1e-10);

  CHECK(std::filesystem::exists(tmp.path / "run" / "report.txt"));
  CHECK(std::filesystem::exists(tmp.path / "run" / "log_density_series.csv"));
  const std::string report = slurp(tmp.path / "run" / "report.txt");
  CHECK(report.find("status = pass\n") != std::string::npos);
  CHECK(report.find("k_fit = ") != std::string::npos);
}

TEST_CASE("repeated runs are byte-identical") {
  TempDir tmp("determinism");
  ExperimentConfig cfg;
  cfg.system = BakerSpec{0.25};
  cfg.experiment_kind = "k-slope";
  cfg.measure_kind = "empirical";
  cfg.burn_in = 100;
  cfg.samples = 2000;
  cfg.seed = 5;
  cfg.times = unit_times(8);

  cfg.output_dir = (tmp.path / "a").string();
  const ExperimentReport first = run_experiment(cfg);
  cfg.output_dir = (tmp.path / "b").string();
  const ExperimentReport second = run_experiment(cfg);

  CHECK(first.passed);
  CHECK(second.passed);
  // Sampled orbit, compensated sums, fixed traversal order: the whole
  // artifact set must reproduce bit for bit.
  for (const char* name : {"report.txt", "log_density_series.csv"}) {
    const std::string a = slurp(tmp.path / "a" / name);
    const std::string b = slurp(tmp.path / "b" / name);
    CHECK(a == b);
    CHECK_FALSE(a.empty());
  }

  // The sampled-measure run still nails the constant inverse Jacobian.
  CHECK(first.k_fit == Catch::Approx(std::log(2.0)).margin(1e-9));
  CHECK(first.k_closed == Catch::Approx(std::log(2.0)).margin(1e-15));
}

TEST_CASE("ratio-moment run on the circulating flow passes its gates") {
  TempDir tmp("bp");
  ExperimentConfig cfg;
  cfg.system = CircleFlowSpec{2.0};
  cfg.experiment_kind = "bp-invariance";
  cfg.p = 2.0;
  cfg.epsilon = 0.5;
  cfg.quad_nodes = 1024;
  cfg.times = unit_times(3);
  cfg.output_dir = (tmp.path / "run").string();

  const ExperimentReport rep = run_experiment(cfg);
  CHECK(rep.passed);
  CHECK(rep.max_residual < 1e-4);
  CHECK(std::filesystem::exists(tmp.path / "run" / "bp_series.csv"));
}

TEST_CASE("entropy run on a flow matches rate against finite differences") {
  TempDir tmp("entropy-flow");
  ExperimentConfig cfg;
  cfg.system = CircleFlowSpec{0.5};
  cfg.experiment_kind = "entropy-rate";
  cfg.quad_nodes = 512;
  cfg.times = unit_times(2);
  cfg.output_dir = (tmp.path / "run").string();

  const ExperimentReport rep = run_experiment(cfg);
  CHECK(rep.passed);
  CHECK(rep.max_residual < 1e-5);
  CHECK(std::filesystem::exists(tmp.path / "run" / "entropy_series.csv"));
  CHECK(std::filesystem::exists(tmp.path / "run" / "entropy_rate_series.csv"));
}

TEST_CASE("entropy run on the volume-preserving map is flat") {
  TempDir tmp("entropy-map");
  ExperimentConfig cfg;
  cfg.system = BakerSpec{0.5};
  cfg.experiment_kind = "entropy-rate";
  cfg.density = "cosine-bump";
  cfg.epsilon = 0.5;
  cfg.dyadic_depth = 8;
  cfg.times = unit_times(4);
  cfg.output_dir = (tmp.path / "run").string();

  const ExperimentReport rep = run_experiment(cfg);
  CHECK(rep.passed);
  CHECK(rep.max_residual < 1e-9);
  CHECK(std::filesystem::exists(tmp.path / "run" / "entropy_series.csv"));
  CHECK(std::filesystem::exists(tmp.path / "run" / "log_density_series.csv"));
}

TEST_CASE("ratio run holds the observed ratio constant") {
  TempDir tmp("ratio");
  ExperimentConfig cfg;
  cfg.system = CircleFlowSpec{0.5};
  cfg.experiment_kind = "ratio-invariance";
  cfg.f = "identity";
  cfg.epsilon = 0.9;
  cfg.times = unit_times(10);
  cfg.output_dir = (tmp.path / "run").string();

  const ExperimentReport rep = run_experiment(cfg);
  CHECK(rep.passed);
  CHECK(rep.max_residual < 1e-8);
  CHECK(std::filesystem::exists(tmp.path / "run" / "ratio_series.csv"));

  cfg.f = "log";
  cfg.output_dir = (tmp.path / "run-log").string();
  CHECK(run_experiment(cfg).passed);
}

TEST_CASE("reversibility run pairs opposite rates") {
  TempDir tmp("reversibility");
  ExperimentConfig cfg;
  cfg.system = CircleFlowSpec{0.8};
  cfg.experiment_kind = "reversibility";
  cfg.times = {0.0, 5.0};
  cfg.seed = 11;
  cfg.output_dir = (tmp.path / "run").string();

  const ExperimentReport rep = run_experiment(cfg);
  CHECK(rep.passed);
  CHECK(rep.k_fit == Catch::Approx(0.6).margin(1e-12));
  CHECK(rep.k_formula == Catch::Approx(0.6).margin(1e-12));
  CHECK(rep.gap_fit_formula < 1e-12);
  CHECK(rep.max_residual < 1e-8);
  CHECK(std::filesystem::exists(tmp.path / "run" / "reversal_residuals.csv"));
}

TEST_CASE("weak-convergence probe approaches the attractor moments") {
  TempDir tmp("probe");
  ExperimentConfig cfg;
  cfg.system = BakerSpec{0.25};
  cfg.experiment_kind = "weak-convergence-probe";
  cfg.measure_kind = "empirical";
  cfg.burn_in = 1000;
  cfg.samples = 100000;
  cfg.seed = 1;
  cfg.times = unit_times(10);
  cfg.output_dir = (tmp.path / "run").string();

  const ExperimentReport rep = run_experiment(cfg);
  CHECK(rep.passed);
  CHECK(rep.k_closed == Catch::Approx(1.0 / 3.0).margin(1e-15));
  CHECK(rep.gap_fit_closed < 2e-3);
  CHECK(rep.gap_fit_formula < 3e-3);
  for (const char* name : {"probe_x.csv", "probe_y.csv", "probe_xy.csv"}) {
    CHECK(std::filesystem::exists(tmp.path / "run" / name));
  }
}

TEST_CASE("impossible requests are reported as errors, not failures") {
  TempDir tmp("errors");

  auto expect_error = [&](ExperimentConfig cfg, const std::string& leaf) {
    cfg.output_dir = (tmp.path / leaf).string();
    const ExperimentReport rep = run_experiment(cfg);
    CHECK_FALSE(rep.passed);
    CHECK(rep.status.rfind("error: ", 0) == 0);
    // The report is still written so batch runs always leave a record.
    const std::string report = slurp(tmp.path / leaf / "report.txt");
    CHECK(report.find("status = error: ") != std::string::npos);
    return rep.status;
  };

  // The dissipative attractor carries no closed-form density to
  // integrate against; the run must say so rather than improvise.
  ExperimentConfig dissipative;
  dissipative.system = BakerSpec{0.25};
  dissipative.experiment_kind = "k-slope";
  dissipative.measure_kind = "closed-form";
  dissipative.times = unit_times(5);
  const std::string msg = expect_error(dissipative, "dissipative-closed-form");
  CHECK(msg.find("empirical") != std::string::npos);

  // Moment invariants need a smooth stationary density, which the
  // fixed-point regime does not have.
  ExperimentConfig bp;
  bp.system = CircleFlowSpec{0.5};
  bp.experiment_kind = "bp-invariance";
  bp.times = unit_times(3);
  expect_error(bp, "bp-atomic");

  // No reversal involution is declared for the map family.
  ExperimentConfig rev;
  rev.system = BakerSpec{0.5};
  rev.experiment_kind = "reversibility";
  rev.times = {0.0, 5.0};
  expect_error(rev, "reversibility-map");

  // Grid entropy of the dissipative map walks off the image.
  ExperimentConfig ent;
  ent.system = BakerSpec{0.25};
  ent.experiment_kind = "entropy-rate";
  ent.times = unit_times(3);
  expect_error(ent, "entropy-dissipative");

  // The marginal circle flow has no hyperbolic stationary measure.
  ExperimentConfig marginal;
  marginal.system = CircleFlowSpec{1.0};
  marginal.experiment_kind = "k-slope";
  marginal.times = unit_times(3);
  expect_error(marginal, "marginal-circle");

  // Flows have no orbit-sampled measure; the config is rejected.
  ExperimentConfig emp_flow;
  emp_flow.system = CircleFlowSpec{0.5};
  emp_flow.experiment_kind = "k-slope";
  emp_flow.measure_kind = "empirical";
  emp_flow.times = unit_times(3);
  expect_error(emp_flow, "empirical-flow");
}

TEST_CASE("config validation precedes any run") {
  ExperimentConfig cfg;
  cfg.experiment_kind = "spectral-gap";
  cfg.times = unit_times(3);
  CHECK_THROWS_AS(run_experiment(cfg), ConfigValueError);
}
