#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include <nsac/experiments.hpp>

using namespace nsac;
using Catch::Matchers::ContainsSubstring;

namespace {

namespace fs = std::filesystem;

struct ScratchDir {
  fs::path path;
  explicit ScratchDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~ScratchDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string file(const std::string& leaf) const { return (path / leaf).string(); }
};

bool states_identical(const SystemState& a, const SystemState& b) {
  if (a.t != b.t) return false;
  for (int c = 0; c < a.grid().dim(); ++c)
    for (std::size_t i = 0; i < a.grid().size(); ++i)
      if (a.u.comp(c)[i] != b.u.comp(c)[i]) return false;
  for (std::size_t i = 0; i < a.grid().size(); ++i)
    if (a.phi[i] != b.phi[i] || a.pi[i] != b.pi[i]) return false;
  return true;
}

Config small_config() {
  Config c;
  c.dim = 2;
  c.n = 16;
  c.stepper.dt = 1e-3;
  c.t_final = 0.05;
  c.output_every = 7;
  c.initial.kmax = 2;
  c.seed = 11;
  return c;
}

}  // namespace

TEST_CASE("run loop bookkeeping") {
  Config cfg = small_config();
  RunOutput out = run_simulation(cfg, /*write_outputs=*/false);
  REQUIRE(out.result.steps == 50);
  const std::vector<EnergyReport>& rs = out.result.reports;
  // row at t0, one per 7 steps, and the final step
  REQUIRE(rs.size() == 9);
  CHECK(rs.front().t == 0.0);
  CHECK(rs.front().residual == 0.0);
  CHECK_THAT(rs.back().t, Catch::Matchers::WithinRel(0.05, 1e-12));
  for (std::size_t i = 1; i < rs.size(); ++i) CHECK(rs[i].t > rs[i - 1].t);
  CHECK(out.series_path.empty());
  CHECK(out.snapshot_paths.empty());
  CHECK(out.result.state.t == rs.back().t);

  SECTION("span must be a whole number of steps") {
    Config bad = cfg;
    bad.t_final = 0.0505;
    CHECK_THROWS_AS(run_simulation(bad, false), ConfigError);
  }
}

TEST_CASE("full-service run writes deterministic artifacts") {
  ScratchDir dir("nsac_test_experiments_run");
  Config cfg = small_config();
  cfg.t_final = 0.04;
  cfg.output_every = 10;
  cfg.snapshot_every = 20;

  cfg.output_dir = dir.file("a");
  RunOutput a = run_simulation(cfg);
  REQUIRE(fs::exists(a.series_path));
  REQUIRE(fs::exists(a.config_path));
  REQUIRE(fs::exists(a.summary_path));
  REQUIRE(a.snapshot_paths.size() == 3);  // step 20, step 40, final
  CHECK_THAT(a.snapshot_paths[0], ContainsSubstring("state_000020.snap"));
  CHECK_THAT(a.snapshot_paths[1], ContainsSubstring("state_000040.snap"));
  CHECK_THAT(a.snapshot_paths[2], ContainsSubstring("final.snap"));

  SECTION("the CSV holds the in-memory series exactly") {
    std::vector<EnergyReport> back = read_reports_csv(a.series_path);
    CHECK(reports_to_csv(back) == reports_to_csv(a.result.reports));
  }
  SECTION("the config echo parses back to the run configuration") {
    Config echoed = parse_config_file(a.config_path);
    CHECK(serialize_config(echoed) == serialize_config(cfg));
  }
  SECTION("the summary names the run's shape") {
    const std::string text = ioutil::read_text_file(a.summary_path);
    CHECK_THAT(text, ContainsSubstring("steps = 40"));
    CHECK_THAT(text, ContainsSubstring("scheme = cnab2"));
    CHECK_THAT(text, ContainsSubstring("grid = 2d n=16"));
  }
  SECTION("identical configuration, identical bytes") {
    Config cfg2 = cfg;
    cfg2.output_dir = dir.file("b");
    RunOutput b = run_simulation(cfg2);
    CHECK(ioutil::read_text_file(a.series_path) == ioutil::read_text_file(b.series_path));
    CHECK(ioutil::read_text_file(a.summary_path) == ioutil::read_text_file(b.summary_path));
    CHECK(ioutil::read_text_file(a.snapshot_paths[2]) ==
          ioutil::read_text_file(b.snapshot_paths[2]));
  }
  SECTION("a run restarted from a mid-run snapshot retraces the original") {
    Config cont = cfg;
    cont.output_dir = dir.file("c");
    cont.initial.kind = InitialKind::snapshot;
    cont.initial.path = a.snapshot_paths[0];  // t = 0.02
    cont.snapshot_every = 20;                 // sync points line up with the original
    RunOutput c = run_simulation(cont);
    CHECK(states_identical(c.result.state, a.result.state));
  }
}

TEST_CASE("amplitude sweep") {
  Config cfg = small_config();
  cfg.model.sigma = 0.5;
  cfg.model.epsilon = 0.02;
  cfg.t_final = 0.2;
  cfg.output_every = 10;
  cfg.sweep.scales = {1.0, 2.0};
  cfg.sweep.window = 0.5;

  SweepResult r = dissipativity_sweep(cfg);
  REQUIRE(r.scales.size() == 2);
  CHECK(r.scales[0].scale == 1.0);
  CHECK(r.scales[1].scale == 2.0);
  for (const SweepScaleResult& s : r.scales) {
    CHECK(s.window_sup > 0.0);
    CHECK_FALSE(s.reports.empty());
    CHECK(s.entry_time <= cfg.t_final);
  }
  CHECK(r.c0_hat == std::max(r.scales[0].window_sup, r.scales[1].window_sup));
  CHECK(r.threshold == 1.05 * r.c0_hat);
  CHECK(r.spread >= 0.0);
  CHECK(r.spread <= 1.0);
  CHECK(r.t0_hat <= cfg.t_final);

  SECTION("scaled data really starts bigger") {
    CHECK(r.scales[1].reports.front().g_value > r.scales[0].reports.front().g_value);
  }
  SECTION("no damping mechanism, no sweep") {
    Config bad = cfg;
    bad.model.sigma = 0.0;
    bad.model.delta = 0.3;  // != kappa
    CHECK_THROWS_WITH(dissipativity_sweep(bad),
                      ContainsSubstring("sigma > 0 or delta == kappa"));
    bad.model.delta = bad.model.kappa;  // transported rate matching inertia is fine
    CHECK_NOTHROW(dissipativity_sweep(bad));
  }
}

TEST_CASE("contraction probe") {
  Config cfg = small_config();
  cfg.t_final = 0.05;
  cfg.output_every = 5;

  ContractResult r = contraction_experiment(cfg, 1e-6);
  CHECK(r.perturbation == 1e-6);
  CHECK_FALSE(r.conditional);
  REQUIRE(r.times.size() == r.ratios.size());
  REQUIRE(r.times.size() == 11);  // t0 plus every 5th of 50 steps
  CHECK(r.ratios.front() == 1.0);
  CHECK(r.c_sup >= 1.0);
  CHECK(r.c_sup < 100.0);  // no blow-up on this short horizon
  CHECK_FALSE(states_identical(r.base_final, r.pert_final));

  SECTION("transported relaxation marks the estimate conditional") {
    Config cd = cfg;
    cd.model.delta = 0.5;
    CHECK(contraction_experiment(cd, 1e-6).conditional);
  }
  SECTION("zero perturbation, identical trajectories") {
    ContractResult z = contraction_experiment(cfg, 0.0);
    CHECK(z.c_sup == 0.0);
    for (double q : z.ratios) CHECK(q == 0.0);
    CHECK(states_identical(z.base_final, z.pert_final));
  }
}

TEST_CASE("temporal self-convergence") {
  Config cfg = small_config();
  cfg.stepper.dt = 5e-4;  // within the scheme's asymptotic range for this data
  cfg.t_final = 0.05;
  ConvergenceResult r = convergence_study(cfg, 4);
  REQUIRE(r.ladder.size() == 4);
  CHECK(r.ladder[0] == 5e-4);
  CHECK(r.ladder[3] == 6.25e-5);
  REQUIRE(r.errors.size() == 3);
  REQUIRE(r.ratios.size() == 2);
  for (double e : r.errors) CHECK(e > 0.0);
  CHECK(r.errors[0] > r.errors[1]);
  CHECK(r.errors[1] > r.errors[2]);
  CHECK(r.order > 1.6);
  CHECK(r.order < 2.4);
}

TEST_CASE("spatial refinement") {
  Config cfg = small_config();
  cfg.converge.mode = ConvergeMode::spatial;
  cfg.stepper.dt = 2.5e-4;
  cfg.t_final = 0.01;
  cfg.initial.kmax = 6;  // content near the coarse band edge
  ConvergenceResult r = convergence_study(cfg, 3);
  REQUIRE(r.ladder.size() == 3);
  CHECK(r.ladder[0] == 16.0);
  CHECK(r.ladder[2] == 64.0);
  REQUIRE(r.errors.size() == 2);
  CHECK(r.errors[0] > 0.0);
  CHECK(r.errors[0] > r.errors[1]);
  CHECK(r.ratios[0] > 5.0);  // spectral truncation error collapses fast
}

TEST_CASE("bounded tails reproduce the raw dynamics inside their window") {
  Config cfg = small_config();
  cfg.converge.mode = ConvergeMode::truncation;
  cfg.t_final = 0.02;
  cfg.initial.u_norm = 0.5;
  cfg.initial.phi_norm = 0.1;
  cfg.initial.pi_norm = 0.1;
  ConvergenceResult r = convergence_study(cfg, 3);
  REQUIRE(r.ladder == std::vector<double>{2.0, 4.0, 8.0});
  REQUIRE(r.errors.size() == 3);
  for (double e : r.errors) CHECK(e == 0.0);  // identical evaluations, identical runs
}
