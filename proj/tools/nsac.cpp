// Command line front end: run, sweep, contract, converge, verify, describe.
// Exit codes: 0 success, 1 usage or configuration problem, 2 numerical
// failure, 3 a checked property did not hold.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <nsac/experiments.hpp>

using namespace nsac;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitNumerical = 2;
constexpr int kExitProperty = 3;

Config load_config(const std::string& path, const std::vector<std::string>& sets) {
  Config c = path.empty() ? Config{} : parse_config_file(path);
  for (const std::string& s : sets) apply_override(c, s);
  return c;
}

void print_lines(const ReportLines& lines) { std::fputs(render_report(lines).c_str(), stdout); }

std::string g17s(double v) { return ioutil::g17(v); }

int cmd_run(const Config& cfg) {
  RunOutput out = run_simulation(cfg);
  double max_resid = 0.0;
  for (std::size_t i = 1; i < out.result.reports.size(); ++i)
    max_resid = std::max(max_resid, std::abs(out.result.reports[i].residual));
  const EnergyReport& last = out.result.reports.back();
  ReportLines lines;
  lines.push_back({"steps", std::to_string(out.result.steps)});
  lines.push_back({"t_final", g17s(last.t)});
  lines.push_back({"final_total", g17s(last.total)});
  lines.push_back({"final_g", g17s(last.g_value)});
  lines.push_back({"max_abs_residual", g17s(max_resid)});
  lines.push_back({"series", out.series_path});
  lines.push_back({"summary", out.summary_path});
  for (const std::string& w : out.warnings) lines.push_back({"warning", w});
  print_lines(lines);
  return 0;
}

int cmd_sweep(const Config& cfg) {
  SweepResult r = dissipativity_sweep(cfg);

  namespace fs = std::filesystem;
  fs::create_directories(cfg.output_dir);
  ReportLines lines;
  for (std::size_t j = 0; j < r.scales.size(); ++j) {
    const SweepScaleResult& s = r.scales[j];
    const std::string csv = (fs::path(cfg.output_dir) / ("sweep_scale_" + std::to_string(j) + ".csv")).string();
    write_reports_csv(csv, s.reports);
    lines.push_back({"scale_" + std::to_string(j), g17s(s.scale)});
    lines.push_back({"window_sup_" + std::to_string(j), g17s(s.window_sup)});
    lines.push_back({"entry_time_" + std::to_string(j), g17s(s.entry_time)});
  }
  lines.push_back({"c0_hat", g17s(r.c0_hat)});
  lines.push_back({"threshold", g17s(r.threshold)});
  lines.push_back({"t0_hat", g17s(r.t0_hat)});
  lines.push_back({"spread", g17s(r.spread)});
  const bool uniform = r.spread <= 0.10;
  lines.push_back({"uniform_within_10_percent", uniform ? "yes" : "no"});
  ioutil::write_text_file((fs::path(cfg.output_dir) / "sweep.txt").string(), render_report(lines));
  print_lines(lines);
  return uniform ? 0 : kExitProperty;
}

int cmd_contract(const Config& cfg) {
  const double p = cfg.contract.perturbation;
  ContractResult a = contraction_experiment(cfg, p);
  ContractResult b = contraction_experiment(cfg, 0.5 * p);
  ReportLines lines;
  lines.push_back({"perturbation_a", g17s(p)});
  lines.push_back({"c_sup_a", g17s(a.c_sup)});
  lines.push_back({"perturbation_b", g17s(0.5 * p)});
  lines.push_back({"c_sup_b", g17s(b.c_sup)});
  lines.push_back({"estimate", a.conditional ? "conditional (delta > 0)" : "unconditional"});
  const double hi = std::max(a.c_sup, b.c_sup);
  const double consistency = hi > 0.0 ? std::abs(a.c_sup - b.c_sup) / hi : 0.0;
  lines.push_back({"consistency_gap", g17s(consistency)});
  const bool stable = consistency <= 0.20;
  lines.push_back({"perturbation_independent_within_20_percent", stable ? "yes" : "no"});
  print_lines(lines);
  return stable ? 0 : kExitProperty;
}

int cmd_converge(const Config& cfg) {
  ConvergenceResult r = convergence_study(cfg);
  ReportLines lines;
  const char* mode = r.mode == ConvergeMode::temporal
                         ? "temporal"
                         : (r.mode == ConvergeMode::spatial ? "spatial" : "truncation");
  lines.push_back({"mode", mode});
  for (std::size_t i = 0; i < r.ladder.size(); ++i)
    lines.push_back({"ladder_" + std::to_string(i), g17s(r.ladder[i])});
  for (std::size_t i = 0; i < r.errors.size(); ++i)
    lines.push_back({"error_" + std::to_string(i), g17s(r.errors[i])});
  for (std::size_t i = 0; i < r.ratios.size(); ++i)
    lines.push_back({"ratio_" + std::to_string(i), g17s(r.ratios[i])});
  bool pass = true;
  if (r.mode == ConvergeMode::truncation) {
    for (double e : r.errors) pass = pass && e <= 1e-10;
    lines.push_back({"tail_matches_raw", pass ? "yes" : "no"});
  } else {
    lines.push_back({"order", g17s(r.order)});
    for (double q : r.ratios) pass = pass && q > 1.0;
    lines.push_back({"errors_shrink_under_refinement", pass ? "yes" : "no"});
  }
  print_lines(lines);
  return pass ? 0 : kExitProperty;
}

int cmd_describe(const Config& cfg) {
  std::vector<std::string> warnings = validate_config(cfg);
  const Grid g(cfg.dim, cfg.n);
  const SystemState s0 = build_initial_state(g, cfg.initial, cfg.model, cfg.seed);
  const Potential& pot = cfg.model.potential;
  ReportLines lines;
  lines.push_back({"grid", std::to_string(cfg.dim) + "d n=" + std::to_string(cfg.n)});
  lines.push_back({"scheme", cfg.stepper.scheme == Scheme::cnab2 ? "cnab2" : "rk4"});
  lines.push_back({"dt", g17s(cfg.stepper.dt)});
  lines.push_back({"steps", std::to_string(detail::resolve_steps(s0.t, cfg.t_final, cfg.stepper.dt))});
  lines.push_back({"stable_dt", g17s(stable_dt(s0, cfg.model, cfg.stepper))});
  lines.push_back({"kappa", g17s(cfg.model.kappa)});
  lines.push_back({"delta", g17s(cfg.model.delta)});
  lines.push_back({"sigma", g17s(cfg.model.sigma)});
  lines.push_back({"epsilon", g17s(cfg.model.epsilon)});
  lines.push_back({"reg_mode", cfg.model.reg_mode == RegMode::linear ? "linear" : "variational"});
  lines.push_back({"truncation_n", std::to_string(cfg.model.truncation_n)});
  lines.push_back({"eta_max", g17s(admissible_eta_max(cfg.model))});
  lines.push_back({"eta", g17s(default_eta(cfg.model))});
  lines.push_back({"potential",
                   pot.kind() == PotentialKind::double_well ? "double_well" : "polynomial"});
  lines.push_back({"potential_degree", std::to_string(pot.degree())});
  lines.push_back({"potential_growth_p", std::to_string(pot.p_growth())});
  lines.push_back({"lambda0", g17s(pot.lambda0())});
  lines.push_back({"lambda2", g17s(pot.lambda2())});
  lines.push_back({"g_offset", g17s(pot.g_offset())});
  lines.push_back({"kpp", g17s(pot.kpp())});
  lines.push_back({"initial_u_norm", g17s(l2_norm(s0.u))});
  lines.push_back({"initial_total", g17s(compute_energy_report(s0, cfg.model, default_eta(cfg.model)).total)});
  for (const std::string& w : warnings) lines.push_back({"warning", w});
  print_lines(lines);
  return 0;
}

// ---------------------------------------------------------------------------
// verify: a self-contained battery of structural checks at n = 16.  Each
// check is independent; one line per check, nonzero exit if any fails.
// ---------------------------------------------------------------------------

struct CheckResult {
  bool ok;
  std::string detail;
};

int cmd_verify() {
  std::vector<std::pair<std::string, CheckResult>> results;
  auto check = [&](const std::string& name, CheckResult r) { results.emplace_back(name, r); };
  const Grid g(2, 16);

  auto random_state = [&](std::uint64_t seed, double phi_mean) {
    InitialSpec spec;
    spec.kmax = 2;
    spec.phi_mean = phi_mean;
    return build_initial_state(g, spec, ModelParams{}, seed);
  };

  {  // transforms invert each other
    SystemState s = random_state(1, 0.0);
    SpectralField back = to_spectral(g, to_physical(s.phi));
    back -= s.phi;
    const double d = max_abs_coeff(back);
    check("transform_round_trip", {d <= 1e-14, g17s(d)});
  }
  {  // cos^2 = 1/2 + cos(4 pi x)/2 exactly after dealiasing
    SpectralField c(g);
    set_mode_pair(c, {1, 0, 0}, cplx{0.5, 0.0});
    SpectralField prod = dealias_product(c, c);
    double worst = std::abs(prod.coeff({0, 0, 0}) - cplx{0.5, 0.0});
    worst = std::max(worst, std::abs(prod.coeff({2, 0, 0}) - cplx{0.25, 0.0}));
    prod.set_coeff({0, 0, 0}, cplx{0.0, 0.0});
    prod.set_coeff({2, 0, 0}, cplx{0.0, 0.0});
    prod.set_coeff({-2, 0, 0}, cplx{0.0, 0.0});
    worst = std::max(worst, max_abs_coeff(prod));
    check("quadratic_products_alias_free", {worst <= 1e-15, g17s(worst)});
  }
  {  // projection output is divergence-free and projection is idempotent
    SystemState s = random_state(2, 0.0);
    const double div = divergence_residual(s.u);
    VelocityField twice = leray_project(s.u);
    double drift = 0.0;
    for (int c = 0; c < g.dim(); ++c) {
      SpectralField d = twice.comp(c);
      d -= s.u.comp(c);
      drift = std::max(drift, max_abs_coeff(d));
    }
    check("projection_solenoidal", {div <= 1e-12 && drift <= 1e-15,
                                    g17s(div) + " / " + g17s(drift)});
  }
  {  // the pure phases are exact fixed points of the semi-implicit scheme
    ModelParams mp;
    mp.sigma = 0.0;
    SystemState s(g);
    s.phi.set_coeff({0, 0, 0}, cplx{-1.0, 0.0});
    StepperConfig sc;
    sc.dt = 1e-2;
    TimeStepper st(g, mp, sc);
    for (int i = 0; i < 500; ++i) st.step(s);
    SpectralField fluct = s.phi;
    fluct.set_coeff({0, 0, 0}, cplx{0.0, 0.0});
    const double dev = std::abs(s.phi.coeff({0, 0, 0}) - cplx{-1.0, 0.0}) +
                       max_abs_coeff(fluct) + max_abs_coeff(s.pi);
    check("pure_phase_equilibrium", {dev <= 1e-13, g17s(dev)});
  }
  {  // spatially constant data follows the two-variable relaxation exactly
    ModelParams mp;
    mp.kappa = 0.7;
    mp.sigma = 0.4;
    SystemState s(g);
    s.phi.set_coeff({0, 0, 0}, cplx{0.4, 0.0});
    s.pi.set_coeff({0, 0, 0}, cplx{0.2, 0.0});
    StepperConfig sc;
    sc.dt = 1e-3;
    TimeStepper st(g, mp, sc);
    const long steps = 1000;
    for (long i = 0; i < steps; ++i) st.step(s);
    double phi = 0.4, pi = 0.2;
    const double rdt = 1e-5;
    auto rhs = [&](double p, double q, double& dp, double& dq) {
      dp = q - mp.sigma * p;
      dq = -(q + mp.potential.f(p)) / mp.kappa;
    };
    for (long i = 0; i < 100000; ++i) {
      double k1p, k1q, k2p, k2q, k3p, k3q, k4p, k4q;
      rhs(phi, pi, k1p, k1q);
      rhs(phi + 0.5 * rdt * k1p, pi + 0.5 * rdt * k1q, k2p, k2q);
      rhs(phi + 0.5 * rdt * k2p, pi + 0.5 * rdt * k2q, k3p, k3q);
      rhs(phi + rdt * k3p, pi + rdt * k3q, k4p, k4q);
      phi += rdt / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p);
      pi += rdt / 6.0 * (k1q + 2 * k2q + 2 * k3q + k4q);
    }
    const double err = std::abs(mean_of(s.phi) - phi) + std::abs(mean_of(s.pi) - pi);
    check("constant_data_relaxation", {err <= 1e-5, g17s(err)});
  }
  {  // the energy ledger closes along a gently perturbed run
    InitialSpec spec;
    spec.kmax = 2;
    spec.u_norm = 1e-3;
    spec.phi_norm = 1e-3;
    spec.pi_norm = 1e-3;
    spec.phi_mean = 0.4;
    ModelParams mp;
    SystemState s = build_initial_state(g, spec, mp, 5);
    StepperConfig sc;
    sc.scheme = Scheme::rk4;
    sc.dt = 1e-4;
    IntegrateOptions opt;
    opt.t_final = 0.02;
    RunResult rr = integrate(std::move(s), mp, sc, opt);
    double worst = 0.0;
    for (std::size_t i = 1; i < rr.reports.size(); ++i)
      worst = std::max(worst, std::abs(rr.reports[i].residual));
    check("energy_ledger_closes", {worst <= 5e-5, g17s(worst)});
  }
  {  // mean balances hold at roundoff for the semi-implicit scheme
    InitialSpec spec;
    spec.kmax = 2;
    spec.phi_mean = 0.3;
    ModelParams mp;
    mp.kappa = 0.7;
    mp.sigma = 0.25;
    SystemState s = build_initial_state(g, spec, mp, 6);
    StepperConfig sc;
    sc.dt = 1e-3;
    IntegrateOptions opt;
    opt.t_final = 0.05;
    RunResult rr = integrate(std::move(s), mp, sc, opt);
    MeanLawResiduals mlr = mean_law_residuals(rr.reports, mp);
    double worst = 0.0;
    for (double v : mlr.phase) worst = std::max(worst, std::abs(v));
    for (double v : mlr.rate) worst = std::max(worst, std::abs(v));
    check("mean_balances_machine_zero", {worst <= 1e-10, g17s(worst)});
  }
  {  // momentum mean is pinned to zero and symmetry never drifts
    ModelParams mp;
    SystemState s = random_state(7, 0.2);
    StepperConfig sc;
    sc.dt = 1e-3;
    TimeStepper st(g, mp, sc);
    bool mean_zero = true;
    for (int i = 0; i < 100; ++i) {
      st.step(s);
      for (int c = 0; c < g.dim(); ++c)
        mean_zero = mean_zero && s.u.comp(c).coeff({0, 0, 0}) == cplx{0.0, 0.0};
    }
    const double defect = std::max(hermitian_defect(s.phi), hermitian_defect(s.u.comp(0)));
    const double div = divergence_residual(s.u);
    check("momentum_mean_pinned", {mean_zero && defect <= 1e-13 && div <= 1e-10,
                                   std::string(mean_zero ? "0" : "nonzero") + " / " +
                                       g17s(defect) + " / " + g17s(div)});
  }
  {  // snapshots restore bit for bit and reject corruption
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "nsac_verify";
    fs::create_directories(dir);
    const std::string path = (dir / "state.snap").string();
    ModelParams mp;
    SystemState s = random_state(8, -0.1);
    s.t = 0.375;
    write_snapshot(path, s, mp);
    SystemState back = read_snapshot(path, g, mp);
    bool same = back.t == s.t;
    for (std::size_t i = 0; i < g.size(); ++i)
      same = same && back.phi[i] == s.phi[i] && back.pi[i] == s.pi[i] &&
             back.u.comp(0)[i] == s.u.comp(0)[i] && back.u.comp(1)[i] == s.u.comp(1)[i];
    std::string bytes = ioutil::read_text_file(path);
    bytes[bytes.size() / 2] = static_cast<char>(bytes[bytes.size() / 2] ^ 0x20);
    ioutil::write_text_file(path, bytes);
    bool rejected = false;
    try {
      read_snapshot(path, g, mp);
    } catch (const SnapshotError&) {
      rejected = true;
    }
    std::error_code ec;
    fs::remove_all(dir, ec);
    check("snapshot_round_trip", {same && rejected,
                                  std::string(same ? "restored" : "MISMATCH") + " / " +
                                      (rejected ? "corruption rejected" : "CORRUPTION PASSED")});
  }
  {  // identical seeds give byte-identical series
    Config cfg;
    cfg.n = 16;
    cfg.stepper.dt = 1e-3;
    cfg.t_final = 0.02;
    cfg.output_every = 1;
    cfg.initial.kmax = 2;
    RunOutput a = run_simulation(cfg, false);
    RunOutput b = run_simulation(cfg, false);
    const bool same = reports_to_csv(a.result.reports) == reports_to_csv(b.result.reports);
    check("determinism", {same, same ? "byte-identical" : "DIVERGED"});
  }
  {  // the bounded tail is the raw nonlinearity inside its window
    const Potential pot = Potential::double_well();
    bool inside = true;
    for (double r : {-1.9, -0.5, 0.0, 1.3, 2.0})
      inside = inside && truncated_f(pot, 2, r) == pot.f(r) &&
               truncated_fprime(pot, 2, r) == pot.fprime(r) &&
               truncated_F(pot, 2, r) == pot.F(r);
    const double slope_far = std::abs(truncated_fprime(pot, 2, 50.0));
    const bool bounded = std::isfinite(truncated_f(pot, 2, 1e9)) && slope_far <= 1e-6;
    check("bounded_tail", {inside && bounded,
                           std::string(inside ? "exact inside" : "DIFFERS INSIDE") + " / " +
                               (bounded ? "flat outside" : "UNBOUNDED")});
  }
  {  // the cross functional stays sandwiched by its design inequality
    ModelParams mp;
    mp.kappa = 0.8;
    SystemState s = random_state(9, 0.1);
    const double eta = default_eta(mp);
    const EnergyReport r = compute_energy_report(s, mp, eta);
    const double cross = r.d_cross - r.g_value;  // eta kappa (pi, phi)
    const double cap = (l2_norm_sq(s.pi) + l2_norm_sq(s.phi)) / 3.0;
    check("cross_term_sandwich", {std::abs(cross) <= cap + 1e-15,
                                  g17s(std::abs(cross)) + " <= " + g17s(cap)});
  }

  int failures = 0;
  for (const auto& [name, r] : results) {
    std::printf("%s %-32s %s\n", r.ok ? "ok  " : "FAIL", name.c_str(), r.detail.c_str());
    if (!r.ok) ++failures;
  }
  std::printf("verify: %zu checks, %d failed\n", results.size(), failures);
  return failures == 0 ? 0 : kExitProperty;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pseudo-spectral solver for an incompressible flow coupled to an inertial phase field"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> sets;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("config", config_path, "configuration file (sectioned key=value)")
        ->check(CLI::ExistingFile);
    sub->add_option("--set", sets, "override one key, e.g. --set model.kappa=0.5")
        ->type_size(1);
  };

  int rc = 0;
  CLI::App* c_run = app.add_subcommand("run", "integrate and write series, summary, snapshots");
  add_common(c_run);
  c_run->callback([&] { rc = cmd_run(load_config(config_path, sets)); });

  CLI::App* c_sweep = app.add_subcommand("sweep", "late-time bound across initial amplitudes");
  add_common(c_sweep);
  c_sweep->callback([&] { rc = cmd_sweep(load_config(config_path, sets)); });

  CLI::App* c_contract =
      app.add_subcommand("contract", "two-trajectory separation under a small perturbation");
  add_common(c_contract);
  c_contract->callback([&] { rc = cmd_contract(load_config(config_path, sets)); });

  CLI::App* c_conv = app.add_subcommand("converge", "temporal, spatial, or truncation refinement");
  add_common(c_conv);
  c_conv->callback([&] { rc = cmd_converge(load_config(config_path, sets)); });

  CLI::App* c_desc = app.add_subcommand("describe", "print derived quantities without running");
  add_common(c_desc);
  c_desc->callback([&] { rc = cmd_describe(load_config(config_path, sets)); });

  CLI::App* c_verify = app.add_subcommand("verify", "fast self-contained property checks");
  c_verify->callback([&] { rc = cmd_verify(); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const SnapshotError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const IntegrationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitNumerical;
  }
  return rc;
}
