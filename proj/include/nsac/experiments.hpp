#pragma once
// Experiment drivers.  `integrate` is the deterministic core loop; on top of
// it sit the full-service run (files on disk), amplitude sweeps probing a
// uniform late-time bound, two-trajectory contraction probes, and refinement
// studies.  Everything here is reproducible byte for byte from (config, seed):
// no timestamps, no address-dependent ordering, threads only across
// independent runs whose results are joined in a fixed order.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <future>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <nsac/config.hpp>
#include <nsac/csv.hpp>
#include <nsac/diagnostics.hpp>
#include <nsac/initial_data.hpp>
#include <nsac/model.hpp>
#include <nsac/report.hpp>
#include <nsac/snapshot.hpp>
#include <nsac/stepper.hpp>

namespace nsac {

// Concurrency cap for experiment workers; NSAC_THREADS overrides.
inline unsigned thread_budget() {
  if (const char* e = std::getenv("NSAC_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(e, &end, 10);
    if (end != e && v >= 1) return static_cast<unsigned>(v);
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc ? hc : 1;
}

struct RunResult {
  std::vector<EnergyReport> reports;
  SystemState state;  // at t_final
  long steps = 0;
  explicit RunResult(const Grid& g) : state(g) {}
};

namespace detail {

inline long resolve_steps(double t0, double t_final, double dt) {
  const double span = t_final - t0;
  if (!(span > 0.0)) throw ConfigError("t_final must exceed the initial time");
  const double raw = span / dt;
  const long n = std::lround(raw);
  if (n < 1 || std::abs(raw - static_cast<double>(n)) > 1e-9 * std::max(1.0, raw))
    throw ConfigError("the time span must be an integer multiple of dt");
  return n;
}

}  // namespace detail

struct IntegrateOptions {
  double t_final = 1.0;
  long output_every = 1;
  long snapshot_every = 0;  // 0: no snapshot sync points
  // Called at the snapshot cadence with (state, step index).  The stepper's
  // multistep history is reset at each sync point so a run restarted from the
  // written state retraces the original bit for bit.
  std::function<void(const SystemState&, long)> on_snapshot;
};

inline RunResult integrate(SystemState s, const ModelParams& mp, const StepperConfig& sc,
                           const IntegrateOptions& opt) {
  if (opt.output_every < 1) throw ConfigError("output_every >= 1 required");
  TimeStepper stepper(s.grid(), mp, sc);
  const double eta = default_eta(mp);
  const long n_steps = detail::resolve_steps(s.t, opt.t_final, sc.dt);

  RunResult out(s.grid());
  out.steps = n_steps;
  out.reports.reserve(static_cast<std::size_t>(n_steps / opt.output_every) + 2);
  out.reports.push_back(compute_energy_report(s, mp, eta));  // residual stays 0
  for (long i = 1; i <= n_steps; ++i) {
    stepper.step(s);
    if (i % opt.output_every == 0 || i == n_steps) {
      EnergyReport r = compute_energy_report(s, mp, eta);
      r.residual = pairwise_energy_residual(out.reports.back(), r);
      out.reports.push_back(std::move(r));
    }
    if (opt.snapshot_every > 0 && i % opt.snapshot_every == 0) {
      if (opt.on_snapshot) opt.on_snapshot(s, i);
      stepper.reset_history();
    }
  }
  out.state = std::move(s);
  return out;
}

struct RunOutput {
  RunResult result;
  std::vector<std::string> warnings;
  std::string series_path;    // diagnostic CSV
  std::string config_path;    // canonical configuration echo
  std::string summary_path;   // key = value run summary
  std::vector<std::string> snapshot_paths;
  explicit RunOutput(const Grid& g) : result(g) {}
};

// Full-service run: builds the initial state, integrates, and (by default)
// writes series.csv, config.ini, report.txt, snapshots at the configured
// cadence, and final.snap into output_dir.
inline RunOutput run_simulation(const Config& cfg, bool write_outputs = true) {
  std::vector<std::string> warnings = validate_config(cfg);
  const Grid g(cfg.dim, cfg.n);
  RunOutput out(g);
  out.warnings = std::move(warnings);
  SystemState s = build_initial_state(g, cfg.initial, cfg.model, cfg.seed);

  namespace fs = std::filesystem;
  const fs::path dir(cfg.output_dir);
  if (write_outputs) fs::create_directories(dir);

  IntegrateOptions opt;
  opt.t_final = cfg.t_final;
  opt.output_every = cfg.output_every;
  opt.snapshot_every = cfg.snapshot_every;
  if (write_outputs && cfg.snapshot_every > 0) {
    opt.on_snapshot = [&](const SystemState& st, long step) {
      char leaf[32];
      std::snprintf(leaf, sizeof leaf, "state_%06ld.snap", step);
      const std::string path = (dir / leaf).string();
      write_snapshot(path, st, cfg.model);
      out.snapshot_paths.push_back(path);
    };
  }
  out.result = integrate(std::move(s), cfg.model, cfg.stepper, opt);

  if (write_outputs) {
    out.series_path = (dir / "series.csv").string();
    write_reports_csv(out.series_path, out.result.reports);
    out.config_path = (dir / "config.ini").string();
    ioutil::write_text_file(out.config_path, serialize_config(cfg));
    const std::string final_path = (dir / "final.snap").string();
    write_snapshot(final_path, out.result.state, cfg.model);
    out.snapshot_paths.push_back(final_path);

    double max_resid = 0.0;
    for (std::size_t i = 1; i < out.result.reports.size(); ++i)
      max_resid = std::max(max_resid, std::abs(out.result.reports[i].residual));
    const EnergyReport& last = out.result.reports.back();
    ReportLines lines;
    lines.push_back({"grid", std::to_string(cfg.dim) + "d n=" + std::to_string(cfg.n)});
    lines.push_back({"scheme", cfg.stepper.scheme == Scheme::cnab2 ? "cnab2" : "rk4"});
    lines.push_back({"dt", ioutil::g17(cfg.stepper.dt)});
    lines.push_back({"steps", std::to_string(out.result.steps)});
    lines.push_back({"t_final", ioutil::g17(last.t)});
    lines.push_back({"eta", ioutil::g17(default_eta(cfg.model))});
    lines.push_back({"final_total", ioutil::g17(last.total)});
    lines.push_back({"final_g", ioutil::g17(last.g_value)});
    lines.push_back({"final_phi_mean", ioutil::g17(last.phi_mean)});
    lines.push_back({"final_pi_mean", ioutil::g17(last.pi_mean)});
    lines.push_back({"max_abs_residual", ioutil::g17(max_resid)});
    lines.push_back({"snapshots", std::to_string(out.snapshot_paths.size())});
    for (std::size_t i = 0; i < out.warnings.size(); ++i)
      lines.push_back({"warning_" + std::to_string(i), out.warnings[i]});
    out.summary_path = (dir / "report.txt").string();
    ioutil::write_text_file(out.summary_path, render_report(lines));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Amplitude sweep: integrate scaled copies of one initial state and compare
// their late-time levels of the cross functional G.  A uniform bound needs
// either direct phase damping (sigma > 0) or the transported relaxation rate
// matching the inertia (delta == kappa); anything else is refused rather than
// reported as if it were meaningful.
// ---------------------------------------------------------------------------

struct SweepScaleResult {
  double scale = 1.0;
  double window_sup = 0.0;  // sup of g over the trailing window
  double entry_time = 0.0;  // first time g dips under the common threshold
  std::vector<EnergyReport> reports;
};

struct SweepResult {
  std::vector<SweepScaleResult> scales;
  double c0_hat = 0.0;    // max over scales of window_sup
  double spread = 0.0;    // (max - min) / max of the window sups
  double t0_hat = 0.0;    // max over scales of entry_time
  double threshold = 0.0; // 1.05 * c0_hat
};

inline SweepResult dissipativity_sweep(const Config& cfg) {
  if (!(cfg.model.sigma > 0.0) && cfg.model.delta != cfg.model.kappa)
    throw ConfigError("amplitude sweep needs sigma > 0 or delta == kappa; "
                      "the late-time bound is not uniform otherwise");
  std::vector<std::string> warnings = validate_config(cfg);
  (void)warnings;
  const Grid g(cfg.dim, cfg.n);
  const SystemState base = build_initial_state(g, cfg.initial, cfg.model, cfg.seed);

  auto run_one = [&](double scale) {
    SystemState s = base;
    s.u *= scale;
    s.phi *= scale;
    s.pi *= scale;
    IntegrateOptions opt;
    opt.t_final = cfg.t_final;
    opt.output_every = cfg.output_every;
    return integrate(std::move(s), cfg.model, cfg.stepper, opt).reports;
  };

  // bounded fan-out over the scales, joined in order
  const std::size_t m = cfg.sweep.scales.size();
  std::vector<std::vector<EnergyReport>> series(m);
  const std::size_t lanes = std::min<std::size_t>(thread_budget(), m);
  for (std::size_t begin = 0; begin < m; begin += lanes) {
    const std::size_t end = std::min(begin + lanes, m);
    std::vector<std::future<std::vector<EnergyReport>>> fut;
    for (std::size_t j = begin; j < end; ++j)
      fut.push_back(std::async(std::launch::async, run_one, cfg.sweep.scales[j]));
    for (std::size_t j = begin; j < end; ++j) series[j] = fut[j - begin].get();
  }

  SweepResult out;
  const double t_start = base.t + (1.0 - cfg.sweep.window) * (cfg.t_final - base.t);
  double lo = 0.0, hi = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    SweepScaleResult r;
    r.scale = cfg.sweep.scales[j];
    r.reports = std::move(series[j]);
    double sup = 0.0;
    for (const EnergyReport& row : r.reports)
      if (row.t >= t_start - 1e-12) sup = std::max(sup, row.g_value);
    r.window_sup = sup;
    if (j == 0) lo = hi = sup;
    lo = std::min(lo, sup);
    hi = std::max(hi, sup);
    out.scales.push_back(std::move(r));
  }
  out.c0_hat = hi;
  out.spread = hi > 0.0 ? (hi - lo) / hi : 0.0;
  out.threshold = 1.05 * out.c0_hat;
  for (SweepScaleResult& r : out.scales) {
    r.entry_time = r.reports.back().t;
    for (const EnergyReport& row : r.reports)
      if (row.g_value <= out.threshold) {
        r.entry_time = row.t;
        break;
      }
    out.t0_hat = std::max(out.t0_hat, r.entry_time);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Contraction probe: evolve a trajectory and a perturbed copy side by side
// and track the difference in the contraction norm against its initial size.
// With delta > 0 the two-trajectory estimate is conditional (it needs the
// reference trajectory bounded), so the result is labeled accordingly.
// ---------------------------------------------------------------------------

struct ContractResult {
  double perturbation = 0.0;
  bool conditional = false;        // delta > 0
  std::vector<double> times;
  std::vector<double> ratios;      // bundle(t) / bundle(0); zero input -> absolute bundle
  double c_sup = 0.0;              // sup over the sampled times
  SystemState base_final;
  SystemState pert_final;
  ContractResult(const Grid& g) : base_final(g), pert_final(g) {}
};

inline ContractResult contraction_experiment(const Config& cfg, double perturbation) {
  std::vector<std::string> warnings = validate_config(cfg);
  (void)warnings;
  const Grid g(cfg.dim, cfg.n);
  SystemState a = build_initial_state(g, cfg.initial, cfg.model, cfg.seed);

  // fixed perturbation direction: unit-norm draws from a seed-derived stream
  SystemState b = a;
  {
    SplitMix64 master{cfg.seed ^ 0xc2b2ae3d27d4eb4fULL};
    std::vector<std::uint64_t> sub(static_cast<std::size_t>(g.dim()) + 2);
    for (auto& v : sub) v = master.next();
    VelocityField du(g);
    for (int c = 0; c < g.dim(); ++c) {
      SplitMix64 rng{sub[static_cast<std::size_t>(c)]};
      du.comp(c) = detail::gaussian_band_field(g, std::max(1, g.n() / 8), rng);
    }
    du = leray_project(du);
    const double nu = l2_norm(du);
    if (nu > 0.0) du *= perturbation / nu;
    b.u += du;

    SplitMix64 rng_phi{sub[static_cast<std::size_t>(g.dim())]};
    SpectralField dphi = detail::gaussian_band_field(g, std::max(1, g.n() / 8), rng_phi);
    detail::scale_to_norm(dphi, perturbation);
    b.phi += dphi;

    SplitMix64 rng_pi{sub[static_cast<std::size_t>(g.dim()) + 1]};
    SpectralField dpi = detail::gaussian_band_field(g, std::max(1, g.n() / 8), rng_pi);
    detail::scale_to_norm(dpi, perturbation);
    b.pi += dpi;
  }

  TimeStepper step_a(g, cfg.model, cfg.stepper);
  TimeStepper step_b(g, cfg.model, cfg.stepper);
  const long n_steps = detail::resolve_steps(a.t, cfg.t_final, cfg.stepper.dt);

  ContractResult out(g);
  out.perturbation = perturbation;
  out.conditional = cfg.model.delta > 0.0;
  const double bundle0 = contraction_bundle(a, b);
  out.times.push_back(a.t);
  out.ratios.push_back(bundle0 > 0.0 ? 1.0 : 0.0);
  for (long i = 1; i <= n_steps; ++i) {
    step_a.step(a);
    step_b.step(b);
    if (i % cfg.output_every == 0 || i == n_steps) {
      out.times.push_back(a.t);
      const double bt = contraction_bundle(a, b);
      out.ratios.push_back(bundle0 > 0.0 ? bt / bundle0 : bt);
    }
  }
  for (double r : out.ratios) out.c_sup = std::max(out.c_sup, r);
  out.base_final = std::move(a);
  out.pert_final = std::move(b);
  return out;
}

inline ContractResult contraction_experiment(const Config& cfg) {
  return contraction_experiment(cfg, cfg.contract.perturbation);
}

// ---------------------------------------------------------------------------
// Refinement studies.  Temporal: halve dt and compare successive solutions at
// t_final (self-convergence; the ratio estimates the order).  Spatial: refine
// the grid at fixed dt and compare on the finer grid.  Truncation: run with
// bounded tails of increasing level against the raw nonlinearity; for states
// inside the window the difference vanishes identically.
// ---------------------------------------------------------------------------

struct ConvergenceResult {
  ConvergeMode mode = ConvergeMode::temporal;
  std::vector<double> ladder;  // dt, n, or truncation level per rung
  std::vector<double> errors;  // successive-solution distances
  std::vector<double> ratios;  // errors[i] / errors[i+1]
  double order = 0.0;          // log2 of the geometric mean ratio
};

namespace detail {

inline double state_distance(const SystemState& a, const SystemState& b) {
  double acc = 0.0;
  for (int c = 0; c < a.grid().dim(); ++c) {
    SpectralField d = a.u.comp(c);
    d -= b.u.comp(c);
    acc += l2_norm_sq(d);
  }
  SpectralField dphi = a.phi;
  dphi -= b.phi;
  SpectralField dpi = a.pi;
  dpi -= b.pi;
  acc += l2_norm_sq(dphi) + l2_norm_sq(dpi);
  return std::sqrt(acc);
}

inline void finish_ratios(ConvergenceResult& r) {
  for (std::size_t i = 0; i + 1 < r.errors.size(); ++i)
    r.ratios.push_back(r.errors[i + 1] > 0.0 ? r.errors[i] / r.errors[i + 1] : 0.0);
  if (!r.ratios.empty()) {
    double logsum = 0.0;
    for (double q : r.ratios) logsum += std::log2(std::max(q, 1e-300));
    r.order = logsum / static_cast<double>(r.ratios.size());
  }
}

}  // namespace detail

inline ConvergenceResult convergence_study(const Config& cfg, int rungs = 4) {
  std::vector<std::string> warnings = validate_config(cfg);
  (void)warnings;
  if (rungs < 2) throw ConfigError("a refinement study needs at least two rungs");
  ConvergenceResult out;
  out.mode = cfg.converge.mode;

  if (cfg.converge.mode == ConvergeMode::temporal) {
    const Grid g(cfg.dim, cfg.n);
    const SystemState init = build_initial_state(g, cfg.initial, cfg.model, cfg.seed);
    std::vector<SystemState> finals;
    for (int j = 0; j < rungs; ++j) {
      StepperConfig sc = cfg.stepper;
      sc.dt = cfg.stepper.dt / static_cast<double>(1L << j);
      out.ladder.push_back(sc.dt);
      IntegrateOptions opt;
      opt.t_final = cfg.t_final;
      opt.output_every = detail::resolve_steps(init.t, cfg.t_final, sc.dt);  // final row only
      finals.push_back(integrate(init, cfg.model, sc, opt).state);
    }
    for (int j = 0; j + 1 < rungs; ++j)
      out.errors.push_back(detail::state_distance(finals[j], finals[j + 1]));
  } else if (cfg.converge.mode == ConvergeMode::spatial) {
    std::vector<SystemState> finals;
    std::vector<Grid> grids;
    for (int j = 0; j < rungs; ++j) {
      const Grid gj(cfg.dim, cfg.n * (1 << j));
      grids.push_back(gj);
      out.ladder.push_back(gj.n());
      // same continuum initial data on every rung: draw on the coarsest grid
      // and embed, so refinement changes only the resolved dynamics
      SystemState s(gj);
      if (j == 0) {
        s = build_initial_state(gj, cfg.initial, cfg.model, cfg.seed);
      } else {
        const SystemState coarse = build_initial_state(grids[0], cfg.initial, cfg.model, cfg.seed);
        for (int c = 0; c < gj.dim(); ++c) s.u.comp(c) = pad_spectrum(coarse.u.comp(c), gj);
        s.phi = pad_spectrum(coarse.phi, gj);
        s.pi = pad_spectrum(coarse.pi, gj);
        s.t = coarse.t;
      }
      IntegrateOptions opt;
      opt.t_final = cfg.t_final;
      opt.output_every = detail::resolve_steps(s.t, cfg.t_final, cfg.stepper.dt);
      finals.push_back(integrate(std::move(s), cfg.model, cfg.stepper, opt).state);
    }
    for (int j = 0; j + 1 < rungs; ++j) {
      const Grid& fine = grids[static_cast<std::size_t>(j) + 1];
      SystemState lifted(fine);
      for (int c = 0; c < fine.dim(); ++c)
        lifted.u.comp(c) = pad_spectrum(finals[static_cast<std::size_t>(j)].u.comp(c), fine);
      lifted.phi = pad_spectrum(finals[static_cast<std::size_t>(j)].phi, fine);
      lifted.pi = pad_spectrum(finals[static_cast<std::size_t>(j)].pi, fine);
      lifted.t = finals[static_cast<std::size_t>(j)].t;
      out.errors.push_back(detail::state_distance(lifted, finals[static_cast<std::size_t>(j) + 1]));
    }
  } else {  // truncation levels against the raw nonlinearity
    const Grid g(cfg.dim, cfg.n);
    const SystemState init = build_initial_state(g, cfg.initial, cfg.model, cfg.seed);
    ModelParams raw = cfg.model;
    raw.truncation_n = 0;
    IntegrateOptions opt;
    opt.t_final = cfg.t_final;
    opt.output_every = detail::resolve_steps(init.t, cfg.t_final, cfg.stepper.dt);
    const SystemState ref = integrate(init, raw, cfg.stepper, opt).state;
    for (int j = 0; j < rungs; ++j) {
      ModelParams mp = cfg.model;
      mp.truncation_n = 2 << j;  // 2, 4, 8, ...
      out.ladder.push_back(mp.truncation_n);
      const SystemState s = integrate(init, mp, cfg.stepper, opt).state;
      out.errors.push_back(detail::state_distance(s, ref));
    }
    return out;  // level errors are absolute; no order estimate
  }
  detail::finish_ratios(out);
  return out;
}

}  // namespace nsac
