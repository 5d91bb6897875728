#pragma once
// Time integration.  The workhorse is a second-order semi-implicit scheme:
// Crank-Nicolson on the stiff linear couplings (velocity diffusion and the
// phase/relaxation block) and Adams-Bashforth 2 on transport, capillary
// forcing, and the nonlinearity.  The phase block is solved exactly per mode
// as a 2x2 system, so no iteration is involved.  A classical explicit RK4 on
// the full right-hand side is provided for cross-checks and convergence
// ladders; it is accurate but pays the full parabolic step restriction.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include <nsac/errors.hpp>
#include <nsac/model.hpp>
#include <nsac/spectral.hpp>

namespace nsac {

enum class Scheme { cnab2, rk4 };
enum class BootstrapRule { semi_implicit_euler };

struct StepperConfig {
  Scheme scheme = Scheme::cnab2;
  double dt = 1e-3;
  double cfl_safety = 0.9;
  double dt_max = 0.25;
  BootstrapRule bootstrap = BootstrapRule::semi_implicit_euler;
};

inline void validate(const StepperConfig& c) {
  if (!(c.dt > 0.0)) throw ConfigError("dt > 0 required");
  if (!(c.cfl_safety > 0.0 && c.cfl_safety <= 1.0)) throw ConfigError("cfl_safety in (0, 1] required");
  if (!(c.dt_max > 0.0)) throw ConfigError("dt_max > 0 required");
}

// Advisory step size from the current state: advective restrictions for u and
// the interface, plus the relaxation's sensitivity to the local well slope.
// Zero fields impose no restriction; a zero state returns dt_max.
inline double stable_dt(const SystemState& s, const ModelParams& mp, const StepperConfig& cfg) {
  const Grid& g = s.grid();
  const double inf = std::numeric_limits<double>::infinity();

  std::vector<std::vector<double>> uv(static_cast<std::size_t>(g.dim()));
  std::vector<std::vector<double>> gv(static_cast<std::size_t>(g.dim()));
  for (int a = 0; a < g.dim(); ++a) {
    uv[a] = to_physical(s.u.comp(a));
    gv[a] = to_physical(gradient_component(s.phi, a));
  }
  std::vector<double> pv = to_physical(s.phi);

  double umax = 0.0, gmax = 0.0, fpmax = 0.0;
  for (std::size_t i = 0; i < pv.size(); ++i) {
    double u2 = 0.0, g2 = 0.0;
    for (int a = 0; a < g.dim(); ++a) {
      u2 += uv[a][i] * uv[a][i];
      g2 += gv[a][i] * gv[a][i];
    }
    umax = std::max(umax, u2);
    gmax = std::max(gmax, g2);
    double fp = mp.truncation_n > 0 ? truncated_fprime(mp.potential, mp.truncation_n, pv[i])
                                    : mp.potential.fprime(pv[i]);
    fpmax = std::max(fpmax, std::abs(fp));
  }
  umax = std::sqrt(umax);
  gmax = std::sqrt(gmax);

  double dt = std::min({umax > 0.0 ? g.h() / umax : inf,
                        gmax > 0.0 ? g.h() / gmax : inf,
                        fpmax > 0.0 ? mp.kappa / fpmax : inf});
  dt *= cfg.cfl_safety;
  if (!std::isfinite(dt)) return cfg.dt_max;
  return std::min(dt, cfg.dt_max);
}

class TimeStepper {
 public:
  TimeStepper(const Grid& g, const ModelParams& mp, const StepperConfig& cfg)
      : grid_(g), mp_(mp), cfg_(cfg), sym_(g.size()) {
    validate(mp_);
    validate(cfg_);
    for_each_mode(g, [&](std::size_t i, const std::array<int, 3>& k) { sym_[i] = laplacian_symbol(g, k); });
  }

  const StepperConfig& config() const { return cfg_; }
  const ModelParams& params() const { return mp_; }
  double dt() const { return cfg_.dt; }

  // Forget multistep history; the next step falls back to the bootstrap rule.
  // Called at checkpoints so a restarted run retraces the original bitwise.
  void reset_history() { prev_.reset(); }

  void step(SystemState& s) {
    if (cfg_.scheme == Scheme::rk4)
      rk4_step(s);
    else
      cnab2_step(s);
    check_finite(s);
  }

 private:
  void cnab2_step(SystemState& s) {
    ExplicitRhs cur = compute_explicit(s, mp_);

    // Extrapolated explicit forcing (plain Euler weights on the first step).
    ExplicitRhs ex(grid_);
    if (prev_) {
      ex.du = 1.5 * cur.du - 0.5 * prev_->du;
      ex.dphi = 1.5 * cur.dphi - 0.5 * prev_->dphi;
      ex.dpi = 1.5 * cur.dpi - 0.5 * prev_->dpi;
    } else {
      ex = cur;
    }

    const double dt = cfg_.dt, hdt = 0.5 * dt;
    const double seff = mp_.reg_mode == RegMode::linear ? mp_.sigma : 0.0;
    const std::size_t m = grid_.size();
    for (std::size_t i = 0; i < m; ++i) {
      const double sym = sym_[i];
      for (int a = 0; a < grid_.dim(); ++a) {
        cplx& ua = s.u.comp(a)[i];
        ua = (ua * (1.0 + hdt * sym) + dt * ex.du.comp(a)[i]) / (1.0 - hdt * sym);
      }
      const double l11 = mp_.epsilon * sym - seff;
      const double l21 = sym / mp_.kappa;
      const double l22 = -1.0 / mp_.kappa;
      const cplx r0 = s.phi[i] + hdt * (l11 * s.phi[i] + s.pi[i]) + dt * ex.dphi[i];
      const cplx r1 = s.pi[i] + hdt * (l21 * s.phi[i] + l22 * s.pi[i]) + dt * ex.dpi[i];
      const double det = (1.0 - hdt * l11) * (1.0 - hdt * l22) - hdt * hdt * l21;
      s.phi[i] = ((1.0 - hdt * l22) * r0 + hdt * r1) / det;
      s.pi[i] = (hdt * l21 * r0 + (1.0 - hdt * l11) * r1) / det;
    }
    s.t += dt;
    prev_ = std::move(cur);
  }

  void rk4_step(SystemState& s) {
    const double dt = cfg_.dt;
    auto shifted = [&](const Rhs& k, double a) {
      SystemState y = s;
      y.u += a * k.du;
      y.phi += a * k.dphi;
      y.pi += a * k.dpi;
      y.t += a;
      return y;
    };
    Rhs k1 = compute_rhs(s, mp_);
    SystemState y2 = shifted(k1, 0.5 * dt);
    Rhs k2 = compute_rhs(y2, mp_);
    SystemState y3 = shifted(k2, 0.5 * dt);
    Rhs k3 = compute_rhs(y3, mp_);
    SystemState y4 = shifted(k3, dt);
    Rhs k4 = compute_rhs(y4, mp_);

    const double w = dt / 6.0;
    for (std::size_t i = 0; i < grid_.size(); ++i) {
      for (int a = 0; a < grid_.dim(); ++a)
        s.u.comp(a)[i] += w * (k1.du.comp(a)[i] + 2.0 * k2.du.comp(a)[i] + 2.0 * k3.du.comp(a)[i] + k4.du.comp(a)[i]);
      s.phi[i] += w * (k1.dphi[i] + 2.0 * k2.dphi[i] + 2.0 * k3.dphi[i] + k4.dphi[i]);
      s.pi[i] += w * (k1.dpi[i] + 2.0 * k2.dpi[i] + 2.0 * k3.dpi[i] + k4.dpi[i]);
    }
    s.t += dt;
  }

  void check_finite(const SystemState& s) const {
    auto bad = [](const SpectralField& f) {
      for (std::size_t i = 0; i < f.size(); ++i)
        if (!std::isfinite(f[i].real()) || !std::isfinite(f[i].imag())) return true;
      return false;
    };
    for (int a = 0; a < grid_.dim(); ++a)
      if (bad(s.u.comp(a))) throw IntegrationError("velocity became non-finite", s.t);
    if (bad(s.phi)) throw IntegrationError("phase field became non-finite", s.t);
    if (bad(s.pi)) throw IntegrationError("relaxation rate became non-finite", s.t);
  }

  Grid grid_;
  ModelParams mp_;
  StepperConfig cfg_;
  std::vector<double> sym_;
  std::optional<ExplicitRhs> prev_;
};

}  // namespace nsac
