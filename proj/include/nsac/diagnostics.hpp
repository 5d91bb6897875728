#pragma once
// Scalar diagnostics along a trajectory: the energy ledger and its
// dissipation, the dissipativity functional with its cross term, norm
// bundles, and discrete residuals of the laws the flow is supposed to obey.
//
// Integrals of polynomial expressions in the fields are evaluated on a
// quadrature lattice fine enough that the lattice average IS the integral
// (trapezoidal sums are exact for trigonometric polynomials the lattice
// resolves).  The reported f-integral deliberately reuses the same collocated
// nonlinearity as the right-hand side, so the spatial-mean balance laws close
// to roundoff rather than to quadrature error.

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

#include <nsac/model.hpp>
#include <nsac/spectral.hpp>

namespace nsac {

namespace detail {

inline double fn_value(const ModelParams& mp, double r) {
  return mp.truncation_n > 0 ? truncated_f(mp.potential, mp.truncation_n, r) : mp.potential.f(r);
}
inline double fn_slope(const ModelParams& mp, double r) {
  return mp.truncation_n > 0 ? truncated_fprime(mp.potential, mp.truncation_n, r) : mp.potential.fprime(r);
}
inline double fn_anti(const ModelParams& mp, double r) {
  return mp.truncation_n > 0 ? truncated_F(mp.potential, mp.truncation_n, r) : mp.potential.F(r);
}

}  // namespace detail

// integral of F(phi) over the torus (F_n when a truncation level is active)
inline double configuration_energy(const SpectralField& phi, const ModelParams& mp) {
  const Grid q = quadrature_grid(phi.grid(), mp.potential.degree());
  std::vector<double> v = padded_values(phi, q);
  double acc = 0.0;
  for (double x : v) acc += detail::fn_anti(mp, x);
  return acc / static_cast<double>(v.size());
}

// Regularizing dissipation.  The two pi-definitions dissipate differently:
// the linear form through eps |lap phi|^2 plus damped-gradient and damping
// terms, the variational form through eps |(-lap + f)(phi)|^2.
inline double regularizing_dissipation(const SystemState& s, const ModelParams& mp) {
  const Grid& g = s.grid();
  const int deg = mp.potential.degree();
  if (mp.reg_mode == RegMode::linear) {
    if (mp.epsilon == 0.0 && mp.sigma == 0.0) return 0.0;
    const Grid q = quadrature_grid(g, deg);
    std::vector<double> pv = padded_values(s.phi, q);
    std::vector<std::vector<double>> gv(static_cast<std::size_t>(g.dim()));
    for (int a = 0; a < g.dim(); ++a) gv[a] = padded_values(gradient_component(s.phi, a), q);
    double acc = 0.0;
    for (std::size_t i = 0; i < pv.size(); ++i) {
      double g2 = 0.0;
      for (int a = 0; a < g.dim(); ++a) g2 += gv[a][i] * gv[a][i];
      acc += (mp.sigma + mp.epsilon * detail::fn_slope(mp, pv[i])) * g2 +
             mp.sigma * detail::fn_value(mp, pv[i]) * pv[i];
    }
    return mp.epsilon * laplacian_norm_sq(s.phi) + acc / static_cast<double>(pv.size());
  }
  if (mp.epsilon == 0.0) return 0.0;
  const Grid q = quadrature_grid(g, 2 * (deg - 1));
  std::vector<double> pv = padded_values(s.phi, q);
  std::vector<double> lv = padded_values(laplacian(s.phi), q);
  double acc = 0.0;
  for (std::size_t i = 0; i < pv.size(); ++i) {
    double w = -lv[i] + detail::fn_value(mp, pv[i]);
    acc += w * w;
  }
  return mp.epsilon * acc / static_cast<double>(pv.size());
}

// eta bounds for the cross-augmented functional: the pairing must stay
// dominated (kappa eta <= 2/3), the damped quadratic form must stay coercive,
// and with eps > 0 the extra regularizing terms impose eta < 3 / (kappa^2 eps).
// All bounds are open except the first; take a fraction of the returned value.
inline double admissible_eta_max(const ModelParams& mp) {
  const double k = mp.kappa;
  double b = std::min(2.0 / (3.0 * k),
                      2.0 / (k + 0.5 * (1.0 + (1.0 + k * mp.sigma) * (1.0 + k * mp.sigma))));
  if (mp.epsilon > 0.0) b = std::min(b, 3.0 / (k * k * mp.epsilon));
  return b;
}

inline double default_eta(const ModelParams& mp) { return 0.9 * admissible_eta_max(mp); }

struct DissipativityFunctionals {
  double g_value;  // |u|^2 + kappa |pi|^2 + |grad phi|^2 + 2 int F + C
  double d_cross;  // g_value + eta kappa (pi, phi)
  double eta;
};

inline DissipativityFunctionals dissipativity_functionals(const SystemState& s, const ModelParams& mp,
                                                          double eta) {
  double g = l2_norm_sq(s.u) + mp.kappa * l2_norm_sq(s.pi) + h1_seminorm_sq(s.phi) +
             2.0 * configuration_energy(s.phi, mp) + mp.potential.g_offset();
  double cross = eta * mp.kappa * l2_inner(s.pi, s.phi);
  return {g, g + cross, eta};
}

struct EnergyReport {
  double t = 0.0;
  double kinetic_macro = 0.0;   // |u|^2 / 2
  double kinetic_micro = 0.0;   // kappa |pi|^2 / 2
  double interface = 0.0;       // |grad phi|^2 / 2
  double configuration = 0.0;   // int F(phi)
  double total = 0.0;
  double d0 = 0.0;              // |grad u|^2 + |pi|^2
  double dreg = 0.0;            // regularization-dependent dissipation
  double g_value = 0.0;
  double d_cross = 0.0;
  double phi_mean = 0.0;
  double pi_mean = 0.0;
  double f_integral = 0.0;      // mean of the collocated nonlinearity
  double crossterm = 0.0;       // (f_coll(phi), u . grad phi), signed
  double residual = 0.0;        // filled pairwise by the run loop
};

inline EnergyReport compute_energy_report(const SystemState& s, const ModelParams& mp, double eta) {
  EnergyReport r;
  r.t = s.t;
  r.kinetic_macro = 0.5 * l2_norm_sq(s.u);
  r.kinetic_micro = 0.5 * mp.kappa * l2_norm_sq(s.pi);
  r.interface = 0.5 * h1_seminorm_sq(s.phi);
  r.configuration = configuration_energy(s.phi, mp);
  r.total = r.kinetic_macro + r.kinetic_micro + r.interface + r.configuration;
  r.d0 = h1_seminorm_sq(s.u) + l2_norm_sq(s.pi);
  r.dreg = regularizing_dissipation(s, mp);
  DissipativityFunctionals d = dissipativity_functionals(s, mp, eta);
  r.g_value = d.g_value;
  r.d_cross = d.d_cross;
  r.phi_mean = mean_of(s.phi);
  r.pi_mean = mean_of(s.pi);
  SpectralField g = nonlinear_term(s.phi, mp);
  r.f_integral = mean_of(g);
  r.crossterm = l2_inner(g, convect(s.u, s.phi));
  return r;
}

// Trapezoidal residual of d/dt E + D0 + Dreg = 0 between two reports.
inline double pairwise_energy_residual(const EnergyReport& a, const EnergyReport& b) {
  const double dt = b.t - a.t;
  return (b.total - a.total) / dt + 0.5 * (a.d0 + a.dreg + b.d0 + b.dreg);
}

inline std::vector<double> energy_law_residual(const std::vector<EnergyReport>& rs) {
  if (rs.size() < 2) throw std::invalid_argument("energy_law_residual: need at least two reports");
  const double dt0 = rs[1].t - rs[0].t;
  if (!(dt0 > 0.0)) throw std::invalid_argument("energy_law_residual: non-increasing times");
  std::vector<double> out;
  out.reserve(rs.size() - 1);
  for (std::size_t i = 1; i < rs.size(); ++i) {
    const double dt = rs[i].t - rs[i - 1].t;
    if (std::abs(dt - dt0) > 1e-9 * dt0)
      throw std::invalid_argument("energy_law_residual: unevenly spaced reports");
    out.push_back(pairwise_energy_residual(rs[i - 1], rs[i]));
  }
  return out;
}

// Residuals of the spatial-mean balances, evaluated with the SAME quadrature
// the semi-implicit scheme applies (trapezoid on the linear couplings,
// two-step extrapolation on the nonlinearity, plain Euler weights on the
// first step).  On an every-step report series of that scheme these vanish to
// roundoff; for other series they are an O(dt^2) consistency diagnostic.
struct MeanLawResiduals {
  std::vector<double> phase;  // d/dt mean phi + sigma mean phi - mean pi [+ eps mean f]
  std::vector<double> rate;   // kappa d/dt mean pi + mean pi + mean f
};

inline MeanLawResiduals mean_law_residuals(const std::vector<EnergyReport>& rs, const ModelParams& mp) {
  if (rs.size() < 2) throw std::invalid_argument("mean_law_residuals: need at least two reports");
  MeanLawResiduals out;
  for (std::size_t i = 1; i < rs.size(); ++i) {
    const EnergyReport& a = rs[i - 1];
    const EnergyReport& b = rs[i];
    const double dt = b.t - a.t;
    const double fbar = i >= 2 ? 1.5 * a.f_integral - 0.5 * rs[i - 2].f_integral : a.f_integral;
    double phase = (b.phi_mean - a.phi_mean) / dt - 0.5 * (a.pi_mean + b.pi_mean);
    if (mp.reg_mode == RegMode::linear)
      phase += mp.sigma * 0.5 * (a.phi_mean + b.phi_mean);
    else
      phase += mp.epsilon * fbar;
    out.phase.push_back(phase);
    out.rate.push_back(mp.kappa * (b.pi_mean - a.pi_mean) / dt + 0.5 * (a.pi_mean + b.pi_mean) + fbar);
  }
  return out;
}

struct StateNorms {
  double u_l2 = 0.0;
  double phi_l2 = 0.0;
  double phi_h1 = 0.0;   // full H1 norm
  double phi_lp = 0.0;   // L^{p+2} norm, p the growth exponent
  double pi_l2 = 0.0;
};

inline StateNorms compute_norms(const SystemState& s, const ModelParams& mp) {
  StateNorms n;
  n.u_l2 = l2_norm(s.u);
  n.phi_l2 = l2_norm(s.phi);
  n.phi_h1 = std::sqrt(l2_norm_sq(s.phi) + h1_seminorm_sq(s.phi));
  n.pi_l2 = l2_norm(s.pi);
  const int pw = mp.potential.p_growth() + 2;  // even
  const Grid q = quadrature_grid(s.grid(), pw);
  std::vector<double> v = padded_values(s.phi, q);
  double acc = 0.0;
  for (double x : v) {
    double x2 = x * x, m = 1.0;
    for (int j = 0; j < pw / 2; ++j) m *= x2;
    acc += m;
  }
  n.phi_lp = std::pow(acc / static_cast<double>(v.size()), 1.0 / pw);
  return n;
}

// Plain sum tracked by the absorbing-set experiments.
inline double dissipativity_bundle(const SystemState& s, const ModelParams& mp) {
  StateNorms n = compute_norms(s, mp);
  return n.u_l2 + n.phi_h1 + n.phi_lp + n.pi_l2;
}

// Squared-distance bundle contracted by nearby trajectories.
inline double contraction_bundle(const SystemState& a, const SystemState& b) {
  if (a.grid() != b.grid()) throw std::invalid_argument("contraction_bundle: grid mismatch");
  double d = l2_norm_sq(a.phi - b.phi) + h1_seminorm_sq(a.phi - b.phi) + l2_norm_sq(a.pi - b.pi);
  for (int c = 0; c < a.grid().dim(); ++c) d += l2_norm_sq(a.u.comp(c) - b.u.comp(c));
  return d;
}

}  // namespace nsac
