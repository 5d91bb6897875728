#pragma once
// Coupled incompressible-flow / phase-relaxation system on the torus:
//
//   u_t + u.grad u + grad p - lap u = -div(grad phi x grad phi),   div u = 0
//   phi_t = pi - u.grad phi + regularization terms
//   kappa pi_t + delta u.grad pi + pi - lap phi + f(phi) = 0
//
// with f = F' from potential.hpp.  Two regularizations of the pi-definition
// are supported:
//   linear:       pi = phi_t + u.grad phi - eps lap phi + sigma phi
//   variational:  pi = phi_t + u.grad phi + eps (-lap phi + f(phi))
// (sigma plays no role in the variational pi-definition).
//
// All nonlinear terms are dealiased through the 3/2-padded grid; states are
// evolved on the sign-resolved (Nyquist-free) sublattice, which sanitize()
// establishes once at the start of a run.

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include <nsac/errors.hpp>
#include <nsac/potential.hpp>
#include <nsac/spectral.hpp>

namespace nsac {

enum class RegMode { linear, variational };

struct ModelParams {
  double kappa = 1.0;    // microscopic inertia, > 0
  double delta = 0.0;    // transport of the relaxation rate, >= 0
  double sigma = 0.0;    // zeroth-order phase damping, >= 0
  double epsilon = 0.1;  // regularization strength, >= 0 (0 is exploratory)
  RegMode reg_mode = RegMode::linear;
  int truncation_n = 0;  // bounded-tail level; 0 uses the raw f
  Potential potential = Potential::double_well();
};

inline void validate(const ModelParams& p) {
  if (!(p.kappa > 0.0)) throw ConfigError("kappa > 0 required (got " + std::to_string(p.kappa) + ")");
  if (p.delta < 0.0) throw ConfigError("delta >= 0 required");
  if (p.sigma < 0.0) throw ConfigError("sigma >= 0 required");
  if (p.epsilon < 0.0) throw ConfigError("epsilon >= 0 required");
  if (p.truncation_n < 0) throw ConfigError("truncation_n >= 0 required");
}

struct SystemState {
  explicit SystemState(const Grid& g) : u(g), phi(g), pi(g), t(0.0) {}
  const Grid& grid() const { return phi.grid(); }

  VelocityField u;
  SpectralField phi;
  SpectralField pi;
  double t;
};

inline double mean_of(const SpectralField& f) { return f.coeff({0, 0, 0}).real(); }

// Entry point onto the evolution lattice: exact conjugate symmetry, no
// Nyquist content, divergence-free zero-mean velocity.
inline void sanitize(SystemState& s) {
  const Grid& g = s.grid();
  auto scrub = [&](SpectralField& f) {
    for_each_mode(g, [&](std::size_t i, const std::array<int, 3>& k) {
      for (int a = 0; a < g.dim(); ++a)
        if (k[a] == g.nyquist()) { f[i] = cplx{0.0, 0.0}; return; }
    });
    detail::hermitianize(g, f.data());
  };
  for (int a = 0; a < g.dim(); ++a) scrub(s.u.comp(a));
  scrub(s.phi);
  scrub(s.pi);
  s.u = leray_project(s.u);
}

namespace detail {

inline std::vector<std::vector<double>> padded_components(const VelocityField& u, const Grid& fine) {
  std::vector<std::vector<double>> out(static_cast<std::size_t>(u.dim()));
  for (int a = 0; a < u.dim(); ++a) out[a] = padded_values(u.comp(a), fine);
  return out;
}

// Dealiased u . grad s from precomputed padded samples of u.
inline SpectralField transport(const std::vector<std::vector<double>>& pu,
                               const SpectralField& s, const Grid& fine) {
  const Grid& g = s.grid();
  std::vector<double> acc(fine.size(), 0.0);
  for (int b = 0; b < g.dim(); ++b) {
    std::vector<double> gs = padded_values(gradient_component(s, b), fine);
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += pu[b][i] * gs[i];
  }
  return restrict_spectrum(to_spectral(fine, acc), g);
}

// -div(grad phi x grad phi) from precomputed padded samples of grad phi.
inline VelocityField korteweg_from_padded(const std::vector<std::vector<double>>& pg,
                                          const Grid& g, const Grid& fine) {
  const int d = g.dim();
  VelocityField stress(g);
  for (int a = 0; a < d; ++a) {
    for (int b = a; b < d; ++b) {
      std::vector<double> t(fine.size());
      for (std::size_t i = 0; i < t.size(); ++i) t[i] = pg[a][i] * pg[b][i];
      SpectralField tab = restrict_spectrum(to_spectral(fine, t), g);
      stress.comp(a) -= gradient_component(tab, b);
      if (b != a) stress.comp(b) -= gradient_component(tab, a);
    }
  }
  return stress;
}

}  // namespace detail

// Dealiased advection u . grad s (exact Galerkin projection of the product).
inline SpectralField convect(const VelocityField& u, const SpectralField& s) {
  const Grid fine = padded_grid(u.grid());
  return detail::transport(detail::padded_components(u, fine), s, fine);
}

// Capillary forcing -div(grad phi x grad phi), dealiased, not projected.
inline VelocityField korteweg_stress(const SpectralField& phi) {
  const Grid& g = phi.grid();
  const Grid fine = padded_grid(g);
  std::vector<std::vector<double>> pg(static_cast<std::size_t>(g.dim()));
  for (int a = 0; a < g.dim(); ++a) pg[a] = padded_values(gradient_component(phi, a), fine);
  return detail::korteweg_from_padded(pg, g, fine);
}

// Collocation of f (or its bounded tail) on the padded grid, projected back.
inline SpectralField nonlinear_term(const SpectralField& phi, const ModelParams& mp) {
  if (mp.truncation_n > 0)
    return collocate(phi, [&](double s) { return truncated_f(mp.potential, mp.truncation_n, s); });
  return collocate(phi, [&](double s) { return mp.potential.f(s); });
}

struct PhaseRhs {
  SpectralField dphi;
  SpectralField dpi;
};

struct Rhs {
  Rhs(const Grid& g) : du(g), dphi(g), dpi(g) {}
  VelocityField du;
  SpectralField dphi;
  SpectralField dpi;
};

// Terms the semi-implicit stepper treats explicitly (transport, capillary
// forcing, nonlinearity); the stiff linear-in-state parts stay out.
struct ExplicitRhs {
  ExplicitRhs(const Grid& g) : du(g), dphi(g), dpi(g) {}
  VelocityField du;
  SpectralField dphi;
  SpectralField dpi;
};

namespace detail {

// Shared assembly: every product is computed exactly as its standalone
// counterpart (same padded samples, same accumulation order), so the fused
// path and the modular operators agree bitwise.
template <typename Out>
void assemble_explicit(const SystemState& s, const ModelParams& mp, Out& out) {
  const Grid& g = s.grid();
  const Grid fine = padded_grid(g);
  const int d = g.dim();

  std::vector<std::vector<double>> pu = padded_components(s.u, fine);
  std::vector<std::vector<double>> pg(static_cast<std::size_t>(d));
  for (int a = 0; a < d; ++a) pg[a] = padded_values(gradient_component(s.phi, a), fine);

  for (int a = 0; a < d; ++a) out.du.comp(a) -= transport(pu, s.u.comp(a), fine);
  out.du += korteweg_from_padded(pg, g, fine);
  out.du = leray_project(out.du);

  SpectralField conv_phi = transport(pu, s.phi, fine);
  SpectralField gfield = nonlinear_term(s.phi, mp);

  out.dphi -= conv_phi;
  if (mp.reg_mode == RegMode::variational) out.dphi -= mp.epsilon * gfield;

  out.dpi -= (1.0 / mp.kappa) * gfield;
  if (mp.delta != 0.0) out.dpi -= (mp.delta / mp.kappa) * transport(pu, s.pi, fine);
}

}  // namespace detail

inline ExplicitRhs compute_explicit(const SystemState& s, const ModelParams& mp) {
  ExplicitRhs out(s.grid());
  detail::assemble_explicit(s, mp, out);
  return out;
}

// Full right-hand side (explicit terms plus the linear-in-state parts).
inline Rhs compute_rhs(const SystemState& s, const ModelParams& mp) {
  Rhs out(s.grid());
  detail::assemble_explicit(s, mp, out);
  const Grid& g = s.grid();
  for_each_mode(g, [&](std::size_t i, const std::array<int, 3>& k) {
    const double lam = laplacian_symbol(g, k);  // -|2 pi k|^2
    for (int a = 0; a < g.dim(); ++a) out.du.comp(a)[i] += lam * s.u.comp(a)[i];
    if (mp.reg_mode == RegMode::linear)
      out.dphi[i] += s.pi[i] + (mp.epsilon * lam - mp.sigma) * s.phi[i];
    else
      out.dphi[i] += s.pi[i] + mp.epsilon * lam * s.phi[i];
    out.dpi[i] += (lam * s.phi[i] - s.pi[i]) / mp.kappa;
  });
  return out;
}

inline VelocityField rhs_velocity(const SystemState& s, const ModelParams& mp) {
  return compute_rhs(s, mp).du;
}

inline PhaseRhs rhs_phase_pair(const SystemState& s, const ModelParams& mp) {
  Rhs r = compute_rhs(s, mp);
  return PhaseRhs{std::move(r.dphi), std::move(r.dpi)};
}

}  // namespace nsac
