#pragma once
// Initial state construction.  Random fields use an explicit generator
// (SplitMix64 bits, Box-Muller normals) rather than <random> distributions,
// whose output is implementation-defined; a seed must mean the same state on
// every platform.  Coefficients are drawn in a fixed order (one conjugate
// pair per canonical representative, velocity components first, then the
// phase field, then its rate), so prescribed norms only rescale the draw.

#include <cmath>
#include <cstdint>
#include <vector>

#include <nsac/config.hpp>
#include <nsac/model.hpp>
#include <nsac/snapshot.hpp>
#include <nsac/spectral.hpp>

namespace nsac {

struct SplitMix64 {
  std::uint64_t s = 0;
  std::uint64_t next() {
    s += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = s;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  double uniform() {  // [0, 1), 53-bit
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }
};

namespace detail {

// One standard-normal pair per call (Box-Muller).
inline cplx gaussian_pair(SplitMix64& rng) {
  const double u1 = rng.uniform();
  const double u2 = rng.uniform();
  const double r = std::sqrt(-2.0 * std::log1p(-u1));
  return cplx{r * std::cos(two_pi * u2), r * std::sin(two_pi * u2)};
}

// Gaussian coefficients on 0 < |k|_inf <= kmax, one draw per conjugate pair.
// Canonical representative: highest-axis nonzero frequency positive.
inline SpectralField gaussian_band_field(const Grid& g, int kmax, SplitMix64& rng) {
  SpectralField f(g);
  for_each_mode(g, [&](std::size_t, const std::array<int, 3>& k) {
    int kinf = 0;
    for (int a = 0; a < g.dim(); ++a) kinf = std::max(kinf, std::abs(k[a]));
    if (kinf == 0 || kinf > kmax) return;
    for (int a = g.dim() - 1; a >= 0; --a) {
      if (k[a] > 0) break;
      if (k[a] < 0) return;
    }
    set_mode_pair(f, k, gaussian_pair(rng));
  });
  return f;
}

inline void scale_to_norm(SpectralField& f, double target) {
  const double cur = l2_norm(f);
  if (target == 0.0 || cur == 0.0) {
    f *= 0.0;
    return;
  }
  f *= target / cur;
}

inline SystemState random_initial_state(const Grid& g, const InitialSpec& spec,
                                        std::uint64_t seed) {
  const int kmax = spec.kmax > 0 ? spec.kmax : std::max(1, g.n() / 8);
  SystemState s(g);
  // independent substreams so each field's draw depends only on the seed
  SplitMix64 master{seed};
  std::vector<std::uint64_t> sub(static_cast<std::size_t>(g.dim()) + 2);
  for (auto& v : sub) v = master.next();
  for (int a = 0; a < g.dim(); ++a) {
    SplitMix64 rng{sub[static_cast<std::size_t>(a)]};
    s.u.comp(a) = gaussian_band_field(g, kmax, rng);
  }
  {
    SplitMix64 rng{sub[static_cast<std::size_t>(g.dim())]};
    s.phi = gaussian_band_field(g, kmax, rng);
  }
  {
    SplitMix64 rng{sub[static_cast<std::size_t>(g.dim()) + 1]};
    s.pi = gaussian_band_field(g, kmax, rng);
  }
  s.u = leray_project(s.u);
  const double nu = l2_norm(s.u);
  if (spec.u_norm == 0.0 || nu == 0.0)
    s.u *= 0.0;
  else
    s.u *= spec.u_norm / nu;
  scale_to_norm(s.phi, spec.phi_norm);
  s.phi.set_coeff({0, 0, 0}, cplx{spec.phi_mean, 0.0});
  scale_to_norm(s.pi, spec.pi_norm);
  return s;
}

template <typename F>
std::vector<double> sampled(const Grid& g, F&& fn) {
  std::vector<double> v(g.size());
  const int n = g.n();
  const double h = g.h();
  std::size_t i = 0;
  if (g.dim() == 2) {
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) v[i++] = fn(a * h, b * h, 0.0);
  } else {
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c) v[i++] = fn(a * h, b * h, c * h);
  }
  return v;
}

// Divergence-free vortex plus a single-harmonic phase disturbance.
inline SystemState taylor_green_state(const Grid& g, const InitialSpec& spec) {
  SystemState s(g);
  const double root2 = std::sqrt(2.0);
  if (g.dim() == 2) {
    const double amp = spec.u_norm * root2;
    s.u.comp(0) = to_spectral(g, sampled(g, [amp](double x, double y, double) {
                                return amp * std::sin(two_pi * x) * std::cos(two_pi * y);
                              }));
    s.u.comp(1) = to_spectral(g, sampled(g, [amp](double x, double y, double) {
                                return -amp * std::cos(two_pi * x) * std::sin(two_pi * y);
                              }));
  } else {
    const double amp = spec.u_norm * 2.0;
    s.u.comp(0) = to_spectral(g, sampled(g, [amp](double x, double y, double z) {
                                return amp * std::sin(two_pi * x) * std::cos(two_pi * y) *
                                       std::cos(two_pi * z);
                              }));
    s.u.comp(1) = to_spectral(g, sampled(g, [amp](double x, double y, double z) {
                                return -amp * std::cos(two_pi * x) * std::sin(two_pi * y) *
                                       std::cos(two_pi * z);
                              }));
  }
  s.phi.set_coeff({0, 0, 0}, cplx{spec.phi_mean, 0.0});
  set_mode_pair(s.phi, {1, 0, 0}, cplx{spec.phi_norm * root2 * 0.5, 0.0});
  set_mode_pair(s.pi, {0, 1, 0}, cplx{0.0, -spec.pi_norm * root2 * 0.5});
  return s;
}

}  // namespace detail

// Builds the configured initial state.  Random draws depend only on (grid,
// kmax, seed); snapshot initial data insists on matching grid and model.
inline SystemState build_initial_state(const Grid& g, const InitialSpec& spec,
                                       const ModelParams& mp, std::uint64_t seed) {
  SystemState s(g);
  switch (spec.kind) {
    case InitialKind::ground_state:
      s.phi.set_coeff({0, 0, 0}, cplx{1.0, 0.0});
      break;
    case InitialKind::constant:
      s.phi.set_coeff({0, 0, 0}, cplx{spec.phi0, 0.0});
      s.pi.set_coeff({0, 0, 0}, cplx{spec.pi0, 0.0});
      break;
    case InitialKind::random:
      s = detail::random_initial_state(g, spec, seed);
      break;
    case InitialKind::taylor_green:
      s = detail::taylor_green_state(g, spec);
      break;
    case InitialKind::snapshot:
      s = read_snapshot(spec.path, g, mp);
      return s;  // stored states are restored verbatim, not re-sanitized
  }
  sanitize(s);
  return s;
}

}  // namespace nsac
