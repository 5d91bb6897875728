#pragma once
// Periodic pseudo-spectral toolkit on the unit torus [0,1]^d, d in {2,3}.
//
// Conventions, shared by the numerics, the tests and the on-disk formats:
//   * lattice of n points per axis (n even, n >= 8), flat row-major storage
//     with axis 0 slowest;
//   * per-axis frequencies in FFT order: index i -> k = (i <= n/2 ? i : i - n);
//   * coefficients are function-valued: c(0) is the field mean, the forward
//     transform carries the 1/n^d factor, so on the unit-volume torus Parseval
//     reads  integral(a*b) = sum_k a_k conj(b_k);
//   * wavenumbers carry their 2*pi: d/dx_j multiplies by i*2*pi*k_j;
//   * the column k_j = n/2 (Nyquist) is sign-ambiguous.  Differential
//     operators, the Leray projector and dealiased products zero it, and the
//     operators compose consistently on the sign-resolved sublattice.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <fftw3.h>

namespace nsac {

using cplx = std::complex<double>;

inline constexpr double two_pi = 6.283185307179586476925286766559;

class Grid {
public:
  Grid(int dim, int n) : dim_(dim), n_(n) {
    if (dim != 2 && dim != 3)
      throw std::invalid_argument("grid: dim must be 2 or 3, got " + std::to_string(dim));
    if (n < 8 || n % 2 != 0)
      throw std::invalid_argument("grid: n must be even and >= 8, got " + std::to_string(n));
  }

  int dim() const { return dim_; }
  int n() const { return n_; }
  double h() const { return 1.0 / n_; }
  std::size_t size() const {
    std::size_t s = 1;
    for (int a = 0; a < dim_; ++a) s *= static_cast<std::size_t>(n_);
    return s;
  }
  int nyquist() const { return n_ / 2; }
  int freq(int i) const { return i <= n_ / 2 ? i : i - n_; }

  bool operator==(const Grid& o) const { return dim_ == o.dim_ && n_ == o.n_; }
  bool operator!=(const Grid& o) const { return !(*this == o); }

  // Unused trailing axes of the returned triple are index 0 / frequency 0.
  std::array<int, 3> unravel(std::size_t flat) const {
    std::array<int, 3> ix{0, 0, 0};
    for (int a = dim_ - 1; a >= 0; --a) {
      ix[a] = static_cast<int>(flat % n_);
      flat /= n_;
    }
    return ix;
  }

  std::size_t ravel(const std::array<int, 3>& ix) const {
    std::size_t flat = 0;
    for (int a = 0; a < dim_; ++a) flat = flat * n_ + static_cast<std::size_t>(ix[a]);
    return flat;
  }

  std::array<int, 3> modes(std::size_t flat) const {
    std::array<int, 3> k = unravel(flat);
    for (int a = 0; a < dim_; ++a) k[a] = freq(k[a]);
    return k;
  }

  // k_j may be given anywhere in [-n/2, n/2]; wrapped into storage order.
  std::size_t index_of_mode(const std::array<int, 3>& k) const {
    std::array<int, 3> ix{0, 0, 0};
    for (int a = 0; a < dim_; ++a) {
      int m = k[a] % n_;
      if (m < 0) m += n_;
      ix[a] = m;
    }
    return ravel(ix);
  }

  std::size_t conj_index(std::size_t flat) const {
    std::array<int, 3> ix = unravel(flat);
    for (int a = 0; a < dim_; ++a) ix[a] = (n_ - ix[a]) % n_;
    return ravel(ix);
  }

  // Physical coordinate of a lattice point, component a.
  double coord(const std::array<int, 3>& ix, int a) const { return ix[a] * h(); }

private:
  int dim_;
  int n_;
};

template <typename F>
void for_each_mode(const Grid& g, F&& fn) {
  const std::size_t sz = g.size();
  for (std::size_t i = 0; i < sz; ++i) fn(i, g.modes(i));
}

class SpectralField {
public:
  explicit SpectralField(const Grid& g) : grid_(g), c_(g.size(), cplx{0.0, 0.0}) {}

  const Grid& grid() const { return grid_; }
  std::size_t size() const { return c_.size(); }

  cplx& operator[](std::size_t i) { return c_[i]; }
  const cplx& operator[](std::size_t i) const { return c_[i]; }

  cplx coeff(const std::array<int, 3>& k) const { return c_[grid_.index_of_mode(k)]; }
  void set_coeff(const std::array<int, 3>& k, cplx v) { c_[grid_.index_of_mode(k)] = v; }

  cplx* data() { return c_.data(); }
  const cplx* data() const { return c_.data(); }

  SpectralField& operator+=(const SpectralField& o) {
    check_same_grid(o);
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
    return *this;
  }
  SpectralField& operator-=(const SpectralField& o) {
    check_same_grid(o);
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
    return *this;
  }
  SpectralField& operator*=(double s) {
    for (auto& v : c_) v *= s;
    return *this;
  }

private:
  void check_same_grid(const SpectralField& o) const {
    if (grid_ != o.grid_) throw std::invalid_argument("spectral field: grid mismatch");
  }

  Grid grid_;
  std::vector<cplx> c_;
};

inline SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
inline SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
inline SpectralField operator*(double s, SpectralField a) { return a *= s; }

// Sets c(k) = v and c(-k) = conj(v) so the represented function stays real.
inline void set_mode_pair(SpectralField& f, const std::array<int, 3>& k, cplx v) {
  f.set_coeff(k, v);
  std::array<int, 3> mk{-k[0], -k[1], -k[2]};
  if (f.grid().index_of_mode(mk) != f.grid().index_of_mode(k)) f.set_coeff(mk, std::conj(v));
  else f.set_coeff(k, cplx{v.real(), 0.0});
}

// d-component velocity in coefficient space.  The divergence-free and
// zero-mean invariants are established by leray_project and preserved by the
// steppers; divergence_residual measures them for checks.
class VelocityField {
public:
  explicit VelocityField(const Grid& g) : grid_(g), comp_(static_cast<std::size_t>(g.dim()), SpectralField(g)) {}

  const Grid& grid() const { return grid_; }
  int dim() const { return grid_.dim(); }
  SpectralField& comp(int j) { return comp_[static_cast<std::size_t>(j)]; }
  const SpectralField& comp(int j) const { return comp_[static_cast<std::size_t>(j)]; }

  VelocityField& operator+=(const VelocityField& o) {
    for (int j = 0; j < dim(); ++j) comp_[j] += o.comp(j);
    return *this;
  }
  VelocityField& operator-=(const VelocityField& o) {
    for (int j = 0; j < dim(); ++j) comp_[j] -= o.comp(j);
    return *this;
  }
  VelocityField& operator*=(double s) {
    for (auto& c : comp_) c *= s;
    return *this;
  }

private:
  Grid grid_;
  std::vector<SpectralField> comp_;
};

inline VelocityField operator+(VelocityField a, const VelocityField& b) { return a += b; }
inline VelocityField operator-(VelocityField a, const VelocityField& b) { return a -= b; }
inline VelocityField operator*(double s, VelocityField a) { return a *= s; }

// ---------------------------------------------------------------------------
// Transforms.  FFTW backs the O(N log N) path; plans are created once per
// (shape, direction) with FFTW_ESTIMATE | FFTW_UNALIGNED (deterministic
// planning, any caller buffer) and executed through the new-array interface,
// which is safe across threads on a shared plan.
// ---------------------------------------------------------------------------

namespace detail {

inline fftw_plan acquire_plan(const Grid& g, int sign) {
  static std::mutex mu;
  static std::map<std::tuple<int, int, int>, fftw_plan> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_tuple(g.dim(), g.n(), sign);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  std::vector<cplx> scratch_in(g.size()), scratch_out(g.size());
  int dims[3] = {g.n(), g.n(), g.n()};
  fftw_plan p = fftw_plan_dft(g.dim(), dims,
                              reinterpret_cast<fftw_complex*>(scratch_in.data()),
                              reinterpret_cast<fftw_complex*>(scratch_out.data()),
                              sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
  if (!p) throw std::runtime_error("fftw plan creation failed");
  cache.emplace(key, p);
  return p;
}

// Out-of-place transform; in and out must be distinct buffers of g.size().
inline void run_fft(const Grid& g, const cplx* in, cplx* out, int sign) {
  fftw_plan p = acquire_plan(g, sign);
  fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in)),
                   reinterpret_cast<fftw_complex*>(out));
}

// Forces exact conjugate symmetry; roundoff in the complex transform of real
// data would otherwise leak O(1e-16) asymmetry that compounds over long runs.
inline void hermitianize(const Grid& g, cplx* c) {
  const std::size_t sz = g.size();
  for (std::size_t i = 0; i < sz; ++i) {
    std::size_t ci = g.conj_index(i);
    if (ci < i) continue;
    if (ci == i) {
      c[i] = cplx{c[i].real(), 0.0};
    } else {
      cplx m = 0.5 * (c[i] + std::conj(c[ci]));
      c[i] = m;
      c[ci] = std::conj(m);
    }
  }
}

}  // namespace detail

// Real lattice samples -> coefficients.  Exactly conjugate-symmetric output.
inline SpectralField to_spectral(const Grid& g, const std::vector<double>& values) {
  if (values.size() != g.size())
    throw std::invalid_argument("to_spectral: expected " + std::to_string(g.size()) +
                                " samples, got " + std::to_string(values.size()));
  std::vector<cplx> buf(g.size());
  for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = cplx{values[i], 0.0};
  SpectralField out(g);
  detail::run_fft(g, buf.data(), out.data(), FFTW_FORWARD);
  const double scale = 1.0 / static_cast<double>(g.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= scale;
  detail::hermitianize(g, out.data());
  return out;
}

// Coefficients -> real lattice samples.  The imaginary residue of the inverse
// transform must sit at roundoff (<= 1e-12 relative); larger residue means the
// coefficients were not conjugate-symmetric and the call refuses the data.
inline std::vector<double> to_physical(const SpectralField& f) {
  const Grid& g = f.grid();
  std::vector<cplx> buf(g.size());
  detail::run_fft(g, f.data(), buf.data(), FFTW_BACKWARD);
  double max_re = 0.0, max_im = 0.0;
  for (const cplx& v : buf) {
    max_re = std::max(max_re, std::abs(v.real()));
    max_im = std::max(max_im, std::abs(v.imag()));
  }
  if (max_im > 1e-12 * std::max(1.0, max_re))
    throw std::runtime_error("to_physical: hermitian symmetry violated (imaginary residue " +
                             std::to_string(max_im) + ")");
  std::vector<double> out(g.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = buf[i].real();
  return out;
}

// ---------------------------------------------------------------------------
// Differential operators (diagonal in coefficient space).
// ---------------------------------------------------------------------------

// -|2 pi k|^2 with Nyquist axes excluded from the sum, so that composing the
// first-order operators (divergence of gradient) reproduces it exactly.
inline double laplacian_symbol(const Grid& g, const std::array<int, 3>& k) {
  double s = 0.0;
  for (int a = 0; a < g.dim(); ++a) {
    if (k[a] == g.nyquist()) continue;
    const double w = two_pi * k[a];
    s -= w * w;
  }
  return s;
}

inline SpectralField gradient_component(const SpectralField& f, int axis) {
  const Grid& g = f.grid();
  if (axis < 0 || axis >= g.dim()) throw std::invalid_argument("gradient: bad axis");
  SpectralField out(g);
  for_each_mode(g, [&](std::size_t i, const std::array<int, 3>& k) {
    if (k[axis] == g.nyquist()) return;  // sign-ambiguous, zeroed
    out[i] = cplx{0.0, two_pi * k[axis]} * f[i];
  });
  return out;
}

inline std::vector<SpectralField> gradient(const SpectralField& f) {
  std::vector<SpectralField> out;
  out.reserve(static_cast<std::size_t>(f.grid().dim()));
  for (int a = 0; a < f.grid().dim(); ++a) out.push_back(gradient_component(f, a));
  return out;
}

inline SpectralField laplacian(const SpectralField& f) {
  SpectralField out(f.grid());
  for_each_mode(f.grid(), [&](std::size_t i, const std::array<int, 3>& k) {
    out[i] = laplacian_symbol(f.grid(), k) * f[i];
  });
  return out;
}

inline SpectralField divergence(const VelocityField& u) {
  SpectralField out(u.grid());
  for (int a = 0; a < u.dim(); ++a) out += gradient_component(u.comp(a), a);
  return out;
}

// Projection onto zero-mean divergence-free fields: u(k) -> u - k (k.u)/|k|^2,
// k = 0 and Nyquist columns zeroed.  Integer k is used (the 2*pi cancels).
inline VelocityField leray_project(const VelocityField& u) {
  const Grid& g = u.grid();
  VelocityField out(g);
  const int d = g.dim();
  for_each_mode(g, [&](std::size_t i, const std::array<int, 3>& k) {
    double k2 = 0.0;
    bool nyq = false;
    for (int a = 0; a < d; ++a) {
      k2 += static_cast<double>(k[a]) * k[a];
      if (k[a] == g.nyquist()) nyq = true;
    }
    if (k2 == 0.0 || nyq) return;  // output stays zero there
    cplx kdotu{0.0, 0.0};
    for (int a = 0; a < d; ++a) kdotu += static_cast<double>(k[a]) * u.comp(a)[i];
    for (int a = 0; a < d; ++a) out.comp(a)[i] = u.comp(a)[i] - (static_cast<double>(k[a]) / k2) * kdotu;
  });
  return out;
}

inline double divergence_residual(const VelocityField& u) {
  SpectralField div = divergence(u);
  double m = 0.0;
  for (std::size_t i = 0; i < div.size(); ++i) m = std::max(m, std::abs(div[i]));
  return m;
}

// Zeroes every coefficient with |k|_inf > m.  m = n/2 is the identity.
inline SpectralField galerkin_truncate(const SpectralField& f, int m) {
  if (m < 0) throw std::invalid_argument("galerkin_truncate: m must be >= 0");
  SpectralField out(f.grid());
  for_each_mode(f.grid(), [&](std::size_t i, const std::array<int, 3>& k) {
    int kinf = 0;
    for (int a = 0; a < f.grid().dim(); ++a) kinf = std::max(kinf, std::abs(k[a]));
    if (kinf <= m) out[i] = f[i];
  });
  return out;
}

// ---------------------------------------------------------------------------
// Zero-padding, dealiased products, quadrature grids.
// ---------------------------------------------------------------------------

// Smallest admissible even lattice with >= factor*n points per axis.
inline Grid padded_grid(const Grid& g, double factor = 1.5) {
  int m = static_cast<int>(std::ceil(factor * g.n() - 1e-9));
  if (m % 2 != 0) ++m;
  m = std::max(m, 8);
  return Grid(g.dim(), m);
}

// Zero-fill embedding.  Base Nyquist content has no sign-resolved image and is
// dropped, consistently with the operators that already zero that column.
inline SpectralField pad_spectrum(const SpectralField& f, const Grid& fine) {
  const Grid& g = f.grid();
  if (fine.dim() != g.dim() || fine.n() < g.n())
    throw std::invalid_argument("pad_spectrum: fine grid must refine the base grid");
  SpectralField out(fine);
  for_each_mode(g, [&](std::size_t i, const std::array<int, 3>& k) {
    for (int a = 0; a < g.dim(); ++a)
      if (k[a] == g.nyquist()) return;
    out[fine.index_of_mode(k)] = f[i];
  });
  return out;
}

// Keeps |k|_inf < n/2 of the base lattice (base Nyquist column zero).
inline SpectralField restrict_spectrum(const SpectralField& f, const Grid& base) {
  const Grid& fine = f.grid();
  if (fine.dim() != base.dim() || fine.n() < base.n())
    throw std::invalid_argument("restrict_spectrum: target grid must be coarser");
  SpectralField out(base);
  for_each_mode(base, [&](std::size_t i, const std::array<int, 3>& k) {
    for (int a = 0; a < base.dim(); ++a)
      if (std::abs(k[a]) == base.nyquist()) return;
    out[i] = f[fine.index_of_mode(k)];
  });
  return out;
}

inline std::vector<double> padded_values(const SpectralField& f, const Grid& fine) {
  return to_physical(pad_spectrum(f, fine));
}

// Exact Galerkin projection of the pointwise product a*b onto the (Nyquist-
// free) base lattice: with the 3/2 padding every aliased image of a quadratic
// product lands on the base Nyquist column, which the restriction zeroes.
inline SpectralField dealias_product(const SpectralField& a, const SpectralField& b) {
  if (a.grid() != b.grid()) throw std::invalid_argument("dealias_product: grid mismatch");
  const Grid fine = padded_grid(a.grid());
  std::vector<double> va = padded_values(a, fine);
  std::vector<double> vb = padded_values(b, fine);
  for (std::size_t i = 0; i < va.size(); ++i) va[i] *= vb[i];
  return restrict_spectrum(to_spectral(fine, va), a.grid());
}

// Pointwise composition s -> fn(s) evaluated by collocation on the padded
// grid, then projected back.  Exact for compositions whose product modes stay
// inside the padded lattice; the projection defect for higher-degree
// compositions is the quantity the diagnostics report as the cross term.
template <typename F>
SpectralField collocate(const SpectralField& f, F&& fn, double pad_factor = 1.5) {
  const Grid fine = padded_grid(f.grid(), pad_factor);
  std::vector<double> v = padded_values(f, fine);
  for (double& x : v) x = fn(x);
  return restrict_spectrum(to_spectral(fine, v), f.grid());
}

// Lattice able to integrate products of `deg` evolved fields exactly: no
// nonzero product mode can wrap onto the fine mean.
inline Grid quadrature_grid(const Grid& g, int deg) {
  int m = deg * (g.n() / 2) + 2;
  if (m % 2 != 0) ++m;
  m = std::max(m, 8);
  return Grid(g.dim(), m);
}

// ---------------------------------------------------------------------------
// Inner products and norms (Parseval; unit-volume torus).
// ---------------------------------------------------------------------------

inline double l2_inner(const SpectralField& a, const SpectralField& b) {
  if (a.grid() != b.grid()) throw std::invalid_argument("l2_inner: grid mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    s += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
  return s;
}

inline double l2_norm_sq(const SpectralField& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::norm(a[i]);
  return s;
}

inline double l2_norm(const SpectralField& a) { return std::sqrt(l2_norm_sq(a)); }

inline double l2_norm_sq(const VelocityField& u) {
  double s = 0.0;
  for (int a = 0; a < u.dim(); ++a) s += l2_norm_sq(u.comp(a));
  return s;
}

inline double l2_norm(const VelocityField& u) { return std::sqrt(l2_norm_sq(u)); }

// |grad f|_{L2}^2 through the shared Laplacian symbol.
inline double h1_seminorm_sq(const SpectralField& f) {
  double s = 0.0;
  for_each_mode(f.grid(), [&](std::size_t i, const std::array<int, 3>& k) {
    s += -laplacian_symbol(f.grid(), k) * std::norm(f[i]);
  });
  return s;
}

inline double h1_seminorm_sq(const VelocityField& u) {
  double s = 0.0;
  for (int a = 0; a < u.dim(); ++a) s += h1_seminorm_sq(u.comp(a));
  return s;
}

inline double laplacian_norm_sq(const SpectralField& f) {
  double s = 0.0;
  for_each_mode(f.grid(), [&](std::size_t i, const std::array<int, 3>& k) {
    const double sym = laplacian_symbol(f.grid(), k);
    s += sym * sym * std::norm(f[i]);
  });
  return s;
}

inline double hermitian_defect(const SpectralField& f) {
  double m = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    std::size_t ci = f.grid().conj_index(i);
    m = std::max(m, std::abs(f[i] - std::conj(f[ci])));
  }
  return m;
}

inline double max_abs_coeff(const SpectralField& f) {
  double m = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) m = std::max(m, std::abs(f[i]));
  return m;
}

}  // namespace nsac
