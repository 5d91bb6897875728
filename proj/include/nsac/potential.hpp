#pragma once
// Configurational potentials F with f = F'.  Admissible potentials are
// even-degree polynomials, degree >= 4, positive leading coefficient, so f'
// grows like |s|^p with p = degree - 2 and is bounded below.
//
// Each potential caches the constants the estimates are built from:
//   lambda0   max(0, -min f')          f'(s) >= -lambda0 everywhere
//   lambda2   max(0, -min F)           F(s)  >= -lambda2 everywhere
//   g_offset  max(0, -min(2F(s)-s^2))  |phi|_V^2 <= |grad phi|^2 + 2 int F + g_offset
//   kpp       reported tail coercivity: F(s) >= kpp |s|^{p+2} - const (lead/2)

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace nsac {

enum class PotentialKind { double_well, polynomial };

namespace detail {

inline double poly_eval(const std::vector<double>& c, double s) {
  double v = 0.0;
  for (std::size_t i = c.size(); i-- > 0;) v = v * s + c[i];
  return v;
}

inline std::vector<double> poly_derivative(const std::vector<double>& c) {
  if (c.size() <= 1) return {0.0};
  std::vector<double> d(c.size() - 1);
  for (std::size_t i = 1; i < c.size(); ++i) d[i - 1] = static_cast<double>(i) * c[i];
  return d;
}

// Global minimum of an even-degree polynomial with positive leading
// coefficient: all critical points lie inside the Cauchy root bound of the
// derivative; dense scan there, then ternary refinement of the best bracket.
inline double poly_min_value(const std::vector<double>& c) {
  std::vector<double> d = poly_derivative(c);
  while (d.size() > 1 && d.back() == 0.0) d.pop_back();
  double lead = std::abs(d.back());
  double bound = 1.0;
  if (lead > 0.0)
    for (std::size_t i = 0; i + 1 < d.size(); ++i) bound = std::max(bound, 1.0 + std::abs(d[i]) / lead);
  const int samples = 8192;
  double best_s = 0.0, best_v = poly_eval(c, 0.0);
  for (int i = 0; i <= samples; ++i) {
    double s = -bound + 2.0 * bound * i / samples;
    double v = poly_eval(c, s);
    if (v < best_v) { best_v = v; best_s = s; }
  }
  double lo = best_s - 2.0 * bound / samples, hi = best_s + 2.0 * bound / samples;
  for (int it = 0; it < 200; ++it) {
    double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
    if (poly_eval(c, m1) < poly_eval(c, m2)) hi = m2;
    else lo = m1;
  }
  return std::min(best_v, poly_eval(c, 0.5 * (lo + hi)));
}

}  // namespace detail

class Potential {
public:
  // F(s) = (s^2 - 1)^2 = s^4 - 2 s^2 + 1
  static Potential double_well() {
    return Potential(PotentialKind::double_well, {1.0, 0.0, -2.0, 0.0, 1.0});
  }

  // coeffs are c0 + c1 s + c2 s^2 + ...  (coefficients of F)
  static Potential polynomial(std::vector<double> coeffs) {
    while (coeffs.size() > 1 && coeffs.back() == 0.0) coeffs.pop_back();
    return Potential(PotentialKind::polynomial, std::move(coeffs));
  }

  double F(double s) const { return detail::poly_eval(F_, s); }
  double f(double s) const { return detail::poly_eval(f_, s); }
  double fprime(double s) const { return detail::poly_eval(fp_, s); }

  PotentialKind kind() const { return kind_; }
  const std::vector<double>& coeffs() const { return F_; }
  int degree() const { return static_cast<int>(F_.size()) - 1; }
  int p_growth() const { return degree() - 2; }
  double lambda0() const { return lambda0_; }
  double lambda2() const { return lambda2_; }
  double g_offset() const { return g_offset_; }
  double kpp() const { return 0.5 * F_.back(); }

  bool operator==(const Potential& o) const { return kind_ == o.kind_ && F_ == o.F_; }

private:
  Potential(PotentialKind kind, std::vector<double> coeffs) : kind_(kind), F_(std::move(coeffs)) {
    const int deg = static_cast<int>(F_.size()) - 1;
    if (deg < 4) throw std::invalid_argument("potential: degree must be >= 4, got " + std::to_string(deg));
    if (deg % 2 != 0) throw std::invalid_argument("potential: degree must be even, got " + std::to_string(deg));
    if (F_.back() <= 0.0) throw std::invalid_argument("potential: leading coefficient must be positive");
    f_ = detail::poly_derivative(F_);
    fp_ = detail::poly_derivative(f_);
    lambda0_ = std::max(0.0, -detail::poly_min_value(fp_));
    lambda2_ = std::max(0.0, -detail::poly_min_value(F_));
    std::vector<double> two_F_minus_s2 = F_;
    for (double& c : two_F_minus_s2) c *= 2.0;
    two_F_minus_s2[2] -= 1.0;
    g_offset_ = std::max(0.0, -detail::poly_min_value(two_F_minus_s2));
  }

  PotentialKind kind_;
  std::vector<double> F_;   // coefficients of F
  std::vector<double> f_;   // F'
  std::vector<double> fp_;  // F''
  double lambda0_ = 0.0;
  double lambda2_ = 0.0;
  double g_offset_ = 0.0;
};

// ---------------------------------------------------------------------------
// Bounded C^1 tail f_n: equals f on [-n, n], saturates smoothly beyond.
//   r > n:  f_n(r) = f(n)  + n f'(n)  tanh((r - n)/n)
//   r < -n: f_n(r) = f(-n) + n f'(-n) tanh((r + n)/n)
// Matching value and slope at the seams, |f_n| <= |f(n)| + n |f'(n)|, and
// f_n -> f uniformly on compacts as n grows.  Inside [-n, n] the evaluation
// is the untouched f, bitwise.
// ---------------------------------------------------------------------------

namespace detail {
// log(cosh(x)) without overflow for large |x|.
inline double log_cosh(double x) {
  double a = std::abs(x);
  return a + std::log1p(std::exp(-2.0 * a)) - 0.6931471805599453094172321214582;
}
}  // namespace detail

inline double truncated_f(const Potential& pot, int level, double r) {
  const double n = static_cast<double>(level);
  if (r > n) return pot.f(n) + n * pot.fprime(n) * std::tanh((r - n) / n);
  if (r < -n) return pot.f(-n) + n * pot.fprime(-n) * std::tanh((r + n) / n);
  return pot.f(r);
}

inline double truncated_fprime(const Potential& pot, int level, double r) {
  const double n = static_cast<double>(level);
  if (r > n) {
    double c = std::cosh((r - n) / n);
    return pot.fprime(n) / (c * c);
  }
  if (r < -n) {
    double c = std::cosh((r + n) / n);
    return pot.fprime(-n) / (c * c);
  }
  return pot.fprime(r);
}

// Antiderivative matching truncated_f with F_n(0) = F(0).
inline double truncated_F(const Potential& pot, int level, double r) {
  const double n = static_cast<double>(level);
  if (r > n) return pot.F(n) + pot.f(n) * (r - n) + n * n * pot.fprime(n) * detail::log_cosh((r - n) / n);
  if (r < -n) return pot.F(-n) + pot.f(-n) * (r + n) + n * n * pot.fprime(-n) * detail::log_cosh((r + n) / n);
  return pot.F(r);
}

}  // namespace nsac
