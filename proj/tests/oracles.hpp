// Test-only oracles, independent of the implementation paths they check.
#ifndef ADMSHELL_TESTS_ORACLES_HPP
#define ADMSHELL_TESTS_ORACLES_HPP

#include <cmath>
#include <functional>
#include <random>

#include "admshell/numerics.hpp"

namespace admshell::oracles {

// 4th-order centered finite difference of a scalar callable.
inline double fd_derivative(const std::function<double(double)>& f, double x, double h) {
  return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12.0 * h);
}

// 4th-order centered partial derivative of f: R^3 -> R along axis c.
inline double fd_partial(const std::function<double(const Vec3&)>& f, Vec3 x, int c, double h) {
  auto shift = [&](double d) {
    Vec3 y = x;
    y[c] += d;
    return f(y);
  };
  return (-shift(2 * h) + 8 * shift(h) - 8 * shift(-h) + shift(-2 * h)) / (12.0 * h);
}

// adaptive Simpson quadrature for radial oracle integrals
inline double simpson_adaptive(const std::function<double(double)>& f, double a, double b,
                               double tol = 1e-12, int depth = 24) {
  std::function<double(double, double, double, double, double, double, int)> rec =
      [&](double lo, double hi, double flo, double fmid, double fhi, double whole, int d) -> double {
    double m = 0.5 * (lo + hi);
    double lm = 0.5 * (lo + m), rm = 0.5 * (m + hi);
    double flm = f(lm), frm = f(rm);
    double left = (m - lo) / 6.0 * (flo + 4 * flm + fmid);
    double right = (hi - m) / 6.0 * (fmid + 4 * frm + fhi);
    if (d <= 0 || std::fabs(left + right - whole) < 15 * tol) return left + right;
    return rec(lo, m, flo, flm, fmid, left, d - 1) + rec(m, hi, fmid, frm, fhi, right, d - 1);
  };
  double m = 0.5 * (a + b);
  double fa = f(a), fm = f(m), fb = f(b);
  double whole = (b - a) / 6.0 * (fa + 4 * fm + fb);
  return rec(a, b, fa, fm, fb, whole, depth);
}

// brute-force 3-D product midpoint quadrature over a shell, for moment oracles
inline double shell_quadrature_midpoint(const std::function<double(const Vec3&)>& f, double r_lo,
                                        double r_hi, int n_r, int n_theta, int n_phi) {
  double hr = (r_hi - r_lo) / n_r;
  double ht = M_PI / n_theta;
  double hp = 2.0 * M_PI / n_phi;
  std::vector<double> slabs(n_r, 0.0);
  for (int a = 0; a < n_r; ++a) {
    double r = r_lo + (a + 0.5) * hr;
    double acc = 0.0;
    for (int j = 0; j < n_theta; ++j) {
      double th = (j + 0.5) * ht;
      double st = std::sin(th), ct = std::cos(th);
      for (int m = 0; m < n_phi; ++m) {
        double ph = (m + 0.5) * hp;
        Vec3 x{r * st * std::cos(ph), r * st * std::sin(ph), r * ct};
        acc += f(x) * st;
      }
    }
    slabs[a] = acc * r * r * hr * ht * hp;
  }
  return pairwise_sum(slabs);
}

inline std::mt19937 rng(unsigned seed) { return std::mt19937(seed); }

inline Vec3 random_unit(std::mt19937& g) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  while (true) {
    Vec3 v{u(g), u(g), u(g)};
    double n = norm(v);
    if (n > 0.1 && n < 1.0) return (1.0 / n) * v;
  }
}

inline Vec3 random_point_in_shell(std::mt19937& g, double r_lo, double r_hi) {
  std::uniform_real_distribution<double> ur(r_lo, r_hi);
  return ur(g) * random_unit(g);
}

inline Mat3 random_rotation(std::mt19937& g) {
  std::uniform_real_distribution<double> u(0.0, 2.0 * M_PI);
  return rotation_about_axis(random_unit(g), u(g));
}

}  // namespace admshell::oracles

#endif
