#ifndef ADMSHELL_NUMERICS_HPP
#define ADMSHELL_NUMERICS_HPP

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace admshell {

using Vec3 = std::array<double, 3>;

inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Vec3 operator*(double s, const Vec3& a) { return {s * a[0], s * a[1], s * a[2]}; }
inline Vec3 operator-(const Vec3& a) { return {-a[0], -a[1], -a[2]}; }
inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
inline Vec3 normalized(const Vec3& a) {
  double n = norm(a);
  if (n == 0.0) throw std::invalid_argument("normalized: zero vector");
  return (1.0 / n) * a;
}

// Dense 3x3 matrix, row-major.
struct Mat3 {
  std::array<double, 9> a{};

  double& operator()(int i, int j) { return a[3 * i + j]; }
  double operator()(int i, int j) const { return a[3 * i + j]; }

  static Mat3 zero() { return Mat3{}; }
  static Mat3 identity() {
    Mat3 m;
    m(0, 0) = m(1, 1) = m(2, 2) = 1.0;
    return m;
  }
};

inline Mat3 operator+(const Mat3& x, const Mat3& y) {
  Mat3 r;
  for (int i = 0; i < 9; ++i) r.a[i] = x.a[i] + y.a[i];
  return r;
}
inline Mat3 operator-(const Mat3& x, const Mat3& y) {
  Mat3 r;
  for (int i = 0; i < 9; ++i) r.a[i] = x.a[i] - y.a[i];
  return r;
}
inline Mat3 operator*(double s, const Mat3& x) {
  Mat3 r;
  for (int i = 0; i < 9; ++i) r.a[i] = s * x.a[i];
  return r;
}
inline Mat3 matmul(const Mat3& x, const Mat3& y) {
  Mat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += x(i, k) * y(k, j);
      r(i, j) = s;
    }
  return r;
}
inline Vec3 matvec(const Mat3& m, const Vec3& v) {
  Vec3 r{};
  for (int i = 0; i < 3; ++i) r[i] = m(i, 0) * v[0] + m(i, 1) * v[1] + m(i, 2) * v[2];
  return r;
}
inline Mat3 transpose(const Mat3& m) {
  Mat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r(i, j) = m(j, i);
  return r;
}
inline double trace(const Mat3& m) { return m(0, 0) + m(1, 1) + m(2, 2); }
inline double frobenius(const Mat3& m) {
  double s = 0.0;
  for (double v : m.a) s += v * v;
  return std::sqrt(s);
}
inline Mat3 outer(const Vec3& u, const Vec3& v) {
  Mat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r(i, j) = u[i] * v[j];
  return r;
}
inline double det(const Mat3& m) {
  return m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) -
         m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
         m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
}
Mat3 inverse(const Mat3& m);

// Rodrigues rotation by `angle` about unit `axis`.
Mat3 rotation_about_axis(const Vec3& axis, double angle);

// Proper rotation taking unit vector `from` to unit vector `to`. For the
// antipodal case rotates by pi about the least-index coordinate axis not
// parallel to `from`.
Mat3 rotation_between(const Vec3& from, const Vec3& to);

bool is_rotation(const Mat3& m, double tol = 1e-12);

// Deterministic pairwise summation (order independent of thread count).
double pairwise_sum(std::span<const double> xs);

// Gauss-Legendre nodes/weights on [-1,1], Newton on Legendre polynomials.
struct GaussRule {
  std::vector<double> x, w;
};
GaussRule gauss_legendre(int n);
GaussRule gauss_legendre_on(int n, double a, double b);

// One Richardson elimination ladder: samples (t_i, v_i) with t geometric,
// assumed error expansion c1*t^-e + c2*t^-(e+1) + ...
struct RichardsonResult {
  double value = 0.0;
  double error = 0.0;  // change in the last elimination step
};
RichardsonResult richardson_extrapolate(const std::vector<double>& t, const std::vector<double>& v,
                                        double base_exponent = 1.0);

// Least-squares slope of log(y) vs log(x).
double log_log_slope(const std::vector<double>& x, const std::vector<double>& y);

// Deterministic parallel loop: fn(i) for i in [0,n), results via slot writes.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);
int default_thread_count();

// Centered finite-difference stencil weights on uniform grids.
// order in {4,6,8}; deriv in {1,2}; returned span is weights for offsets
// -order/2..order/2 divided by h^deriv by the caller.
std::vector<double> fd_stencil(int order, int deriv);

// Fornberg weights for the m-th derivative at x0 from arbitrary nodes.
std::vector<double> fornberg_weights(double x0, const std::vector<double>& nodes, int m);
// Centered uniform stencil of the given order (offsets -order/2..order/2).
std::vector<double> centered_stencil(int order, int deriv);

}  // namespace admshell

#endif
