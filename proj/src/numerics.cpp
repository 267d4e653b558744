#include "admshell/numerics.hpp"

#include <algorithm>
#include <cstdlib>
#include <numbers>
#include <thread>

namespace admshell {

Mat3 inverse(const Mat3& m) {
  double d = det(m);
  if (d == 0.0) throw std::runtime_error("inverse: singular matrix");
  Mat3 r;
  r(0, 0) = (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) / d;
  r(0, 1) = (m(0, 2) * m(2, 1) - m(0, 1) * m(2, 2)) / d;
  r(0, 2) = (m(0, 1) * m(1, 2) - m(0, 2) * m(1, 1)) / d;
  r(1, 0) = (m(1, 2) * m(2, 0) - m(1, 0) * m(2, 2)) / d;
  r(1, 1) = (m(0, 0) * m(2, 2) - m(0, 2) * m(2, 0)) / d;
  r(1, 2) = (m(0, 2) * m(1, 0) - m(0, 0) * m(1, 2)) / d;
  r(2, 0) = (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0)) / d;
  r(2, 1) = (m(0, 1) * m(2, 0) - m(0, 0) * m(2, 1)) / d;
  r(2, 2) = (m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0)) / d;
  return r;
}

Mat3 rotation_about_axis(const Vec3& axis, double angle) {
  Vec3 u = normalized(axis);
  double c = std::cos(angle), s = std::sin(angle);
  Mat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r(i, j) = c * (i == j) + (1.0 - c) * u[i] * u[j];
  r(0, 1) -= s * u[2];
  r(0, 2) += s * u[1];
  r(1, 0) += s * u[2];
  r(1, 2) -= s * u[0];
  r(2, 0) -= s * u[1];
  r(2, 1) += s * u[0];
  return r;
}

Mat3 rotation_between(const Vec3& from_in, const Vec3& to_in) {
  Vec3 f = normalized(from_in), t = normalized(to_in);
  double c = std::clamp(dot(f, t), -1.0, 1.0);
  Vec3 ax = cross(f, t);
  double s = norm(ax);
  if (s < 1e-14) {
    if (c > 0.0) return Mat3::identity();
    // antipodal: pi turn about the least-index axis not parallel to f
    for (int i = 0; i < 3; ++i) {
      Vec3 e{};
      e[i] = 1.0;
      Vec3 a = cross(f, e);
      if (norm(a) > 1e-8) return rotation_about_axis(a, std::numbers::pi);
    }
    throw std::logic_error("rotation_between: unreachable");
  }
  return rotation_about_axis(ax, std::atan2(s, c));
}

bool is_rotation(const Mat3& m, double tol) {
  Mat3 g = matmul(transpose(m), m);
  Mat3 d = g - Mat3::identity();
  double err = 0.0;
  for (double v : d.a) err = std::max(err, std::fabs(v));
  return err <= tol && std::fabs(det(m) - 1.0) <= tol;
}

double pairwise_sum(std::span<const double> xs) {
  std::size_t n = xs.size();
  if (n == 0) return 0.0;
  if (n <= 8) {
    double s = 0.0;
    for (double v : xs) s += v;
    return s;
  }
  std::size_t h = n / 2;
  return pairwise_sum(xs.first(h)) + pairwise_sum(xs.subspan(h));
}

GaussRule gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n >= 1 required");
  GaussRule r;
  r.x.resize(n);
  r.w.resize(n);
  const double pi = std::numbers::pi;
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(pi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      pp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / pp;
      x -= dx;
      if (std::fabs(dx) < 1e-15) break;
    }
    r.x[i] = -x;
    r.x[n - 1 - i] = x;
    double w = 2.0 / ((1.0 - x * x) * pp * pp);
    r.w[i] = w;
    r.w[n - 1 - i] = w;
  }
  return r;
}

GaussRule gauss_legendre_on(int n, double a, double b) {
  GaussRule base = gauss_legendre(n);
  double c = 0.5 * (a + b), s = 0.5 * (b - a);
  for (int i = 0; i < n; ++i) {
    base.x[i] = c + s * base.x[i];
    base.w[i] *= s;
  }
  return base;
}

RichardsonResult richardson_extrapolate(const std::vector<double>& t, const std::vector<double>& v,
                                        double base_exponent) {
  if (t.size() != v.size() || t.size() < 1) throw std::invalid_argument("richardson: bad samples");
  std::vector<double> cur = v;
  std::vector<double> tt = t;
  double prev = cur.back();
  int level = 0;
  while (cur.size() > 1) {
    double e = base_exponent + level;
    std::vector<double> next(cur.size() - 1);
    for (std::size_t i = 0; i + 1 < cur.size(); ++i) {
      double q = std::pow(tt[i + 1] / tt[i], e);
      next[i] = (q * cur[i + 1] - cur[i]) / (q - 1.0);
    }
    cur.swap(next);
    tt.erase(tt.begin());
    ++level;
    prev = cur.back();
  }
  RichardsonResult res;
  res.value = cur[0];
  // error: change relative to one fewer elimination level
  if (v.size() >= 2) {
    std::vector<double> t2(t.begin(), t.end() - 1), v2(v.begin(), v.end() - 1);
    RichardsonResult coarse;
    if (v2.size() == 1) {
      coarse.value = v2[0];
    } else {
      coarse = richardson_extrapolate(t2, v2, base_exponent);
    }
    res.error = std::fabs(res.value - coarse.value);
  } else {
    res.error = 0.0;
  }
  (void)prev;
  return res;
}

double log_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("log_log_slope: bad data");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t n = x.size();
  for (std::size_t i = 0; i < n; ++i) {
    double lx = std::log(x[i]), ly = std::log(std::max(y[i], 1e-300));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

int default_thread_count() {
  if (const char* env = std::getenv("ADMSHELL_THREADS")) {
    int v = std::atoi(env);
    if (v >= 1) return v;
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  int nt = default_thread_count();
  if (nt <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::size_t threads = std::min<std::size_t>(nt, n);
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&, t]() {
      for (std::size_t i = t; i < n; i += threads) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

std::vector<double> fornberg_weights(double x0, const std::vector<double>& nodes, int m) {
  // B. Fornberg, Math. Comp. 51 (1988): weights of the m-th derivative at x0.
  int n = static_cast<int>(nodes.size()) - 1;
  if (n < m) throw std::invalid_argument("fornberg_weights: too few nodes");
  std::vector<std::vector<double>> c(n + 1, std::vector<double>(m + 1, 0.0));
  double c1 = 1.0;
  double c4 = nodes[0] - x0;
  c[0][0] = 1.0;
  for (int i = 1; i <= n; ++i) {
    int mn = std::min(i, m);
    double c2 = 1.0;
    double c5 = c4;
    c4 = nodes[i] - x0;
    for (int j = 0; j < i; ++j) {
      double c3 = nodes[i] - nodes[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(n + 1);
  for (int i = 0; i <= n; ++i) w[i] = c[i][m];
  return w;
}

std::vector<double> centered_stencil(int order, int deriv) {
  int half = order / 2;
  std::vector<double> nodes(2 * half + 1);
  for (int i = 0; i <= 2 * half; ++i) nodes[i] = i - half;
  return fornberg_weights(0.0, nodes, deriv);
}

std::vector<double> fd_stencil(int order, int deriv) {
  if (deriv == 1) {
    if (order == 4) return {1.0 / 12, -2.0 / 3, 0.0, 2.0 / 3, -1.0 / 12};
    if (order == 6) return {-1.0 / 60, 3.0 / 20, -3.0 / 4, 0.0, 3.0 / 4, -3.0 / 20, 1.0 / 60};
    if (order == 8)
      return {1.0 / 280, -4.0 / 105, 1.0 / 5, -4.0 / 5, 0.0, 4.0 / 5, -1.0 / 5, 4.0 / 105, -1.0 / 280};
  } else if (deriv == 2) {
    if (order == 4) return {-1.0 / 12, 4.0 / 3, -5.0 / 2, 4.0 / 3, -1.0 / 12};
    if (order == 6) return {1.0 / 90, -3.0 / 20, 3.0 / 2, -49.0 / 18, 3.0 / 2, -3.0 / 20, 1.0 / 90};
    if (order == 8)
      return {-1.0 / 560, 8.0 / 315, -1.0 / 5, 8.0 / 5, -205.0 / 72, 8.0 / 5, -1.0 / 5, 8.0 / 315, -1.0 / 560};
  }
  throw std::invalid_argument("fd_stencil: unsupported order/deriv");
}

}  // namespace admshell
