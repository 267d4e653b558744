#include "admshell/sphere_ops.hpp"

#include <cmath>
#include <stdexcept>

namespace admshell {

double PolynomialS2Function::operator()(const Vec3& x) const {
  double total = 0.0;
  for (const auto& t : terms) {
    double v = t.coef;
    for (int d = 0; d < 3; ++d)
      for (int e = 0; e < t.expo[d]; ++e) v *= x[d];
    total += v;
  }
  return total;
}

bool PolynomialS2Function::all_even_degree() const {
  for (const auto& t : terms)
    if ((t.expo[0] + t.expo[1] + t.expo[2]) % 2 != 0) return false;
  return true;
}

bool PolynomialS2Function::all_odd_degree() const {
  for (const auto& t : terms)
    if ((t.expo[0] + t.expo[1] + t.expo[2]) % 2 != 1) return false;
  return true;
}

ScalarS2 sample(const PolynomialS2Function& f, const GridPtr& grid) {
  ScalarS2 u(grid);
  for (int j = 0; j < grid->n_theta(); ++j)
    for (int m = 0; m < grid->n_phi(); ++m) u.values[grid->idx(j, m)] = f(grid->unit_vector(j, m));
  return u;
}

ScalarS2 sample(const std::function<double(double, double)>& f, const GridPtr& grid) {
  ScalarS2 u(grid);
  for (int j = 0; j < grid->n_theta(); ++j)
    for (int m = 0; m < grid->n_phi(); ++m) u.values[grid->idx(j, m)] = f(grid->theta(j), grid->phi(m));
  return u;
}

OneFormS2 exterior_derivative(const ScalarS2& u) {
  const auto& g = *u.grid;
  OneFormS2 a(u.grid);
  g.d_theta(u.values, a.comp_theta, FramePolarity::scalar);
  g.d_phi(u.values, a.comp_phi);
  for (int j = 0; j < g.n_theta(); ++j) {
    double inv = 1.0 / g.sin_theta(j);
    for (int m = 0; m < g.n_phi(); ++m) a.comp_phi[g.idx(j, m)] *= inv;
  }
  return a;
}

OneFormS2 hodge_star(const OneFormS2& a, int orientation) {
  if (orientation != 1 && orientation != -1) throw std::invalid_argument("hodge_star: orientation +-1");
  OneFormS2 r(a.grid);
  double s = orientation;
  for (std::size_t i = 0; i < a.comp_theta.size(); ++i) {
    r.comp_theta[i] = -s * a.comp_phi[i];
    r.comp_phi[i] = s * a.comp_theta[i];
  }
  return r;
}

OneFormDeriv covariant_derivative(const OneFormS2& a) {
  const auto& g = *a.grid;
  OneFormDeriv d;
  g.d_theta(a.comp_theta, d.tt, FramePolarity::oneform);
  g.d_theta(a.comp_phi, d.pt, FramePolarity::oneform);
  std::vector<double> dpt, dpp;
  g.d_phi(a.comp_theta, dpt);
  g.d_phi(a.comp_phi, dpp);
  d.tp.resize(g.size());
  d.pp.resize(g.size());
  for (int j = 0; j < g.n_theta(); ++j) {
    double inv = 1.0 / g.sin_theta(j), cot = g.cot_theta(j);
    for (int m = 0; m < g.n_phi(); ++m) {
      std::size_t i = g.idx(j, m);
      d.tp[i] = inv * dpt[i] - cot * a.comp_phi[i];
      d.pp[i] = inv * dpp[i] + cot * a.comp_theta[i];
    }
  }
  return d;
}

TTTensorS2 delta_star(const OneFormS2& eta) {
  OneFormDeriv d = covariant_derivative(eta);
  TTTensorS2 t(eta.grid);
  for (std::size_t i = 0; i < t.comp_tt.size(); ++i) {
    t.comp_tt[i] = 0.5 * (d.tt[i] - d.pp[i]);
    t.comp_tp[i] = 0.5 * (d.tp[i] + d.pt[i]);
  }
  return t;
}

OneFormS2 div_tt(const TTTensorS2& T) {
  const auto& g = *T.grid;
  OneFormS2 r(T.grid);
  std::vector<double> dA_th, dB_th, dA_ph, dB_ph;
  g.d_theta(T.comp_tt, dA_th, FramePolarity::scalar);
  g.d_theta(T.comp_tp, dB_th, FramePolarity::scalar);
  g.d_phi(T.comp_tt, dA_ph);
  g.d_phi(T.comp_tp, dB_ph);
  for (int j = 0; j < g.n_theta(); ++j) {
    double inv = 1.0 / g.sin_theta(j), cot = g.cot_theta(j);
    for (int m = 0; m < g.n_phi(); ++m) {
      std::size_t i = g.idx(j, m);
      r.comp_theta[i] = dA_th[i] + inv * dB_ph[i] + 2.0 * cot * T.comp_tt[i];
      r.comp_phi[i] = dB_th[i] - inv * dA_ph[i] + 2.0 * cot * T.comp_tp[i];
    }
  }
  return r;
}

ScalarS2 div_oneform(const OneFormS2& a) {
  const auto& g = *a.grid;
  ScalarS2 r(a.grid);
  std::vector<double> dth, dph;
  g.d_theta(a.comp_theta, dth, FramePolarity::oneform);
  g.d_phi(a.comp_phi, dph);
  for (int j = 0; j < g.n_theta(); ++j) {
    double inv = 1.0 / g.sin_theta(j), cot = g.cot_theta(j);
    for (int m = 0; m < g.n_phi(); ++m) {
      std::size_t i = g.idx(j, m);
      r.values[i] = dth[i] + inv * dph[i] + cot * a.comp_theta[i];
    }
  }
  return r;
}

ScalarS2 laplacian(const ScalarS2& u) { return div_oneform(exterior_derivative(u)); }

RotationFieldSample rotation_field_at(const Vec3& axis, double st, double ct, double sp, double cp) {
  Vec3 n{st * cp, st * sp, ct};
  Vec3 eth{ct * cp, ct * sp, -st};
  Vec3 eph{-sp, cp, 0.0};
  RotationFieldSample r;
  r.y_theta = dot(axis, eph);
  r.y_phi = -dot(axis, eth);
  r.kappa = dot(axis, n);
  return r;
}

TTTensorS2 lie_rotation_tt(const TTTensorS2& T, const Vec3& axis) {
  if (std::fabs(norm(axis) - 1.0) > 1e-10) throw std::invalid_argument("lie_rotation_tt: axis must be unit");
  const auto& g = *T.grid;
  std::vector<double> dA_th, dB_th, dA_ph, dB_ph;
  g.d_theta(T.comp_tt, dA_th, FramePolarity::scalar);
  g.d_theta(T.comp_tp, dB_th, FramePolarity::scalar);
  g.d_phi(T.comp_tt, dA_ph);
  g.d_phi(T.comp_tp, dB_ph);
  TTTensorS2 out(T.grid);
  for (int j = 0; j < g.n_theta(); ++j) {
    double inv = 1.0 / g.sin_theta(j), cot = g.cot_theta(j);
    for (int m = 0; m < g.n_phi(); ++m) {
      std::size_t i = g.idx(j, m);
      auto Y = rotation_field_at(axis, g.sin_theta(j), g.cos_theta(j), g.sin_phi(m), g.cos_phi(m));
      double A = T.comp_tt[i], B = T.comp_tp[i];
      // covariant derivatives of the tensor components
      double A_1 = dA_th[i];
      double A_2 = inv * dA_ph[i] - 2.0 * cot * B;
      double B_1 = dB_th[i];
      double B_2 = inv * dB_ph[i] + 2.0 * cot * A;
      out.comp_tt[i] = A_1 * Y.y_theta + A_2 * Y.y_phi + 2.0 * Y.kappa * B;
      out.comp_tp[i] = B_1 * Y.y_theta + B_2 * Y.y_phi - 2.0 * Y.kappa * A;
    }
  }
  return out;
}

double sphere_integral(const ScalarS2& u) { return u.grid->integrate(u.values); }

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::fabs(x));
  return m;
}

}  // namespace admshell
