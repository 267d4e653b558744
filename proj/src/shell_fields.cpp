#include "admshell/shell_fields.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "json.hpp"

namespace admshell {

namespace {

constexpr int SIDX[3][3] = {{0, 1, 2}, {1, 3, 4}, {2, 4, 5}};

// Spectral-theta variants of the intrinsic operators, used for payload
// construction and tabulation; the public FD operators keep a measurable
// discretization order, the internal chain needs the tighter floor.
OneFormS2 d_spectral(const ScalarS2& u) {
  const auto& g = *u.grid;
  OneFormS2 a(u.grid);
  g.d_theta_spectral(u.values, a.comp_theta, FramePolarity::scalar);
  g.d_phi(u.values, a.comp_phi);
  for (int j = 0; j < g.n_theta(); ++j) {
    double inv = 1.0 / g.sin_theta(j);
    for (int m = 0; m < g.n_phi(); ++m) a.comp_phi[g.idx(j, m)] *= inv;
  }
  return a;
}

TTTensorS2 delta_star_spectral(const OneFormS2& a) {
  const auto& g = *a.grid;
  std::vector<double> d_tt, d_pt, dp_t, dp_p;
  g.d_theta_spectral(a.comp_theta, d_tt, FramePolarity::oneform);
  g.d_theta_spectral(a.comp_phi, d_pt, FramePolarity::oneform);
  g.d_phi(a.comp_theta, dp_t);
  g.d_phi(a.comp_phi, dp_p);
  TTTensorS2 t(a.grid);
  for (int j = 0; j < g.n_theta(); ++j) {
    double inv = 1.0 / g.sin_theta(j), cot = g.cot_theta(j);
    for (int m = 0; m < g.n_phi(); ++m) {
      std::size_t i = g.idx(j, m);
      double a_tp = inv * dp_t[i] - cot * a.comp_phi[i];
      double a_pp = inv * dp_p[i] + cot * a.comp_theta[i];
      t.comp_tt[i] = 0.5 * (d_tt[i] - a_pp);
      t.comp_tp[i] = 0.5 * (a_tp + d_pt[i]);
    }
  }
  return t;
}

OneFormS2 div_tt_spectral(const TTTensorS2& T) {
  const auto& g = *T.grid;
  OneFormS2 r(T.grid);
  std::vector<double> dA, dB, dAp, dBp;
  g.d_theta_spectral(T.comp_tt, dA, FramePolarity::scalar);
  g.d_theta_spectral(T.comp_tp, dB, FramePolarity::scalar);
  g.d_phi(T.comp_tt, dAp);
  g.d_phi(T.comp_tp, dBp);
  for (int j = 0; j < g.n_theta(); ++j) {
    double inv = 1.0 / g.sin_theta(j), cot = g.cot_theta(j);
    for (int m = 0; m < g.n_phi(); ++m) {
      std::size_t i = g.idx(j, m);
      r.comp_theta[i] = dA[i] + inv * dBp[i] + 2.0 * cot * T.comp_tt[i];
      r.comp_phi[i] = dB[i] - inv * dAp[i] + 2.0 * cot * T.comp_tp[i];
    }
  }
  return r;
}

ScalarS2 div_oneform_spectral(const OneFormS2& a) {
  const auto& g = *a.grid;
  ScalarS2 r(a.grid);
  std::vector<double> dth, dph;
  g.d_theta_spectral(a.comp_theta, dth, FramePolarity::oneform);
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

// Project the payload onto the antipodally even class of the moment theorems
// (Cartesian components even: A(anti) = A, B(anti) = -B, w1(anti) = -w1,
// w2(anti) = w2, where anti = (n-1-j, m + n_phi/2)). The exact payload of an
// odd seed lies in this class; the projection removes amplified pole-row
// roundoff so the built field is even to machine precision.
void symmetrize_even_pair(TTTensorS2& t, OneFormS2& a) {
  const auto& g = *t.grid;
  int n = g.n_theta(), np = g.n_phi();
  auto proj = [&](std::vector<double>& f, double sign) {
    for (int j = 0; j < n; ++j)
      for (int m = 0; m < np; ++m) {
        std::size_t i1 = g.idx(j, m);
        std::size_t i2 = g.idx(n - 1 - j, (m + np / 2) % np);
        if (i2 < i1) continue;
        double u = 0.5 * (f[i1] + sign * f[i2]);
        f[i1] = u;
        f[i2] = sign * u;
      }
  };
  proj(t.comp_tt, +1.0);
  proj(t.comp_tp, -1.0);
  proj(a.comp_theta, -1.0);
  proj(a.comp_phi, +1.0);
}

double payload_parity_defect(const TTTensorS2& t, const OneFormS2& a) {
  const auto& g = *t.grid;
  int n = g.n_theta(), np = g.n_phi();
  double worst = 0.0;
  for (int j = 0; j < n; ++j)
    for (int m = 0; m < np; ++m) {
      std::size_t i1 = g.idx(j, m);
      std::size_t i2 = g.idx(n - 1 - j, (m + np / 2) % np);
      worst = std::max(worst, std::fabs(t.comp_tt[i1] - t.comp_tt[i2]));
      worst = std::max(worst, std::fabs(t.comp_tp[i1] + t.comp_tp[i2]));
      worst = std::max(worst, std::fabs(a.comp_theta[i1] + a.comp_theta[i2]));
      worst = std::max(worst, std::fabs(a.comp_phi[i1] - a.comp_phi[i2]));
    }
  return worst;
}

// Normalize the payload to unit sup norm; a payload below `floor` is grid
// noise from a degenerate seed (constant or conformal-Killing kernel) and is
// zeroed instead of amplified.
void normalize_pair(TTTensorS2& t, OneFormS2& a, double floor_scale) {
  // RMS normalization through the quadrature: stable under grid refinement,
  // unlike the sup of the sampled payload
  std::vector<double> sq(t.comp_tt.size());
  for (std::size_t i = 0; i < sq.size(); ++i)
    sq[i] = t.comp_tt[i] * t.comp_tt[i] + t.comp_tp[i] * t.comp_tp[i];
  double s = std::sqrt(t.grid->integrate(sq) / (4.0 * std::numbers::pi));
  if (s <= 1e-9 * std::max(floor_scale, 1e-30)) {
    std::fill(t.comp_tt.begin(), t.comp_tt.end(), 0.0);
    std::fill(t.comp_tp.begin(), t.comp_tp.end(), 0.0);
    std::fill(a.comp_theta.begin(), a.comp_theta.end(), 0.0);
    std::fill(a.comp_phi.begin(), a.comp_phi.end(), 0.0);
    return;
  }
  double inv = 1.0 / s;
  for (auto& v : t.comp_tt) v *= inv;
  for (auto& v : t.comp_tp) v *= inv;
  for (auto& v : a.comp_theta) v *= inv;
  for (auto& v : a.comp_phi) v *= inv;
}

}  // namespace

ShellTensorField::ShellTensorField(ShellKind kind, Ansatz ansatz, RadialProfile prof, GridPtr grid,
                                   TTTensorS2 payload_tt, OneFormS2 payload_oneform)
    : kind_(kind),
      ansatz_(ansatz),
      prof_(prof),
      grid_(std::move(grid)),
      payload_tt_(std::move(payload_tt)),
      payload_oneform_(std::move(payload_oneform)) {
  tabulate();
}

void ShellTensorField::tabulate() {
  const auto& g = *grid_;
  auto wt = std::make_shared<std::array<AngularTable, 3>>();
  auto tt = std::make_shared<std::array<AngularTable, 6>>();
  std::size_t n = g.size();
  for (auto& t : *wt) t.v.assign(n, 0.0);
  for (auto& t : *tt) t.v.assign(n, 0.0);
  for (int j = 0; j < g.n_theta(); ++j) {
    for (int m = 0; m < g.n_phi(); ++m) {
      std::size_t i = g.idx(j, m);
      Vec3 eth = g.e_theta(j, m), eph = g.e_phi(m);
      double w1 = payload_oneform_.comp_theta[i], w2 = payload_oneform_.comp_phi[i];
      double A = payload_tt_.comp_tt[i], B = payload_tt_.comp_tp[i];
      for (int c = 0; c < 3; ++c) (*wt)[c].v[i] = w1 * eth[c] + w2 * eph[c];
      for (int c = 0; c < 3; ++c)
        for (int d = c; d < 3; ++d)
          (*tt)[SIDX[c][d]].v[i] = A * (eth[c] * eth[d] - eph[c] * eph[d]) +
                                   B * (eth[c] * eph[d] + eph[c] * eth[d]);
    }
  }
  auto fill = [&](AngularTable& t) {
    g.d_theta_spectral(t.v, t.dt, FramePolarity::scalar);
    g.d_phi(t.v, t.dp);
    g.d2_theta_spectral(t.v, t.dtt, FramePolarity::scalar);
    g.d_theta_spectral(t.dp, t.dtp, FramePolarity::scalar);
    g.d2_phi(t.v, t.dpp);
  };
  for (auto& t : *wt) fill(t);
  for (auto& t : *tt) fill(t);
  wtab_ = wt;
  ttab_ = tt;
}

std::array<double, 3> ShellTensorField::radial_f1(double r) const {
  auto j = prof_.jet(r);
  double f = j[0], f1 = j[1], f2 = j[2];
  double ir = 1.0 / r;
  return {f * ir, f1 * ir - f * ir * ir, f2 * ir - 2.0 * f1 * ir * ir + 2.0 * f * ir * ir * ir};
}

std::array<double, 3> ShellTensorField::radial_f2(double r) const {
  auto j = prof_.jet(r);
  double f = j[0], f1 = j[1], f2 = j[2], f3 = j[3];
  double ir = 1.0 / r;
  if (ansatz_ == Ansatz::tau_type) {
    // W = (r^2 f)'; W/r^2 = 2 f / r + f'
    double v = 2.0 * f * ir + f1;
    double d1 = 2.0 * f1 * ir - 2.0 * f * ir * ir + f2;
    double d2 = 2.0 * f2 * ir - 4.0 * f1 * ir * ir + 4.0 * f * ir * ir * ir + f3;
    return {v, d1, d2};
  }
  // W = 2 r (r f)'; W/r^2 = 2 f / r + 2 f'
  double v = 2.0 * f * ir + 2.0 * f1;
  double d1 = 2.0 * f1 * ir - 2.0 * f * ir * ir + 2.0 * f2;
  double d2 = 2.0 * f2 * ir - 4.0 * f1 * ir * ir + 4.0 * f * ir * ir * ir + 2.0 * f3;
  return {v, d1, d2};
}

namespace {
struct AngularPointData {
  double v;
  Vec3 grad;
  Mat3 hess;
};
}  // namespace

ShellEval ShellTensorField::eval_unit(const Vec3& y, int derivs) const {
  ShellEval out{};
  double r = norm(y);
  if (r <= prof_.a() || r >= prof_.b()) return out;

  const auto& g = *grid_;
  double rho = std::sqrt(y[0] * y[0] + y[1] * y[1]);
  double theta = std::atan2(rho, y[2]);
  double phi = std::atan2(y[1], y[0]);
  if (phi < 0.0) phi += 2.0 * std::numbers::pi;
  double st = rho / r, ct = y[2] / r;
  double cp = (rho > 0.0) ? y[0] / rho : 1.0;
  double sp = (rho > 0.0) ? y[1] / rho : 0.0;

  auto stencil = g.interp_stencil(theta, phi);
  Vec3 n{st * cp, st * sp, ct};
  Vec3 eth{ct * cp, ct * sp, -st};
  Vec3 eph{-sp, cp, 0.0};

  double ir = 1.0 / r;
  Vec3 th_c = ir * eth;
  Vec3 ph_c = (st > 0.0) ? (ir / st) * eph : Vec3{0, 0, 0};

  Mat3 th2, ph2, nd;
  if (derivs >= 2) {
    double cot = ct / st;
    for (int c = 0; c < 3; ++c)
      for (int d = 0; d < 3; ++d) {
        th2(c, d) = (-n[c] * eth[d] - eth[c] * n[d] + cot * eph[c] * eph[d]) * ir * ir;
        double uc = st * n[c] + ct * eth[c];
        double ud = st * n[d] + ct * eth[d];
        ph2(c, d) = -(uc * eph[d] + eph[c] * ud) * ir * ir / (st * st);
      }
  }
  for (int c = 0; c < 3; ++c)
    for (int d = 0; d < 3; ++d) nd(c, d) = ((c == d) - n[c] * n[d]) * ir;

  // tables of odd theta-derivative order flip sign across the pole
  auto fetch = [&](const AngularTable& t, AngularPointData& p) {
    p.v = g.interp_apply(stencil, t.v, FramePolarity::scalar);
    if (derivs >= 1) {
      double gt = g.interp_apply(stencil, t.dt, FramePolarity::oneform);
      double gp = g.interp_apply(stencil, t.dp, FramePolarity::scalar);
      for (int c = 0; c < 3; ++c) p.grad[c] = gt * th_c[c] + gp * ph_c[c];
      if (derivs >= 2) {
        double gtt = g.interp_apply(stencil, t.dtt, FramePolarity::scalar);
        double gtp = g.interp_apply(stencil, t.dtp, FramePolarity::oneform);
        double gpp = g.interp_apply(stencil, t.dpp, FramePolarity::scalar);
        for (int c = 0; c < 3; ++c)
          for (int d = 0; d < 3; ++d)
            p.hess(c, d) = gtt * th_c[c] * th_c[d] + gtp * (th_c[c] * ph_c[d] + ph_c[c] * th_c[d]) +
                           gpp * ph_c[c] * ph_c[d] + gt * th2(c, d) + gp * ph2(c, d);
      }
    }
  };

  std::array<AngularPointData, 3> W{};
  std::array<AngularPointData, 6> T{};
  for (int c = 0; c < 3; ++c) fetch((*wtab_)[c], W[c]);
  for (int s = 0; s < 6; ++s) fetch((*ttab_)[s], T[s]);

  auto f1 = radial_f1(r);
  auto f2 = radial_f2(r);

  // the exact field is trace-free; removing the interpolated trace strips
  // tangentiality noise of the tables (the derivative matrices inherit it)
  auto detrace = [](Mat3& m) {
    double t3 = trace(m) / 3.0;
    m(0, 0) -= t3;
    m(1, 1) -= t3;
    m(2, 2) -= t3;
  };
  for (int i = 0; i < 3; ++i)
    for (int j = i; j < 3; ++j) {
      double M = n[i] * W[j].v + n[j] * W[i].v;
      double val = f1[0] * M + f2[0] * T[SIDX[i][j]].v;
      out.value(i, j) = out.value(j, i) = val;
    }
  detrace(out.value);
  if (derivs < 1) return out;

  for (int c = 0; c < 3; ++c) {
    for (int i = 0; i < 3; ++i)
      for (int j = i; j < 3; ++j) {
        double M = n[i] * W[j].v + n[j] * W[i].v;
        double Mc = nd(i, c) * W[j].v + n[i] * W[j].grad[c] + nd(j, c) * W[i].v + n[j] * W[i].grad[c];
        double v = f1[1] * n[c] * M + f1[0] * Mc + f2[1] * n[c] * T[SIDX[i][j]].v +
                   f2[0] * T[SIDX[i][j]].grad[c];
        out.d1[c](i, j) = out.d1[c](j, i) = v;
      }
    detrace(out.d1[c]);
  }
  if (derivs < 2) return out;

  for (int c = 0; c < 3; ++c)
    for (int d = c; d < 3; ++d) {
      for (int i = 0; i < 3; ++i)
        for (int j = i; j < 3; ++j) {
          double M = n[i] * W[j].v + n[j] * W[i].v;
          double Mc = nd(i, c) * W[j].v + n[i] * W[j].grad[c] + nd(j, c) * W[i].v + n[j] * W[i].grad[c];
          double Md = nd(i, d) * W[j].v + n[i] * W[j].grad[d] + nd(j, d) * W[i].v + n[j] * W[i].grad[d];
          // second gradient of n: n_{i,cd}
          auto ndd = [&](int a, int b, int e) {
            return (-((a == b) - n[a] * n[b]) * n[e] - ((a == e) - n[a] * n[e]) * n[b] -
                    n[a] * ((b == e) - n[b] * n[e])) * ir * ir;
          };
          double Mcd = ndd(i, c, d) * W[j].v + nd(i, c) * W[j].grad[d] + nd(i, d) * W[j].grad[c] +
                       n[i] * W[j].hess(c, d) + ndd(j, c, d) * W[i].v + nd(j, c) * W[i].grad[d] +
                       nd(j, d) * W[i].grad[c] + n[j] * W[i].hess(c, d);
          const auto& Ts = T[SIDX[i][j]];
          double v = f1[2] * n[c] * n[d] * M + f1[1] * (nd(c, d) * M + n[c] * Md + n[d] * Mc) +
                     f1[0] * Mcd + f2[2] * n[c] * n[d] * Ts.v +
                     f2[1] * (nd(c, d) * Ts.v + n[c] * Ts.grad[d] + n[d] * Ts.grad[c]) +
                     f2[0] * Ts.hess(c, d);
          out.d2[c][d](i, j) = out.d2[c][d](j, i) = v;
        }
      detrace(out.d2[c][d]);
      out.d2[d][c] = out.d2[c][d];
    }
  return out;
}

Mat3 ShellTensorField::value(const Vec3& x) const { return eval(x, 0).value; }

ShellEval ShellTensorField::eval(const Vec3& x, int derivs) const {
  double ik = 1.0 / k_;
  Vec3 y0 = ik * x;
  Vec3 y = rotated_ ? matvec(transpose(rot_), y0) : y0;
  ShellEval base = eval_unit(y, derivs);
  double w = scaling_weight(kind_);
  double c0 = factor_ * std::pow(ik, w);

  ShellEval out{};
  if (!rotated_) {
    out.value = c0 * base.value;
    if (derivs >= 1)
      for (int c = 0; c < 3; ++c) out.d1[c] = (c0 * ik) * base.d1[c];
    if (derivs >= 2)
      for (int c = 0; c < 3; ++c)
        for (int d = 0; d < 3; ++d) out.d2[c][d] = (c0 * ik * ik) * base.d2[c][d];
    return out;
  }
  const Mat3& R = rot_;
  out.value = c0 * matmul(R, matmul(base.value, transpose(R)));
  if (derivs >= 1) {
    for (int c = 0; c < 3; ++c) {
      Mat3 acc = Mat3::zero();
      for (int gidx = 0; gidx < 3; ++gidx) {
        if (R(c, gidx) == 0.0) continue;
        acc = acc + R(c, gidx) * base.d1[gidx];
      }
      out.d1[c] = (c0 * ik) * matmul(R, matmul(acc, transpose(R)));
    }
  }
  if (derivs >= 2) {
    for (int c = 0; c < 3; ++c)
      for (int d = 0; d < 3; ++d) {
        Mat3 acc = Mat3::zero();
        for (int g1 = 0; g1 < 3; ++g1)
          for (int g2 = 0; g2 < 3; ++g2) {
            double w2 = R(c, g1) * R(d, g2);
            if (w2 == 0.0) continue;
            acc = acc + w2 * base.d2[g1][g2];
          }
        out.d2[c][d] = (c0 * ik * ik) * matmul(R, matmul(acc, transpose(R)));
      }
  }
  return out;
}

ShellTensorField ShellTensorField::scaled_to(double k) const {
  if (k < 1.0) throw std::invalid_argument("scaled_to: k >= 1 required");
  if (k_ != 1.0) throw std::invalid_argument("scaled_to: field already scaled");
  ShellTensorField f = *this;
  f.k_ = k;
  return f;
}

ShellTensorField ShellTensorField::rotated_by(const Mat3& R) const {
  if (!is_rotation(R, 1e-10)) throw std::invalid_argument("rotated_by: not a rotation");
  ShellTensorField f = *this;
  f.rot_ = matmul(R, rot_);
  f.rotated_ = true;
  return f;
}

ShellTensorField ShellTensorField::multiplied(double c) const {
  ShellTensorField f = *this;
  f.factor_ *= c;
  return f;
}

double ShellTensorField::parity_defect() const {
  GaussRule rg = gauss_legendre_on(6, support_inner(), support_outer());
  double worst = 0.0;
  const auto& g = *grid_;
  for (double r : rg.x) {
    for (int j = 0; j < g.n_theta(); j += 3) {
      for (int m = 0; m < g.n_phi(); m += 3) {
        Vec3 x = r * g.unit_vector(j, m);
        Mat3 a = value(x);
        Mat3 b = value(-x);
        for (int t = 0; t < 9; ++t) worst = std::max(worst, std::fabs(a.a[t] - b.a[t]));
      }
    }
  }
  return worst;
}

ShellTensorField make_tau(const RadialProfile& q, const PolynomialS2Function& u, const GridPtr& grid,
                          int hodge_orientation) {
  // The antipodal map reverses the orientation of S^2, so the star in
  // tau~ = delta*(*du) flips the seed parity: an odd u yields the
  // component-even shell fields sigma(x) = sigma(-x), tau(x) = tau(-x) the
  // moment theorems need.
  if (!u.all_odd_degree())
    throw std::invalid_argument(
        "make_tau: seed polynomial must be odd under x -> -x (so that the built field is even)");
  ScalarS2 us = sample(u, grid);
  OneFormS2 sdu = hodge_star(d_spectral(us), hodge_orientation);
  TTTensorS2 tau_tilde = delta_star_spectral(sdu);
  OneFormS2 alpha = div_tt_spectral(tau_tilde);
  for (auto& v : alpha.comp_theta) v = -v;
  for (auto& v : alpha.comp_phi) v = -v;
  symmetrize_even_pair(tau_tilde, alpha);
  normalize_pair(tau_tilde, alpha, max_abs(us.values));
  return ShellTensorField(ShellKind::momentum_tau, ShellTensorField::Ansatz::tau_type, q, grid,
                          std::move(tau_tilde), std::move(alpha));
}

ShellTensorField make_sigma(const RadialProfile& p, const TTTensorS2& sigma_tilde) {
  TTTensorS2 st = sigma_tilde;
  GridPtr grid = st.grid;
  OneFormS2 eta = div_tt_spectral(st);
  for (auto& v : eta.comp_theta) v = -v;
  for (auto& v : eta.comp_phi) v = -v;
  double scale = 0.0;
  for (std::size_t i = 0; i < st.comp_tt.size(); ++i)
    scale = std::max({scale, std::fabs(st.comp_tt[i]), std::fabs(st.comp_tp[i])});
  if (scale > 0.0 && payload_parity_defect(st, eta) < 1e-6 * scale) symmetrize_even_pair(st, eta);
  normalize_pair(st, eta, scale);
  return ShellTensorField(ShellKind::metric_sigma, ShellTensorField::Ansatz::sigma_type, p, grid,
                          std::move(st), std::move(eta));
}

double OctantBump::operator()(double theta, double phi) const {
  auto f = [this](double t, double lo, double hi) {
    if (t <= lo || t >= hi) return 0.0;
    double x = (t - lo) / (hi - lo);
    double w = x * (1.0 - x);
    if (poly_power > 0) return std::pow(4.0 * w, poly_power);
    return std::exp(-sharpness / w) * std::exp(4.0 * sharpness);
  };
  return f(theta, theta_lo, theta_hi) * f(phi, phi_lo, phi_hi);
}

ShellTensorField make_sigma_cm(const OctantBump& bump, const RadialProfile& q, const GridPtr& grid,
                               int hodge_orientation) {
  const double half_pi = 0.5 * std::numbers::pi;
  if (!(bump.theta_lo > 0.0 && bump.theta_hi < half_pi && bump.phi_lo > 0.0 && bump.phi_hi < half_pi) ||
      !(bump.theta_lo < bump.theta_hi && bump.phi_lo < bump.phi_hi))
    throw std::invalid_argument("make_sigma_cm: bump support must lie in the open first octant");
  ScalarS2 us = sample([&bump](double t, double p) { return bump(t, p); }, grid);
  OneFormS2 sdu = hodge_star(d_spectral(us), hodge_orientation);
  TTTensorS2 tau_tilde = delta_star_spectral(sdu);
  OneFormS2 alpha = div_tt_spectral(tau_tilde);
  for (auto& v : alpha.comp_theta) v = -v;
  for (auto& v : alpha.comp_phi) v = -v;
  // the operators are local, so the exact payload vanishes outside the bump
  // box; masking removes the global ringing of the discrete derivatives
  for (int j = 0; j < grid->n_theta(); ++j)
    for (int m = 0; m < grid->n_phi(); ++m) {
      double th = grid->theta(j), ph = grid->phi(m);
      bool inside = th > bump.theta_lo && th < bump.theta_hi && ph > bump.phi_lo && ph < bump.phi_hi;
      if (!inside) {
        std::size_t i = grid->idx(j, m);
        tau_tilde.comp_tt[i] = tau_tilde.comp_tp[i] = 0.0;
        alpha.comp_theta[i] = alpha.comp_phi[i] = 0.0;
      }
    }
  normalize_pair(tau_tilde, alpha, max_abs(us.values));
  return ShellTensorField(ShellKind::metric_sigma, ShellTensorField::Ansatz::tau_type, q, grid,
                          std::move(tau_tilde), std::move(alpha));
}

Vec3 spherical_divergence(const ShellTensorField& F, const Vec3& x) {
  // Reduce to the unscaled, unrotated field, apply the polar-coordinate
  // divergence of the ansatz, then map the covector back.
  double k = F.scale();
  Vec3 y0 = (1.0 / k) * x;
  const Mat3& R = F.rotation();
  Vec3 y = matvec(transpose(R), y0);

  double r = norm(y);
  const RadialProfile& prof = F.profile();
  if (r <= prof.a() || r >= prof.b()) return {0, 0, 0};

  const auto& g = *F.grid();
  double rho = std::sqrt(y[0] * y[0] + y[1] * y[1]);
  double theta = std::atan2(rho, y[2]);
  double phi = std::atan2(y[1], y[0]);
  if (phi < 0.0) phi += 2.0 * std::numbers::pi;
  auto st = g.interp_stencil(theta, phi);

  // intrinsic divergences of the payload, by the spectral grid route
  OneFormS2 divT = div_tt_spectral(F.payload_tt());
  ScalarS2 divW = div_oneform_spectral(F.payload_oneform());

  double w1 = g.interp_apply(st, F.payload_oneform().comp_theta, FramePolarity::oneform);
  double w2 = g.interp_apply(st, F.payload_oneform().comp_phi, FramePolarity::oneform);
  double dT1 = g.interp_apply(st, divT.comp_theta, FramePolarity::oneform);
  double dT2 = g.interp_apply(st, divT.comp_phi, FramePolarity::oneform);
  double dW = g.interp_apply(st, divW.values, FramePolarity::scalar);

  auto jet = prof.jet(r);
  double f = jet[0], f1 = jet[1];
  double Wfac = (F.ansatz() == ShellTensorField::Ansatz::tau_type) ? (2.0 * r * f + r * r * f1)
                                                                   : (2.0 * r * f + 2.0 * r * r * f1);
  double d2rf = 2.0 * r * f + r * r * f1;  // (r^2 f)'

  // frame components of div h at unit scale
  double comp_r = f * dW / (r * r);
  double comp_th = (d2rf * w1 + Wfac * dT1) / (r * r);
  double comp_ph = (d2rf * w2 + Wfac * dT2) / (r * r);

  double sth = std::sin(theta), cth = std::cos(theta);
  double cph = std::cos(phi), sph = std::sin(phi);
  Vec3 n{sth * cph, sth * sph, cth};
  Vec3 eth{cth * cph, cth * sph, -sth};
  Vec3 eph{-sph, cph, 0.0};
  // coordinate components (dr, dtheta, dphi) map to the orthonormal covector
  // via (comp_r, comp_th / r, comp_ph / (r sin)) -- the payload components are
  // already per unit-sphere orthonormal frame, so only 1/r appears.
  Vec3 D{};
  for (int c = 0; c < 3; ++c) D[c] = comp_r * n[c] + (comp_th * eth[c] + comp_ph * eph[c]) / r;

  int w = scaling_weight(F.kind());
  double c0 = F.factor() * std::pow(1.0 / k, w + 1);
  return c0 * matvec(R, D);
}

void ShellTensorField::save(std::ostream& os) const {
  nlohmann::json h;
  h["kind"] = (kind_ == ShellKind::metric_sigma) ? "metric_sigma" : "momentum_tau";
  h["ansatz"] = (ansatz_ == Ansatz::tau_type) ? "tau" : "sigma";
  h["a"] = prof_.a();
  h["b"] = prof_.b();
  h["k"] = k_;
  h["factor"] = factor_;
  h["rotated"] = rotated_;
  h["rot"] = std::vector<double>(rot_.a.begin(), rot_.a.end());
  h["n_theta"] = grid_->n_theta();
  h["n_phi"] = grid_->n_phi();
  h["fd_order"] = grid_->fd_order();
  os << "CHSH1\n" << h.dump() << "\n";
  os.precision(17);
  auto dump = [&os](const std::vector<double>& v) {
    for (std::size_t i = 0; i < v.size(); ++i) os << v[i] << ((i + 1 < v.size()) ? ',' : '\n');
  };
  dump(payload_tt_.comp_tt);
  dump(payload_tt_.comp_tp);
  dump(payload_oneform_.comp_theta);
  dump(payload_oneform_.comp_phi);
}

ShellTensorField ShellTensorField::load(std::istream& is) {
  std::string magic;
  std::getline(is, magic);
  if (magic != "CHSH1") throw std::runtime_error("ShellTensorField::load: bad magic, want CHSH1");
  std::string header;
  std::getline(is, header);
  nlohmann::json h = nlohmann::json::parse(header);
  auto grid = make_grid(h.at("n_theta").get<int>(), h.at("n_phi").get<int>(), h.at("fd_order").get<int>());
  RadialProfile prof(h.at("a").get<double>(), h.at("b").get<double>());
  auto read_row = [&is](std::vector<double>& v) {
    std::string line;
    std::getline(is, line);
    std::stringstream ss(line);
    std::string tok;
    v.clear();
    while (std::getline(ss, tok, ',')) v.push_back(std::stod(tok));
  };
  TTTensorS2 tt(grid);
  OneFormS2 wf(grid);
  read_row(tt.comp_tt);
  read_row(tt.comp_tp);
  read_row(wf.comp_theta);
  read_row(wf.comp_phi);
  if (tt.comp_tt.size() != grid->size() || wf.comp_phi.size() != grid->size())
    throw std::runtime_error("ShellTensorField::load: payload size mismatch");
  ShellKind kind = (h.at("kind") == "metric_sigma") ? ShellKind::metric_sigma : ShellKind::momentum_tau;
  Ansatz an = (h.at("ansatz") == "tau") ? Ansatz::tau_type : Ansatz::sigma_type;
  ShellTensorField f(kind, an, prof, grid, std::move(tt), std::move(wf));
  f.k_ = h.at("k").get<double>();
  f.factor_ = h.at("factor").get<double>();
  f.rotated_ = h.at("rotated").get<bool>();
  auto rv = h.at("rot").get<std::vector<double>>();
  for (int i = 0; i < 9; ++i) f.rot_.a[i] = rv[i];
  return f;
}

void ShellTensorField::save_file(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("save_file: cannot open " + path);
  save(os);
}

ShellTensorField ShellTensorField::load_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("load_file: cannot open " + path);
  return load(is);
}

}  // namespace admshell
