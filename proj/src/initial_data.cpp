#include "admshell/initial_data.hpp"

#include <cmath>

#include "admshell/constraints.hpp"

namespace admshell {

namespace {

struct FlatData final : InitialData {
  MetricJet metric_jet(const Vec3&) const override {
    MetricJet j{};
    j.g = Mat3::identity();
    return j;
  }
  MomentumJet momentum_jet(const Vec3&) const override { return MomentumJet{}; }
};

struct SchwarzschildData final : InitialData {
  double m;
  Vec3 c;

  SchwarzschildData(double mass, Vec3 center) : m(mass), c(center) {}

  double inner_radius() const override { return 0.05 * m + norm(c); }

  MetricJet metric_jet(const Vec3& x) const override {
    Vec3 d = x - c;
    double s2 = dot(d, d);
    double s = std::sqrt(s2);
    double is = 1.0 / s, is3 = is / s2, is5 = is3 / s2;
    double psi = 1.0 + 0.5 * m / s;
    Vec3 p1;                       // psi_,i
    for (int i = 0; i < 3; ++i) p1[i] = -0.5 * m * d[i] * is3;
    Mat3 p2;                       // psi_,ij
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) p2(i, j) = -0.5 * m * ((i == j) * is3 - 3.0 * d[i] * d[j] * is5);

    MetricJet out{};
    double p3co = psi * psi * psi;
    out.g = (psi * p3co) * Mat3::identity();
    for (int k = 0; k < 3; ++k) out.dg[k] = (4.0 * p3co * p1[k]) * Mat3::identity();
    double is7 = is5 / s2;
    for (int k = 0; k < 3; ++k)
      for (int l = k; l < 3; ++l) {
        double coeff = 12.0 * psi * psi * p1[k] * p1[l] + 4.0 * p3co * p2(k, l);
        out.ddg[k][l] = coeff * Mat3::identity();
        out.ddg[l][k] = out.ddg[k][l];
      }
    (void)is7;
    return out;
  }
  MomentumJet momentum_jet(const Vec3&) const override { return MomentumJet{}; }
};

struct BowenYorkData final : InitialData {
  DataPtr base;
  BowenYorkMode mode;
  Vec3 J;

  MetricJet metric_jet(const Vec3& x) const override { return base->metric_jet(x); }
  double inner_radius() const override { return std::max(base->inner_radius(), 1e-6); }

  MomentumJet momentum_jet(const Vec3& x) const override {
    MomentumJet out = base->momentum_jet(x);
    double r2 = dot(x, x);
    double r = std::sqrt(r2);
    Vec3 n = (1.0 / r) * x;
    auto dn = [&](int l, int cc) { return ((l == cc) - n[l] * n[cc]) / r; };
    if (mode == BowenYorkMode::angular) {
      Vec3 v = cross(J, n);
      double ir3 = 1.0 / (r2 * r);
      Mat3 pi;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) pi(i, j) = 3.0 * ir3 * (n[i] * v[j] + n[j] * v[i]);
      out.pi = out.pi + pi;
      for (int cc = 0; cc < 3; ++cc) {
        Vec3 dv{};  // d v_j / dx_c = (eps_jkc J_k - v_j n_c)/r
        for (int j = 0; j < 3; ++j) {
          Vec3 ec{};
          ec[cc] = 1.0;
          dv[j] = (cross(J, ec)[j] - v[j] * n[cc]) / r;
        }
        Mat3 dpi;
        for (int i = 0; i < 3; ++i)
          for (int j = 0; j < 3; ++j)
            dpi(i, j) = 3.0 * (-3.0 * n[cc] / (r2 * r2) * (n[i] * v[j] + n[j] * v[i]) +
                               ir3 * (dn(i, cc) * v[j] + n[i] * dv[j] + dn(j, cc) * v[i] + n[j] * dv[i]));
        out.dpi[cc] = out.dpi[cc] + dpi;
      }
    } else {
      double pn = dot(J, n);
      double ir2 = 1.0 / r2;
      Mat3 pi;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          pi(i, j) = 1.5 * ir2 * (J[i] * n[j] + J[j] * n[i] - ((i == j) - n[i] * n[j]) * pn);
      out.pi = out.pi + pi;
      for (int cc = 0; cc < 3; ++cc) {
        double dpn = (J[cc] - pn * n[cc]) / r;
        Mat3 dpi;
        for (int i = 0; i < 3; ++i)
          for (int j = 0; j < 3; ++j) {
            double inner = J[i] * dn(j, cc) + J[j] * dn(i, cc) +
                           (dn(i, cc) * n[j] + n[i] * dn(j, cc)) * pn -
                           ((i == j) - n[i] * n[j]) * dpn;
            dpi(i, j) = 1.5 * (-2.0 * n[cc] * ir2 / r * (J[i] * n[j] + J[j] * n[i] -
                                                         ((i == j) - n[i] * n[j]) * pn) +
                               ir2 * inner);
          }
        out.dpi[cc] = out.dpi[cc] + dpi;
      }
    }
    return out;
  }
};

struct ShellData final : InitialData {
  DataPtr base;
  std::shared_ptr<const ShellTensorField> sigma, tau;

  double inner_radius() const override { return base->inner_radius(); }

  MetricJet metric_jet(const Vec3& x) const override {
    MetricJet j = base->metric_jet(x);
    if (sigma) {
      ShellEval e = sigma->eval(x, 2);
      j.g = j.g + e.value;
      for (int k = 0; k < 3; ++k) j.dg[k] = j.dg[k] + e.d1[k];
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l) j.ddg[k][l] = j.ddg[k][l] + e.d2[k][l];
    }
    return j;
  }
  MomentumJet momentum_jet(const Vec3& x) const override {
    MomentumJet j = base->momentum_jet(x);
    if (tau) {
      ShellEval e = tau->eval(x, 1);
      j.pi = j.pi + e.value;
      for (int k = 0; k < 3; ++k) j.dpi[k] = j.dpi[k] + e.d1[k];
    }
    return j;
  }
};

struct RescaledData final : InitialData {
  DataPtr base;
  double lam;

  double inner_radius() const override { return lam * base->inner_radius(); }

  MetricJet metric_jet(const Vec3& x) const override {
    MetricJet j = base->metric_jet((1.0 / lam) * x);
    double il = 1.0 / lam;
    MetricJet out;
    out.g = j.g;
    for (int k = 0; k < 3; ++k) out.dg[k] = il * j.dg[k];
    for (int k = 0; k < 3; ++k)
      for (int l = 0; l < 3; ++l) out.ddg[k][l] = (il * il) * j.ddg[k][l];
    return out;
  }
  MomentumJet momentum_jet(const Vec3& x) const override {
    MomentumJet j = base->momentum_jet((1.0 / lam) * x);
    double il = 1.0 / lam;
    MomentumJet out;
    out.pi = il * j.pi;
    for (int k = 0; k < 3; ++k) out.dpi[k] = (il * il) * j.dpi[k];
    return out;
  }
};

struct RotatedData final : InitialData {
  DataPtr base;
  Mat3 R;

  double inner_radius() const override { return base->inner_radius(); }

  MetricJet metric_jet(const Vec3& x) const override {
    MetricJet j = base->metric_jet(matvec(transpose(R), x));
    MetricJet out;
    out.g = matmul(R, matmul(j.g, transpose(R)));
    for (int c = 0; c < 3; ++c) {
      Mat3 acc = Mat3::zero();
      for (int g = 0; g < 3; ++g) acc = acc + R(c, g) * j.dg[g];
      out.dg[c] = matmul(R, matmul(acc, transpose(R)));
    }
    for (int c = 0; c < 3; ++c)
      for (int d = 0; d < 3; ++d) {
        Mat3 acc = Mat3::zero();
        for (int g1 = 0; g1 < 3; ++g1)
          for (int g2 = 0; g2 < 3; ++g2) acc = acc + R(c, g1) * R(d, g2) * j.ddg[g1][g2];
        out.ddg[c][d] = matmul(R, matmul(acc, transpose(R)));
      }
    return out;
  }
  MomentumJet momentum_jet(const Vec3& x) const override {
    MomentumJet j = base->momentum_jet(matvec(transpose(R), x));
    MomentumJet out;
    out.pi = matmul(R, matmul(j.pi, transpose(R)));
    for (int c = 0; c < 3; ++c) {
      Mat3 acc = Mat3::zero();
      for (int g = 0; g < 3; ++g) acc = acc + R(c, g) * j.dpi[g];
      out.dpi[c] = matmul(R, matmul(acc, transpose(R)));
    }
    return out;
  }
};

struct ConformalShiftData final : InitialData {
  DataPtr base;
  ScalarField3 u;
  VectorField3 X;

  double inner_radius() const override { return base->inner_radius(); }

  MetricJet metric_jet(const Vec3& x) const override {
    MetricJet j = base->metric_jet(x);
    double uv = u.value(x);
    Vec3 ug = u.grad(x);
    Mat3 uh = u.hess(x);
    double u2 = uv * uv, u3 = u2 * uv, u4 = u3 * uv;
    MetricJet out;
    out.g = u4 * j.g;
    for (int k = 0; k < 3; ++k) out.dg[k] = (4.0 * u3 * ug[k]) * j.g + u4 * j.dg[k];
    for (int k = 0; k < 3; ++k)
      for (int l = 0; l < 3; ++l)
        out.ddg[k][l] = (12.0 * u2 * ug[k] * ug[l] + 4.0 * u3 * uh(k, l)) * j.g +
                        (4.0 * u3 * ug[k]) * j.dg[l] + (4.0 * u3 * ug[l]) * j.dg[k] +
                        u4 * j.ddg[k][l];
    return out;
  }

  MomentumJet momentum_jet(const Vec3& x) const override {
    MetricJet mj = base->metric_jet(x);
    MomentumJet pj = base->momentum_jet(x);
    double uv = u.value(x);
    Vec3 ug = u.grad(x);

    Vec3 Xv = X.value(x);
    Mat3 Xj = X.jac(x);
    std::array<Mat3, 3> Xh = X.hess(x);

    ChristoffelJet ch = christoffel_jet(mj);

    // (L_g X)_ij = X_i;j + X_j;i - (div_g X) g_ij, X a covector
    Mat3 covd;  // covd(i,j) = X_i;j
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double s = Xj(i, j);
        for (int l = 0; l < 3; ++l) s -= ch.gamma[l](i, j) * Xv[l];
        covd(i, j) = s;
      }
    double divX = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) divX += ch.ginv(i, j) * covd(i, j);
    Mat3 L;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) L(i, j) = covd(i, j) + covd(j, i) - divX * mj.g(i, j);

    MomentumJet out;
    out.pi = (uv * uv) * (pj.pi + L);

    for (int c = 0; c < 3; ++c) {
      // d/dx_c of covd
      Mat3 dcovd;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
          double s = Xh[i](j, c);
          for (int l = 0; l < 3; ++l)
            s -= ch.dgamma[c][l](i, j) * Xv[l] + ch.gamma[l](i, j) * Xj(l, c);
          dcovd(i, j) = s;
        }
      double ddivX = 0.0;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          ddivX += ch.dginv[c](i, j) * covd(i, j) + ch.ginv(i, j) * dcovd(i, j);
      Mat3 dL;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          dL(i, j) = dcovd(i, j) + dcovd(j, i) - ddivX * mj.g(i, j) - divX * mj.dg[c](i, j);
      out.dpi[c] = (2.0 * uv * ug[c]) * (pj.pi + L) + (uv * uv) * (pj.dpi[c] + dL);
    }
    return out;
  }
};

}  // namespace

DataPtr flat_data() { return std::make_shared<FlatData>(); }

DataPtr schwarzschild_data(double mass, const Vec3& center) {
  if (mass <= 0.0) throw std::invalid_argument("schwarzschild_data: mass > 0 required");
  return std::make_shared<SchwarzschildData>(mass, center);
}

DataPtr add_bowen_york(DataPtr base, BowenYorkMode mode, const Vec3& param) {
  if (norm(param) == 0.0) throw std::invalid_argument("add_bowen_york: zero parameter vector");
  auto d = std::make_shared<BowenYorkData>();
  d->base = std::move(base);
  d->mode = mode;
  d->J = param;
  return d;
}

DataPtr add_shell(DataPtr base, std::shared_ptr<const ShellTensorField> sigma,
                  std::shared_ptr<const ShellTensorField> tau) {
  auto d = std::make_shared<ShellData>();
  d->base = std::move(base);
  d->sigma = std::move(sigma);
  d->tau = std::move(tau);
  return d;
}

DataPtr rescale_data(DataPtr base, double lambda) {
  if (lambda <= 0.0) throw std::invalid_argument("rescale_data: lambda > 0 required");
  auto d = std::make_shared<RescaledData>();
  d->base = std::move(base);
  d->lam = lambda;
  return d;
}

DataPtr rotate_data(DataPtr base, const Mat3& R) {
  if (!is_rotation(R, 1e-10)) throw std::invalid_argument("rotate_data: not a rotation");
  auto d = std::make_shared<RotatedData>();
  d->base = std::move(base);
  d->R = R;
  return d;
}

DataPtr conformal_shift_data(DataPtr base, ScalarField3 u, VectorField3 X) {
  auto d = std::make_shared<ConformalShiftData>();
  d->base = std::move(base);
  d->u = std::move(u);
  d->X = std::move(X);
  return d;
}

}  // namespace admshell
