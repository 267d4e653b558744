#include <cmath>
#include <numbers>

#include "admshell/sphere_ops.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace admshell;
namespace orc = admshell::oracles;

namespace {
constexpr double kPi = std::numbers::pi;

GridPtr grid64() {
  static GridPtr g = make_grid(64, 128);
  return g;
}

ScalarS2 sample_fn(const GridPtr& g, const std::function<double(double, double)>& f) {
  return sample(f, g);
}

double sup_diff_oneform(const OneFormS2& a, const OneFormS2& b) {
  double e = 0.0;
  for (std::size_t i = 0; i < a.comp_theta.size(); ++i) {
    e = std::max(e, std::fabs(a.comp_theta[i] - b.comp_theta[i]));
    e = std::max(e, std::fabs(a.comp_phi[i] - b.comp_phi[i]));
  }
  return e;
}
}  // namespace

TEST_CASE("grid quadrature weights") {
  auto g = grid64();
  std::vector<double> ones(g->size(), 1.0);
  CHECK(std::fabs(g->integrate(ones) - 4.0 * kPi) < 1e-12 * 4.0 * kPi);
  // no node at the poles
  CHECK(g->theta(0) > 0.0);
  CHECK(g->theta(g->n_theta() - 1) < kPi);
}

TEST_CASE("sample polynomial seeds") {
  auto g = grid64();
  ScalarS2 one = sample(PolynomialS2Function{{{1.0, {0, 0, 0}}}}, g);
  for (double v : one.values) CHECK(v == 1.0);

  ScalarS2 z = sample(PolynomialS2Function{{{1.0, {0, 0, 1}}}}, g);
  for (int j = 0; j < g->n_theta(); ++j)
    for (int m = 0; m < g->n_phi(); ++m)
      CHECK(z.values[g->idx(j, m)] == doctest::Approx(g->cos_theta(j)).epsilon(1e-14));

  ScalarS2 r2 = sample(
      PolynomialS2Function{{{1.0, {2, 0, 0}}, {1.0, {0, 2, 0}}, {1.0, {0, 0, 2}}}}, g);
  for (double v : r2.values) CHECK(v == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("exterior derivative") {
  auto g = grid64();
  ScalarS2 c = sample(PolynomialS2Function{{{3.5, {0, 0, 0}}}}, g);
  OneFormS2 dc = exterior_derivative(c);
  CHECK(max_abs(dc.comp_theta) < 1e-12);
  CHECK(max_abs(dc.comp_phi) < 1e-10);

  ScalarS2 z = sample(PolynomialS2Function{{{1.0, {0, 0, 1}}}}, g);
  OneFormS2 dz = exterior_derivative(z);
  double e = 0.0;
  for (int j = 0; j < g->n_theta(); ++j)
    for (int m = 0; m < g->n_phi(); ++m)
      e = std::max(e, std::fabs(dz.comp_theta[g->idx(j, m)] + g->sin_theta(j)));
  CHECK(e < 1e-11);
  CHECK(max_abs(dz.comp_phi) < 1e-12);

  // u = sin^2 theta cos 2 phi: hand-differentiated, FD cross-check on a
  // refined grid
  auto u_fn = [](double th, double ph) { return std::sin(th) * std::sin(th) * std::cos(2 * ph); };
  ScalarS2 u = sample_fn(g, u_fn);
  OneFormS2 du = exterior_derivative(u);
  double e_th = 0.0, e_ph = 0.0;
  for (int j = 0; j < g->n_theta(); ++j)
    for (int m = 0; m < g->n_phi(); ++m) {
      double st = g->sin_theta(j), ct = g->cos_theta(j);
      double c2 = std::cos(2 * g->phi(m)), s2 = std::sin(2 * g->phi(m));
      e_th = std::max(e_th, std::fabs(du.comp_theta[g->idx(j, m)] - 2 * st * ct * c2));
      e_ph = std::max(e_ph, std::fabs(du.comp_phi[g->idx(j, m)] + 2 * st * s2));
    }
  CHECK(e_th < 1e-9);
  CHECK(e_ph < 1e-11);
  // FD oracle at a handful of rows on a refined grid
  auto gf = make_grid(128, 256);
  ScalarS2 uf = sample_fn(gf, u_fn);
  OneFormS2 duf = exterior_derivative(uf);
  for (int j : {0, 31, 64, 100}) {
    double th = gf->theta(j);
    double fd = orc::fd_derivative([&](double t) { return u_fn(t, gf->phi(5)); }, th, 1e-4);
    CHECK(duf.comp_theta[gf->idx(j, 5)] == doctest::Approx(fd).epsilon(1e-7));
  }
}

TEST_CASE("hodge star conventions") {
  auto g = grid64();
  OneFormS2 a(g);
  for (auto& v : a.comp_theta) v = 1.0;
  OneFormS2 sa = hodge_star(a);
  CHECK(max_abs(sa.comp_theta) == 0.0);
  for (auto& v : sa.comp_phi) CHECK(v == 1.0);

  // involution is exact, no tolerance
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-1, 1);
  OneFormS2 b(g);
  for (auto& v : b.comp_theta) v = u(rng);
  for (auto& v : b.comp_phi) v = u(rng);
  OneFormS2 ssb = hodge_star(hodge_star(b));
  for (std::size_t i = 0; i < b.comp_theta.size(); ++i) {
    CHECK(ssb.comp_theta[i] == -b.comp_theta[i]);
    CHECK(ssb.comp_phi[i] == -b.comp_phi[i]);
  }

  // *d(cos theta) = (0, -sin theta)
  ScalarS2 z = sample(PolynomialS2Function{{{1.0, {0, 0, 1}}}}, g);
  OneFormS2 sdz = hodge_star(exterior_derivative(z));
  double e = 0.0;
  for (int j = 0; j < g->n_theta(); ++j)
    for (int m = 0; m < g->n_phi(); ++m)
      e = std::max(e, std::fabs(sdz.comp_phi[g->idx(j, m)] + g->sin_theta(j)));
  CHECK(max_abs(sdz.comp_theta) < 1e-12);
  CHECK(e < 1e-11);
}

TEST_CASE("delta star") {
  auto g = grid64();
  // l=1 conformal Killing kernel: Hess(cos theta) = -cos theta * metric
  ScalarS2 z = sample(PolynomialS2Function{{{1.0, {0, 0, 1}}}}, g);
  TTTensorS2 t1 = delta_star(exterior_derivative(z));
  CHECK(max_abs(t1.comp_tt) < 1e-9);
  CHECK(max_abs(t1.comp_tp) < 1e-9);
  // same for the coexact l=1 form
  TTTensorS2 t1s = delta_star(hodge_star(exterior_derivative(z)));
  CHECK(max_abs(t1s.comp_tt) < 1e-9);
  CHECK(max_abs(t1s.comp_tp) < 1e-9);

  OneFormS2 zero(g);
  TTTensorS2 t0 = delta_star(zero);
  CHECK(max_abs(t0.comp_tt) == 0.0);
  CHECK(max_abs(t0.comp_tp) == 0.0);

  // u = 3 cos^2 - 1: delta*(du) component T_tt = 3 sin^2 (hand computation),
  // cross-checked against a refined grid
  PolynomialS2Function p2{{{3.0, {0, 0, 2}}, {-1.0, {0, 0, 0}}}};
  for (auto gp : {grid64(), make_grid(128, 256)}) {
    ScalarS2 u = sample(p2, gp);
    TTTensorS2 t = delta_star(exterior_derivative(u));
    double e = 0.0;
    for (int j = 0; j < gp->n_theta(); ++j)
      for (int m = 0; m < gp->n_phi(); ++m)
        e = std::max(e,
                     std::fabs(t.comp_tt[gp->idx(j, m)] - 3.0 * gp->sin_theta(j) * gp->sin_theta(j)));
    CHECK(e < 1e-8);
    CHECK(max_abs(t.comp_tp) < 1e-9);
  }
}

TEST_CASE("divergence operators and the div identity") {
  auto g = grid64();

  // coexact forms are divergence-free
  PolynomialS2Function mix{{{1.0, {2, 0, 0}}, {-1.0, {0, 1, 1}}, {0.3, {0, 0, 2}}}};
  ScalarS2 u = sample(mix, g);
  ScalarS2 d1 = div_oneform(hodge_star(exterior_derivative(u)));
  CHECK(max_abs(d1.values) < 1e-8);

  // du for u = cos theta: div = lap = -2 cos
  ScalarS2 z = sample(PolynomialS2Function{{{1.0, {0, 0, 1}}}}, g);
  ScalarS2 lz = div_oneform(exterior_derivative(z));
  double e = 0.0;
  for (std::size_t i = 0; i < lz.values.size(); ++i)
    e = std::max(e, std::fabs(lz.values[i] + 2.0 * z.values[i]));
  CHECK(e < 1e-9);

  // linearity plus coexact kernel: div(du + *dv) = lap u
  ScalarS2 v = sample(PolynomialS2Function{{{1.0, {1, 1, 0}}}}, g);
  OneFormS2 a = exterior_derivative(u);
  OneFormS2 sdv = hodge_star(exterior_derivative(v));
  OneFormS2 sum(g);
  for (std::size_t i = 0; i < sum.comp_theta.size(); ++i) {
    sum.comp_theta[i] = a.comp_theta[i] + sdv.comp_theta[i];
    sum.comp_phi[i] = a.comp_phi[i] + sdv.comp_phi[i];
  }
  ScalarS2 ds = div_oneform(sum);
  ScalarS2 lap = laplacian(u);
  e = 0.0;
  for (std::size_t i = 0; i < ds.values.size(); ++i)
    e = std::max(e, std::fabs(ds.values[i] - lap.values[i]));
  CHECK(e < 1e-8);

  // div delta*(*du) = 1/2 *d(lap u + 2u) for l=2 harmonic (lap u = -6u):
  // 1/2 *d(-4u) = -2 *du
  PolynomialS2Function q2{{{1.0, {2, 0, 0}}, {-1.0, {0, 2, 0}}}};
  ScalarS2 u2 = sample(q2, g);
  OneFormS2 lhs = div_tt(delta_star(exterior_derivative(u2)));
  OneFormS2 expect = exterior_derivative(u2);
  for (auto& w : expect.comp_theta) w *= -2.0;
  for (auto& w : expect.comp_phi) w *= -2.0;
  CHECK(sup_diff_oneform(lhs, expect) < 1e-7);

  // l=1 kernel of the composed operator
  OneFormS2 k1 = div_tt(delta_star(hodge_star(exterior_derivative(z))));
  CHECK(max_abs(k1.comp_theta) < 1e-7);
  CHECK(max_abs(k1.comp_phi) < 1e-7);
}

TEST_CASE("laplacian eigenvalues") {
  auto g = grid64();
  ScalarS2 c = sample(PolynomialS2Function{{{2.0, {0, 0, 0}}}}, g);
  CHECK(max_abs(laplacian(c).values) < 1e-10);

  ScalarS2 u2 = sample(PolynomialS2Function{{{1.0, {2, 0, 0}}, {-1.0, {0, 2, 0}}}}, g);
  ScalarS2 l2 = laplacian(u2);
  double e = 0.0;
  for (std::size_t i = 0; i < l2.values.size(); ++i)
    e = std::max(e, std::fabs(l2.values[i] + 6.0 * u2.values[i]));
  CHECK(e < 1e-7);
}

TEST_CASE("lemma-div identity over harmonics and random even polynomials") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  std::vector<PolynomialS2Function> fams;
  fams.push_back({{{1, {2, 0, 0}}, {-1, {0, 2, 0}}}});
  fams.push_back({{{1, {1, 1, 1}}, {0.0, {0, 0, 0}}}});  // odd allowed at operator level
  for (int t = 0; t < 4; ++t) {
    PolynomialS2Function p;
    for (auto expo : {std::array<int, 3>{2, 0, 0}, {0, 2, 0}, {0, 0, 2}, {1, 1, 0}, {1, 0, 1},
                      {0, 1, 1}, {2, 2, 0}, {2, 0, 2}, {4, 0, 0}, {1, 1, 2}})
      p.terms.push_back({coef(rng), expo});
    fams.push_back(p);
  }
  std::vector<double> errs;
  for (int n : {32, 64, 128}) {
    auto g = make_grid(n, 2 * n);
    double worst = 0.0;
    for (const auto& p : fams) {
      ScalarS2 u = sample(p, g);
      double su = max_abs(u.values);
      if (su == 0.0) continue;
      for (auto& v : u.values) v /= su;
      OneFormS2 lhs = div_tt(delta_star(hodge_star(exterior_derivative(u))));
      ScalarS2 lap = laplacian(u);
      ScalarS2 w(g);
      for (std::size_t i = 0; i < w.values.size(); ++i) w.values[i] = lap.values[i] + 2 * u.values[i];
      OneFormS2 rhs = hodge_star(exterior_derivative(w));
      for (auto& x : rhs.comp_theta) x *= 0.5;
      for (auto& x : rhs.comp_phi) x *= 0.5;
      worst = std::max(worst, sup_diff_oneform(lhs, rhs));
    }
    errs.push_back(worst);
  }
  CHECK(errs[1] < 2e-6);  // 64x128
  // refinement order >= 4 over the triple
  double order = std::log2(errs[0] / errs[1]);
  CHECK(order > 4.0);
}

TEST_CASE("double divergence kernel") {
  auto g = grid64();
  PolynomialS2Function p{{{1.0, {2, 0, 0}}, {-0.7, {0, 2, 0}}, {0.4, {1, 1, 2}}}};
  ScalarS2 u = sample(p, g);
  double su = max_abs(u.values);
  for (auto& v : u.values) v /= su;
  ScalarS2 dd = div_oneform(div_tt(delta_star(hodge_star(exterior_derivative(u)))));
  CHECK(max_abs(dd.values) < 5e-5);

  ScalarS2 il = laplacian(u);
  CHECK(std::fabs(sphere_integral(il)) < 1e-10);
}

TEST_CASE("lie derivative along rotation fields") {
  auto g = grid64();
  // axisymmetric tensor about e3 is annihilated by the e3 rotation
  ScalarS2 u = sample(PolynomialS2Function{{{1.0, {0, 0, 2}}}}, g);
  TTTensorS2 t = delta_star(hodge_star(exterior_derivative(u)));
  TTTensorS2 lz = lie_rotation_tt(t, {0, 0, 1});
  CHECK(max_abs(lz.comp_tt) < 1e-9);
  CHECK(max_abs(lz.comp_tp) < 1e-9);

  TTTensorS2 zero(g);
  TTTensorS2 l0 = lie_rotation_tt(zero, {1, 0, 0});
  CHECK(max_abs(l0.comp_tt) == 0.0);

  CHECK_THROWS(lie_rotation_tt(t, {1, 1, 0}));

  // independent oracle: pullback by a finite rotation, central difference
  // quotient, for u = y^2 - z^2 about e1; checked at all nodes including
  // (pi/2, pi/4)
  PolynomialS2Function py{{{1.0, {0, 2, 0}}, {-1.0, {0, 0, 2}}}};
  ScalarS2 uy = sample(py, g);
  TTTensorS2 ty = delta_star(hodge_star(exterior_derivative(uy)));
  Vec3 axis{1, 0, 0};
  TTTensorS2 lie = lie_rotation_tt(ty, axis);
  CHECK(max_abs(lie.comp_tt) > 0.1);  // nonzero

  // Cartesian matrix form of ty on the grid for interpolation
  std::array<std::vector<double>, 6> cart;
  for (auto& c : cart) c.assign(g->size(), 0.0);
  constexpr int SI[3][3] = {{0, 1, 2}, {1, 3, 4}, {2, 4, 5}};
  for (int j = 0; j < g->n_theta(); ++j)
    for (int m = 0; m < g->n_phi(); ++m) {
      Vec3 eth = g->e_theta(j, m), eph = g->e_phi(m);
      double A = ty.comp_tt[g->idx(j, m)], B = ty.comp_tp[g->idx(j, m)];
      for (int a = 0; a < 3; ++a)
        for (int b = a; b < 3; ++b)
          cart[SI[a][b]][g->idx(j, m)] =
              A * (eth[a] * eth[b] - eph[a] * eph[b]) + B * (eth[a] * eph[b] + eph[a] * eth[b]);
    }
  auto eval_cart = [&](const Vec3& n) {
    double rho = std::sqrt(n[0] * n[0] + n[1] * n[1]);
    double th = std::atan2(rho, n[2]);
    double ph = std::atan2(n[1], n[0]);
    if (ph < 0) ph += 2 * kPi;
    auto st = g->interp_stencil(th, ph);
    Mat3 M;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        M(a, b) = g->interp_apply(st, cart[SI[a][b]], FramePolarity::scalar);
    return M;
  };
  double t_fd = 1e-4;
  Mat3 Rp = rotation_about_axis(axis, t_fd), Rm = rotation_about_axis(axis, -t_fd);
  double worst = 0.0;
  for (int j = 8; j < g->n_theta() - 8; j += 7)
    for (int m = 0; m < g->n_phi(); m += 11) {
      Vec3 n = g->unit_vector(j, m);
      Mat3 Pp = matmul(transpose(Rp), matmul(eval_cart(matvec(Rp, n)), Rp));
      Mat3 Pm = matmul(transpose(Rm), matmul(eval_cart(matvec(Rm, n)), Rm));
      Mat3 q = (1.0 / (2.0 * t_fd)) * (Pp - Pm);
      Vec3 eth = g->e_theta(j, m), eph = g->e_phi(m);
      double qA = 0.0, qB = 0.0;
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
          qA += eth[a] * q(a, b) * eth[b];
          qB += eth[a] * q(a, b) * eph[b];
        }
      worst = std::max(worst, std::fabs(qA - lie.comp_tt[g->idx(j, m)]));
      worst = std::max(worst, std::fabs(qB - lie.comp_tp[g->idx(j, m)]));
    }
  CHECK(worst < 5e-6);  // O(t^2) quotient + interpolation error
}

TEST_CASE("sphere integral") {
  auto g = grid64();
  ScalarS2 one = sample(PolynomialS2Function{{{1.0, {0, 0, 0}}}}, g);
  CHECK(sphere_integral(one) == doctest::Approx(4.0 * kPi).epsilon(1e-14));
  ScalarS2 z = sample(PolynomialS2Function{{{1.0, {0, 0, 1}}}}, g);
  CHECK(std::fabs(sphere_integral(z)) < 1e-13);
  ScalarS2 z2 = sample(PolynomialS2Function{{{1.0, {0, 0, 2}}}}, g);
  CHECK(sphere_integral(z2) == doctest::Approx(4.0 * kPi / 3.0).epsilon(1e-13));
}
