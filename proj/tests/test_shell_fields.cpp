#include <cmath>
#include <numbers>
#include <sstream>

#include "admshell/constraints.hpp"
#include "admshell/shell_fields.hpp"
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
RadialProfile default_profile() { return RadialProfile(1.05, 1.95); }

ShellTensorField default_tau() {
  // odd seed -> antipodally even field
  PolynomialS2Function seed{{{1.0, {0, 2, 1}}, {-1.0 / 3.0, {0, 0, 3}}}};
  return make_tau(default_profile(), seed, grid64());
}

double gradient_scale(const ShellTensorField& f, const std::vector<Vec3>& pts) {
  double s = 0.0;
  for (const auto& x : pts) {
    ShellEval e = f.eval(x, 1);
    for (int c = 0; c < 3; ++c) s = std::max(s, frobenius(e.d1[c]));
  }
  return std::max(s, 1e-30);
}
}  // namespace

TEST_CASE("radial profile vanishes smoothly and matches FD") {
  RadialProfile p = default_profile();
  CHECK(p.value(1.0) == 0.0);
  CHECK(p.value(1.05) == 0.0);
  CHECK(p.value(2.0) == 0.0);
  CHECK(p.value(1.5) == doctest::Approx(1.0));
  CHECK(p.deriv1(1.05 + 1e-9) < 1e-6);

  double sup1 = 0, sup2 = 0, sup3 = 0;
  for (double r = 1.06; r < 1.945; r += 0.004) {
    sup1 = std::max(sup1, std::fabs(p.deriv1(r)));
    sup2 = std::max(sup2, std::fabs(p.deriv2(r)));
    sup3 = std::max(sup3, std::fabs(p.deriv3(r)));
  }
  double e1 = 0, e2 = 0, e3 = 0;
  for (double r = 1.06; r < 1.945; r += 0.004) {
    e1 = std::max(e1, std::fabs(orc::fd_derivative([&](double t) { return p.value(t); }, r, 1e-4) -
                                p.deriv1(r)) / sup1);
    e2 = std::max(e2, std::fabs(orc::fd_derivative([&](double t) { return p.deriv1(t); }, r, 1e-4) -
                                p.deriv2(r)) / sup2);
    e3 = std::max(e3, std::fabs(orc::fd_derivative([&](double t) { return p.deriv2(t); }, r, 1e-4) -
                                p.deriv3(r)) / sup3);
  }
  CHECK(e1 < 1e-6);
  CHECK(e2 < 1e-6);
  CHECK(e3 < 1e-6);

  CHECK_THROWS(RadialProfile(0.9, 1.5));
  CHECK_THROWS(RadialProfile(1.5, 1.2));
}

TEST_CASE("make_tau: divergence-free momentum deformation") {
  // axisymmetric odd seed u = z^3 - (3/5) z
  PolynomialS2Function u{{{1.0, {0, 0, 3}}, {-0.6, {0, 0, 1}}}};
  ShellTensorField tau = make_tau(default_profile(), u, grid64());
  CHECK(max_abs(tau.payload_tt().comp_tt) > 0.0);

  auto rng = orc::rng(42);
  std::vector<Vec3> pts;
  for (int i = 0; i < 200; ++i)
    pts.push_back(orc::random_point_in_shell(rng, tau.support_inner() * 1.02, tau.support_outer() * 0.98));
  double gs = gradient_scale(tau, pts);
  double worst = 0.0;
  for (const auto& x : pts) worst = std::max(worst, norm(flat_div(tau, x)));
  CHECK(worst / gs < 1e-6);

  // l=1 seed lies in the conformal Killing kernel -> zero field
  ShellTensorField tz = make_tau(default_profile(), PolynomialS2Function{{{2.0, {0, 0, 1}}}}, grid64());
  CHECK(frobenius(tz.value({0.0, 0.0, 1.5})) == 0.0);

  // an even-degree seed would build an antipodally odd field; rejected
  CHECK_THROWS(make_tau(default_profile(), PolynomialS2Function{{{1.0, {0, 0, 2}}}}, grid64()));
}

TEST_CASE("make_sigma: L sigma = 0 by construction") {
  ShellTensorField tau = default_tau();
  TTTensorS2 sigma_tilde = lie_rotation_tt(tau.payload_tt(), {1, 0, 0});
  ShellTensorField sigma = make_sigma(default_profile(), sigma_tilde);

  auto rng = orc::rng(43);
  std::vector<Vec3> pts;
  for (int i = 0; i < 200; ++i)
    pts.push_back(
        orc::random_point_in_shell(rng, sigma.support_inner() * 1.02, sigma.support_outer() * 0.98));
  double gs = gradient_scale(sigma, pts);
  double worst = 0.0;
  for (const auto& x : pts) worst = std::max(worst, std::fabs(linearized_L(sigma, x)));
  CHECK(worst / gs < 1e-6);

  // zero payload -> zero field
  TTTensorS2 zt(grid64());
  ShellTensorField sz = make_sigma(default_profile(), zt);
  CHECK(frobenius(sz.value({1.5, 0.0, 0.0})) == 0.0);

  // octant-bump tau-ansatz sigma: trace and divergence free, so L sigma = 0
  OctantBump bump;
  ShellTensorField scm = make_sigma_cm(bump, default_profile(), make_grid(96, 192));
  std::vector<Vec3> pts2;
  auto rng2 = orc::rng(44);
  for (int i = 0; i < 60; ++i)
    pts2.push_back(
        orc::random_point_in_shell(rng2, scm.support_inner() * 1.02, scm.support_outer() * 0.98));
  double gs2 = gradient_scale(scm, pts2);
  double worst2 = 0.0, worstd = 0.0;
  for (const auto& x : pts2) {
    worst2 = std::max(worst2, std::fabs(linearized_L(scm, x)));
    worstd = std::max(worstd, norm(flat_div(scm, x)));
  }
  CHECK(worst2 / gs2 < 2e-5);  // bump seeds carry broader spectra than l<=4 polys
  CHECK(worstd / gs2 < 2e-5);
}

TEST_CASE("make_sigma_cm: first-octant support and positive moment") {
  OctantBump bump;
  auto grid = make_grid(96, 192);
  ShellTensorField scm = make_sigma_cm(bump, default_profile(), grid);
  CHECK(scm.kind() == ShellKind::metric_sigma);

  // support: field vanishes at directions outside the first octant
  for (Vec3 dir : {Vec3{-1, 0.2, 0.2}, Vec3{0.2, -1, 0.2}, Vec3{0.2, 0.2, -1}}) {
    Vec3 x = (1.5 / norm(dir)) * dir;
    CHECK(frobenius(scm.value(x)) == 0.0);
  }

  // x^1-weighted squared-gradient moment is strictly positive; 3-D midpoint
  // oracle at two resolutions
  auto integrand = [&](const Vec3& x) {
    ShellEval e = scm.eval(x, 1);
    double s = 0.0;
    for (int c = 0; c < 3; ++c) {
      double f = frobenius(e.d1[c]);
      s += f * f;
    }
    return x[0] * s;
  };
  double lo = scm.support_inner(), hi = scm.support_outer();
  double m1 = orc::shell_quadrature_midpoint(integrand, lo, hi, 24, 48, 96);
  double m2 = orc::shell_quadrature_midpoint(integrand, lo, hi, 32, 72, 144);
  CHECK(m1 > 0.0);
  CHECK(m2 == doctest::Approx(m1).epsilon(2e-4));  // midpoint rule, modest order

  // bump touching an octant boundary is rejected
  OctantBump bad;
  bad.theta_lo = 0.0;
  CHECK_THROWS(make_sigma_cm(bad, default_profile(), grid));
  OctantBump bad2;
  bad2.phi_hi = 0.5 * kPi;
  CHECK_THROWS(make_sigma_cm(bad2, default_profile(), grid));
}

TEST_CASE("scale_to_shell") {
  ShellTensorField tau = default_tau();
  ShellTensorField t1 = tau.scaled_to(1.0);
  Vec3 x{0.0, 1.3, 0.6};
  CHECK(frobenius(t1.value(x) - tau.value(x)) == 0.0);

  ShellTensorField tau4 = tau.scaled_to(4.0);
  CHECK(tau4.support_inner() == doctest::Approx(4.0 * 1.05));
  // momentum kind scales as k^-2
  Vec3 y = 4.0 * x;
  CHECK(frobenius(tau4.value(y) - (1.0 / 16.0) * tau.value(x)) < 1e-15);

  TTTensorS2 st = lie_rotation_tt(tau.payload_tt(), {1, 0, 0});
  ShellTensorField sigma = make_sigma(default_profile(), st);
  ShellTensorField sig4 = sigma.scaled_to(4.0);
  // metric kind scales as k^-1: sup |sigma_k| = sup |sigma| / 4
  double sup1 = 0.0, sup4 = 0.0;
  auto g = grid64();
  for (int j = 0; j < g->n_theta(); j += 5)
    for (int m = 0; m < g->n_phi(); m += 5) {
      Vec3 n = g->unit_vector(j, m);
      sup1 = std::max(sup1, frobenius(sigma.value(1.5 * n)));
      sup4 = std::max(sup4, frobenius(sig4.value(6.0 * n)));
    }
  CHECK(sup4 == doctest::Approx(0.25 * sup1).epsilon(1e-12));

  // divergence identity survives scaling (chain rule)
  auto rng = orc::rng(45);
  double gs = 0.0, worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    Vec3 p = orc::random_point_in_shell(rng, tau4.support_inner() * 1.02, tau4.support_outer() * 0.98);
    ShellEval e = tau4.eval(p, 1);
    for (int c = 0; c < 3; ++c) gs = std::max(gs, frobenius(e.d1[c]));
    worst = std::max(worst, norm(flat_div(tau4, p)));
  }
  CHECK(worst / gs < 1e-6);

  CHECK_THROWS(tau.scaled_to(0.5));
  CHECK_THROWS(tau4.scaled_to(2.0));
}

TEST_CASE("eval_cartesian: support, trace, FD oracle") {
  ShellTensorField tau = default_tau();
  CHECK(frobenius(tau.value({0.5, 0, 0})) == 0.0);
  CHECK(frobenius(tau.value({0, 0, 2.5})) == 0.0);

  auto rng = orc::rng(46);
  double worst_trace = 0.0;
  for (int i = 0; i < 100; ++i) {
    Vec3 x = orc::random_point_in_shell(rng, 1.07, 1.93);
    worst_trace = std::max(worst_trace, std::fabs(trace(tau.value(x))));
  }
  CHECK(worst_trace < 1e-12);

  // derivative arrays against 4th-order FD of values
  double sup_d1 = 0.0, sup_d2 = 0.0, e1 = 0.0, e2 = 0.0;
  std::vector<Vec3> pts;
  for (int i = 0; i < 100; ++i) pts.push_back(orc::random_point_in_shell(rng, 1.15, 1.85));
  for (const auto& x : pts) {
    ShellEval e = tau.eval(x, 2);
    for (int c = 0; c < 3; ++c) sup_d1 = std::max(sup_d1, frobenius(e.d1[c]));
    for (int c = 0; c < 3; ++c)
      for (int d = 0; d < 3; ++d) sup_d2 = std::max(sup_d2, frobenius(e.d2[c][d]));
  }
  for (const auto& x : pts) {
    ShellEval e = tau.eval(x, 2);
    for (int c = 0; c < 3; ++c) {
      for (int i = 0; i < 3; ++i)
        for (int j = i; j < 3; ++j) {
          double fd = orc::fd_partial(
              [&](const Vec3& y) { return tau.value(y)(i, j); }, x, c, 2e-3);
          e1 = std::max(e1, std::fabs(fd - e.d1[c](i, j)) / sup_d1);
          double fd2 = orc::fd_partial(
              [&](const Vec3& y) { return tau.eval(y, 1).d1[c](i, j); }, x, (c + 1) % 3, 2e-3);
          e2 = std::max(e2, std::fabs(fd2 - e.d2[(c + 1) % 3][c](i, j)) / sup_d2);
        }
    }
  }
  CHECK(e1 < 1e-6);
  CHECK(e2 < 1e-6);
}

TEST_CASE("parity") {
  ShellTensorField tau = default_tau();
  CHECK(tau.parity_defect() < 1e-12);

  TTTensorS2 st = lie_rotation_tt(tau.payload_tt(), {1, 0, 0});
  ShellTensorField sigma = make_sigma(default_profile(), st);
  CHECK(sigma.parity_defect() < 1e-12);

  // rotation commutes with the antipode
  Mat3 R = rotation_about_axis(normalized(Vec3{1.0, 2.0, -0.5}), 0.8);
  CHECK(tau.rotated_by(R).parity_defect() < 1e-12);

  // one-sided octant support breaks parity
  OctantBump bump;
  ShellTensorField scm = make_sigma_cm(bump, default_profile(), make_grid(96, 192));
  CHECK(scm.parity_defect() > 1e-3);
}

TEST_CASE("spherical-coordinate divergence cross-validation") {
  ShellTensorField tau = default_tau();
  auto rng = orc::rng(47);
  std::vector<Vec3> pts;
  for (int i = 0; i < 100; ++i) pts.push_back(orc::random_point_in_shell(rng, 1.1, 1.9));
  double gs = gradient_scale(tau, pts);
  double worst = 0.0;
  for (const auto& x : pts)
    worst = std::max(worst, norm(flat_div(tau, x) - spherical_divergence(tau, x)));
  CHECK(worst / gs < 1e-6);

  // also on a scaled and rotated field
  Mat3 R = rotation_about_axis(normalized(Vec3{0.3, -1.0, 0.4}), 1.1);
  ShellTensorField tr = tau.rotated_by(R).scaled_to(2.0);
  double worst2 = 0.0;
  for (const auto& x : pts) {
    Vec3 y = 2.0 * x;
    worst2 = std::max(worst2, norm(flat_div(tr, y) - spherical_divergence(tr, y)));
  }
  CHECK(worst2 / gs < 1e-6);
}

TEST_CASE("support boundary smoothness") {
  ShellTensorField tau = default_tau();
  double worst = 0.0;
  for (double r : {tau.support_inner(), tau.support_outer()}) {
    for (Vec3 dir : {Vec3{1, 0, 0}, Vec3{0, 0.6, 0.8}, Vec3{-0.5, 0.5, 0.7071}}) {
      Vec3 x = (r / norm(dir)) * dir;
      ShellEval e = tau.eval(x, 1);
      worst = std::max(worst, frobenius(e.value));
      for (int c = 0; c < 3; ++c) worst = std::max(worst, frobenius(e.d1[c]));
    }
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("serialization round trip (CHSH1)") {
  ShellTensorField tau = default_tau();
  Mat3 R = rotation_about_axis(normalized(Vec3{0.2, 0.5, 1.0}), 0.65);
  ShellTensorField field = tau.rotated_by(R).multiplied(1.7).scaled_to(2.0);

  std::stringstream ss;
  field.save(ss);
  std::string blob = ss.str();
  CHECK(blob.substr(0, 5) == "CHSH1");

  std::stringstream in(blob);
  ShellTensorField loaded = ShellTensorField::load(in);
  auto rng = orc::rng(48);
  for (int i = 0; i < 20; ++i) {
    Vec3 x = orc::random_point_in_shell(rng, loaded.support_inner() * 1.01,
                                        loaded.support_outer() * 0.99);
    CHECK(frobenius(loaded.value(x) - field.value(x)) < 1e-13);
  }

  std::stringstream bad("NOPE\n{}\n");
  CHECK_THROWS(ShellTensorField::load(bad));
}
