#include "admshell/moments.hpp"

#include <cmath>
#include <stdexcept>

namespace admshell {

namespace {

struct ShellRegion {
  double lo, hi;
  bool empty;
};

ShellRegion common_support(const ShellTensorField& a, const ShellTensorField& b) {
  ShellRegion r;
  r.lo = std::max(a.support_inner(), b.support_inner());
  r.hi = std::min(a.support_outer(), b.support_outer());
  r.empty = !(r.lo < r.hi);
  return r;
}

// One radial-resolution sweep of the three angular-moment components.
Vec3 angular_sweep(const ShellTensorField& sigma, const ShellTensorField& tau, int radial_nodes) {
  ShellRegion reg = common_support(sigma, tau);
  if (reg.empty) return {0, 0, 0};
  const auto& g = *sigma.grid();
  GaussRule rg = gauss_legendre_on(radial_nodes, reg.lo, reg.hi);
  std::vector<std::array<double, 3>> slot(rg.x.size());
  parallel_for(rg.x.size(), [&](std::size_t a) {
    double r = rg.x[a];
    std::array<std::vector<double>, 3> ang;
    for (auto& v : ang) v.assign(g.size(), 0.0);
    for (int j = 0; j < g.n_theta(); ++j)
      for (int m = 0; m < g.n_phi(); ++m) {
        Vec3 x = r * g.unit_vector(j, m);
        ShellEval te = tau.eval(x, 1);
        Mat3 sv = sigma.value(x);
        // eps_{l p j}: (Y_p)^l = eps_{l p b} x_b, (Y_p)^l_,j = eps_{l p j}
        auto eps = [](int l, int p2, int j2) -> double {
          if (l == p2 || p2 == j2 || l == j2) return 0.0;
          return ((p2 - l + 3) % 3 == 1) ? 1.0 : -1.0;
        };
        for (int p = 0; p < 3; ++p) {
          Vec3 ep{};
          ep[p] = 1.0;
          Vec3 Y = cross(ep, x);
          double acc = 0.0;
          for (int i = 0; i < 3; ++i)
            for (int jj = 0; jj < 3; ++jj) {
              double t1 = 0.0;
              for (int l = 0; l < 3; ++l) t1 += 0.5 * te.d1[l](i, jj) * Y[l];
              double t2 = 0.0;
              for (int l = 0; l < 3; ++l) t2 += te.value(i, l) * eps(l, p, jj);
              acc += (t1 + t2) * sv(i, jj);
            }
          ang[p][g.idx(j, m)] = acc;
        }
      }
    for (int p = 0; p < 3; ++p) slot[a][p] = rg.w[a] * r * r * g.integrate(ang[p]);
  });
  Vec3 out{};
  for (int p = 0; p < 3; ++p) {
    std::vector<double> xs(slot.size());
    for (std::size_t a = 0; a < slot.size(); ++a) xs[a] = slot[a][p];
    out[p] = pairwise_sum(xs);
  }
  return out;
}

Vec3 cm_sweep(const ShellTensorField& sigma, int radial_nodes) {
  const auto& g = *sigma.grid();
  GaussRule rg = gauss_legendre_on(radial_nodes, sigma.support_inner(), sigma.support_outer());
  std::vector<std::array<double, 3>> slot(rg.x.size());
  parallel_for(rg.x.size(), [&](std::size_t a) {
    double r = rg.x[a];
    std::array<std::vector<double>, 3> ang;
    for (auto& v : ang) v.assign(g.size(), 0.0);
    for (int j = 0; j < g.n_theta(); ++j)
      for (int m = 0; m < g.n_phi(); ++m) {
        Vec3 x = r * g.unit_vector(j, m);
        ShellEval se = sigma.eval(x, 1);
        double grad2 = 0.0;
        for (int c = 0; c < 3; ++c) {
          double fr = frobenius(se.d1[c]);
          grad2 += fr * fr;
        }
        for (int p = 0; p < 3; ++p) ang[p][g.idx(j, m)] = x[p] * grad2;
      }
    for (int p = 0; p < 3; ++p) slot[a][p] = rg.w[a] * r * r * g.integrate(ang[p]);
  });
  Vec3 out{};
  for (int p = 0; p < 3; ++p) {
    std::vector<double> xs(slot.size());
    for (std::size_t a = 0; a < slot.size(); ++a) xs[a] = slot[a][p];
    out[p] = pairwise_sum(xs);
  }
  return out;
}

void check_shells(const ShellTensorField& a, const ShellTensorField& b) {
  if (a.scale() != b.scale())
    throw std::invalid_argument("moment: fields on mismatched shells (scales differ)");
}

}  // namespace

MomentVector angular_moment_vector(const ShellTensorField& sigma, const ShellTensorField& tau,
                                   int radial_nodes) {
  check_shells(sigma, tau);
  MomentVector mv;
  mv.radial_nodes = radial_nodes;
  mv.values = angular_sweep(sigma, tau, radial_nodes);
  Vec3 coarse = angular_sweep(sigma, tau, std::max(4, radial_nodes / 2));
  mv.quad_error = norm(mv.values - coarse);
  return mv;
}

double angular_moment(const ShellTensorField& sigma, const ShellTensorField& tau, const Vec3& v,
                      int radial_nodes) {
  check_shells(sigma, tau);
  Vec3 t = angular_sweep(sigma, tau, radial_nodes);
  return dot(t, v);
}

MomentVector cm_moment_vector(const ShellTensorField& sigma, int radial_nodes) {
  MomentVector mv;
  mv.radial_nodes = radial_nodes;
  mv.values = cm_sweep(sigma, radial_nodes);
  Vec3 coarse = cm_sweep(sigma, std::max(4, radial_nodes / 2));
  mv.quad_error = norm(mv.values - coarse);
  return mv;
}

double cm_moment(const ShellTensorField& sigma, const Vec3& v, int radial_nodes) {
  return dot(cm_sweep(sigma, radial_nodes), v);
}

double angular_moment_lie_form(const ShellTensorField& sigma, const ShellTensorField& tau,
                               const Vec3& v, int radial_nodes) {
  check_shells(sigma, tau);
  ShellRegion reg = common_support(sigma, tau);
  if (reg.empty) return 0.0;
  const auto& g = *sigma.grid();
  GaussRule rg = gauss_legendre_on(radial_nodes, reg.lo, reg.hi);
  std::vector<double> slot(rg.x.size());
  parallel_for(rg.x.size(), [&](std::size_t a) {
    double r = rg.x[a];
    std::vector<double> ang(g.size());
    for (int j = 0; j < g.n_theta(); ++j)
      for (int m = 0; m < g.n_phi(); ++m) {
        Vec3 x = r * g.unit_vector(j, m);
        ShellEval te = tau.eval(x, 1);
        Mat3 sv = sigma.value(x);
        Vec3 Y = cross(v, x);
        auto eps = [](int l, int p2, int j2) -> double {
          if (l == p2 || p2 == j2 || l == j2) return 0.0;
          return ((p2 - l + 3) % 3 == 1) ? 1.0 : -1.0;
        };
        // (Lie_Y tau)_ij = tau_ij,l Y^l + tau_lj Y^l_,i + tau_il Y^l_,j
        double acc = 0.0;
        for (int i = 0; i < 3; ++i)
          for (int jj = 0; jj < 3; ++jj) {
            double lie = 0.0;
            for (int l = 0; l < 3; ++l) {
              lie += te.d1[l](i, jj) * Y[l];
              double dyl_i = 0.0, dyl_j = 0.0;
              for (int p = 0; p < 3; ++p) {
                dyl_i += eps(l, p, i) * v[p];
                dyl_j += eps(l, p, jj) * v[p];
              }
              lie += te.value(l, jj) * dyl_i + te.value(i, l) * dyl_j;
            }
            acc += 0.5 * lie * sv(i, jj);
          }
        ang[g.idx(j, m)] = acc;
      }
    slot[a] = rg.w[a] * r * r * g.integrate(ang);
  });
  return pairwise_sum(slot);
}

ShellTensorField rotate_pullback(const ShellTensorField& F, const Mat3& R) { return F.rotated_by(R); }

TargetedPair target_angular(const ShellTensorField& sigma, const ShellTensorField& tau,
                            const Vec3& lambda, int radial_nodes) {
  if (norm(lambda) == 0.0)
    throw std::invalid_argument("target_angular: lambda must be nonzero (use the two-shell trick)");
  MomentVector t = angular_moment_vector(sigma, tau, radial_nodes);
  if (norm(t.values) < 1e3 * t.quad_error || norm(t.values) == 0.0)
    throw std::runtime_error(
        "target_angular: base moment vanishes; pick a seed u with nonzero Lie derivative "
        "(non-axisymmetric even polynomial)");
  Mat3 R = rotation_between(t.values, lambda);
  double c = norm(lambda) / norm(t.values);
  TargetedPair out{sigma.rotated_by(R), tau.rotated_by(R).multiplied(c), R, c, t};
  return out;
}

TargetedCm target_cm(const ShellTensorField& sigma, const Vec3& beta, int radial_nodes) {
  if (norm(beta) == 0.0)
    throw std::invalid_argument("target_cm: beta must be nonzero (use the two-shell trick)");
  MomentVector t = cm_moment_vector(sigma, radial_nodes);
  if (norm(t.values) < 1e3 * t.quad_error || norm(t.values) == 0.0)
    throw std::runtime_error("target_cm: base moment vanishes; seed must break parity (octant bump)");
  Mat3 R = rotation_between(t.values, beta);
  double c = norm(beta) / norm(t.values);
  TargetedCm out{sigma.rotated_by(R).multiplied(std::sqrt(c)), R, std::sqrt(c), t};
  return out;
}

std::pair<ShellTensorField, ShellTensorField> continuous_selection(
    const Vec3& alpha, const ShellTensorField& sigma, const ShellTensorField& tau,
    const Vec3& alpha0) {
  if (norm(alpha) == 0.0 || norm(alpha0) == 0.0)
    throw std::invalid_argument("continuous_selection: zero vector");
  Mat3 R1 = rotation_between(alpha0, alpha);
  double s = std::sqrt(norm(alpha) / norm(alpha0));
  return {sigma.rotated_by(R1).multiplied(s), tau.rotated_by(R1).multiplied(s)};
}

FixedPointResult fixed_point_target(
    const std::function<std::vector<double>(const std::vector<double>&)>& f,
    const std::vector<double>& z0, double a, double tol, int max_iter, double omega) {
  auto dist = [](const std::vector<double>& x, const std::vector<double>& y) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - y[i]) * (x[i] - y[i]);
    return std::sqrt(s);
  };
  auto query = [&](const std::vector<double>& z) {
    std::vector<double> fz = f(z);
    if (fz.size() != z.size()) throw std::runtime_error("fixed_point_target: dimension mismatch");
    double defect = dist(fz, z);
    if (defect > a)
      throw std::runtime_error("fixed_point_target: hypothesis |f(z)-z| <= a violated (defect " +
                               std::to_string(defect) + " > " + std::to_string(a) + ")");
    return fz;
  };

  FixedPointResult out;
  out.z = z0;
  std::vector<double> fz = query(out.z);
  double res = dist(fz, z0);
  out.residual_history.push_back(res);
  int it = 0;
  while (res > tol && it < max_iter) {
    std::vector<double> cand(out.z.size());
    for (std::size_t i = 0; i < cand.size(); ++i) cand[i] = out.z[i] - omega * (fz[i] - z0[i]);
    std::vector<double> fc = query(cand);
    double rc = dist(fc, z0);
    ++it;
    if (rc <= res || omega <= 1.0 / 64.0) {
      out.z = cand;
      fz = fc;
      res = rc;
      out.residual_history.push_back(res);
    } else {
      omega *= 0.5;
    }
  }
  out.iterations = it;
  out.converged = (res <= tol);
  return out;
}

}  // namespace admshell
