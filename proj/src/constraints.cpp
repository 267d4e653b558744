#include "admshell/constraints.hpp"

#include <cmath>
#include <sstream>

namespace admshell {

ChristoffelJet christoffel_jet(const MetricJet& m) {
  ChristoffelJet out;
  out.ginv = inverse(m.g);
  for (int k = 0; k < 3; ++k)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double s = 0.0;
        for (int l = 0; l < 3; ++l)
          s += 0.5 * out.ginv(k, l) * (m.dg[i](j, l) + m.dg[j](i, l) - m.dg[l](i, j));
        out.gamma[k](i, j) = s;
      }
  for (int c = 0; c < 3; ++c) {
    // d ginv = -ginv dg ginv
    out.dginv[c] = -1.0 * matmul(out.ginv, matmul(m.dg[c], out.ginv));
    for (int k = 0; k < 3; ++k)
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
          double s = 0.0;
          for (int l = 0; l < 3; ++l) {
            s += 0.5 * out.dginv[c](k, l) * (m.dg[i](j, l) + m.dg[j](i, l) - m.dg[l](i, j));
            s += 0.5 * out.ginv(k, l) *
                 (m.ddg[c][i](j, l) + m.ddg[c][j](i, l) - m.ddg[c][l](i, j));
          }
          out.dgamma[c][k](i, j) = s;
        }
  }
  return out;
}

double scalar_curvature(const MetricJet& m) {
  ChristoffelJet ch = christoffel_jet(m);
  double R = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double ric = 0.0;
      for (int k = 0; k < 3; ++k) {
        ric += ch.dgamma[k][k](i, j) - ch.dgamma[i][k](k, j);
        for (int l = 0; l < 3; ++l)
          ric += ch.gamma[k](k, l) * ch.gamma[l](i, j) - ch.gamma[k](i, l) * ch.gamma[l](k, j);
      }
      R += ch.ginv(i, j) * ric;
    }
  return R;
}

double hamiltonian(const InitialData& data, const Vec3& x) {
  MetricJet mj = data.metric_jet(x);
  MomentumJet pj = data.momentum_jet(x);
  double R = scalar_curvature(mj);
  Mat3 ginv = inverse(mj.g);
  double tr = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) tr += ginv(i, j) * pj.pi(i, j);
  double norm2 = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l)
          norm2 += ginv(i, k) * ginv(j, l) * pj.pi(i, j) * pj.pi(k, l);
  return R + 0.5 * tr * tr - norm2;
}

Vec3 momentum_constraint(const InitialData& data, const Vec3& x) {
  MetricJet mj = data.metric_jet(x);
  MomentumJet pj = data.momentum_jet(x);
  ChristoffelJet ch = christoffel_jet(mj);
  Vec3 out{};
  for (int j = 0; j < 3; ++j) {
    double s = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int k = 0; k < 3; ++k) {
        double cov = pj.dpi[i](k, j);
        for (int l = 0; l < 3; ++l)
          cov -= ch.gamma[l](i, k) * pj.pi(l, j) + ch.gamma[l](i, j) * pj.pi(k, l);
        s += ch.ginv(i, k) * cov;
      }
    out[j] = s;
  }
  return out;
}

double linearized_L(const ShellTensorField& sigma, const Vec3& x) {
  ShellEval e = sigma.eval(x, 2);
  double s = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) s += e.d2[i][j](i, j) - e.d2[j][j](i, i);
  return s;
}

Vec3 flat_div(const ShellTensorField& tau, const Vec3& x) {
  ShellEval e = tau.eval(x, 1);
  Vec3 out{};
  for (int j = 0; j < 3; ++j) {
    double s = 0.0;
    for (int i = 0; i < 3; ++i) s += e.d1[i](i, j);
    out[j] = s;
  }
  return out;
}

FieldMagnitudes shell_magnitudes(const ShellTensorField& f) {
  FieldMagnitudes m;
  m.r_lo = f.support_inner();
  m.r_hi = f.support_outer();
  m.eval = [&f](const Vec3& x) -> std::array<double, 3> {
    ShellEval e = f.eval(x, 2);
    double a0 = frobenius(e.value);
    double a1 = 0.0, a2 = 0.0;
    for (int c = 0; c < 3; ++c) {
      double fr = frobenius(e.d1[c]);
      a1 += fr * fr;
    }
    for (int c = 0; c < 3; ++c)
      for (int d = 0; d < 3; ++d) {
        double fr = frobenius(e.d2[c][d]);
        a2 += fr * fr;
      }
    return {a0, std::sqrt(a1), std::sqrt(a2)};
  };
  return m;
}

WeightedNormResult weighted_norm(const FieldMagnitudes& f, int order, double p, double q_decay,
                                 const GridPtr& grid, int radial_nodes) {
  if (order < 0 || order > 2) throw std::invalid_argument("weighted_norm: order in {0,1,2}");
  if (!(p > 3.0)) throw std::invalid_argument("weighted_norm: p > 3 required");
  if (!(q_decay > 0.5 && q_decay < 1.0))
    throw std::invalid_argument("weighted_norm: q in (1/2, 1) required");
  if (!(f.r_hi > f.r_lo)) throw std::invalid_argument("weighted_norm: empty radial range");

  auto integrate_to = [&](double r_hi) {
    GaussRule rg = gauss_legendre_on(radial_nodes, f.r_lo, r_hi);
    std::vector<double> contrib(rg.x.size());
    parallel_for(rg.x.size(), [&](std::size_t a) {
      double r = rg.x[a];
      double rho = std::max(r, 1.0);
      std::vector<double> ang(grid->size());
      for (int j = 0; j < grid->n_theta(); ++j)
        for (int m = 0; m < grid->n_phi(); ++m) {
          Vec3 x = r * grid->unit_vector(j, m);
          auto mag = f.eval(x);
          double s = 0.0;
          for (int o = 0; o <= order; ++o) s += std::pow(mag[o] * std::pow(rho, o + q_decay), p);
          ang[grid->idx(j, m)] = s;
        }
      contrib[a] = rg.w[a] * r * r * std::pow(rho, -3.0) * grid->integrate(ang);
    });
    return pairwise_sum(contrib);
  };

  double full = integrate_to(f.r_hi);
  double half = integrate_to(std::max(f.r_lo * 1.0001, 0.5 * f.r_hi));
  WeightedNormResult out;
  out.value = std::pow(full, 1.0 / p);
  double hv = std::pow(half, 1.0 / p);
  out.truncation_sensitivity = (out.value > 0.0) ? std::fabs(out.value - hv) / out.value : 0.0;
  return out;
}

std::string ConstraintResidual::to_csv() const {
  std::ostringstream os;
  os.precision(12);
  os << "k,sup_H,l2_H,sup_M,l2_M,fitted_exponent\n";
  for (const auto& r : rows)
    os << r.k << ',' << r.sup_H << ',' << r.l2_H << ',' << r.sup_M << ',' << r.l2_M << ','
       << fitted_exponent << '\n';
  return os.str();
}

ConstraintResidual residual_report(const InitialData& data, const std::vector<double>& k_list,
                                   const GridPtr& grid, int radial_nodes) {
  if (k_list.empty()) throw std::invalid_argument("residual_report: empty region");
  ConstraintResidual out;
  for (double k : k_list) {
    GaussRule rg = gauss_legendre_on(radial_nodes, k, 2.0 * k);
    std::vector<double> supH(rg.x.size(), 0.0), supM(rg.x.size(), 0.0);
    std::vector<double> l2H(rg.x.size(), 0.0), l2M(rg.x.size(), 0.0);
    parallel_for(rg.x.size(), [&](std::size_t a) {
      double r = rg.x[a];
      std::vector<double> h2(grid->size()), m2(grid->size());
      double sh = 0.0, sm = 0.0;
      for (int j = 0; j < grid->n_theta(); ++j)
        for (int m = 0; m < grid->n_phi(); ++m) {
          Vec3 x = r * grid->unit_vector(j, m);
          double H = hamiltonian(data, x);
          Vec3 M = momentum_constraint(data, x);
          double Mn = norm(M);
          sh = std::max(sh, std::fabs(H));
          sm = std::max(sm, Mn);
          h2[grid->idx(j, m)] = H * H;
          m2[grid->idx(j, m)] = Mn * Mn;
        }
      supH[a] = sh;
      supM[a] = sm;
      l2H[a] = rg.w[a] * r * r * grid->integrate(h2);
      l2M[a] = rg.w[a] * r * r * grid->integrate(m2);
    });
    ResidualRow row;
    row.k = k;
    row.sup_H = *std::max_element(supH.begin(), supH.end());
    row.sup_M = *std::max_element(supM.begin(), supM.end());
    row.l2_H = std::sqrt(pairwise_sum(l2H));
    row.l2_M = std::sqrt(pairwise_sum(l2M));
    out.rows.push_back(row);
  }
  if (out.rows.size() >= 2) {
    std::vector<double> ks, sups;
    for (const auto& r : out.rows) {
      ks.push_back(r.k);
      sups.push_back(std::max(r.sup_H, r.sup_M));
    }
    out.fitted_exponent = -log_log_slope(ks, sups);
  }
  return out;
}

}  // namespace admshell
