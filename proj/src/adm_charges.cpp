#include "admshell/adm_charges.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace admshell {

namespace {
constexpr double kPi = std::numbers::pi;

// sphere quadrature of a pointwise integrand over |x| = rho
template <typename F>
double flux_integral(double rho, const GridPtr& grid, F&& integrand) {
  std::vector<double> vals(grid->size());
  for (int j = 0; j < grid->n_theta(); ++j)
    for (int m = 0; m < grid->n_phi(); ++m) {
      Vec3 n = grid->unit_vector(j, m);
      vals[grid->idx(j, m)] = integrand(rho * n, n);
    }
  return rho * rho * grid->integrate(vals);
}
}  // namespace

double adm_energy(const InitialData& data, double rho, const GridPtr& grid) {
  if (rho <= data.inner_radius()) throw std::invalid_argument("adm_energy: rho inside inner radius");
  double flux = flux_integral(rho, grid, [&](const Vec3& x, const Vec3& n) {
    MetricJet mj = data.metric_jet(x);
    double s = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) s += (mj.dg[i](i, j) - mj.dg[j](i, i)) * n[j];
    return s;
  });
  return flux / (16.0 * kPi);
}

Vec3 adm_linear_momentum(const InitialData& data, double rho, const GridPtr& grid) {
  if (rho <= data.inner_radius())
    throw std::invalid_argument("adm_linear_momentum: rho inside inner radius");
  Vec3 out{};
  for (int i = 0; i < 3; ++i) {
    out[i] = flux_integral(rho, grid, [&](const Vec3& x, const Vec3& n) {
      MomentumJet pj = data.momentum_jet(x);
      double s = 0.0;
      for (int j = 0; j < 3; ++j) s += pj.pi(i, j) * n[j];
      return s;
    }) / (8.0 * kPi);
  }
  return out;
}

Vec3 adm_angular_momentum(const InitialData& data, double rho, double E, const GridPtr& grid) {
  if (E <= 0.0) throw std::invalid_argument("adm_angular_momentum: requires E > 0");
  if (rho <= data.inner_radius())
    throw std::invalid_argument("adm_angular_momentum: rho inside inner radius");
  Vec3 out{};
  for (int i = 0; i < 3; ++i) {
    Vec3 ei{};
    ei[i] = 1.0;
    out[i] = flux_integral(rho, grid, [&](const Vec3& x, const Vec3& n) {
      MomentumJet pj = data.momentum_jet(x);
      Vec3 Y = cross(ei, x);
      double s = 0.0;
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k) s += pj.pi(j, k) * Y[j] * n[k];
      return s;
    }) / (8.0 * kPi * E);
  }
  return out;
}

Vec3 adm_center_of_mass(const InitialData& data, double rho, double E, const GridPtr& grid) {
  if (E <= 0.0) throw std::invalid_argument("adm_center_of_mass: requires E > 0");
  if (rho <= data.inner_radius())
    throw std::invalid_argument("adm_center_of_mass: rho inside inner radius");
  Vec3 out{};
  for (int p = 0; p < 3; ++p) {
    out[p] = flux_integral(rho, grid, [&](const Vec3& x, const Vec3& n) {
      MetricJet mj = data.metric_jet(x);
      double s = 0.0;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) s += x[p] * (mj.dg[i](i, j) - mj.dg[j](i, i)) * n[j];
      for (int i = 0; i < 3; ++i) s -= mj.g(i, p) * n[i] - mj.g(i, i) * n[p];
      return s;
    }) / (16.0 * kPi * E);
  }
  return out;
}

RichardsonResult extrapolate_charges(const std::vector<double>& rho, const std::vector<double>& val,
                                     double exponent) {
  if (rho.size() < 3) throw std::invalid_argument("extrapolate_charges: need at least 3 radii");
  for (std::size_t i = 1; i + 1 < rho.size(); ++i) {
    double q1 = rho[i] / rho[i - 1], q2 = rho[i + 1] / rho[i];
    if (std::fabs(q1 - q2) > 1e-9 * q1)
      throw std::invalid_argument("extrapolate_charges: radii must be geometrically spaced");
  }
  return richardson_extrapolate(rho, val, exponent);
}

ChargeSet charge_set(const InitialData& data, const std::vector<double>& radii, const GridPtr& grid,
                     bool normalize_by_E) {
  if (radii.size() < 3) throw std::invalid_argument("charge_set: need at least 3 radii");
  ChargeSet cs;
  cs.radii = radii;
  cs.normalized_by_E = normalize_by_E;

  std::vector<double> Ev(radii.size());
  std::array<std::vector<double>, 3> Pv, Jv, Cv;
  for (auto& v : Pv) v.resize(radii.size());
  for (auto& v : Jv) v.resize(radii.size());
  for (auto& v : Cv) v.resize(radii.size());

  parallel_for(radii.size(), [&](std::size_t a) {
    double rho = radii[a];
    Ev[a] = adm_energy(data, rho, grid);
    Vec3 P = adm_linear_momentum(data, rho, grid);
    Vec3 J = adm_angular_momentum(data, rho, 1.0, grid);  // raw flux; normalized below
    Vec3 C = adm_center_of_mass(data, rho, 1.0, grid);
    for (int i = 0; i < 3; ++i) {
      Pv[i][a] = P[i];
      Jv[i][a] = J[i];
      Cv[i][a] = C[i];
    }
  });

  RichardsonResult re = extrapolate_charges(radii, Ev);
  cs.E = re.value;
  cs.err_E = re.error;
  for (int i = 0; i < 3; ++i) {
    RichardsonResult rp = extrapolate_charges(radii, Pv[i]);
    cs.P[i] = rp.value;
    cs.err_P = std::max(cs.err_P, rp.error);
  }
  cs.JC_valid = (cs.E > 0.0) || !normalize_by_E;
  double en = (normalize_by_E && cs.E > 0.0) ? cs.E : 1.0;
  if (cs.JC_valid) {
    for (int i = 0; i < 3; ++i) {
      RichardsonResult rj = extrapolate_charges(radii, Jv[i]);
      RichardsonResult rc = extrapolate_charges(radii, Cv[i]);
      cs.J[i] = rj.value / en;
      cs.C[i] = rc.value / en;
      cs.err_J = std::max(cs.err_J, rj.error / en);
      cs.err_C = std::max(cs.err_C, rc.error / en);
    }
  }
  return cs;
}

std::string ChargeSet::to_json() const {
  std::ostringstream os;
  os.precision(15);
  os << "{\"E\":" << E << ",\"P\":[" << P[0] << ',' << P[1] << ',' << P[2] << "]";
  if (JC_valid) {
    os << ",\"J\":[" << J[0] << ',' << J[1] << ',' << J[2] << "]";
    os << ",\"C\":[" << C[0] << ',' << C[1] << ',' << C[2] << "]";
  } else {
    os << ",\"J\":null,\"C\":null";
  }
  os << ",\"radii\":[";
  for (std::size_t i = 0; i < radii.size(); ++i) os << radii[i] << (i + 1 < radii.size() ? "," : "");
  os << "],\"errors\":{\"E\":" << err_E << ",\"P\":" << err_P << ",\"J\":" << err_J
     << ",\"C\":" << err_C << "}";
  os << ",\"normalized_by_E\":" << (normalized_by_E ? "true" : "false") << "}";
  return os.str();
}

}  // namespace admshell
