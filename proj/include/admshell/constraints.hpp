#ifndef ADMSHELL_CONSTRAINTS_HPP
#define ADMSHELL_CONSTRAINTS_HPP

#include <string>
#include <vector>

#include "admshell/initial_data.hpp"

namespace admshell {

struct ChristoffelJet {
  Mat3 ginv;
  std::array<Mat3, 3> gamma;                   // gamma[k](i,j) = Gamma^k_ij
  std::array<Mat3, 3> dginv;                   // dginv[c]
  std::array<std::array<Mat3, 3>, 3> dgamma;   // dgamma[c][k](i,j) = d_c Gamma^k_ij
};
ChristoffelJet christoffel_jet(const MetricJet& m);

// Scalar curvature of g from the metric jet.
double scalar_curvature(const MetricJet& m);

// Hamiltonian constraint R(g) + 1/2 (tr_g pi)^2 - |pi|_g^2 at x.
double hamiltonian(const InitialData& data, const Vec3& x);
// Momentum constraint (div_g pi)_j at x.
Vec3 momentum_constraint(const InitialData& data, const Vec3& x);

// Flat-background linearized operators from exact field derivatives.
double linearized_L(const ShellTensorField& sigma, const Vec3& x);
Vec3 flat_div(const ShellTensorField& tau, const Vec3& x);

// Pointwise magnitudes |F|, |DF|, |D^2 F| for the weighted norm.
struct FieldMagnitudes {
  std::function<std::array<double, 3>(const Vec3&)> eval;
  double r_lo = 0.0, r_hi = 0.0;  // radial support bounds of the integrand
};
FieldMagnitudes shell_magnitudes(const ShellTensorField& f);

// Weighted Sobolev norm W^{k,p}_{-q} truncated at r_hi, with rho = max(|x|,1):
//   ( int sum_{|a|<=k} (|D^a F| rho^{|a|+q})^p rho^-3 dvol )^(1/p)
struct WeightedNormResult {
  double value = 0.0;
  double truncation_sensitivity = 0.0;  // relative change when r_hi halves
};
WeightedNormResult weighted_norm(const FieldMagnitudes& f, int order, double p, double q_decay,
                                 const GridPtr& grid, int radial_nodes = 32);

struct ResidualRow {
  double k;
  double sup_H, l2_H, sup_M, l2_M;
};
struct ConstraintResidual {
  std::vector<ResidualRow> rows;
  double fitted_exponent = 0.0;  // decay of max(sup_H, sup_M) vs k

  std::string to_csv() const;
};
// Residual norms of Phi(g, pi) over the shells A_k = {k < |x| < 2k}.
ConstraintResidual residual_report(const InitialData& data, const std::vector<double>& k_list,
                                   const GridPtr& grid, int radial_nodes = 16);

}  // namespace admshell

#endif
