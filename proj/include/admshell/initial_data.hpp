#ifndef ADMSHELL_INITIAL_DATA_HPP
#define ADMSHELL_INITIAL_DATA_HPP

#include <functional>
#include <memory>

#include "admshell/shell_fields.hpp"

namespace admshell {

struct MetricJet {
  Mat3 g;
  std::array<Mat3, 3> dg;                 // dg[k](i,j) = d g_ij / dx_k
  std::array<std::array<Mat3, 3>, 3> ddg; // ddg[k][l], symmetric in (k,l)
};

struct MomentumJet {
  Mat3 pi;
  std::array<Mat3, 3> dpi;
};

// Evaluator for an initial data set (g, pi) with analytic derivatives.
class InitialData {
 public:
  virtual ~InitialData() = default;

  virtual MetricJet metric_jet(const Vec3& x) const = 0;
  virtual MomentumJet momentum_jet(const Vec3& x) const = 0;

  virtual double inner_radius() const { return 0.0; }

  Mat3 metric(const Vec3& x) const { return metric_jet(x).g; }
  Mat3 momentum(const Vec3& x) const { return momentum_jet(x).pi; }
};

using DataPtr = std::shared_ptr<const InitialData>;

DataPtr flat_data();
// g = (1 + m/(2|x-c|))^4 delta, pi = 0.
DataPtr schwarzschild_data(double mass, const Vec3& center = {0, 0, 0});

enum class BowenYorkMode { angular, linear };
// Flat-space Bowen-York momentum tensor added to a base data set:
// angular: pi_ij = (3/r^3)(n_i eps_jkl + n_j eps_ikl) J_k n_l
// linear:  pi_ij = (3/(2 r^2))(P_i n_j + P_j n_i - (delta_ij - n_i n_j) P.n)
DataPtr add_bowen_york(DataPtr base, BowenYorkMode mode, const Vec3& param);

// (g + sigma^k, pi + tau^k): either field pointer may be null.
DataPtr add_shell(DataPtr base, std::shared_ptr<const ShellTensorField> sigma,
                  std::shared_ptr<const ShellTensorField> tau);

// In-chart rescaling x -> x/lambda of the paper's (lambda^2 g, lambda pi):
// g'(x) = g(x/lambda), pi'(x) = lambda^-1 pi(x/lambda); all four charges
// scale linearly in lambda.
DataPtr rescale_data(DataPtr base, double lambda);

// Data rotated by R: g'(x) = R g(R^T x) R^T, same for pi.
DataPtr rotate_data(DataPtr base, const Mat3& R);

// Smooth scalar/vector fields with analytic jets, for corrector assembly.
struct ScalarField3 {
  std::function<double(const Vec3&)> value;
  std::function<Vec3(const Vec3&)> grad;
  std::function<Mat3(const Vec3&)> hess;
};
struct VectorField3 {
  std::function<Vec3(const Vec3&)> value;
  std::function<Mat3(const Vec3&)> jac;                   // jac(i,j) = d X_i / dx_j
  std::function<std::array<Mat3, 3>(const Vec3&)> hess;   // hess[i](j,k) = d^2 X_i / dx_j dx_k
};

// Conformal + shift dressing of Proposition-local type:
//   g_out = u^4 g_in,  pi_out = u^2 (pi_in + L_g X)
// with (L_g X)_ij = X_i;j + X_j;i - (div_g X) g_ij (X given as a covector).
DataPtr conformal_shift_data(DataPtr base, ScalarField3 u, VectorField3 X);

}  // namespace admshell

#endif
