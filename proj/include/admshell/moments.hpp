#ifndef ADMSHELL_MOMENTS_HPP
#define ADMSHELL_MOMENTS_HPP

#include <functional>
#include <vector>

#include "admshell/shell_fields.hpp"

namespace admshell {

struct MomentVector {
  Vec3 values{};
  int radial_nodes = 0;
  double quad_error = 0.0;  // two-resolution radial comparison, absolute
};

// T_(sigma,tau)(v) = int_{A_k} [1/2 tau_ij,l (Y_v)^l + tau_il (Y_v)^l_,j] sigma_ij dx
// with Y_v = v x position; linear in v and bilinear in (sigma, tau).
double angular_moment(const ShellTensorField& sigma, const ShellTensorField& tau, const Vec3& v,
                      int radial_nodes = 48);
MomentVector angular_moment_vector(const ShellTensorField& sigma, const ShellTensorField& tau,
                                   int radial_nodes = 48);

// T_sigma(v) = int x.v sum_{ijk} (sigma_ij,k)^2 dx
double cm_moment(const ShellTensorField& sigma, const Vec3& v, int radial_nodes = 48);
MomentVector cm_moment_vector(const ShellTensorField& sigma, int radial_nodes = 48);

// Equivalent form of the angular integrand: 1/2 (Lie_Y tau)_ij sigma_ij.
double angular_moment_lie_form(const ShellTensorField& sigma, const ShellTensorField& tau,
                               const Vec3& v, int radial_nodes = 48);

// Field rotated by R: F'(x) = R F(R^-1 x) R^T; moments transform as t -> R t.
ShellTensorField rotate_pullback(const ShellTensorField& F, const Mat3& R);

struct TargetedPair {
  ShellTensorField sigma, tau;
  Mat3 rotation;
  double tau_factor;
  MomentVector base_moment;
};
// Rotate and scale the pair so the measured angular moment equals lambda.
TargetedPair target_angular(const ShellTensorField& sigma, const ShellTensorField& tau,
                            const Vec3& lambda, int radial_nodes = 48);

struct TargetedCm {
  ShellTensorField sigma;
  Mat3 rotation;
  double sigma_factor;
  MomentVector base_moment;
};
// Rotate and scale sigma so the CM moment equals beta (quadratic scaling).
TargetedCm target_cm(const ShellTensorField& sigma, const Vec3& beta, int radial_nodes = 48);

// sqrt(|alpha|/|alpha0|) (R1^-1)* applied to the base pair, R1 alpha0^ = alpha^;
// continuous in alpha away from zero.
std::pair<ShellTensorField, ShellTensorField> continuous_selection(
    const Vec3& alpha, const ShellTensorField& sigma, const ShellTensorField& tau, const Vec3& alpha0);

struct FixedPointResult {
  std::vector<double> z;
  std::vector<double> residual_history;
  int iterations = 0;
  bool converged = false;
};
// Damped iteration z <- z - omega (f(z) - z0) for a map with |f(z) - z| <= a
// on the ball (checked at every queried point; violation throws).
FixedPointResult fixed_point_target(
    const std::function<std::vector<double>(const std::vector<double>&)>& f,
    const std::vector<double>& z0, double a, double tol, int max_iter, double omega = 1.0);

}  // namespace admshell

#endif
