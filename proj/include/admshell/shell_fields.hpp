#ifndef ADMSHELL_SHELL_FIELDS_HPP
#define ADMSHELL_SHELL_FIELDS_HPP

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>

#include "admshell/radial_profile.hpp"
#include "admshell/sphere_ops.hpp"

namespace admshell {

enum class ShellKind { metric_sigma, momentum_tau };

// Scaling weight: metric fields scale as k^-1 sigma(x/k), momentum fields
// as k^-2 tau(x/k).
inline int scaling_weight(ShellKind k) { return k == ShellKind::metric_sigma ? 1 : 2; }

struct ShellEval {
  Mat3 value;                          // F_ij
  std::array<Mat3, 3> d1;              // d1[c](i,j) = dF_ij/dx_c
  std::array<std::array<Mat3, 3>, 3> d2;  // d2[c][d] = d^2 F_ij / dx_c dx_d
};

// Compactly supported symmetric trace-free deformation tensor on the shell
// {k a < |x| < k b}, assembled from the separable ansatz
//   F = 2 f(r) w \odot dr + W(r) w2
// with angular payload (one-form w, TT tensor w2) on S^2 and the derived
// radial factor W: the tau ansatz uses W = (r^2 f)' and the sigma ansatz
// W = 2 r (r f)'. Cartesian components and first/second derivatives come
// from tabulated angular scalars plus analytic radial factors.
class ShellTensorField {
 public:
  // Angular tables of one scalar on the sphere with partial derivatives.
  struct AngularTable {
    std::vector<double> v, dt, dp, dtt, dtp, dpp;
  };

  enum class Ansatz { tau_type, sigma_type };

  ShellTensorField(ShellKind kind, Ansatz ansatz, RadialProfile prof, GridPtr grid,
                   TTTensorS2 payload_tt, OneFormS2 payload_oneform);

  ShellKind kind() const { return kind_; }
  Ansatz ansatz() const { return ansatz_; }
  double scale() const { return k_; }
  double factor() const { return factor_; }
  const Mat3& rotation() const { return rot_; }
  const RadialProfile& profile() const { return prof_; }
  const GridPtr& grid() const { return grid_; }
  const TTTensorS2& payload_tt() const { return payload_tt_; }
  const OneFormS2& payload_oneform() const { return payload_oneform_; }

  // support is {x : k a < |x| < k b}
  double support_inner() const { return k_ * prof_.a(); }
  double support_outer() const { return k_ * prof_.b(); }

  Mat3 value(const Vec3& x) const;
  ShellEval eval(const Vec3& x, int derivs) const;

  // k^-w F(x/k) for the metric (w=1) / momentum (w=2) scaling weight.
  ShellTensorField scaled_to(double k) const;
  // Field rotated by R: F'(x) = R F(R^T x) R^T.
  ShellTensorField rotated_by(const Mat3& R) const;
  ShellTensorField multiplied(double c) const;

  // max_x |F(x) - F(-x)| over the deterministic sample set.
  double parity_defect() const;

  void save(std::ostream& os) const;
  static ShellTensorField load(std::istream& is);
  void save_file(const std::string& path) const;
  static ShellTensorField load_file(const std::string& path);

 private:
  ShellKind kind_;
  Ansatz ansatz_;
  RadialProfile prof_;
  GridPtr grid_;
  TTTensorS2 payload_tt_;
  OneFormS2 payload_oneform_;
  double k_ = 1.0;
  double factor_ = 1.0;
  Mat3 rot_ = Mat3::identity();
  bool rotated_ = false;

  // Cartesian angular scalars: W[i] one-form components, T2[ij packed 0..5]
  // tensor components, with grid partials.
  std::shared_ptr<const std::array<AngularTable, 3>> wtab_;
  std::shared_ptr<const std::array<AngularTable, 6>> ttab_;

  void tabulate();
  // radial factors f1 = f/r, f2 = W/r^2 and derivatives at unit scale
  std::array<double, 3> radial_f1(double r) const;
  std::array<double, 3> radial_f2(double r) const;
  ShellEval eval_unit(const Vec3& y, int derivs) const;
};

// tau = -2 q div(tau~) (.) dr + (r^2 q)' tau~ with tau~ = delta*(*du);
// divergence-free by Lemma div_eq. Rejects odd-degree seeds.
ShellTensorField make_tau(const RadialProfile& q, const PolynomialS2Function& u, const GridPtr& grid,
                          int hodge_orientation = +1);

// sigma = -2 p div(sigma~) (.) dr + 2 r (r p)' sigma~; L sigma = 0 for any
// trace-free symmetric sigma~.
ShellTensorField make_sigma(const RadialProfile& p, const TTTensorS2& sigma_tilde);

// Center-of-mass seed: sigma built by the tau ansatz (div sigma = 0) from a
// scalar bump supported strictly inside the first octant.
struct OctantBump {
  double theta_lo = 0.3, theta_hi = 1.2;
  double phi_lo = 0.3, phi_hi = 1.2;
  // poly_power > 0: window [4 t (1-t)]^p per factor (C^{p-1}, resolvable
  // spectra); poly_power == 0: exp(-sharpness / t(1-t)) form
  int poly_power = 8;
  double sharpness = 0.35;

  double operator()(double theta, double phi) const;
};
ShellTensorField make_sigma_cm(const OctantBump& bump, const RadialProfile& q, const GridPtr& grid,
                               int hodge_orientation = +1);

// Spherical-coordinate divergence of the ansatz (the closed-form reduction
// of div in polar coordinates), for cross-validation against the Cartesian
// derivative route. Returns the covector div(F)_i at x.
Vec3 spherical_divergence(const ShellTensorField& F, const Vec3& x);

}  // namespace admshell

#endif
