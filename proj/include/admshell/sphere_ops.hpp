#ifndef ADMSHELL_SPHERE_OPS_HPP
#define ADMSHELL_SPHERE_OPS_HPP

#include <utility>
#include <vector>

#include "admshell/sphere_grid.hpp"

namespace admshell {

struct ScalarS2 {
  GridPtr grid;
  std::vector<double> values;

  ScalarS2() = default;
  explicit ScalarS2(GridPtr g) : grid(std::move(g)) { values.assign(grid->size(), 0.0); }
};

// Orthonormal-frame components (e_theta, e_phi with e_phi = sin^-1 d/dphi).
struct OneFormS2 {
  GridPtr grid;
  std::vector<double> comp_theta, comp_phi;

  OneFormS2() = default;
  explicit OneFormS2(GridPtr g) : grid(std::move(g)) {
    comp_theta.assign(grid->size(), 0.0);
    comp_phi.assign(grid->size(), 0.0);
  }
};

// Trace-free symmetric 2-tensor in the orthonormal frame; stores the two
// independent components T_tt (= -T_pp) and T_tp.
struct TTTensorS2 {
  GridPtr grid;
  std::vector<double> comp_tt, comp_tp;

  TTTensorS2() = default;
  explicit TTTensorS2(GridPtr g) : grid(std::move(g)) {
    comp_tt.assign(grid->size(), 0.0);
    comp_tp.assign(grid->size(), 0.0);
  }
};

// Sum of monomials c * x^a y^b z^c restricted to |x| = 1.
struct PolynomialS2Function {
  struct Monomial {
    double coef;
    std::array<int, 3> expo;
  };
  std::vector<Monomial> terms;

  double operator()(const Vec3& x) const;
  bool all_even_degree() const;
  bool all_odd_degree() const;
};

ScalarS2 sample(const PolynomialS2Function& f, const GridPtr& grid);
ScalarS2 sample(const std::function<double(double, double)>& f_theta_phi, const GridPtr& grid);

// du in the orthonormal frame: (d_theta u, sin^-1 theta d_phi u).
OneFormS2 exterior_derivative(const ScalarS2& u);

// Rotation by +90 degrees in the oriented frame; star(star(a)) = -a.
// `orientation` = -1 flips the convention globally.
OneFormS2 hodge_star(const OneFormS2& a, int orientation = +1);

// Conformal Killing operator: trace-free symmetrized covariant derivative.
TTTensorS2 delta_star(const OneFormS2& eta);

// (div T)_a = g^{bc} T_{ab;c} on the round sphere.
OneFormS2 div_tt(const TTTensorS2& T);

ScalarS2 div_oneform(const OneFormS2& a);
ScalarS2 laplacian(const ScalarS2& u);

// Lie derivative of T along the rotation field Y = axis x position,
// via sigma_bc = T_bc;a Y^a + T_ab Y^a_;c + T_ac Y^a_;b.
TTTensorS2 lie_rotation_tt(const TTTensorS2& T, const Vec3& axis);

double sphere_integral(const ScalarS2& u);

// Rotation field Y = axis x n restricted to the sphere, in frame components,
// plus its covariant derivative coefficient: Y^theta_;phi = -kappa,
// Y^phi_;theta = +kappa with kappa = axis . n (diagonal entries vanish).
struct RotationFieldSample {
  double y_theta, y_phi, kappa;
};
RotationFieldSample rotation_field_at(const Vec3& axis, double sin_t, double cos_t, double sin_p,
                                      double cos_p);

// Covariant derivative tables of a one-form (orthonormal frame).
struct OneFormDeriv {
  std::vector<double> tt, tp, pt, pp;  // a_{theta;theta}, a_{theta;phi}, a_{phi;theta}, a_{phi;phi}
};
OneFormDeriv covariant_derivative(const OneFormS2& a);

double max_abs(const std::vector<double>& v);

}  // namespace admshell

#endif
