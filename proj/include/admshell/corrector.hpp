#ifndef ADMSHELL_CORRECTOR_HPP
#define ADMSHELL_CORRECTOR_HPP

#include <memory>
#include <string>

#include "admshell/constraints.hpp"
#include "admshell/initial_data.hpp"

namespace admshell {

// Spherical product grid (geometric in r, pole-free sphere grid in angles)
// for the Poisson-type corrector solves.
struct RadialGrid3D {
  std::vector<double> r;       // cell centers, geometric
  std::vector<double> r_face;  // n_r + 1 faces
  GridPtr sphere;

  RadialGrid3D(int n_r, double r_in, double r_out, GridPtr sph);
  std::size_t size() const { return r.size() * sphere->size(); }
  std::size_t idx(int i, int j, int m) const {
    return (static_cast<std::size_t>(i) * sphere->n_theta() + j) * sphere->n_phi() + m;
  }
};

struct PoissonResult {
  std::vector<double> v;   // solution, decaying at infinity
  int iterations = 0;
  double rel_residual = 0.0;
  double monopole = 0.0;   // outer-sphere average of r * v
};

// Flux-form discretization of the flat Laplacian with zero-flux inner
// boundary and Robin outer boundary dv/dr + v/r = 0 (1/r monopole fall-off);
// matrix-free Jacobi-preconditioned CG on the SPD system.
class PoissonSolver {
 public:
  explicit PoissonSolver(std::shared_ptr<const RadialGrid3D> grid);

  PoissonResult solve(const std::vector<double>& source, double tol = 1e-10, int max_iter = 20000,
                      const std::vector<double>* warm_start = nullptr) const;

  void apply(const std::vector<double>& u, std::vector<double>& out) const;  // A u (SPD form)
  const RadialGrid3D& grid() const { return *grid_; }

 private:
  std::shared_ptr<const RadialGrid3D> grid_;
  std::vector<double> cond_r_, cond_th_, cond_ph_, volume_, diag_, robin_;
};

// Interpolating view of a solver-grid scalar with Cartesian first and second
// derivatives (radial Lagrange in log r, angular tables on the sphere grid).
class GridScalarField {
 public:
  GridScalarField(std::shared_ptr<const RadialGrid3D> grid, const std::vector<double>& values,
                  double far_coefficient);  // far field c/r beyond the grid

  double value(const Vec3& x) const;
  Vec3 gradient(const Vec3& x) const;
  Mat3 hessian(const Vec3& x) const;

 private:
  struct Row {
    std::vector<double> v, dt, dp, dtt, dtp, dpp;
  };
  std::shared_ptr<const RadialGrid3D> grid_;
  std::vector<Row> rows_;
  double far_c_;

  struct RadialJet {
    double v, dr, drr;
  };
  RadialJet fetch(int table, double r, const SphereGrid::Stencil& st) const;
};

struct CorrectorConfig {
  int n_r = 144;
  int n_theta = 24;
  int n_phi = 48;
  double r_in = 0.0;    // 0: pick shell_inner / 4
  double r_out = 0.0;   // 0: pick max(10 * shell_outer, 1.3 * rho_max)
  double rho_max = 0.0; // largest charge radius the fields must cover
  double tol = 1e-10;
  int max_iter = 20000;
};

struct CorrectorSolution {
  double A = 0.0;   // u = 1 + A/(4 r) + ...
  Vec3 B{};         // X_i = B_i / r + ...
  double residual_before = 0.0, residual_after = 0.0;  // sup |H| over the shell
  double momentum_before = 0.0, momentum_after = 0.0;
  double r_out = 0.0;
  int iterations = 0;
  ScalarField3 u;
  VectorField3 X;
  std::shared_ptr<const RadialGrid3D> grid;

  std::string to_json() const;
};

// Conformal solve Delta v = H/8 (u = 1 + v) and shift solves
// Delta X_i = -M_i for the data (g_hat, pi_hat); sources are sampled on the
// solver grid, restricted to the shell [shell_lo, shell_hi] where the
// constraint residual lives.
CorrectorSolution solve_corrector(const InitialData& hat_data, double shell_lo, double shell_hi,
                                  const CorrectorConfig& cfg);

// (u^4 g_hat, u^2 (pi_hat + L_{g_hat} X))
DataPtr assemble_corrected(DataPtr hat_data, const CorrectorSolution& sol);

}  // namespace admshell

#endif
