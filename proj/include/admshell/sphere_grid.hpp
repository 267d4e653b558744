#ifndef ADMSHELL_SPHERE_GRID_HPP
#define ADMSHELL_SPHERE_GRID_HPP

#include <memory>
#include <vector>

#include "admshell/numerics.hpp"

namespace admshell {

// Parity of orthonormal-frame components under the pole reflection
// f(-theta, phi) = s * f(theta, phi + pi): scalars and frame 2-tensor
// components continue with s = +1, one-form components with s = -1.
enum class FramePolarity { scalar = +1, oneform = -1 };

// Pole-free product grid on S^2: cell-centered colatitudes
// theta_j = (j+1/2) pi/n_theta, uniform azimuths phi_m = 2 pi m/n_phi.
// Quadrature weights integrate cos(k theta) sin(theta) exactly for
// k < n_theta, so the weight sum is 4 pi to machine precision.
class SphereGrid {
 public:
  SphereGrid(int n_theta, int n_phi, int fd_order = 8);

  int n_theta() const { return nth_; }
  int n_phi() const { return nph_; }
  int fd_order() const { return fd_order_; }
  std::size_t size() const { return static_cast<std::size_t>(nth_) * nph_; }
  std::size_t idx(int j, int m) const { return static_cast<std::size_t>(j) * nph_ + m; }

  double theta(int j) const { return theta_[j]; }
  double phi(int m) const { return phi_[m]; }
  double sin_theta(int j) const { return sin_t_[j]; }
  double cos_theta(int j) const { return cos_t_[j]; }
  double sin_phi(int m) const { return sin_p_[m]; }
  double cos_phi(int m) const { return cos_p_[m]; }
  double cot_theta(int j) const { return cos_t_[j] / sin_t_[j]; }

  // Unit direction and orthonormal tangent frame at a node.
  Vec3 unit_vector(int j, int m) const;
  Vec3 e_theta(int j, int m) const;
  Vec3 e_phi(int m) const;

  double quad_weight(int j, int /*m*/) const { return wth_[j] * wph_; }
  double integrate(const std::vector<double>& values) const;

  // d/dtheta and d^2/dtheta^2 over the pole-reflected double cover,
  // centered differences of order fd_order().
  void d_theta(const std::vector<double>& f, std::vector<double>& out, FramePolarity p) const;
  void d2_theta(const std::vector<double>& f, std::vector<double>& out, FramePolarity p) const;
  // Fourier-exact periodic derivative on the double cover; used for
  // internal tabulation where discretization-order studies do not apply.
  void d_theta_spectral(const std::vector<double>& f, std::vector<double>& out, FramePolarity p) const;
  void d2_theta_spectral(const std::vector<double>& f, std::vector<double>& out, FramePolarity p) const;

  // Spectral d/dphi and d^2/dphi^2 (uniform periodic differentiation matrix).
  void d_phi(const std::vector<double>& f, std::vector<double>& out) const;
  void d2_phi(const std::vector<double>& f, std::vector<double>& out) const;

  // Interpolation stencil of width `stencil_width()` around (theta, phi).
  // Rows are double-cover indices; col_shift indicates the phi + pi branch.
  struct Stencil {
    std::array<int, 8> row;        // physical theta row
    std::array<bool, 8> reflected; // true if the phi+pi branch applies
    std::array<double, 8> wt;      // theta weights
    std::array<int, 8> col;        // phi columns
    std::array<double, 8> wp;      // phi weights
  };
  static constexpr int stencil_width() { return 8; }
  Stencil interp_stencil(double theta, double phi) const;
  // Apply: sum_{J,M} wt_J wp_M sign^(reflected) f[row, col(+shift)]
  double interp_apply(const Stencil& s, const std::vector<double>& f, FramePolarity p) const;

 private:
  int nth_, nph_, fd_order_;
  double hth_, hph_, wph_;
  std::vector<double> theta_, phi_, sin_t_, cos_t_, sin_p_, cos_p_, wth_;
  // Per-row phi differentiation uses triangular truncation: row j keeps
  // azimuthal modes |m| <= cap(j) ~ 1.4 n_theta sin(theta_j). Matrices are
  // cached per distinct cap; caps_[j] indexes into the cache.
  std::vector<int> cap_index_;
  std::vector<std::vector<double>> dphi1_by_cap_, dphi2_by_cap_;
  std::vector<double> dcov1_, dcov2_;    // 2 n_theta x 2 n_theta spectral matrices
  std::vector<double> fd1_, fd2_;        // centered stencil weights (scaled by h)
  std::vector<double> fdp1_, fdp2_;      // higher-order stencils for pole-adjacent rows
  int pole_rows_;                        // rows near each pole using the wide stencil

  void apply_theta_stencil(const std::vector<double>& f, std::vector<double>& out, FramePolarity p,
                           const std::vector<double>& w, const std::vector<double>& wp) const;
  void apply_theta_matrix(const std::vector<double>& f, std::vector<double>& out, FramePolarity p,
                          const std::vector<double>& mat) const;
};

using GridPtr = std::shared_ptr<const SphereGrid>;
GridPtr make_grid(int n_theta, int n_phi, int fd_order = 8);

}  // namespace admshell

#endif
