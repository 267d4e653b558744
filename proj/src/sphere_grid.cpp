#include "admshell/sphere_grid.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace admshell {

namespace {
constexpr double kPi = std::numbers::pi;

// Periodic spectral differentiation matrices for an even number of
// uniformly spaced samples (spacing h = 2 pi / n in the angle variable).
void build_spectral_matrices(int n, double h, std::vector<double>& d1, std::vector<double>& d2) {
  d1.assign(static_cast<std::size_t>(n) * n, 0.0);
  d2.assign(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) {
        d2[static_cast<std::size_t>(i) * n + j] = -kPi * kPi / (3.0 * h * h) - 1.0 / 6.0;
        continue;
      }
      int k = i - j;
      double sgn = (k % 2 == 0) ? 1.0 : -1.0;
      double half = 0.5 * k * h;
      d1[static_cast<std::size_t>(i) * n + j] = 0.5 * sgn / std::tan(half);
      double s = std::sin(half);
      d2[static_cast<std::size_t>(i) * n + j] = -sgn / (2.0 * s * s);
    }
  }
}

// Mode-capped Fourier differentiation matrices: derivative restricted to
// modes |q| <= cap. For cap = n/2 this reduces to the full spectral matrix.
void build_capped_phi_matrices(int n, int cap, std::vector<double>& d1, std::vector<double>& d2) {
  if (cap >= n / 2) {
    build_spectral_matrices(n, 2.0 * kPi / n, d1, d2);
    return;
  }
  d1.assign(static_cast<std::size_t>(n) * n, 0.0);
  d2.assign(static_cast<std::size_t>(n) * n, 0.0);
  double h = 2.0 * kPi / n;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double a1 = 0.0, a2 = 0.0;
      for (int q = 1; q <= cap; ++q) {
        a1 -= (2.0 / n) * q * std::sin(q * (i - j) * h);
        a2 -= (2.0 / n) * q * q * std::cos(q * (i - j) * h);
      }
      d1[static_cast<std::size_t>(i) * n + j] = a1;
      d2[static_cast<std::size_t>(i) * n + j] = a2;
    }
    // derivatives annihilate constants exactly
    double s1 = 0.0, s2 = 0.0;
    for (int j = 0; j < n; ++j) {
      s1 += d1[static_cast<std::size_t>(i) * n + j];
      s2 += d2[static_cast<std::size_t>(i) * n + j];
    }
    d1[static_cast<std::size_t>(i) * n + i] -= s1;
    d2[static_cast<std::size_t>(i) * n + i] -= s2;
  }
}
}  // namespace

SphereGrid::SphereGrid(int n_theta, int n_phi, int fd_order)
    : nth_(n_theta), nph_(n_phi), fd_order_(fd_order) {
  if (n_theta < 8) throw std::invalid_argument("SphereGrid: n_theta >= 8 required");
  if (n_phi < 8 || n_phi % 2 != 0) throw std::invalid_argument("SphereGrid: n_phi even and >= 8 required");
  if (fd_order != 4 && fd_order != 6 && fd_order != 8)
    throw std::invalid_argument("SphereGrid: fd_order in {4,6,8}");

  hth_ = kPi / nth_;
  hph_ = 2.0 * kPi / nph_;
  wph_ = hph_;

  theta_.resize(nth_);
  sin_t_.resize(nth_);
  cos_t_.resize(nth_);
  for (int j = 0; j < nth_; ++j) {
    theta_[j] = (j + 0.5) * hth_;
    sin_t_[j] = std::sin(theta_[j]);
    cos_t_[j] = std::cos(theta_[j]);
  }
  phi_.resize(nph_);
  sin_p_.resize(nph_);
  cos_p_.resize(nph_);
  for (int m = 0; m < nph_; ++m) {
    phi_[m] = m * hph_;
    sin_p_[m] = std::sin(phi_[m]);
    cos_p_[m] = std::cos(phi_[m]);
  }

  // Quadrature weights exact against cos(k theta) sin(theta), k < n_theta.
  wth_.assign(nth_, 0.0);
  for (int j = 0; j < nth_; ++j) {
    double w = 2.0 / nth_;  // c_0 / n with c_0 = 2
    for (int k = 2; k < nth_; k += 2) {
      double ck = 2.0 / (1.0 - static_cast<double>(k) * k);
      w += (2.0 / nth_) * ck * std::cos(k * theta_[j]);
    }
    wth_[j] = w;
  }

  // Triangular truncation per row: keep |m| <= ~1.4 n_theta sin(theta_j)
  // (floor 12, quantized to multiples of 4). Away from the spherical-harmonic
  // envelope P_lm ~ sin^m(theta) those modes carry no resolvable content, and
  // dropping them stops roundoff amplification by (m / sin theta)^2 in
  // composed operators near the poles.
  cap_index_.resize(nth_);
  std::vector<int> caps;
  for (int j = 0; j < nth_; ++j) {
    int cap = static_cast<int>(std::ceil(1.4 * nth_ * sin_t_[j] / 4.0)) * 4;
    cap = std::max(cap, 12);
    cap = std::min(cap, nph_ / 2);
    std::size_t pos = 0;
    for (; pos < caps.size(); ++pos)
      if (caps[pos] == cap) break;
    if (pos == caps.size()) caps.push_back(cap);
    cap_index_[j] = static_cast<int>(pos);
  }
  dphi1_by_cap_.resize(caps.size());
  dphi2_by_cap_.resize(caps.size());
  for (std::size_t c = 0; c < caps.size(); ++c)
    build_capped_phi_matrices(nph_, caps[c], dphi1_by_cap_[c], dphi2_by_cap_[c]);

  build_spectral_matrices(2 * nth_, hth_, dcov1_, dcov2_);

  fd1_ = fd_stencil(fd_order_, 1);
  fd2_ = fd_stencil(fd_order_, 2);
  for (double& w : fd1_) w /= hth_;
  for (double& w : fd2_) w /= hth_ * hth_;

  // The 1/sin(theta) weights in the frame formulas amplify truncation error
  // of pole-adjacent rows by ~cot(theta_0)^2 across composed operators; those
  // rows use a wider centered stencil to compensate.
  int pole_order = std::min(12, 2 * (nth_ / 4));
  pole_order = std::max(pole_order, fd_order_);
  pole_rows_ = 4;
  fdp1_ = centered_stencil(pole_order, 1);
  fdp2_ = centered_stencil(pole_order, 2);
  for (double& w : fdp1_) w /= hth_;
  for (double& w : fdp2_) w /= hth_ * hth_;
}

Vec3 SphereGrid::unit_vector(int j, int m) const {
  return {sin_t_[j] * cos_p_[m], sin_t_[j] * sin_p_[m], cos_t_[j]};
}
Vec3 SphereGrid::e_theta(int j, int m) const {
  return {cos_t_[j] * cos_p_[m], cos_t_[j] * sin_p_[m], -sin_t_[j]};
}
Vec3 SphereGrid::e_phi(int m) const { return {-sin_p_[m], cos_p_[m], 0.0}; }

double SphereGrid::integrate(const std::vector<double>& values) const {
  if (values.size() != size()) throw std::invalid_argument("integrate: size mismatch");
  std::vector<double> partial(nth_);
  for (int j = 0; j < nth_; ++j) {
    double s = pairwise_sum(std::span<const double>(values.data() + idx(j, 0), nph_));
    partial[j] = s * wth_[j] * wph_;
  }
  return pairwise_sum(partial);
}

namespace {
// Double-cover lookup: row index J on the great-circle parameter
// t = (J + 1/2) h covering (0, 2 pi); J >= n lands on the phi + pi branch.
inline double dc_value(const std::vector<double>& f, int J, int m, int nth, int nph, int sign) {
  int period = 2 * nth;
  J = ((J % period) + period) % period;
  if (J < nth) return f[static_cast<std::size_t>(J) * nph + m];
  int row = period - 1 - J;
  int col = (m + nph / 2) % nph;
  return sign * f[static_cast<std::size_t>(row) * nph + col];
}
}  // namespace

void SphereGrid::apply_theta_stencil(const std::vector<double>& f, std::vector<double>& out,
                                     FramePolarity p, const std::vector<double>& w,
                                     const std::vector<double>& wp) const {
  out.resize(size());
  int sign = static_cast<int>(p);
  for (int j = 0; j < nth_; ++j) {
    bool near_pole = (j < pole_rows_) || (j >= nth_ - pole_rows_);
    const std::vector<double>& st = near_pole ? wp : w;
    int half = (static_cast<int>(st.size()) - 1) / 2;
    for (int m = 0; m < nph_; ++m) {
      double s = 0.0;
      for (int o = -half; o <= half; ++o) s += st[o + half] * dc_value(f, j + o, m, nth_, nph_, sign);
      out[idx(j, m)] = s;
    }
  }
}

void SphereGrid::apply_theta_matrix(const std::vector<double>& f, std::vector<double>& out,
                                    FramePolarity p, const std::vector<double>& mat) const {
  out.resize(size());
  int period = 2 * nth_;
  int sign = static_cast<int>(p);
  std::vector<double> col(period);
  for (int m = 0; m < nph_; ++m) {
    int mbar = (m + nph_ / 2) % nph_;
    for (int J = 0; J < period; ++J)
      col[J] = (J < nth_) ? f[idx(J, m)] : sign * f[idx(period - 1 - J, mbar)];
    for (int j = 0; j < nth_; ++j) {
      const double* row = mat.data() + static_cast<std::size_t>(j) * period;
      double s = 0.0;
      for (int J = 0; J < period; ++J) s += row[J] * col[J];
      out[idx(j, m)] = s;
    }
  }
}

void SphereGrid::d_theta(const std::vector<double>& f, std::vector<double>& out, FramePolarity p) const {
  apply_theta_stencil(f, out, p, fd1_, fdp1_);
}
void SphereGrid::d2_theta(const std::vector<double>& f, std::vector<double>& out, FramePolarity p) const {
  apply_theta_stencil(f, out, p, fd2_, fdp2_);
}
void SphereGrid::d_theta_spectral(const std::vector<double>& f, std::vector<double>& out,
                                  FramePolarity p) const {
  apply_theta_matrix(f, out, p, dcov1_);
}
void SphereGrid::d2_theta_spectral(const std::vector<double>& f, std::vector<double>& out,
                                   FramePolarity p) const {
  apply_theta_matrix(f, out, p, dcov2_);
}

void SphereGrid::d_phi(const std::vector<double>& f, std::vector<double>& out) const {
  out.resize(size());
  for (int j = 0; j < nth_; ++j) {
    const std::vector<double>& mat = dphi1_by_cap_[cap_index_[j]];
    const double* row = f.data() + idx(j, 0);
    for (int m = 0; m < nph_; ++m) {
      const double* dm = mat.data() + static_cast<std::size_t>(m) * nph_;
      double s = 0.0;
      for (int k = 0; k < nph_; ++k) s += dm[k] * row[k];
      out[idx(j, m)] = s;
    }
  }
}

void SphereGrid::d2_phi(const std::vector<double>& f, std::vector<double>& out) const {
  out.resize(size());
  for (int j = 0; j < nth_; ++j) {
    const std::vector<double>& mat = dphi2_by_cap_[cap_index_[j]];
    const double* row = f.data() + idx(j, 0);
    for (int m = 0; m < nph_; ++m) {
      const double* dm = mat.data() + static_cast<std::size_t>(m) * nph_;
      double s = 0.0;
      for (int k = 0; k < nph_; ++k) s += dm[k] * row[k];
      out[idx(j, m)] = s;
    }
  }
}

namespace {
// Barycentric-form Lagrange weights on 8 consecutive integer nodes for
// real coordinate u measured from the first node.
void lagrange8(double u, std::array<double, 8>& w) {
  int nearest = static_cast<int>(std::lround(u));
  if (nearest >= 0 && nearest < 8 && std::fabs(u - nearest) < 1e-13) {
    w.fill(0.0);
    w[nearest] = 1.0;
    return;
  }
  for (int i = 0; i < 8; ++i) {
    double prod = 1.0;
    for (int l = 0; l < 8; ++l) {
      if (l == i) continue;
      prod *= (u - l) / (i - l);
    }
    w[i] = prod;
  }
}
}  // namespace

SphereGrid::Stencil SphereGrid::interp_stencil(double theta, double phi) const {
  Stencil st;
  int period = 2 * nth_;

  double s = theta / hth_ - 0.5;
  int start = static_cast<int>(std::floor(s)) - 3;
  lagrange8(s - start, st.wt);
  for (int i = 0; i < 8; ++i) {
    int J = ((start + i) % period + period) % period;
    if (J < nth_) {
      st.row[i] = J;
      st.reflected[i] = false;
    } else {
      st.row[i] = period - 1 - J;
      st.reflected[i] = true;
    }
  }

  double twopi = 2.0 * kPi;
  double ph = phi - twopi * std::floor(phi / twopi);
  double sp = ph / hph_;
  int pstart = static_cast<int>(std::floor(sp)) - 3;
  lagrange8(sp - pstart, st.wp);
  for (int i = 0; i < 8; ++i) st.col[i] = ((pstart + i) % nph_ + nph_) % nph_;
  return st;
}

double SphereGrid::interp_apply(const Stencil& st, const std::vector<double>& f, FramePolarity p) const {
  double total = 0.0;
  int half = nph_ / 2;
  for (int i = 0; i < 8; ++i) {
    if (st.wt[i] == 0.0) continue;
    const double* row = f.data() + idx(st.row[i], 0);
    double sign = 1.0;
    int shift = 0;
    if (st.reflected[i]) {
      shift = half;
      if (p == FramePolarity::oneform) sign = -1.0;
    }
    double s = 0.0;
    for (int q = 0; q < 8; ++q) {
      int col = st.col[q] + shift;
      if (col >= nph_) col -= nph_;
      s += st.wp[q] * row[col];
    }
    total += st.wt[i] * sign * s;
  }
  return total;
}

GridPtr make_grid(int n_theta, int n_phi, int fd_order) {
  return std::make_shared<SphereGrid>(n_theta, n_phi, fd_order);
}

}  // namespace admshell
