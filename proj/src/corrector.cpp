#include "admshell/corrector.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace admshell {

RadialGrid3D::RadialGrid3D(int n_r, double r_in, double r_out, GridPtr sph) : sphere(std::move(sph)) {
  if (n_r < 8 || !(r_out > r_in) || r_in <= 0.0)
    throw std::invalid_argument("RadialGrid3D: bad radial range");
  r.resize(n_r);
  double gamma = std::pow(r_out / r_in, 1.0 / (n_r - 1));
  for (int i = 0; i < n_r; ++i) r[i] = r_in * std::pow(gamma, i);
  r_face.resize(n_r + 1);
  for (int i = 1; i < n_r; ++i) r_face[i] = std::sqrt(r[i - 1] * r[i]);
  r_face[0] = r[0] * r[0] / r_face[1];
  r_face[n_r] = r[n_r - 1] * r[n_r - 1] / r_face[n_r - 1];
}

PoissonSolver::PoissonSolver(std::shared_ptr<const RadialGrid3D> grid) : grid_(std::move(grid)) {
  const auto& g = *grid_;
  const auto& sph = *g.sphere;
  int nr = static_cast<int>(g.r.size());
  int nt = sph.n_theta(), np = sph.n_phi();
  double hth = std::numbers::pi / nt;
  double hph = 2.0 * std::numbers::pi / np;

  // angular cell boundaries in theta and their solid-angle weights
  std::vector<double> cth_face(nt + 1), sig(nt), sth_face(nt + 1);
  for (int j = 0; j <= nt; ++j) {
    double th = j * hth;
    cth_face[j] = std::cos(th);
    sth_face[j] = std::sin(th);
  }
  for (int j = 0; j < nt; ++j) sig[j] = (cth_face[j] - cth_face[j + 1]) * hph;

  volume_.assign(g.size(), 0.0);
  diag_.assign(g.size(), 0.0);
  robin_.assign(g.size(), 0.0);
  cond_r_.assign(static_cast<std::size_t>(nr + 1) * nt * np, 0.0);
  cond_th_.assign(static_cast<std::size_t>(nr) * (nt + 1) * np, 0.0);
  cond_ph_.assign(static_cast<std::size_t>(nr) * nt * np, 0.0);

  for (int i = 0; i < nr; ++i) {
    double r3 = (std::pow(g.r_face[i + 1], 3) - std::pow(g.r_face[i], 3)) / 3.0;
    double r2 = 0.5 * (g.r_face[i + 1] * g.r_face[i + 1] - g.r_face[i] * g.r_face[i]);
    for (int j = 0; j < nt; ++j) {
      for (int m = 0; m < np; ++m) {
        volume_[g.idx(i, j, m)] = r3 * sig[j];
        // r-direction conductance at the outer face of cell i
        if (i + 1 < nr) {
          double S = g.r_face[i + 1] * g.r_face[i + 1] * sig[j];
          cond_r_[(static_cast<std::size_t>(i + 1) * nt + j) * np + m] = S / (g.r[i + 1] - g.r[i]);
        }
        // theta-face j+1 between cells j and j+1 (zero area at the poles)
        if (j + 1 < nt) {
          double S = sth_face[j + 1] * hph * r2;
          cond_th_[(static_cast<std::size_t>(i) * (nt + 1) + (j + 1)) * np + m] =
              S / (g.r[i] * hth);
        }
        // phi-face between m and m+1 (periodic)
        double Sp = r2 * hth;
        cond_ph_[g.idx(i, j, m)] = Sp / (g.r[i] * sph.sin_theta(j) * hph);
      }
    }
  }
  // Robin at the outermost face: flux = -S u_face / r_face with
  // u_face = u_{N-1} / (1 + delta / r_face)
  double rf = g.r_face[nr];
  double delta = rf - g.r[nr - 1];
  for (int j = 0; j < nt; ++j)
    for (int m = 0; m < np; ++m) {
      double S = rf * rf * sig[j];
      robin_[g.idx(nr - 1, j, m)] = S / (rf + delta);
    }

  // diagonal of the SPD operator
  for (int i = 0; i < nr; ++i)
    for (int j = 0; j < nt; ++j)
      for (int m = 0; m < np; ++m) {
        std::size_t c = g.idx(i, j, m);
        double d = robin_[c];
        d += cond_r_[(static_cast<std::size_t>(i) * nt + j) * np + m];
        d += cond_r_[(static_cast<std::size_t>(i + 1) * nt + j) * np + m];
        d += cond_th_[(static_cast<std::size_t>(i) * (nt + 1) + j) * np + m];
        d += cond_th_[(static_cast<std::size_t>(i) * (nt + 1) + j + 1) * np + m];
        d += cond_ph_[c];
        d += cond_ph_[g.idx(i, j, (m + np - 1) % np)];
        diag_[c] = d;
      }
}

void PoissonSolver::apply(const std::vector<double>& u, std::vector<double>& out) const {
  const auto& g = *grid_;
  const auto& sph = *g.sphere;
  int nr = static_cast<int>(g.r.size());
  int nt = sph.n_theta(), np = sph.n_phi();
  out.resize(g.size());
  parallel_for(nr, [&](std::size_t iu) {
    int i = static_cast<int>(iu);
    for (int j = 0; j < nt; ++j)
      for (int m = 0; m < np; ++m) {
        std::size_t c = g.idx(i, j, m);
        double acc = diag_[c] * u[c];
        if (i > 0) acc -= cond_r_[(static_cast<std::size_t>(i) * nt + j) * np + m] * u[g.idx(i - 1, j, m)];
        if (i + 1 < nr)
          acc -= cond_r_[(static_cast<std::size_t>(i + 1) * nt + j) * np + m] * u[g.idx(i + 1, j, m)];
        if (j > 0)
          acc -= cond_th_[(static_cast<std::size_t>(i) * (nt + 1) + j) * np + m] * u[g.idx(i, j - 1, m)];
        if (j + 1 < nt)
          acc -= cond_th_[(static_cast<std::size_t>(i) * (nt + 1) + j + 1) * np + m] *
                 u[g.idx(i, j + 1, m)];
        acc -= cond_ph_[c] * u[g.idx(i, j, (m + 1) % np)];
        acc -= cond_ph_[g.idx(i, j, (m + np - 1) % np)] * u[g.idx(i, j, (m + np - 1) % np)];
        out[c] = acc;
      }
  });
}

PoissonResult PoissonSolver::solve(const std::vector<double>& source, double tol, int max_iter,
                                   const std::vector<double>* warm_start) const {
  const auto& g = *grid_;
  std::size_t n = g.size();
  if (source.size() != n) throw std::invalid_argument("PoissonSolver::solve: source size mismatch");

  std::vector<double> b(n);
  for (std::size_t i = 0; i < n; ++i) b[i] = -volume_[i] * source[i];

  std::vector<double> x(n, 0.0);
  if (warm_start && warm_start->size() == n) x = *warm_start;

  std::vector<double> r(n), z(n), p(n), Ap(n);
  apply(x, Ap);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - Ap[i];

  auto dotp = [](const std::vector<double>& a, const std::vector<double>& bb) {
    std::vector<double> prod(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) prod[i] = a[i] * bb[i];
    return pairwise_sum(prod);
  };

  double bnorm = std::sqrt(dotp(b, b));
  if (bnorm == 0.0) {
    PoissonResult res;
    res.v.assign(n, 0.0);
    return res;
  }

  for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / diag_[i];
  p = z;
  double rz = dotp(r, z);
  int it = 0;
  double rel = std::sqrt(dotp(r, r)) / bnorm;
  while (rel > tol && it < max_iter) {
    apply(p, Ap);
    double pAp = dotp(p, Ap);
    double alpha = rz / pAp;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * Ap[i];
    }
    for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / diag_[i];
    double rz_new = dotp(r, z);
    double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    rel = std::sqrt(dotp(r, r)) / bnorm;
    ++it;
  }
  if (rel > tol)
    throw std::runtime_error("PoissonSolver: CG failed to reach tolerance (rel=" +
                             std::to_string(rel) + ")");

  PoissonResult res;
  res.v = std::move(x);
  res.iterations = it;
  res.rel_residual = rel;
  // monopole: sphere average of r*v at the outermost cell row
  const auto& sph = *g.sphere;
  std::vector<double> ring(sph.size());
  int last = static_cast<int>(g.r.size()) - 1;
  for (int j = 0; j < sph.n_theta(); ++j)
    for (int m = 0; m < sph.n_phi(); ++m)
      ring[sph.idx(j, m)] = g.r[last] * res.v[g.idx(last, j, m)];
  res.monopole = sph.integrate(ring) / (4.0 * std::numbers::pi);
  return res;
}

GridScalarField::GridScalarField(std::shared_ptr<const RadialGrid3D> grid,
                                 const std::vector<double>& values, double far_coefficient)
    : grid_(std::move(grid)), far_c_(far_coefficient) {
  const auto& g = *grid_;
  const auto& sph = *g.sphere;
  int nr = static_cast<int>(g.r.size());
  rows_.resize(nr);
  for (int i = 0; i < nr; ++i) {
    Row& row = rows_[i];
    row.v.assign(values.begin() + g.idx(i, 0, 0), values.begin() + g.idx(i, 0, 0) + sph.size());
    sph.d_theta_spectral(row.v, row.dt, FramePolarity::scalar);
    sph.d_phi(row.v, row.dp);
    sph.d2_theta_spectral(row.v, row.dtt, FramePolarity::scalar);
    sph.d_theta_spectral(row.dp, row.dtp, FramePolarity::scalar);
    sph.d2_phi(row.v, row.dpp);
  }
}

GridScalarField::RadialJet GridScalarField::fetch(int table, double r,
                                                  const SphereGrid::Stencil& st) const {
  // 6-point Lagrange in s = log r, with analytic first/second derivatives.
  const auto& g = *grid_;
  int nr = static_cast<int>(g.r.size());
  double s = std::log(r);
  double s0 = std::log(g.r[0]);
  double ds = std::log(g.r[1]) - s0;
  int c = static_cast<int>(std::floor((s - s0) / ds));
  int start = std::clamp(c - 2, 0, nr - 6);

  const auto& sph = *g.sphere;
  auto tab = [&](const Row& row) -> const std::vector<double>& {
    switch (table) {
      case 0: return row.v;
      case 1: return row.dt;
      case 2: return row.dp;
      case 3: return row.dtt;
      case 4: return row.dtp;
      default: return row.dpp;
    }
  };

  // odd theta-derivative order flips sign across the pole
  FramePolarity pol = (table == 1 || table == 4) ? FramePolarity::oneform : FramePolarity::scalar;
  std::array<double, 6> nodeval{}, sn{};
  for (int a = 0; a < 6; ++a) {
    nodeval[a] = sph.interp_apply(st, tab(rows_[start + a]), pol);
    sn[a] = std::log(g.r[start + a]);
  }
  // Lagrange value + d/ds + d2/ds2 at s
  double V = 0.0, D1 = 0.0, D2 = 0.0;
  for (int a = 0; a < 6; ++a) {
    double L = 1.0, dL = 0.0, ddL = 0.0;
    for (int b = 0; b < 6; ++b) {
      if (b == a) continue;
      double inv = 1.0 / (sn[a] - sn[b]);
      double t = (s - sn[b]) * inv;
      ddL = ddL * t + 2.0 * dL * inv;
      dL = dL * t + L * inv;
      L *= t;
    }
    V += nodeval[a] * L;
    D1 += nodeval[a] * dL;
    D2 += nodeval[a] * ddL;
  }
  // d/dr = (1/r) d/ds ; d2/dr2 = (1/r^2)(d2/ds2 - d/ds)
  RadialJet out;
  out.v = V;
  out.dr = D1 / r;
  out.drr = (D2 - D1) / (r * r);
  return out;
}

double GridScalarField::value(const Vec3& x) const {
  double r = norm(x);
  const auto& g = *grid_;
  if (r >= g.r.back()) return far_c_ / r;
  if (r <= g.r.front()) r = g.r.front() * (1.0 + 1e-12);
  double rho = std::sqrt(x[0] * x[0] + x[1] * x[1]);
  double theta = std::atan2(rho, x[2]);
  double phi = std::atan2(x[1], x[0]);
  if (phi < 0.0) phi += 2.0 * std::numbers::pi;
  auto st = g.sphere->interp_stencil(theta, phi);
  return fetch(0, r, st).v;
}

Vec3 GridScalarField::gradient(const Vec3& x) const {
  double r = norm(x);
  const auto& g = *grid_;
  Vec3 n = (1.0 / r) * x;
  if (r >= g.r.back()) return (-far_c_ / (r * r)) * n;
  if (r <= g.r.front()) r = g.r.front() * (1.0 + 1e-12);
  double rho = std::sqrt(x[0] * x[0] + x[1] * x[1]);
  double theta = std::atan2(rho, x[2]);
  double phi = std::atan2(x[1], x[0]);
  if (phi < 0.0) phi += 2.0 * std::numbers::pi;
  auto st = g.sphere->interp_stencil(theta, phi);
  RadialJet v = fetch(0, r, st);
  RadialJet vt = fetch(1, r, st);
  RadialJet vp = fetch(2, r, st);
  double stheta = rho / r, ctheta = x[2] / r;
  double cp = (rho > 0) ? x[0] / rho : 1.0, sp = (rho > 0) ? x[1] / rho : 0.0;
  Vec3 eth{ctheta * cp, ctheta * sp, -stheta};
  Vec3 eph{-sp, cp, 0.0};
  Vec3 out{};
  for (int c = 0; c < 3; ++c)
    out[c] = v.dr * n[c] + vt.v * eth[c] / r + ((stheta > 0) ? vp.v * eph[c] / (r * stheta) : 0.0);
  return out;
}

Mat3 GridScalarField::hessian(const Vec3& x) const {
  double r = norm(x);
  const auto& g = *grid_;
  Vec3 n = (1.0 / r) * x;
  if (r >= g.r.back()) {
    Mat3 out;
    double ir3 = far_c_ / (r * r * r);
    for (int c = 0; c < 3; ++c)
      for (int d = 0; d < 3; ++d) out(c, d) = ir3 * (3.0 * n[c] * n[d] - (c == d));
    return out;
  }
  if (r <= g.r.front()) r = g.r.front() * (1.0 + 1e-12);
  double rho = std::sqrt(x[0] * x[0] + x[1] * x[1]);
  double theta = std::atan2(rho, x[2]);
  double phi = std::atan2(x[1], x[0]);
  if (phi < 0.0) phi += 2.0 * std::numbers::pi;
  auto st = g.sphere->interp_stencil(theta, phi);
  RadialJet v = fetch(0, r, st);
  RadialJet vt = fetch(1, r, st);
  RadialJet vp = fetch(2, r, st);
  RadialJet vtt = fetch(3, r, st);
  RadialJet vtp = fetch(4, r, st);
  RadialJet vpp = fetch(5, r, st);

  double stheta = rho / r, ctheta = x[2] / r;
  double cp = (rho > 0) ? x[0] / rho : 1.0, sp = (rho > 0) ? x[1] / rho : 0.0;
  Vec3 eth{ctheta * cp, ctheta * sp, -stheta};
  Vec3 eph{-sp, cp, 0.0};
  double ir = 1.0 / r;
  Vec3 th_c = ir * eth, ph_c = (stheta > 0) ? (ir / stheta) * eph : Vec3{0, 0, 0};
  double cot = ctheta / stheta;

  Mat3 out;
  for (int c = 0; c < 3; ++c)
    for (int d = 0; d < 3; ++d) {
      double ncd = ((c == d) - n[c] * n[d]) * ir;
      double th2 = (-n[c] * eth[d] - eth[c] * n[d] + cot * eph[c] * eph[d]) * ir * ir;
      double uc = stheta * n[c] + ctheta * eth[c];
      double ud = stheta * n[d] + ctheta * eth[d];
      double ph2 = -(uc * eph[d] + eph[c] * ud) * ir * ir / (stheta * stheta);
      out(c, d) = v.drr * n[c] * n[d] + v.dr * ncd +
                  vt.dr * (n[c] * th_c[d] + th_c[c] * n[d]) +
                  vp.dr * (n[c] * ph_c[d] + ph_c[c] * n[d]) + vtt.v * th_c[c] * th_c[d] +
                  vtp.v * (th_c[c] * ph_c[d] + ph_c[c] * th_c[d]) + vpp.v * ph_c[c] * ph_c[d] +
                  vt.v * th2 + vp.v * ph2;
    }
  return out;
}

namespace {
ScalarField3 make_scalar_field(std::shared_ptr<GridScalarField> f, double offset) {
  ScalarField3 out;
  out.value = [f, offset](const Vec3& x) { return offset + f->value(x); };
  out.grad = [f](const Vec3& x) { return f->gradient(x); };
  out.hess = [f](const Vec3& x) { return f->hessian(x); };
  return out;
}
}  // namespace

CorrectorSolution solve_corrector(const InitialData& hat_data, double shell_lo, double shell_hi,
                                  const CorrectorConfig& cfg) {
  double r_in = (cfg.r_in > 0.0) ? cfg.r_in : shell_lo / 4.0;
  double r_out = (cfg.r_out > 0.0)
                     ? cfg.r_out
                     : std::max(10.0 * shell_hi, 1.3 * std::max(cfg.rho_max, shell_hi));
  auto sph = make_grid(cfg.n_theta, cfg.n_phi);
  auto grid = std::make_shared<RadialGrid3D>(cfg.n_r, r_in, r_out, sph);
  PoissonSolver solver(grid);

  int nr = static_cast<int>(grid->r.size());
  int nt = sph->n_theta(), np = sph->n_phi();

  // constraint residuals of (g_hat, pi_hat), supported in the shell
  std::vector<double> srcH(grid->size(), 0.0);
  std::array<std::vector<double>, 3> srcX;
  for (auto& v : srcX) v.assign(grid->size(), 0.0);
  double res_before = 0.0, mom_before = 0.0;

  std::vector<double> rowH(nr, 0.0), rowM(nr, 0.0);
  parallel_for(nr, [&](std::size_t iu) {
    int i = static_cast<int>(iu);
    double r = grid->r[i];
    if (r < 0.98 * shell_lo || r > 1.02 * shell_hi) return;
    double sh = 0.0, sm = 0.0;
    for (int j = 0; j < nt; ++j)
      for (int m = 0; m < np; ++m) {
        Vec3 x = r * sph->unit_vector(j, m);
        double H = hamiltonian(hat_data, x);
        Vec3 M = momentum_constraint(hat_data, x);
        srcH[grid->idx(i, j, m)] = H / 8.0;
        for (int c = 0; c < 3; ++c) srcX[c][grid->idx(i, j, m)] = -M[c];
        sh = std::max(sh, std::fabs(H));
        sm = std::max(sm, norm(M));
      }
    rowH[i] = sh;
    rowM[i] = sm;
  });
  for (int i = 0; i < nr; ++i) {
    res_before = std::max(res_before, rowH[i]);
    mom_before = std::max(mom_before, rowM[i]);
  }

  CorrectorSolution sol;
  sol.grid = grid;
  sol.r_out = r_out;

  PoissonResult pu = solver.solve(srcH, cfg.tol, cfg.max_iter);
  sol.A = 4.0 * pu.monopole;
  sol.iterations = pu.iterations;
  auto uf = std::make_shared<GridScalarField>(grid, pu.v, 0.25 * sol.A);
  sol.u = make_scalar_field(uf, 1.0);

  std::array<std::shared_ptr<GridScalarField>, 3> xf;
  for (int c = 0; c < 3; ++c) {
    PoissonResult px = solver.solve(srcX[c], cfg.tol, cfg.max_iter);
    sol.B[c] = px.monopole;
    sol.iterations += px.iterations;
    xf[c] = std::make_shared<GridScalarField>(grid, px.v, sol.B[c]);
  }
  sol.X.value = [xf](const Vec3& x) -> Vec3 {
    return {xf[0]->value(x), xf[1]->value(x), xf[2]->value(x)};
  };
  sol.X.jac = [xf](const Vec3& x) -> Mat3 {
    Mat3 out;
    for (int i = 0; i < 3; ++i) {
      Vec3 gi = xf[i]->gradient(x);
      for (int j = 0; j < 3; ++j) out(i, j) = gi[j];
    }
    return out;
  };
  sol.X.hess = [xf](const Vec3& x) -> std::array<Mat3, 3> {
    return {xf[0]->hessian(x), xf[1]->hessian(x), xf[2]->hessian(x)};
  };

  sol.residual_before = res_before;
  sol.momentum_before = mom_before;
  return sol;
}

DataPtr assemble_corrected(DataPtr hat_data, const CorrectorSolution& sol) {
  return conformal_shift_data(std::move(hat_data), sol.u, sol.X);
}

std::string CorrectorSolution::to_json() const {
  std::ostringstream os;
  os.precision(15);
  os << "{\"A\":" << A << ",\"B\":[" << B[0] << ',' << B[1] << ',' << B[2] << "]"
     << ",\"residual_before\":" << residual_before << ",\"residual_after\":" << residual_after
     << ",\"momentum_before\":" << momentum_before << ",\"momentum_after\":" << momentum_after
     << ",\"R_out\":" << r_out << ",\"cg_iterations\":" << iterations << "}";
  return os.str();
}

}  // namespace admshell
