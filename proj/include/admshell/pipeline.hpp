#ifndef ADMSHELL_PIPELINE_HPP
#define ADMSHELL_PIPELINE_HPP

#include <string>
#include <vector>

#include "admshell/adm_charges.hpp"
#include "admshell/corrector.hpp"
#include "admshell/moments.hpp"

namespace admshell {

struct RunConfig {
  // angular seed: "polynomial" (even degree) or "bump" (first-octant)
  std::string seed_type = "polynomial";
  // default angular seed u = (x2)^2 x3 - (x3)^3 / 3: odd under x -> -x so the
  // built pair is antipodally even, and not axisymmetric about e1
  std::vector<PolynomialS2Function::Monomial> monomials{{1.0, {0, 2, 1}}, {-1.0 / 3.0, {0, 0, 3}}};
  OctantBump bump;

  double profile_a = 1.05, profile_b = 1.95;
  Vec3 alpha{0.0, 0.0, 0.0};
  Vec3 gamma{0.0, 0.0, 0.0};
  std::vector<double> k_list{4.0, 8.0, 16.0};
  int n_theta = 64, n_phi = 128;
  std::vector<double> radii{50.0, 100.0, 200.0};

  std::string base_type = "schwarzschild";  // or "flat"
  double mass = 1.0;
  Vec3 center{0.0, 0.0, 0.0};

  std::string out_dir = "out";
  bool normalize_JC_by_E = true;
  int hodge_orientation = +1;
  int radial_quadrature = 48;
  int cm_n_theta = 160, cm_n_phi = 320;  // bump seeds need finer angular tables

  CorrectorConfig solver;

  static RunConfig from_json_string(const std::string& text);
  static RunConfig from_json_file(const std::string& path);
  std::string to_json() const;
};

DataPtr base_data(const RunConfig& cfg);

struct BasePair {
  ShellTensorField sigma, tau;
};
// Default construction of the angular-momentum pair: tau from the seed u,
// sigma from the Lie-derivative payload sigma~ = Lie_{Y_1} tau~.
BasePair build_pair(const RunConfig& cfg);
ShellTensorField build_cm_sigma(const RunConfig& cfg);

struct CheckRow {
  std::string name;
  double value;
  double threshold;
  bool pass;
};
struct VerifyReport {
  std::vector<CheckRow> checks;
  std::vector<std::array<double, 2>> convergence;  // (n_theta, identity residual)
  bool all_pass() const;
  std::string to_json() const;
  std::string convergence_csv() const;
};
VerifyReport run_verify(const RunConfig& cfg);

struct TargetReport {
  Vec3 lambda_target{}, lambda_measured{};
  Vec3 beta_target{}, beta_measured{};
  double lambda_rel_err = 0.0, beta_rel_err = 0.0;
  bool two_shell_alpha = false, two_shell_gamma = false;
  std::string to_json() const;
};
// Targets lambda = -8 pi alpha on the pair and beta = 64 pi E gamma on the
// CM seed, with closed-loop re-measurement. Written field files go to out_dir
// when save_fields is true.
TargetReport run_target(const RunConfig& cfg, bool save_fields = false);

struct PipelineRow {
  double k;
  Vec3 dJ{}, dC{};
  double E_corr = 0.0;
  Vec3 P_corr{};
  double A = 0.0;
  Vec3 B{};
  double res_before = 0.0, res_after = 0.0;
  double mom_before = 0.0, mom_after = 0.0;
  double support_neutrality = 0.0;  // max charge drift of uncorrected data
};
struct PipelineReport {
  Vec3 alpha{}, gamma{};
  double E_base = 0.0;
  Vec3 J_base{}, C_base{}, P_base{};
  std::vector<PipelineRow> rows;
  std::string to_csv() const;
  std::string to_json() const;
};
// Full build -> verify -> target -> scale -> correct -> measure loop over the
// k ladder. Exactly one of alpha, gamma should be nonzero per run (the paper
// composes the two stages at separate scales).
PipelineReport run_pipeline(const RunConfig& cfg);

// sup |H| and sup |div pi| of `data` over the shell (lo, hi), sampled on the
// corrector-resolution product grid.
std::array<double, 2> shell_residual_sup(const InitialData& data, double lo, double hi,
                                         int n_r = 24, int n_theta = 24, int n_phi = 48);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace admshell

#endif
