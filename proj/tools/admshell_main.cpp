// Batch front end: verify / target / pipeline / adm / moments / correct.
#include <cstdio>
#include <numbers>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "admshell/pipeline.hpp"

using namespace admshell;

namespace {

struct CommonOpts {
  std::string config_path;
  std::string out_dir;
  std::string resolution;
  std::string k_list;
  std::string radii;
  bool no_e_norm = false;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--config", o.config_path, "JSON run configuration");
  cmd->add_option("--out", o.out_dir, "output directory");
  cmd->add_option("--resolution", o.resolution, "sphere grid, e.g. 64x128");
  cmd->add_option("--k", o.k_list, "comma-separated shell scales, e.g. 4,8,16");
  cmd->add_option("--radii", o.radii, "comma-separated charge radii");
  cmd->add_flag("--no-E-normalization", o.no_e_norm, "report raw J and C fluxes without 1/E");
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
  return out;
}

RunConfig load_config(const CommonOpts& o) {
  RunConfig cfg = o.config_path.empty() ? RunConfig{} : RunConfig::from_json_file(o.config_path);
  if (!o.out_dir.empty()) cfg.out_dir = o.out_dir;
  if (!o.resolution.empty()) {
    auto xpos = o.resolution.find('x');
    if (xpos == std::string::npos) throw std::invalid_argument("--resolution expects NxM");
    cfg.n_theta = std::stoi(o.resolution.substr(0, xpos));
    cfg.n_phi = std::stoi(o.resolution.substr(xpos + 1));
  }
  if (!o.k_list.empty()) cfg.k_list = parse_list(o.k_list);
  if (!o.radii.empty()) cfg.radii = parse_list(o.radii);
  if (o.no_e_norm) cfg.normalize_JC_by_E = false;
  return cfg;
}

int cmd_verify(const CommonOpts& o) {
  RunConfig cfg = load_config(o);
  VerifyReport rep = run_verify(cfg);
  write_text_file(cfg.out_dir + "/verify.json", rep.to_json());
  write_text_file(cfg.out_dir + "/identity_convergence.csv", rep.convergence_csv());
  for (const auto& c : rep.checks)
    std::printf("%-32s %12.4e <= %10.3e  %s\n", c.name.c_str(), c.value, c.threshold,
                c.pass ? "pass" : "FAIL");
  return rep.all_pass() ? 0 : 1;
}

int cmd_target(const CommonOpts& o) {
  RunConfig cfg = load_config(o);
  TargetReport rep = run_target(cfg, true);
  write_text_file(cfg.out_dir + "/target.json", rep.to_json());
  std::printf("lambda closed-loop rel err: %.3e\n", rep.lambda_rel_err);
  std::printf("beta   closed-loop rel err: %.3e\n", rep.beta_rel_err);
  return (rep.lambda_rel_err < 1e-5 && rep.beta_rel_err < 1e-5) ? 0 : 1;
}

int cmd_pipeline(const CommonOpts& o) {
  RunConfig cfg = load_config(o);
  PipelineReport rep = run_pipeline(cfg);
  write_text_file(cfg.out_dir + "/pipeline.csv", rep.to_csv());
  write_text_file(cfg.out_dir + "/pipeline.json", rep.to_json());
  std::printf("%s", rep.to_csv().c_str());
  return 0;
}

int cmd_adm(const CommonOpts& o) {
  RunConfig cfg = load_config(o);
  DataPtr base = base_data(cfg);
  auto grid = make_grid(cfg.n_theta, cfg.n_phi);
  ChargeSet cs = charge_set(*base, cfg.radii, grid, cfg.normalize_JC_by_E);
  write_text_file(cfg.out_dir + "/charges.json", cs.to_json());
  std::printf("%s\n", cs.to_json().c_str());
  return 0;
}

int cmd_moments(const CommonOpts& o) {
  RunConfig cfg = load_config(o);
  BasePair pair = build_pair(cfg);
  MomentVector mv = angular_moment_vector(pair.sigma, pair.tau, cfg.radial_quadrature);
  std::ostringstream os;
  os.precision(15);
  os << "{\"angular_moment\":[" << mv.values[0] << ',' << mv.values[1] << ',' << mv.values[2]
     << "],\"quad_error\":" << mv.quad_error << ",\"scale_invariance\":[";
  bool first = true;
  for (double k : cfg.k_list) {
    MomentVector mk = angular_moment_vector(pair.sigma.scaled_to(k), pair.tau.scaled_to(k),
                                            cfg.radial_quadrature);
    os << (first ? "" : ",") << norm(mk.values - mv.values) / std::max(norm(mv.values), 1e-30);
    first = false;
  }
  os << "]}";
  write_text_file(cfg.out_dir + "/moments.json", os.str());
  std::printf("%s\n", os.str().c_str());
  return 0;
}

int cmd_correct(const CommonOpts& o) {
  RunConfig cfg = load_config(o);
  double k = cfg.k_list.empty() ? 8.0 : cfg.k_list[0];
  DataPtr base = base_data(cfg);
  std::shared_ptr<ShellTensorField> sk, tk;
  if (norm(cfg.alpha) > 0.0) {
    BasePair pair = build_pair(cfg);
    TargetedPair t = target_angular(pair.sigma, pair.tau, -8.0 * std::numbers::pi * cfg.alpha,
                                    cfg.radial_quadrature);
    sk = std::make_shared<ShellTensorField>(t.sigma.scaled_to(k));
    tk = std::make_shared<ShellTensorField>(t.tau.scaled_to(k));
  } else {
    BasePair pair = build_pair(cfg);
    sk = std::make_shared<ShellTensorField>(pair.sigma.scaled_to(k));
    tk = std::make_shared<ShellTensorField>(pair.tau.scaled_to(k));
  }
  DataPtr hat = add_shell(base, sk, tk);
  CorrectorConfig scfg = cfg.solver;
  scfg.rho_max = *std::max_element(cfg.radii.begin(), cfg.radii.end());
  CorrectorSolution sol = solve_corrector(*hat, sk->support_inner(), sk->support_outer(), scfg);
  DataPtr corrected = assemble_corrected(hat, sol);
  auto after = shell_residual_sup(*corrected, sk->support_inner(), sk->support_outer(), 16,
                                  cfg.solver.n_theta, cfg.solver.n_phi);
  sol.residual_after = after[0];
  sol.momentum_after = after[1];
  write_text_file(cfg.out_dir + "/corrector.json", sol.to_json());
  std::printf("%s\n", sol.to_json().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"shell-supported deformations of vacuum initial data: build, verify, target, correct"};
  app.require_subcommand(1);

  CommonOpts o;
  auto* verify = app.add_subcommand("verify", "run the operator identity and invariant suites");
  auto* target = app.add_subcommand("target", "build fields and hit the moment targets");
  auto* pipeline = app.add_subcommand("pipeline", "full build/correct/measure loop over k");
  auto* adm = app.add_subcommand("adm", "ADM charges of the base data");
  auto* moments = app.add_subcommand("moments", "moment vectors and scale invariance");
  auto* correct = app.add_subcommand("correct", "one corrector solve at the first k");
  for (auto* cmd : {verify, target, pipeline, adm, moments, correct}) add_common(cmd, o);

  CLI11_PARSE(app, argc, argv);

  try {
    if (verify->parsed()) return cmd_verify(o);
    if (target->parsed()) return cmd_target(o);
    if (pipeline->parsed()) return cmd_pipeline(o);
    if (adm->parsed()) return cmd_adm(o);
    if (moments->parsed()) return cmd_moments(o);
    if (correct->parsed()) return cmd_correct(o);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
