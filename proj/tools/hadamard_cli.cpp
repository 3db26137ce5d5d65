// hadamard: run verification suites, variation reports, convergence studies and
// triple-symmetry checks from a JSON config.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "hadamard/error.hpp"
#include "hadamard/runner.hpp"

namespace {

struct Overrides {
  std::string config_path;
  std::string out_path;
  std::optional<int> quad_nr;
  std::optional<int> quad_ntheta;
  std::optional<double> fd_dt;
  std::optional<double> tol_boundary;
  std::optional<double> tol_volume;
  std::optional<int> levels;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config_path, "JSON experiment config (defaults apply when omitted)");
  cmd->add_option("--out", o.out_path, "write the report here instead of stdout");
  cmd->add_option("--quad-nr", o.quad_nr, "radial nodes per quadrature ray")->check(CLI::PositiveNumber);
  cmd->add_option("--quad-ntheta", o.quad_ntheta, "angular nodes of the quadrature")->check(CLI::PositiveNumber);
  cmd->add_option("--fd-dt", o.fd_dt, "finite-difference step in t")->check(CLI::PositiveNumber);
  cmd->add_option("--tol-boundary", o.tol_boundary, "relative tolerance for boundary/flux")->check(CLI::PositiveNumber);
  cmd->add_option("--tol-volume", o.tol_volume, "relative tolerance for the volume estimator")
      ->check(CLI::PositiveNumber);
}

hadamard::ExperimentConfig build_config(const Overrides& o) {
  hadamard::ExperimentConfig cfg = o.config_path.empty() ? hadamard::ExperimentConfig{}
                                                          : hadamard::load_config(o.config_path);
  if (o.quad_nr) cfg.quad.n_r = *o.quad_nr;
  if (o.quad_ntheta) cfg.quad.n_theta = *o.quad_ntheta;
  if (o.fd_dt) cfg.fd_dt = *o.fd_dt;
  if (o.tol_boundary) cfg.tol.boundary = *o.tol_boundary;
  if (o.tol_volume) cfg.tol.volume = *o.tol_volume;
  if (o.levels) cfg.levels = *o.levels;
  return cfg;
}

void emit(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw hadamard::Error(hadamard::ErrorKind::Configuration, fmt::format("cannot write \"{}\"", path));
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hadamard variation of Dirichlet Green functions"};
  app.require_subcommand(1);
  Overrides o;
  auto* verify = app.add_subcommand("verify", "run the identity verification suite");
  auto* vary = app.add_subcommand("vary", "report all estimators of dG(a,b)/dt");
  auto* converge = app.add_subcommand("converge", "CSV convergence table over doubling resolutions");
  auto* triple = app.add_subcommand("triple", "second variation along grad G_c, all six orderings");
  for (auto* cmd : {verify, vary, converge, triple}) add_common(cmd, o);
  converge->add_option("--levels", o.levels, "number of resolution levels")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : hadamard::kExitConfig;
  }

  try {
    const hadamard::ExperimentConfig cfg = build_config(o);
    hadamard::RunOutcome outcome;
    std::string default_out;
    if (verify->parsed()) {
      outcome = hadamard::run_verify(cfg);
      default_out = cfg.report_path.value_or("");
    } else if (vary->parsed()) {
      outcome = hadamard::run_vary(cfg);
      default_out = cfg.report_path.value_or("");
    } else if (converge->parsed()) {
      outcome = hadamard::run_convergence(cfg, cfg.levels);
      default_out = cfg.csv_path.value_or("");
    } else {
      outcome = hadamard::run_triple(cfg);
      default_out = cfg.report_path.value_or("");
    }
    emit(outcome.text, o.out_path.empty() ? default_out : o.out_path);
    return outcome.exit_code;
  } catch (const hadamard::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.kind() == hadamard::ErrorKind::Configuration ? hadamard::kExitConfig : hadamard::kExitFail;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return hadamard::kExitFail;
  }
}
