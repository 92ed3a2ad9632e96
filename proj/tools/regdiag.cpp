#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "regdiag/experiment.hpp"

namespace {

regdiag::DecayModel parse_decay(const std::string& text) {
  // geometric:RHO | power:ZETA:ALPHA
  const auto split = [](const std::string& s) {
    std::vector<std::string> parts;
    std::size_t pos = 0;
    while (pos <= s.size()) {
      const std::size_t c = s.find(':', pos);
      if (c == std::string::npos) {
        parts.push_back(s.substr(pos));
        break;
      }
      parts.push_back(s.substr(pos, c - pos));
      pos = c + 1;
    }
    return parts;
  };
  const std::vector<std::string> parts = split(text);
  if (parts.size() == 2 && parts[0] == "geometric")
    return regdiag::DecayModel::geometric(std::stod(parts[1]));
  if (parts.size() == 3 && parts[0] == "power")
    return regdiag::DecayModel::power_law(std::stod(parts[1]), std::stod(parts[2]));
  throw regdiag::ValidationError("invalid-decay: expected geometric:RHO or power:ZETA:ALPHA");
}

void add_common(CLI::App* cmd, regdiag::ExperimentConfig& cfg, std::string& decay_text,
                std::string& reorth_text, std::string& methods_text) {
  cmd->add_option("--kind", cfg.kind, "problem kind: synthetic | shaw | deriv2")->required();
  cmd->add_option("--n", cfg.n, "problem size n")->required();
  cmd->add_option("--m", cfg.m, "rows m (synthetic; default n)");
  cmd->add_option("--decay", decay_text, "geometric:RHO | power:ZETA:ALPHA");
  cmd->add_option("--beta", cfg.beta, "Picard exponent (synthetic)");
  cmd->add_option("--eps", cfg.eps, "relative noise level");
  cmd->add_option("--seed", cfg.seeds, "seed (repeatable)");
  cmd->add_option("--kmax", cfg.kmax, "iteration cap (default: min(n-1, 3 k0))");
  cmd->add_option("--reorth", reorth_text, "none | full")->default_val("full");
  cmd->add_option("--methods", methods_text, "comma-separated: lsqr,cgls,cgme,lsmr");
  cmd->add_option("--delta", cfg.delta, "delta for the small-eps Ritz condition")
      ->default_val(0.1);
  cmd->add_option("--out", cfg.out, "output directory")->required();
}

void finish_config(regdiag::ExperimentConfig& cfg, const std::string& decay_text,
                   const std::string& reorth_text, const std::string& methods_text) {
  if (!decay_text.empty()) cfg.decay = parse_decay(decay_text);
  if (reorth_text == "none")
    cfg.reorth = regdiag::Reorth::None;
  else if (reorth_text == "full")
    cfg.reorth = regdiag::Reorth::Full;
  else
    throw regdiag::ValidationError("invalid-parameter: --reorth must be none or full");
  if (!methods_text.empty()) {
    cfg.methods.clear();
    std::size_t pos = 0;
    while (pos <= methods_text.size()) {
      const std::size_t c = methods_text.find(',', pos);
      if (c == std::string::npos) {
        cfg.methods.push_back(methods_text.substr(pos));
        break;
      }
      cfg.methods.push_back(methods_text.substr(pos, c - pos));
      pos = c + 1;
    }
  }
  if (cfg.seeds.empty()) cfg.seeds.push_back(1);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Krylov iterative regularization diagnostics"};
  app.require_subcommand(1);

  regdiag::ExperimentConfig cfg;
  std::string decay_text, reorth_text = "full", methods_text;
  std::string report_dir;

  CLI::App* cgen = app.add_subcommand("generate", "write a problem bundle");
  add_common(cgen, cfg, decay_text, reorth_text, methods_text);
  CLI::App* csemi = app.add_subcommand("semiconv", "solver and TSVD semi-convergence series");
  add_common(csemi, cfg, decay_text, reorth_text, methods_text);
  CLI::App* cdiag = app.add_subcommand("diagnose", "sin-theta, Lagrange and Ritz diagnostics");
  add_common(cdiag, cfg, decay_text, reorth_text, methods_text);
  CLI::App* crep = app.add_subcommand("report", "merge a run directory into one JSON");
  crep->add_option("--out", report_dir, "run directory to merge")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (crep->parsed()) {
      regdiag::cmd_report(report_dir);
      return 0;
    }
    finish_config(cfg, decay_text, reorth_text, methods_text);
    if (cgen->parsed())
      regdiag::cmd_generate(cfg);
    else if (csemi->parsed())
      regdiag::cmd_semiconv(cfg);
    else if (cdiag->parsed())
      regdiag::cmd_diagnose(cfg);
    return 0;
  } catch (const regdiag::ValidationError& ex) {
    std::fprintf(stderr, "validation error: %s\n", ex.what());
    return 2;
  } catch (const regdiag::NumericalError& ex) {
    std::fprintf(stderr, "numerical failure: %s\n", ex.what());
    return 3;
  } catch (const std::exception& ex) {
    std::fprintf(stderr, "error: %s\n", ex.what());
    return 3;
  }
}
