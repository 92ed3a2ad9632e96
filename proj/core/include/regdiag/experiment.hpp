#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "regdiag/bidiag.hpp"
#include "regdiag/problems.hpp"

namespace regdiag {

struct ExperimentConfig {
  std::string kind;  // synthetic | shaw | deriv2
  int n = 0;
  int m = 0;  // 0 -> m = n
  std::optional<DecayModel> decay;
  double beta = 1.0;
  double eps = 0.0;  // 0 -> noise-free (generate only)
  std::vector<std::uint64_t> seeds;  // noise seeds; synthetic problem seed reuses each entry
  int kmax = 0;      // 0 -> min(n-1, 3 * k0)
  Reorth reorth = Reorth::Full;
  std::vector<std::string> methods = {"lsqr"};
  double delta = 0.1;
  std::filesystem::path out;

  void validate_common() const;
  // Decay model used for estimates; shaw -> Geometric(e^2), deriv2 -> PowerLaw(1/pi^2, 2).
  DecayModel effective_decay() const;
};

int worker_pool_size(std::size_t tasks);  // honors REGDIAG_THREADS

IllPosedProblem make_problem(const ExperimentConfig& cfg, std::uint64_t seed);

void cmd_generate(const ExperimentConfig& cfg);
void cmd_semiconv(const ExperimentConfig& cfg);
void cmd_diagnose(const ExperimentConfig& cfg);
void cmd_report(const std::filesystem::path& run_dir);

}  // namespace regdiag
