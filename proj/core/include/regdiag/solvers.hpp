#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "regdiag/bidiag.hpp"
#include "regdiag/problems.hpp"

namespace regdiag {

struct SolutionSeries {
  std::string method;  // lsqr | cgls | cgme | lsmr | tsvd
  std::vector<double> rel_error;
  std::vector<double> residual_norm;
  std::vector<double> solution_norm;
  std::vector<Eigen::VectorXd> iterates;  // dense iterates for k <= iterate_cap
  int iterate_cap = 64;
  int kstar = 1;  // 1-based argmin of rel_error, ties toward smaller k
  double best_rel_error = 0.0;
  bool truncated_by_breakdown = false;
  bool no_semi_convergence = false;  // error still decreasing at the last k

  int size() const { return static_cast<int>(rel_error.size()); }
};

SolutionSeries lsqr_series(const NoisyProblem& problem, int kmax,
                           Reorth reorth = Reorth::Full, int iterate_cap = 64);
SolutionSeries cgls_series(const NoisyProblem& problem, int kmax, int iterate_cap = 64);
SolutionSeries cgme_series(const NoisyProblem& problem, int kmax, int iterate_cap = 64);
SolutionSeries lsmr_series(const NoisyProblem& problem, int kmax, int iterate_cap = 64);

// Series of any method from a precomputed bidiagonalization (all methods but
// cgls draw from the shared full-reorth process).
SolutionSeries series_from_bidiag(const std::string& method, const BidiagState& state,
                                  const NoisyProblem& problem, int kmax, int iterate_cap = 64);

// Filter factors f_i^{(k)} = 1 - prod_j (1 - sigma_i^2 / theta_j^2) for one k,
// evaluated as a guarded sign/log-magnitude product: factors are clamped to
// magnitude 1e300, and a factor with |1 - sigma_i^2/theta_j^2| <= 1e-10 marks
// a converged Ritz pairing and fixes f_i = 1.
Eigen::VectorXd filter_factors(const std::vector<double>& theta, const Eigen::VectorXd& sigma);

std::pair<int, double> semi_convergence(const SolutionSeries& series);

}  // namespace regdiag
