#pragma once

#include <cmath>
#include <cstdint>

#include <Eigen/Dense>

#include "regdiag/problems.hpp"

namespace testsupport {

inline regdiag::IllPosedProblem severe_problem(int n, double beta, std::uint64_t seed,
                                               double rho = std::exp(2.0)) {
  regdiag::SyntheticSpec spec;
  spec.m = spec.n = n;
  spec.decay = regdiag::DecayModel::geometric(rho);
  spec.beta = beta;
  spec.seed = seed;
  return regdiag::gen_synthetic(spec);
}

inline regdiag::IllPosedProblem power_problem(int n, double alpha, double beta,
                                              std::uint64_t seed, double zeta = 1.0) {
  regdiag::SyntheticSpec spec;
  spec.m = spec.n = n;
  spec.decay = regdiag::DecayModel::power_law(zeta, alpha);
  spec.beta = beta;
  spec.seed = seed;
  return regdiag::gen_synthetic(spec);
}

// Noise-free wrapper for solver series that require a NoisyProblem.
inline regdiag::NoisyProblem noise_free(const regdiag::IllPosedProblem& p) {
  regdiag::NoisyProblem np;
  np.base = p;
  np.e = Eigen::VectorXd::Zero(p.m());
  np.b = p.b_true;
  np.epsilon = 0.0;
  np.eta = 0.0;
  np.seed = 0;
  return np;
}

inline double geometric_mean(const std::vector<double>& v) {
  double acc = 0.0;
  for (double x : v) acc += std::log(x);
  return std::exp(acc / static_cast<double>(v.size()));
}

}  // namespace testsupport
