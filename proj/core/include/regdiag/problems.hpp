#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <Eigen/Core>

#include "regdiag/errors.hpp"

namespace regdiag {

// Singular value decay model: sigma_j = rho^{-j} (severe) or
// sigma_j = zeta * j^{-alpha} (moderate for alpha > 1, mild for 1/2 < alpha <= 1).
struct DecayModel {
  enum class Kind { Geometric, PowerLaw };

  Kind kind = Kind::Geometric;
  double rho = 0.0;    // Geometric
  double zeta = 0.0;   // PowerLaw
  double alpha = 0.0;  // PowerLaw

  static DecayModel geometric(double rho);
  static DecayModel power_law(double zeta, double alpha);

  void validate() const;
  double sigma(int j) const;  // j is 1-based
  bool severe() const { return kind == Kind::Geometric; }
};

struct SyntheticSpec {
  int m = 0;
  int n = 0;
  DecayModel decay;
  double beta = 0.0;  // Picard exponent: |u_j^T b_true| = sigma_j^{1+beta}
  std::uint64_t seed = 0;

  void validate() const;
};

// Full SVD data: sigma strictly decreasing positive, U m-by-n with
// orthonormal columns, V n-by-n orthogonal.
struct SvdFactors {
  Eigen::VectorXd sigma;
  Eigen::MatrixXd U;
  Eigen::MatrixXd V;

  Eigen::Index n() const { return sigma.size(); }
};

struct IllPosedProblem {
  Eigen::MatrixXd A;
  Eigen::VectorXd b_true;
  Eigen::VectorXd x_true;
  std::string kind;  // "synthetic" | "shaw" | "deriv2"
  std::optional<SyntheticSpec> spec;       // synthetic only
  std::optional<SvdFactors> oracle_svd;    // exact factors, synthetic only

  Eigen::Index m() const { return A.rows(); }
  Eigen::Index n() const { return A.cols(); }
};

struct NoisyProblem {
  IllPosedProblem base;
  Eigen::VectorXd e;
  Eigen::VectorXd b;
  double epsilon = 0.0;  // ||e|| / ||b_true||
  double eta = 0.0;      // ||e|| / sqrt(m)
  std::uint64_t seed = 0;
};

IllPosedProblem gen_synthetic(const SyntheticSpec& spec);
IllPosedProblem gen_shaw(int n);
IllPosedProblem gen_deriv2(int n);
NoisyProblem add_noise(const IllPosedProblem& problem, double epsilon, std::uint64_t seed);

}  // namespace regdiag
