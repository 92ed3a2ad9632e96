#include "regdiag/problems.hpp"

#include <cmath>

#include <Eigen/QR>

#include "regdiag/rng.hpp"

namespace regdiag {

DecayModel DecayModel::geometric(double rho) {
  DecayModel d;
  d.kind = Kind::Geometric;
  d.rho = rho;
  d.validate();
  return d;
}

DecayModel DecayModel::power_law(double zeta, double alpha) {
  DecayModel d;
  d.kind = Kind::PowerLaw;
  d.zeta = zeta;
  d.alpha = alpha;
  d.validate();
  return d;
}

void DecayModel::validate() const {
  if (kind == Kind::Geometric) {
    if (!(rho > 1.0)) throw ValidationError("invalid-decay: geometric requires rho > 1");
  } else {
    if (!(zeta > 0.0)) throw ValidationError("invalid-decay: power law requires zeta > 0");
    if (!(alpha > 0.5)) throw ValidationError("invalid-decay: power law requires alpha > 1/2");
  }
}

double DecayModel::sigma(int j) const {
  if (kind == Kind::Geometric) return std::pow(rho, -static_cast<double>(j));
  return zeta * std::pow(static_cast<double>(j), -alpha);
}

void SyntheticSpec::validate() const {
  if (n < 2) throw ValidationError("invalid-dimension: n must be >= 2");
  if (m < n) throw ValidationError("invalid-dimension: m must be >= n");
  if (!(beta > 0.0)) throw ValidationError("invalid-parameter: beta must be > 0");
  decay.validate();
}

namespace {

// Haar-random orthonormal columns from a seeded Gaussian matrix, with the
// first nonzero entry of each column made positive.
Eigen::MatrixXd haar_orthonormal(GaussianRng& rng, Eigen::Index rows, Eigen::Index cols) {
  Eigen::MatrixXd g = rng.normal_matrix(rows, cols);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) {
      if (q(i, j) != 0.0) {
        if (q(i, j) < 0.0) q.col(j) = -q.col(j);
        break;
      }
    }
  }
  return q;
}

}  // namespace

IllPosedProblem gen_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  const Eigen::Index m = spec.m, n = spec.n;

  Eigen::VectorXd sigma(n);
  for (Eigen::Index j = 0; j < n; ++j) sigma(j) = spec.decay.sigma(static_cast<int>(j) + 1);

  GaussianRng rng(split_seed(spec.seed, 0));
  Eigen::MatrixXd U = haar_orthonormal(rng, m, n);
  Eigen::MatrixXd V = haar_orthonormal(rng, n, n);

  IllPosedProblem p;
  p.A = U * sigma.asDiagonal() * V.transpose();
  Eigen::VectorXd picard = sigma.array().pow(1.0 + spec.beta);
  p.b_true = U * picard;
  p.x_true = V * sigma.array().pow(spec.beta).matrix();
  p.kind = "synthetic";
  p.spec = spec;
  p.oracle_svd = SvdFactors{sigma, std::move(U), std::move(V)};
  return p;
}

IllPosedProblem gen_shaw(int n) {
  if (n < 8 || n % 2 != 0) throw ValidationError("invalid-dimension: shaw requires even n >= 8");
  const double h = M_PI / n;
  Eigen::VectorXd t(n);
  for (int i = 0; i < n; ++i) t(i) = -M_PI / 2 + (i + 0.5) * h;

  IllPosedProblem p;
  p.A.resize(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double u = M_PI * (std::sin(t(i)) + std::sin(t(j)));
      const double sinc = (u == 0.0) ? 1.0 : std::sin(u) / u;
      const double c = std::cos(t(i)) + std::cos(t(j));
      p.A(i, j) = h * c * c * sinc * sinc;
    }
  }
  p.x_true.resize(n);
  for (int i = 0; i < n; ++i)
    p.x_true(i) = 2.0 * std::exp(-6.0 * std::pow(t(i) - 0.8, 2)) +
                  std::exp(-2.0 * std::pow(t(i) + 0.5, 2));
  p.b_true = p.A * p.x_true;
  p.kind = "shaw";
  return p;
}

IllPosedProblem gen_deriv2(int n) {
  if (n < 8) throw ValidationError("invalid-dimension: deriv2 requires n >= 8");
  const double h = 1.0 / n;
  Eigen::VectorXd t(n);
  for (int i = 0; i < n; ++i) t(i) = (i + 0.5) * h;

  IllPosedProblem p;
  p.A.resize(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double s = t(i), tt = t(j);
      p.A(i, j) = h * (s < tt ? s * (tt - 1.0) : tt * (s - 1.0));
    }
  }
  p.x_true = t;
  p.b_true = p.A * p.x_true;
  p.kind = "deriv2";
  return p;
}

NoisyProblem add_noise(const IllPosedProblem& problem, double epsilon, std::uint64_t seed) {
  if (!(epsilon > 0.0)) throw ValidationError("invalid-parameter: epsilon must be > 0");
  if (epsilon >= 1.0) throw ValidationError("noise-dominates: epsilon must be < 1");
  const double bnorm = problem.b_true.norm();
  if (bnorm == 0.0) throw ValidationError("degenerate-rhs: b_true is zero");

  GaussianRng rng(split_seed(seed, 1));
  Eigen::VectorXd e = rng.normal_vector(problem.m());
  e *= epsilon * bnorm / e.norm();  // hit the relative level exactly

  NoisyProblem np;
  np.base = problem;
  np.b = problem.b_true + e;
  np.eta = e.norm() / std::sqrt(static_cast<double>(problem.m()));
  np.e = std::move(e);
  np.epsilon = epsilon;
  np.seed = seed;
  return np;
}

}  // namespace regdiag
