#include "regdiag/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/QR>

namespace regdiag {

namespace {

void finalize(SolutionSeries& s) {
  if (s.rel_error.empty()) throw NumericalError("empty-series: no iterations computed");
  const auto it = std::min_element(s.rel_error.begin(), s.rel_error.end());
  s.kstar = 1 + static_cast<int>(it - s.rel_error.begin());
  s.best_rel_error = *it;
  s.no_semi_convergence = (s.kstar == s.size());
}

void push_iterate(SolutionSeries& s, const Eigen::VectorXd& x, const NoisyProblem& p, int k) {
  s.rel_error.push_back((x - p.base.x_true).norm() / p.base.x_true.norm());
  s.residual_norm.push_back((p.base.A * x - p.b).norm());
  s.solution_norm.push_back(x.norm());
  if (k <= s.iterate_cap) s.iterates.push_back(x);
}

// Upper-bidiagonal R factor of B_k from the Givens elimination of the
// subdiagonal; same singular values, used by the LSMR projected solve.
void r_factor(const BidiagState& st, int k, Eigen::VectorXd& diag, Eigen::VectorXd& super) {
  diag.resize(k);
  super.resize(std::max(k - 1, 0));
  double rhobar = st.alphas[0];
  for (int j = 0; j + 1 < k; ++j) {
    const double beta = st.betas[static_cast<std::size_t>(j) + 1];
    const double rho = std::hypot(rhobar, beta);
    const double c = rhobar / rho, s = beta / rho;
    diag(j) = rho;
    super(j) = s * st.alphas[static_cast<std::size_t>(j) + 1];
    rhobar = c * st.alphas[static_cast<std::size_t>(j) + 1];
  }
  diag(k - 1) = std::hypot(rhobar, st.betas[static_cast<std::size_t>(k)]);
}

}  // namespace

SolutionSeries series_from_bidiag(const std::string& method, const BidiagState& st,
                                  const NoisyProblem& p, int kmax, int iterate_cap) {
  SolutionSeries s;
  s.method = method;
  s.iterate_cap = iterate_cap;
  const int kend = std::min(kmax, st.k);
  s.truncated_by_breakdown = st.breakdown.has_value() && st.k < kmax;

  if (method == "lsqr") {
    for (int k = 1; k <= kend; ++k) {
      Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k + 1);
      rhs(0) = st.beta1();
      Eigen::VectorXd y = st.B(k).colPivHouseholderQr().solve(rhs);
      push_iterate(s, st.Q.leftCols(k) * y, p, k);
    }
  } else if (method == "cgme") {
    // Craig: forward substitution on the leading k-by-k lower bidiagonal.
    Eigen::VectorXd z(kend);
    for (int k = 1; k <= kend; ++k) {
      if (k == 1)
        z(0) = st.beta1() / st.alphas[0];
      else
        z(k - 1) = -st.betas[static_cast<std::size_t>(k) - 1] * z(k - 2) /
                   st.alphas[static_cast<std::size_t>(k) - 1];
      push_iterate(s, st.Q.leftCols(k) * z.head(k), p, k);
    }
  } else if (method == "lsmr") {
    // min_y ||A^T (b - A Q_k y)|| through the R factor: with z = R y,
    // ||A^T r||^2 = ||R^T z - alpha_1 beta_1 e_1||^2 + (abar/R_kk)^2 (e_k^T z)^2,
    // abar = alpha_{k+1} beta_{k+1}.
    for (int k = 1; k <= kend; ++k) {
      Eigen::VectorXd diag, super;
      r_factor(st, k, diag, super);
      double alpha_next = 0.0;
      if (k < st.k)
        alpha_next = st.alphas[static_cast<std::size_t>(k)];
      else if (st.alpha_next)
        alpha_next = *st.alpha_next;
      const double abar = alpha_next * st.betas[static_cast<std::size_t>(k)];

      Eigen::MatrixXd G = Eigen::MatrixXd::Zero(k + 1, k);
      for (int i = 0; i < k; ++i) {
        G(i, i) = diag(i);
        if (i + 1 < k) G(i + 1, i) = super(i);
      }
      G(k, k - 1) = abar / diag(k - 1);
      Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k + 1);
      rhs(0) = st.alphas[0] * st.beta1();
      Eigen::VectorXd z = G.colPivHouseholderQr().solve(rhs);
      // y = R^{-1} z by back substitution
      Eigen::VectorXd y(k);
      for (int i = k - 1; i >= 0; --i) {
        double acc = z(i);
        if (i + 1 < k) acc -= super(i) * y(i + 1);
        y(i) = acc / diag(i);
      }
      push_iterate(s, st.Q.leftCols(k) * y, p, k);
    }
  } else {
    throw ValidationError("unknown-method: " + method);
  }
  finalize(s);
  return s;
}

SolutionSeries lsqr_series(const NoisyProblem& p, int kmax, Reorth reorth, int iterate_cap) {
  if (kmax < 1 || kmax > p.base.n())
    throw ValidationError("invalid-parameter: kmax must be in [1, n]");
  const BidiagState st = lanczos_bidiag(p.base.A, p.b, kmax, reorth);
  return series_from_bidiag("lsqr", st, p, kmax, iterate_cap);
}

SolutionSeries cgme_series(const NoisyProblem& p, int kmax, int iterate_cap) {
  const BidiagState st = lanczos_bidiag(p.base.A, p.b, kmax, Reorth::Full);
  return series_from_bidiag("cgme", st, p, kmax, iterate_cap);
}

SolutionSeries lsmr_series(const NoisyProblem& p, int kmax, int iterate_cap) {
  const BidiagState st = lanczos_bidiag(p.base.A, p.b, kmax, Reorth::Full);
  return series_from_bidiag("lsmr", st, p, kmax, iterate_cap);
}

SolutionSeries cgls_series(const NoisyProblem& p, int kmax, int iterate_cap) {
  // Textbook CG on A^T A x = A^T b from the zero start, kept as an
  // independent route for the same-iterates checks.
  if (kmax < 1 || kmax > p.base.n())
    throw ValidationError("invalid-parameter: kmax must be in [1, n]");
  SolutionSeries s;
  s.method = "cgls";
  s.iterate_cap = iterate_cap;

  const Eigen::MatrixXd& A = p.base.A;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(A.cols());
  Eigen::VectorXd r = p.b;
  Eigen::VectorXd sres = A.transpose() * r;
  Eigen::VectorXd d = sres;
  double gamma = sres.squaredNorm();
  for (int k = 1; k <= kmax; ++k) {
    const Eigen::VectorXd q = A * d;
    const double qq = q.squaredNorm();
    if (qq == 0.0 || gamma == 0.0) {
      s.truncated_by_breakdown = true;
      break;
    }
    const double step = gamma / qq;
    x += step * d;
    r -= step * q;
    sres.noalias() = A.transpose() * r;
    const double gamma_new = sres.squaredNorm();
    d = sres + (gamma_new / gamma) * d;
    gamma = gamma_new;
    push_iterate(s, x, p, k);
  }
  finalize(s);
  return s;
}

Eigen::VectorXd filter_factors(const std::vector<double>& theta, const Eigen::VectorXd& sigma) {
  if (theta.empty()) throw ValidationError("invalid-spectrum: no Ritz values");
  for (double t : theta)
    if (!(t > 0.0)) throw ValidationError("invalid-spectrum: nonpositive Ritz value");

  constexpr double kSnap = 1e-10;       // converged Ritz pairing -> filter is 1
  constexpr double kLogClamp = 690.0;   // |product| clamped near 1e300

  Eigen::VectorXd f(sigma.size());
  for (Eigen::Index i = 0; i < sigma.size(); ++i) {
    double sign = 1.0, logmag = 0.0;
    bool snapped = false;
    for (double t : theta) {
      const double ratio = sigma(i) / t;
      const double factor = 1.0 - ratio * ratio;
      if (std::abs(factor) <= kSnap) {
        snapped = true;
        break;
      }
      if (factor < 0.0) sign = -sign;
      logmag += std::log(std::abs(factor));
    }
    if (snapped)
      f(i) = 1.0;
    else
      f(i) = 1.0 - sign * std::exp(std::min(logmag, kLogClamp));
  }
  return f;
}

std::pair<int, double> semi_convergence(const SolutionSeries& series) {
  if (series.size() < 2)
    throw ValidationError("invalid-parameter: series needs at least 2 entries");
  // first minimum: ties break toward smaller k
  const auto it = std::min_element(series.rel_error.begin(), series.rel_error.end());
  return {1 + static_cast<int>(it - series.rel_error.begin()), *it};
}

}  // namespace regdiag
