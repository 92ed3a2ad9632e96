#include "regdiag/bidiag.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace regdiag {

namespace {

constexpr double kBreakdownRel = 1e-14;

struct Rot {
  double c, s, r;
};

Rot rotg(double f, double g) {
  if (g == 0.0) return {1.0, 0.0, f};
  if (f == 0.0) return {0.0, 1.0, g};
  const double r = std::hypot(f, g);
  return {f / r, g / r, r};
}

}  // namespace

Eigen::MatrixXd BidiagState::B(int j) const {
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(j + 1, j);
  for (int i = 0; i < j; ++i) {
    b(i, i) = alphas[static_cast<std::size_t>(i)];
    b(i + 1, i) = betas[static_cast<std::size_t>(i) + 1];
  }
  return b;
}

BidiagState lanczos_bidiag(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                           int kmax, Reorth reorth) {
  const Eigen::Index m = A.rows(), n = A.cols();
  if (kmax < 1 || kmax > n) throw ValidationError("invalid-parameter: kmax must be in [1, n]");
  const double beta1 = b.norm();
  if (beta1 == 0.0) throw ValidationError("degenerate-start: b is zero");

  BidiagState st;
  st.P.resize(m, kmax + 1);
  st.Q.resize(n, kmax);
  st.betas.push_back(beta1);
  st.P.col(0) = b / beta1;
  st.sigma1_estimate = 0.0;

  auto reorth_against = [&](Eigen::VectorXd& v, const Eigen::MatrixXd& basis, int cols) {
    if (reorth == Reorth::None || cols == 0) return;
    for (int pass = 0; pass < 2; ++pass)
      v.noalias() -= basis.leftCols(cols) * (basis.leftCols(cols).transpose() * v);
  };

  int k = 0;
  for (int j = 1; j <= kmax; ++j) {
    Eigen::VectorXd r = A.transpose() * st.P.col(j - 1);
    if (j > 1) r -= st.betas[static_cast<std::size_t>(j) - 1] * st.Q.col(j - 2);
    reorth_against(r, st.Q, j - 1);
    const double alpha = r.norm();
    st.sigma1_estimate = std::max(st.sigma1_estimate, alpha);
    if (alpha <= kBreakdownRel * st.sigma1_estimate) {
      st.breakdown = j;  // alpha-breakdown: q_j does not exist, k stays j-1
      break;
    }
    st.alphas.push_back(alpha);
    st.Q.col(j - 1) = r / alpha;
    k = j;

    Eigen::VectorXd z = A * st.Q.col(j - 1) - alpha * st.P.col(j - 1);
    reorth_against(z, st.P, j);
    const double beta = z.norm();
    st.sigma1_estimate = std::max(st.sigma1_estimate, std::hypot(alpha, beta));
    st.betas.push_back(beta);
    if (beta <= kBreakdownRel * st.sigma1_estimate) {
      st.breakdown = j;  // beta-breakdown: p_{j+1} does not exist
      break;
    }
    st.P.col(j) = z / beta;
  }

  st.k = k;
  const bool beta_breakdown = st.breakdown && static_cast<int>(st.alphas.size()) == *st.breakdown;
  st.P.conservativeResize(Eigen::NoChange, beta_breakdown ? k : k + 1);
  st.Q.conservativeResize(Eigen::NoChange, k);

  if (!st.breakdown && k == kmax && k < n) {
    // Half-step for the (k+1)-st left relation.
    Eigen::VectorXd r = A.transpose() * st.P.col(k) - st.betas.back() * st.Q.col(k - 1);
    reorth_against(r, st.Q, k);
    const double alpha = r.norm();
    st.alpha_next = alpha;
    if (alpha > kBreakdownRel * st.sigma1_estimate) st.q_next = r / alpha;
  }
  return st;
}

std::vector<double> bidiagonal_svd(std::vector<double> d, std::vector<double> e) {
  const int m = static_cast<int>(d.size());
  if (m == 0) return {};
  if (e.size() + 1 != d.size())
    throw ValidationError("invalid-parameter: bidiagonal_svd needs e.size() == d.size()-1");

  const double tol = 100.0 * std::numeric_limits<double>::epsilon();
  const int max_sweeps = 200 * m + 10000;

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    // Deflate negligible superdiagonal entries (Demmel-Kahan forward criterion).
    double mu = std::abs(d[0]);
    for (int i = 0; i + 1 < m; ++i) {
      if (std::abs(e[static_cast<std::size_t>(i)]) <= tol * mu) {
        e[static_cast<std::size_t>(i)] = 0.0;
        mu = std::abs(d[i + 1]);
      } else {
        mu = std::abs(d[i + 1]) * (mu / (mu + std::abs(e[static_cast<std::size_t>(i)])));
      }
    }
    // Find the trailing unreduced block [lo, hi].
    int hi = m - 1;
    while (hi > 0 && e[static_cast<std::size_t>(hi) - 1] == 0.0) --hi;
    if (hi == 0) break;
    int lo = hi;
    while (lo > 0 && e[static_cast<std::size_t>(lo) - 1] != 0.0) --lo;

    // One implicit zero-shift QR sweep on [lo, hi].
    double cs = 1.0, oldcs = 1.0, sn = 0.0, oldsn = 0.0;
    for (int i = lo; i < hi; ++i) {
      Rot g1 = rotg(d[i] * cs, e[static_cast<std::size_t>(i)]);
      cs = g1.c;
      sn = g1.s;
      if (i != lo) e[static_cast<std::size_t>(i) - 1] = oldsn * g1.r;
      Rot g2 = rotg(oldcs * g1.r, d[i + 1] * sn);
      oldcs = g2.c;
      oldsn = g2.s;
      d[i] = g2.r;
    }
    const double h = d[hi] * cs;
    e[static_cast<std::size_t>(hi) - 1] = h * oldsn;
    d[hi] = h * oldcs;

    if (sweep == max_sweeps - 1)
      throw NumericalError("bidiagonal-svd: zero-shift QR failed to converge");
  }

  for (double& v : d) v = std::abs(v);
  std::sort(d.begin(), d.end(), std::greater<double>());
  return d;
}

std::vector<double> ritz_values(const BidiagState& state, int k) {
  if (k < 1) throw ValidationError("invalid-parameter: k must be >= 1");
  if (k > state.k) {
    if (state.breakdown)
      throw NumericalError("truncated-spectrum: breakdown before requested k");
    throw ValidationError("invalid-parameter: k exceeds the computed steps");
  }

  // Givens QR of the (k+1)-by-k lower bidiagonal: R is k-by-k upper bidiagonal
  // with the same singular values.
  std::vector<double> diag(static_cast<std::size_t>(k));
  std::vector<double> super(static_cast<std::size_t>(k) - 1);
  double rhobar = state.alphas[0];
  for (int j = 0; j + 1 < k; ++j) {
    Rot g = rotg(rhobar, state.betas[static_cast<std::size_t>(j) + 1]);
    diag[static_cast<std::size_t>(j)] = g.r;
    super[static_cast<std::size_t>(j)] = g.s * state.alphas[static_cast<std::size_t>(j) + 1];
    rhobar = g.c * state.alphas[static_cast<std::size_t>(j) + 1];
  }
  diag[static_cast<std::size_t>(k) - 1] = std::hypot(rhobar, state.betas[static_cast<std::size_t>(k)]);

  return bidiagonal_svd(std::move(diag), std::move(super));
}

RelationReport verify_relations(const BidiagState& state, const Eigen::MatrixXd& A) {
  RelationReport rep;
  const int k = state.k;
  const int pcols = static_cast<int>(state.P.cols());
  const Eigen::MatrixXd Bk = state.B(k);

  rep.res_AQ_PB = (A * state.Q - state.P * Bk.topRows(pcols)).norm();

  Eigen::MatrixXd M = A.transpose() * state.P - state.Q * Bk.transpose().leftCols(pcols);
  if (pcols == k + 1) {
    if (state.alpha_next && state.q_next)
      M.col(k) -= (*state.alpha_next) * (*state.q_next);
    else
      M.col(k).setZero();  // alpha_{k+1} not available; first k columns carry the relation
  }
  rep.res_ATP_QBT = M.norm();

  rep.orth_defect_P =
      (state.P.transpose() * state.P - Eigen::MatrixXd::Identity(pcols, pcols)).norm();
  rep.orth_defect_Q =
      (state.Q.transpose() * state.Q - Eigen::MatrixXd::Identity(k, k)).norm();
  return rep;
}

}  // namespace regdiag
