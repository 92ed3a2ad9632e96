// Invariant sweeps over randomly drawn problem configurations.

#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "regdiag/bidiag.hpp"
#include "regdiag/problems.hpp"
#include "regdiag/solvers.hpp"
#include "regdiag/subspace.hpp"
#include "regdiag/svdtools.hpp"

using namespace regdiag;

namespace {

struct Config {
  SyntheticSpec spec;
  double eps;
  std::uint64_t noise_seed;
};

// hand-rolled generator: geometric and power-law decays over a spread of
// sizes, Picard exponents and noise levels
std::vector<Config> draw_configs(int count, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_int_distribution<int> nd(12, 48);
  std::uniform_real_distribution<double> rho(1.2, 9.0);
  std::uniform_real_distribution<double> alpha(0.55, 4.0);
  std::uniform_real_distribution<double> zeta(0.5, 3.0);
  std::uniform_real_distribution<double> beta(0.1, 2.0);
  std::uniform_real_distribution<double> logeps(-4.0, -1.0);

  std::vector<Config> out;
  for (int i = 0; i < count; ++i) {
    Config c;
    c.spec.n = nd(gen);
    c.spec.m = c.spec.n + (gen() % 2 ? 0 : static_cast<int>(gen() % 17));
    c.spec.decay = (gen() % 2) ? DecayModel::geometric(rho(gen))
                               : DecayModel::power_law(zeta(gen), alpha(gen));
    c.spec.beta = beta(gen);
    c.spec.seed = gen();
    c.eps = std::pow(10.0, logeps(gen));
    c.noise_seed = gen();
    out.push_back(c);
  }
  return out;
}

}  // namespace

TEST_CASE("generated problems reproduce their SVD and Picard model") {
  for (const Config& c : draw_configs(20, 101)) {
    CAPTURE(c.spec.n);
    CAPTURE(c.spec.seed);
    const IllPosedProblem p = gen_synthetic(c.spec);
    const SvdFactors& f = *p.oracle_svd;
    const double s1 = f.sigma(0);
    for (int j = 0; j + 1 < c.spec.n; ++j) CHECK(f.sigma(j) > f.sigma(j + 1));
    for (int j = 0; j < c.spec.n; ++j)
      CHECK((p.A * f.V.col(j) - f.sigma(j) * f.U.col(j)).norm() <= 1e-12 * s1);
    CHECK((p.A * p.x_true - p.b_true).norm() <= 1e-12 * p.b_true.norm());
    const Eigen::VectorXd coeff = (f.U.transpose() * p.b_true).cwiseAbs();
    for (int j = 0; j < c.spec.n; ++j)
      CHECK(coeff(j) ==
            doctest::Approx(std::pow(f.sigma(j), 1.0 + c.spec.beta)).epsilon(1e-10));
  }
}

TEST_CASE("noise level is exact and the bidiagonal relations hold") {
  for (const Config& c : draw_configs(12, 202)) {
    CAPTURE(c.spec.n);
    CAPTURE(c.noise_seed);
    const IllPosedProblem p = gen_synthetic(c.spec);
    const NoisyProblem np = add_noise(p, c.eps, c.noise_seed);
    CHECK(std::abs(np.e.norm() / p.b_true.norm() - c.eps) <= 1e-12);

    const int kmax = std::min(10, c.spec.n - 2);
    const BidiagState st = lanczos_bidiag(p.A, np.b, kmax);
    const RelationReport rep = verify_relations(st, p.A);
    CHECK(rep.orth_defect_P <= 1e-10);
    CHECK(rep.orth_defect_Q <= 1e-10);
    CHECK(rep.res_AQ_PB <= 1e-10 * p.oracle_svd->sigma(0));
    CHECK(rep.res_ATP_QBT <= 1e-10 * p.oracle_svd->sigma(0));

    // interlacing against the oracle spectrum at the last step
    const std::vector<double> theta = ritz_values(st, st.k);
    for (int i = 0; i < st.k; ++i)
      CHECK(theta[static_cast<std::size_t>(i)] <
            p.oracle_svd->sigma(i) + 1e-12 * p.oracle_svd->sigma(0));
  }
}

TEST_CASE("lsqr series contracts hold across configurations") {
  for (const Config& c : draw_configs(12, 303)) {
    CAPTURE(c.spec.n);
    CAPTURE(c.spec.seed);
    const IllPosedProblem p = gen_synthetic(c.spec);
    const NoisyProblem np = add_noise(p, c.eps, c.noise_seed);
    const int kmax = std::min(12, c.spec.n - 2);
    const SolutionSeries s = lsqr_series(np, kmax);
    for (int k = 1; k < s.size(); ++k) {
      CHECK(s.residual_norm[static_cast<std::size_t>(k)] <=
            s.residual_norm[static_cast<std::size_t>(k) - 1] * (1.0 + 1e-10) +
                1e-10 * np.b.norm());
      CHECK(s.solution_norm[static_cast<std::size_t>(k)] >=
            s.solution_norm[static_cast<std::size_t>(k) - 1] * (1.0 - 1e-10));
    }
    CHECK(s.kstar >= 1);
    CHECK(s.kstar <= s.size());
  }
}

TEST_CASE("sin/tan transform round-trips on random values") {
  std::mt19937_64 gen(404);
  std::uniform_real_distribution<double> sd(0.0, 0.999999);
  for (int i = 0; i < 200; ++i) {
    const double s = sd(gen);
    const double d = delta_norm_from_sin(s);
    CHECK(d / std::sqrt(1.0 + d * d) == doctest::Approx(s).epsilon(1e-13));
  }
}

TEST_CASE("diagnostics stay consistent across random configurations") {
  for (const Config& c : draw_configs(8, 505)) {
    CAPTURE(c.spec.n);
    CAPTURE(c.spec.seed);
    const IllPosedProblem p = gen_synthetic(c.spec);
    const NoisyProblem np = add_noise(p, c.eps, c.noise_seed);
    const int kdiag = std::min({6, diagnosable_kmax(p.oracle_svd->sigma), c.spec.n - 2});
    const BidiagState st = lanczos_bidiag(p.A, np.b, kdiag);
    const auto rows = diagnose_subspace(*p.oracle_svd, st, np.b, c.spec.decay, kdiag, 0.1);
    for (const auto& r : rows) {
      CHECK(r.sin_exact >= 0.0);
      CHECK(r.sin_exact <= 1.0);
      CHECK(r.sin_estimate > 0.0);
      CHECK(std::isfinite(r.coeff_ratio));
      CHECK(r.lagrange_max >= 1.0 - 1e-12);
      if (r.ritz.eps_k > 0.0 && r.ritz.eps_k < 1.0)
        CHECK(r.ritz.rayleigh_lower < r.ritz.rayleigh_upper);
      // the two sufficient conditions exclude each other away from boundaries
      if (r.ritz.sufficient_small_holds)
        CHECK(r.ritz.theta_k < std::sqrt(1.1) * r.ritz.sigma_kplus1);
    }
  }
}
