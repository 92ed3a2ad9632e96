#include <benchmark/benchmark.h>

#include <cmath>

#include "regdiag/bidiag.hpp"
#include "regdiag/problems.hpp"
#include "regdiag/solvers.hpp"
#include "regdiag/subspace.hpp"
#include "regdiag/svdtools.hpp"

using namespace regdiag;

namespace {

IllPosedProblem make_severe(int n) {
  SyntheticSpec spec;
  spec.m = spec.n = n;
  spec.decay = DecayModel::geometric(std::exp(2.0));
  spec.beta = 1.0;
  spec.seed = 1;
  return gen_synthetic(spec);
}

}  // namespace

static void BM_GenSynthetic(benchmark::State& state) {
  SyntheticSpec spec;
  spec.m = spec.n = static_cast<int>(state.range(0));
  spec.decay = DecayModel::power_law(1.0, 3.0);
  spec.beta = 1.0;
  spec.seed = 1;
  for (auto _ : state) {
    IllPosedProblem p = gen_synthetic(spec);
    benchmark::DoNotOptimize(p.A.data());
  }
}
BENCHMARK(BM_GenSynthetic)->Arg(64)->Arg(128)->Arg(256);

static void BM_ComputeSvd(benchmark::State& state) {
  const IllPosedProblem p = gen_shaw(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    SvdFactors f = compute_svd(p.A);
    benchmark::DoNotOptimize(f.sigma.data());
  }
}
BENCHMARK(BM_ComputeSvd)->Arg(64)->Arg(128);

static void BM_LanczosBidiag(benchmark::State& state) {
  const IllPosedProblem p = make_severe(static_cast<int>(state.range(0)));
  const NoisyProblem np = add_noise(p, 1e-3, 1);
  const int kmax = static_cast<int>(state.range(1));
  for (auto _ : state) {
    BidiagState st = lanczos_bidiag(p.A, np.b, kmax);
    benchmark::DoNotOptimize(st.Q.data());
  }
}
BENCHMARK(BM_LanczosBidiag)->Args({128, 14})->Args({256, 30});

static void BM_LsqrSeries(benchmark::State& state) {
  const IllPosedProblem p = make_severe(128);
  const NoisyProblem np = add_noise(p, 1e-3, 1);
  for (auto _ : state) {
    SolutionSeries s = lsqr_series(np, static_cast<int>(state.range(0)));
    benchmark::DoNotOptimize(s.rel_error.data());
  }
}
BENCHMARK(BM_LsqrSeries)->Arg(14)->Arg(40);

static void BM_SinThetaExact(benchmark::State& state) {
  const IllPosedProblem p = make_severe(128);
  const NoisyProblem np = add_noise(p, 1e-3, 1);
  const BidiagState st = lanczos_bidiag(p.A, np.b, 14);
  for (auto _ : state) {
    double s = sin_theta_exact(*p.oracle_svd, st.Q.leftCols(14));
    benchmark::DoNotOptimize(s);
  }
}
BENCHMARK(BM_SinThetaExact);

static void BM_RitzValues(benchmark::State& state) {
  const IllPosedProblem p = gen_deriv2(128);
  const NoisyProblem np = add_noise(p, 1e-3, 1);
  const BidiagState st = lanczos_bidiag(p.A, np.b, static_cast<int>(state.range(0)));
  for (auto _ : state) {
    std::vector<double> theta = ritz_values(st, st.k);
    benchmark::DoNotOptimize(theta.data());
  }
}
BENCHMARK(BM_RitzValues)->Arg(30)->Arg(60);

static void BM_DiagnoseSubspace(benchmark::State& state) {
  const IllPosedProblem p = make_severe(128);
  const NoisyProblem np = add_noise(p, 1e-3, 1);
  const BidiagState st = lanczos_bidiag(p.A, np.b, 14);
  for (auto _ : state) {
    auto rows = diagnose_subspace(*p.oracle_svd, st, np.b, p.spec->decay, 14, 0.1);
    benchmark::DoNotOptimize(rows.data());
  }
}
BENCHMARK(BM_DiagnoseSubspace);

BENCHMARK_MAIN();
