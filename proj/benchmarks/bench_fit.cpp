#include <benchmark/benchmark.h>

#include "tdisagg/ensemble.hpp"
#include "tdisagg/models.hpp"
#include "tdisagg/postestimation.hpp"
#include "tdisagg/synthetic.hpp"

using namespace tdisagg;

namespace {

SynthData data_for(std::size_t n_low, std::size_t m) {
  SynthConfig cfg;
  cfg.n_low = n_low;
  cfg.m = m;
  cfg.seed = 7;
  return make_synthetic(cfg);
}

void BM_FitMethod(benchmark::State& state, MethodId method) {
  const SynthData data = data_for(static_cast<std::size_t>(state.range(0)), 4);
  const ConversionMatrix cm = build_C(data.frame, AggregationRule::sum);
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit(method, data.y_low, data.x, cm));
  }
}

void BM_Ensemble(benchmark::State& state) {
  const SynthData data = data_for(static_cast<std::size_t>(state.range(0)), 4);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        run_ensemble(data.frame, AggregationRule::sum, default_ensemble_methods()));
  }
}

void BM_SimplexProject(benchmark::State& state) {
  const Eigen::Index m = state.range(0);
  Eigen::VectorXd v(m);
  for (Eigen::Index i = 0; i < m; ++i) v[i] = (i % 3 == 0) ? -1.5 : 2.0 + i % 5;
  for (auto _ : state) {
    benchmark::DoNotOptimize(simplex_project(v, 10.0));
  }
}

void BM_NnlsSimplex(benchmark::State& state) {
  const Eigen::Index cols = state.range(0);
  Eigen::MatrixXd a(40, cols);
  Eigen::VectorXd b(40);
  NormalSampler normal(11);
  for (Eigen::Index i = 0; i < 40; ++i) {
    b[i] = normal();
    for (Eigen::Index j = 0; j < cols; ++j) a(i, j) = normal();
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(nnls_simplex(a, b));
  }
}

}  // namespace

BENCHMARK_CAPTURE(BM_FitMethod, denton, MethodId::denton)->Arg(25)->Arg(100);
BENCHMARK_CAPTURE(BM_FitMethod, chow_lin, MethodId::chow_lin)->Arg(25)->Arg(100);
BENCHMARK_CAPTURE(BM_FitMethod, chow_lin_opt, MethodId::chow_lin_opt)->Arg(25)->Arg(100);
BENCHMARK_CAPTURE(BM_FitMethod, litterman_opt, MethodId::litterman_opt)->Arg(25)->Arg(100);
BENCHMARK_CAPTURE(BM_FitMethod, fast, MethodId::fast)->Arg(25)->Arg(100);
BENCHMARK_CAPTURE(BM_FitMethod, uniform, MethodId::uniform)->Arg(25)->Arg(100);
BENCHMARK(BM_Ensemble)->Arg(20);
BENCHMARK(BM_SimplexProject)->Arg(8)->Arg(64);
BENCHMARK(BM_NnlsSimplex)->Arg(4)->Arg(12);

BENCHMARK_MAIN();
