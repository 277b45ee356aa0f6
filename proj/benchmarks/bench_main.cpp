// Microbenchmarks for the hot paths: Gram construction, the inner Newton
// solve, one outer objective evaluation and predictive moments.
#include <benchmark/benchmark.h>

#include "gpsurv/inference.hpp"
#include "gpsurv/prediction.hpp"
#include "gpsurv/simulate.hpp"

namespace {

using namespace gpsurv;

SimSpec spec(SimKind kind, Eigen::Index n) {
  SimSpec s;
  s.kind = kind;
  s.n = n;
  s.seed = 1;
  s.censor_fraction = 0.3;
  HyperParams& th = s.theta;
  th.kind = kind == SimKind::kGpCompeting ? ModelKind::kGpCompeting : ModelKind::kGpAft;
  th.eta = 3.0;
  th.beta = 0.5;
  th.single.sigma = 1.0;
  th.single.lengthscales = Eigen::VectorXd::Constant(1, 1.0);
  th.multi.sigma = 0.5;
  th.multi.omega = 0.5;
  th.multi.mu = 0.3;
  th.multi.lengthscales = Eigen::VectorXd::Constant(1, 1.0);
  th.transform.gamma = 1.0;
  return s;
}

void BM_BuildGram(benchmark::State& state) {
  const SimSpec s = spec(SimKind::kGpCompeting, state.range(0));
  const SimResult r = simulate(s);
  for (auto _ : state) benchmark::DoNotOptimize(build_gram(r.data.x, s.theta));
}
BENCHMARK(BM_BuildGram)->Arg(50)->Arg(200);

void BM_FitMap(benchmark::State& state) {
  const SimSpec s = spec(state.range(1) ? SimKind::kGpCompeting : SimKind::kGpSingle, state.range(0));
  const SimResult r = simulate(s);
  for (auto _ : state) benchmark::DoNotOptimize(fit_map(r.data, s.theta));
}
BENCHMARK(BM_FitMap)->Args({25, 0})->Args({200, 0})->Args({60, 1});

void BM_LaplaceObjective(benchmark::State& state) {
  const SimSpec s = spec(SimKind::kGpSingle, state.range(0));
  const SimResult r = simulate(s);
  for (auto _ : state) benchmark::DoNotOptimize(laplace_nll_hyp(s.theta, r.data));
}
BENCHMARK(BM_LaplaceObjective)->Arg(25)->Arg(200);

void BM_PredictiveMoments(benchmark::State& state) {
  const SimSpec s = spec(SimKind::kGpSingle, 100);
  const SimResult r = simulate(s);
  const FittedModel m = fit_map(r.data, s.theta);
  const Eigen::VectorXd x = Eigen::VectorXd::Constant(1, 0.4);
  for (auto _ : state) benchmark::DoNotOptimize(predict_event_time(x, m));
}
BENCHMARK(BM_PredictiveMoments);

}  // namespace

BENCHMARK_MAIN();
