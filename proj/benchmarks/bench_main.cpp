#include <benchmark/benchmark.h>

#include "lander/environment.hpp"
#include "lander/math_core.hpp"
#include "lander/networks.hpp"

namespace {

using namespace lander;

void BM_Rk4Step(benchmark::State& state) {
  Eigen::VectorXd x = Eigen::VectorXd::Ones(26);
  const DerivFn f = [](const Eigen::VectorXd& y) {
    return Eigen::VectorXd(-y);
  };
  for (auto _ : state) {
    benchmark::DoNotOptimize(rk4_step(f, x, 0.05));
  }
}
BENCHMARK(BM_Rk4Step);

void BM_EnvironmentStep(benchmark::State& state) {
  Environment env{EpisodeConfig{}};
  env.reset(42);
  const Eigen::Vector4d action(0.5, 0.5, 0.5, 0.5);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    if (env.done()) env.reset(++seed);
    benchmark::DoNotOptimize(env.step(action));
  }
}
BENCHMARK(BM_EnvironmentStep);

void BM_PolicyForward(benchmark::State& state) {
  GaussianPolicy policy(NetworkSpec::policy(kGuidanceObsDim, kActionDim));
  Rng rng(7);
  policy.init_parameters(rng);
  Eigen::VectorXd hidden = policy.net().initial_hidden();
  const Eigen::VectorXd obs = Eigen::VectorXd::Constant(kGuidanceObsDim, 0.1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(policy.net().forward(obs, hidden));
  }
}
BENCHMARK(BM_PolicyForward);

void BM_PolicyBackward(benchmark::State& state) {
  RecurrentNetwork net(NetworkSpec::policy(kGuidanceObsDim, kActionDim));
  Rng rng(7);
  net.init_parameters(rng);
  const int steps = 50;
  Eigen::MatrixXd xs(steps, kGuidanceObsDim);
  for (int t = 0; t < steps; ++t) {
    for (int i = 0; i < kGuidanceObsDim; ++i) xs(t, i) = rng.uniform(-1, 1);
  }
  const Eigen::MatrixXd grads = Eigen::MatrixXd::Ones(steps, kActionDim);
  for (auto _ : state) {
    ForwardCache cache;
    net.forward_seq(xs, &cache);
    benchmark::DoNotOptimize(net.backward_seq(cache, grads));
  }
}
BENCHMARK(BM_PolicyBackward);

}  // namespace

BENCHMARK_MAIN();
