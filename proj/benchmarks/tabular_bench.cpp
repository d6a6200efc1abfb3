#include <benchmark/benchmark.h>

#include <random>

#include "msent/multiscale.hpp"
#include "msent/oracle.hpp"

namespace {

using namespace msent;

struct Problem {
  ProductSpace space;
  EnergyTable f;
  TabularDist q;
  TemperatureSchedule sched;
  std::vector<ScaleMap> chain;
};

Problem binary_problem(std::size_t levels) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  const ProductSpace space(std::vector<std::size_t>(levels, 2));
  std::vector<double> f(space.size()), w(space.size());
  for (std::size_t i = 0; i < space.size(); ++i) {
    f[i] = 2.0 * u(rng);
    w[i] = u(rng);
  }
  double total = 0.0;
  for (double x : w) total += x;
  for (double& x : w) x /= total;
  std::vector<double> sigma(levels);
  for (std::size_t i = 0; i < levels; ++i) sigma[i] = 1.0 / double(i + 1);
  return {space, EnergyTable(space, f), TabularDist(space, w), TemperatureSchedule(1.0, sigma),
          decimation_chain(space, levels)};
}

void BM_SolveMinRelativeEntropy(benchmark::State& state) {
  const Problem p = binary_problem(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_min_relative_entropy(p.f, p.q, p.sched, p.chain));
  }
  state.SetComplexityN(static_cast<int64_t>(p.space.size()));
}
BENCHMARK(BM_SolveMinRelativeEntropy)->DenseRange(4, 16, 4)->Complexity();

void BM_OracleMinRelativeEntropy(benchmark::State& state) {
  const Problem p = binary_problem(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(minimize_tabular(Objective::MinRelativeEntropy, p.f, p.q, p.sched, p.chain));
  }
}
BENCHMARK(BM_OracleMinRelativeEntropy)->Arg(3)->Arg(5)->Unit(benchmark::kMillisecond);

}  // namespace
