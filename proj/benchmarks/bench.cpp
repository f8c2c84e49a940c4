#include <benchmark/benchmark.h>

#include <memory>

#include "wph/graph.hpp"
#include "wph/grid.hpp"
#include "wph/maxent.hpp"
#include "wph/synthesis.hpp"
#include "wph/wavelet.hpp"

using namespace wph;

namespace {

// args: side, J, Q
void BM_WaveletTransform(benchmark::State& state) {
  const int n = state.range(0);
  const WaveletBank bank = build_bump_bank(n, state.range(1), state.range(2));
  const Field x = white_noise(n, 1.0, 1);
  for (auto _ : state) benchmark::DoNotOptimize(wavelet_transform(x, bank));
}
BENCHMARK(BM_WaveletTransform)->Args({64, 4, 8})->Args({128, 5, 16})->Args({256, 5, 16})->Unit(benchmark::kMillisecond);

void BM_ObjectiveGradient(benchmark::State& state) {
  const int n = state.range(0);
  const char* presets[] = {"A", "B", "C", "D"};
  const ModelSpec spec = model_preset(presets[state.range(1)], 4, 8);
  auto bank = std::make_shared<const WaveletBank>(build_bump_bank(n, 4, 8));
  const Field ref = white_noise(n, 1.0, 2);
  const SynthesisTarget t = make_target(ref, spec, bank);
  MicrocanonicalObjective obj(t);
  const auto x = to_real_vector(white_noise(n, 1.0, 3));
  std::vector<double> g;
  for (auto _ : state) benchmark::DoNotOptimize(obj.value_and_gradient(x, g));
  state.SetLabel(presets[state.range(1)]);
}
BENCHMARK(BM_ObjectiveGradient)->ArgsProduct({{64}, {0, 1, 2, 3}})->Unit(benchmark::kMillisecond);

void BM_GaussianDual(benchmark::State& state) {
  const int n = state.range(0);
  const WaveletBank bank = build_bump_bank(n, 4, 8);
  const auto prob = make_dual_problem({white_noise(n, 1.0, 4)}, bank, model_preset("A", 4, 8));
  std::vector<cplx> betas(prob.params.size());
  for (std::size_t p = 0; p < betas.size(); ++p)
    if (prob.params[p].self) betas[p] = prob.params[p].scale;
  std::vector<cplx> grad;
  for (auto _ : state) benchmark::DoNotOptimize(dual_objective(prob, betas, &grad));
  state.counters["params"] = static_cast<double>(prob.params.size());
}
BENCHMARK(BM_GaussianDual)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
