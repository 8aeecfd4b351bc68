#include <benchmark/benchmark.h>

#include "kpplab/convolution.hpp"
#include "kpplab/pde.hpp"
#include "kpplab/simulate.hpp"
#include "kpplab/spectral.hpp"

using namespace kpplab;

namespace {

BranchingModel gaussian_jump() {
  return BranchingModel(PureJumpMotion{Kernel::gaussian(1.0)}, BinaryAtParent{});
}

// Convolver construction is excluded; the loop times one apply().
void BM_Convolve(benchmark::State& state) {
  const auto method = state.range(1) ? ConvolutionMethod::fft : ConvolutionMethod::direct;
  const Grid g(-40.0, 40.0, static_cast<std::size_t>(state.range(0)));
  const Convolver conv(Kernel::gaussian(1.0), g, method);
  const Field f = Field::heaviside(g);
  std::vector<double> out(g.size());
  for (auto _ : state) {
    conv.apply(f.values, f.left_limit, f.right_limit, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Convolve)->ArgsProduct({{1 << 10, 1 << 13}, {0, 1}})->ArgNames({"n", "fft"});

void BM_PdeStep(benchmark::State& state) {
  const Grid g(-40.0, 140.0, static_cast<std::size_t>(state.range(0)));
  const SEquationStepper st(gaussian_jump(), g);
  Field f = Field::heaviside(g, Orientation::complement);
  for (auto _ : state) {
    f = st.step(std::move(f), 0.1);
    benchmark::DoNotOptimize(f.values.data());
  }
}
BENCHMARK(BM_PdeStep)->Arg(1 << 10)->Arg(1 << 13);

// One replica of X2+P1 from a single particle to time t.
void BM_Advance(benchmark::State& state) {
  const auto m = gaussian_jump();
  const double t = static_cast<double>(state.range(0));
  std::uint64_t r = 0;
  std::size_t particles = 0;
  for (auto _ : state) {
    Rng rng = Rng::stream(7, r++);
    const Population p = advance(Population::single(0.0), t, m, 50'000'000, rng);
    particles += p.positions.size();
  }
  state.counters["particles"] =
      benchmark::Counter(static_cast<double>(particles), benchmark::Counter::kAvgIterations);
}
BENCHMARK(BM_Advance)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_MinimalSpeed(benchmark::State& state) {
  const BranchingModel models[] = {
      gaussian_jump(),
      BranchingModel(BrownianMotion{}, make_offspring_law({{2, 1.0}})),
      BranchingModel(PureJumpMotion{Kernel::two_sided_exponential(2.0)}, BinaryAtParent{}),
  };
  const auto& m = models[state.range(0)];
  for (auto _ : state) benchmark::DoNotOptimize(minimal_speed(m).c_star);
}
BENCHMARK(BM_MinimalSpeed)->DenseRange(0, 2);

}  // namespace

BENCHMARK_MAIN();
