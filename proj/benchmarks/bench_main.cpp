#include <benchmark/benchmark.h>

#include "tnqsim/dense.hpp"
#include "tnqsim/engine.hpp"
#include "tnqsim/mps.hpp"
#include "tnqsim/numerics.hpp"
#include "tnqsim/rng.hpp"
#include "tnqsim/tensornet.hpp"
#include "tnqsim/transform.hpp"

using namespace tnqsim;

static void BM_MpsLadder(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Circuit c = generate_family({Family::Ladder, n, 0, 0, 42});
  for (auto _ : state) {
    MpsState s = MpsState::from_product(
        std::vector<std::pair<Complex, Complex>>(n, {Complex{1.0}, Complex{0.0}}));
    for (const Instruction& instr : c.instructions) {
      s.apply_2q(instr.line, instr.line2, instr.matrix);
    }
    benchmark::DoNotOptimize(s.max_bond());
  }
  state.SetComplexityN(n);
}
BENCHMARK(BM_MpsLadder)->RangeMultiplier(4)->Range(8, 512)->Complexity();

static void BM_NetLadderContraction(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Circuit c = generate_family({Family::Ladder, n, 0, 0, 42});
  for (auto _ : state) {
    const Complex v = contract_line_by_line(build_doubled_network(c, {}));
    benchmark::DoNotOptimize(v);
  }
  state.SetComplexityN(n);
}
BENCHMARK(BM_NetLadderContraction)->RangeMultiplier(4)->Range(8, 128)->Complexity();

static void BM_DenseRandomEvolve(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Circuit c = generate_family({Family::Random, n, 0, 24, 7});
  for (auto _ : state) {
    StateVector s = StateVector::zero_state(n);
    for (const Instruction& instr : c.instructions) s = apply_gate(s, instr);
    benchmark::DoNotOptimize(s.amplitudes.entries.data());
  }
}
BENCHMARK(BM_DenseRandomEvolve)->DenseRange(6, 12, 2);

static void BM_Svd(benchmark::State& state) {
  const std::size_t dim = static_cast<std::size_t>(state.range(0));
  Rng rng(3);
  ComplexMatrix m(dim, dim);
  for (auto& e : m.entries) e = Complex{rng.next_gaussian(), rng.next_gaussian()};
  for (auto _ : state) {
    benchmark::DoNotOptimize(svd(m).singular_values.data());
  }
}
BENCHMARK(BM_Svd)->RangeMultiplier(2)->Range(8, 64);

BENCHMARK_MAIN();
