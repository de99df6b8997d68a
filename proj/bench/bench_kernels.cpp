// Serial vs OpenMP kernels. OPRAMSEY_THREADS caps the parallel runs.

#include <random>

#include <benchmark/benchmark.h>

#include "opramsey/kernels.hpp"

using namespace opramsey;

namespace {

// A dense SDP with `m` random Hermitian constraints on two blocks of size n.
struct Instance {
  kernels::CompiledConstraints compiled;
  std::vector<ComplexMatrix> x, s_inv, z;
};

Instance make_instance(int n, int m) {
  std::mt19937_64 rng(1234);
  SdpProblem p;
  p.block_dims = {n, n};
  p.objective = {ComplexMatrix::Zero(n, n), ComplexMatrix::Zero(n, n)};
  for (int i = 0; i < m; ++i) {
    SdpConstraint c;
    c.add_dense(i % 2, hermitian_part(random_gaussian(n, n, rng)));
    c.rhs = 1.0;
    p.constraints.push_back(c);
  }
  Instance in;
  in.compiled = kernels::compile(p);
  for (int b = 0; b < 2; ++b) {
    const ComplexMatrix g = random_gaussian(n, n, rng);
    in.x.push_back(g * g.adjoint() + ComplexMatrix::Identity(n, n));
    const ComplexMatrix h = random_gaussian(n, n, rng);
    in.s_inv.push_back((h * h.adjoint() + ComplexMatrix::Identity(n, n)).inverse());
    in.z.push_back(hermitian_part(random_gaussian(n, n, rng)));
  }
  return in;
}

void schur(benchmark::State& state, bool parallel) {
  const Instance in = make_instance(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  for (auto _ : state) {
    RealMatrix m = parallel ? kernels::schur_parallel(in.compiled, in.x, in.s_inv)
                            : kernels::schur_serial(in.compiled, in.x, in.s_inv);
    benchmark::DoNotOptimize(m.data());
  }
}

void pairing(benchmark::State& state, bool parallel) {
  const Instance in = make_instance(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  for (auto _ : state) {
    RealVector v = parallel ? kernels::pair_parallel(in.compiled, in.z) : kernels::pair_serial(in.compiled, in.z);
    benchmark::DoNotOptimize(v.data());
  }
}

void epi(benchmark::State& state, bool parallel) {
  const int n = static_cast<int>(state.range(0)), k = static_cast<int>(state.range(1));
  for (auto _ : state) {
    const std::uint64_t c = parallel ? kernels::count_epi_parallel(n, k) : kernels::count_epi_serial(n, k);
    benchmark::DoNotOptimize(c);
  }
}

void schur_args(benchmark::internal::Benchmark* b) {
  b->Args({8, 32})->Args({16, 64})->Args({24, 128})->Unit(benchmark::kMillisecond);
}

void epi_args(benchmark::internal::Benchmark* b) { b->Args({9, 4})->Args({11, 5})->Unit(benchmark::kMillisecond); }

}  // namespace

BENCHMARK_CAPTURE(schur, serial, false)->Apply(schur_args);
BENCHMARK_CAPTURE(schur, parallel, true)->Apply(schur_args);
BENCHMARK_CAPTURE(pairing, serial, false)->Apply(schur_args);
BENCHMARK_CAPTURE(pairing, parallel, true)->Apply(schur_args);
BENCHMARK_CAPTURE(epi, serial, false)->Apply(epi_args);
BENCHMARK_CAPTURE(epi, parallel, true)->Apply(epi_args);

BENCHMARK_MAIN();
