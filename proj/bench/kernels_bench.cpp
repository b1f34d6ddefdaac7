#include <benchmark/benchmark.h>

#include "qbp/bch/bch.hpp"
#include "qbp/numkit/kernels.hpp"
#include "qbp/numkit/random.hpp"

using namespace qbp;
using num::BigFloat;
using num::MatD;

namespace {

template <class R>
num::Mat<R> hermitian(std::size_t D, std::uint64_t seed) {
  num::Rng rng(seed);
  return num::convert<R>(num::random_hermitian(D, rng));
}

template <class R, bool Parallel>
void BM_Gemm(benchmark::State& st) {
  num::PrecisionScope ps(50);
  const auto D = static_cast<std::size_t>(st.range(0));
  auto A = hermitian<R>(D, 1), B = hermitian<R>(D, 2);
  num::Mat<R> C(D, D);
  for (auto _ : st) {
    if constexpr (Parallel) {
      num::kernels::omp::gemm(A, B, C);
    } else {
      num::kernels::serial::gemm(A, B, C);
    }
    benchmark::DoNotOptimize(C.storage().data());
  }
  st.SetComplexityN(st.range(0));
}

template <bool Parallel>
void BM_JacobiSweep(benchmark::State& st) {
  const auto D = static_cast<std::size_t>(st.range(0));
  const MatD A0 = hermitian<double>(D, 3);
  for (auto _ : st) {
    st.PauseTiming();
    MatD A = A0, U = MatD::identity(D);
    st.ResumeTiming();
    if constexpr (Parallel) {
      num::kernels::omp::jacobi_sweep(A, U, 0.0);
    } else {
      num::kernels::serial::jacobi_sweep(A, U, 0.0);
    }
    benchmark::DoNotOptimize(A.storage().data());
  }
}

template <bool Parallel>
void BM_LocalSuperop(benchmark::State& st) {
  const int n = static_cast<int>(st.range(0));
  const std::size_t D = std::size_t(1) << n;
  const MatD S = hermitian<double>(16, 4);  // two-site superoperator
  const MatD rho = hermitian<double>(D, 5);
  const auto split = num::make_split(n, 2, {n / 2, n / 2 + 1});
  MatD out(D, D);
  for (auto _ : st) {
    if constexpr (Parallel) {
      num::kernels::omp::apply_local_superop(S, split, rho, out);
    } else {
      num::kernels::serial::apply_local_superop(S, split, rho, out);
    }
    benchmark::DoNotOptimize(out.storage().data());
  }
}

template <bool Serial>
void BM_QSequence(benchmark::State& st) {
  const auto H = lat::build_xyz_chain(static_cast<int>(st.range(0)));
  bch::QOptions opt;
  opt.serial = Serial;
  for (auto _ : st) benchmark::DoNotOptimize(bch::q_sequence(H, 0.5, 10, 50, opt).q.size());
}

}  // namespace

BENCHMARK(BM_Gemm<double, false>)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Gemm<double, true>)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Gemm<BigFloat, false>)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Gemm<BigFloat, true>)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_JacobiSweep<false>)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_JacobiSweep<true>)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LocalSuperop<false>)->Arg(6)->Arg(8)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LocalSuperop<true>)->Arg(6)->Arg(8)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_QSequence<true>)->Arg(5)->Arg(6)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_QSequence<false>)->Arg(5)->Arg(6)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
