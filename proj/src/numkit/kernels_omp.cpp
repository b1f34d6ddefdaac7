#include <omp.h>

#include <optional>
#include <stdexcept>

#include "kernels_impl.hpp"
#include "qbp/numkit/kernels.hpp"

namespace qbp::num::kernels::omp {

template <class R>
void gemm(const Mat<R>& A, const Mat<R>& B, Mat<R>& C, bool adjoint_a) {
  const std::size_t m = adjoint_a ? A.cols() : A.rows();
  const std::size_t kk = adjoint_a ? A.rows() : A.cols();
  if (kk != B.rows()) throw std::invalid_argument("gemm: inner dimension mismatch");
  C = Mat<R>(m, B.cols());
  const long mm = static_cast<long>(m);
  if constexpr (Real<R>::is_big) {
    const Mat<R> Bt = B.transpose();
    const mpfr_prec_t bits = working_bits();
#pragma omp parallel
    {
      PrecisionScope scope(PrecisionScope::Bits{bits});
#pragma omp for schedule(dynamic, 1)
      for (long i = 0; i < mm; ++i)
        detail::gemm_rows_big(A, Bt, C, adjoint_a, static_cast<std::size_t>(i), static_cast<std::size_t>(i) + 1);
    }
  } else {
#pragma omp parallel for schedule(static)
    for (long i = 0; i < mm; ++i)
      detail::gemm_rows<R>(A, B, C, adjoint_a, static_cast<std::size_t>(i), static_cast<std::size_t>(i) + 1);
  }
}

template <class R>
void jacobi_sweep(Mat<R>& A, Mat<R>& U, const R& skip) {
  const std::size_t n = A.rows();
  if (n < 2) return;
  const std::size_t m = (n % 2 == 0) ? n : n + 1;  // index n is a bye when n is odd
  std::vector<std::size_t> ring(m);
  for (std::size_t k = 0; k < m; ++k) ring[k] = k;
  const mpfr_prec_t bits = Real<R>::is_big ? working_bits() : 0;
  for (std::size_t round = 0; round + 1 < m; ++round) {
    std::vector<Rotation<R>> rots;
    rots.reserve(m / 2);
    for (std::size_t k = 0; k < m / 2; ++k) {
      std::size_t a = ring[k], b = ring[m - 1 - k];
      if (a >= n || b >= n) continue;
      if (a > b) std::swap(a, b);
      Rotation<R> rot = make_rotation(A, a, b, skip);
      if (rot.active) rots.push_back(std::move(rot));
    }
    // rotate the ring, keeping ring[0] fixed
    std::size_t last = ring[m - 1];
    for (std::size_t k = m - 1; k > 1; --k) ring[k] = ring[k - 1];
    ring[1] = last;
    if (rots.empty()) continue;

    const long nn = static_cast<long>(n);
#pragma omp parallel
    {
      std::optional<PrecisionScope> scope;
      if constexpr (Real<R>::is_big) scope.emplace(PrecisionScope::Bits{bits});
#pragma omp for schedule(static)
      for (long r = 0; r < nn; ++r) {
        for (const auto& rot : rots) {
          detail::rotate_columns(A, rot, static_cast<std::size_t>(r), static_cast<std::size_t>(r) + 1);
          detail::rotate_columns(U, rot, static_cast<std::size_t>(r), static_cast<std::size_t>(r) + 1);
        }
      }
#pragma omp for schedule(static)
      for (long j = 0; j < nn; ++j)
        for (const auto& rot : rots) detail::rotate_rows(A, rot, static_cast<std::size_t>(j), static_cast<std::size_t>(j) + 1);
    }
    for (const auto& rot : rots) {
      A(rot.p, rot.q) = Cx<R>();
      A(rot.q, rot.p) = Cx<R>();
      A(rot.p, rot.p) = Cx<R>(A(rot.p, rot.p).re);
      A(rot.q, rot.q) = Cx<R>(A(rot.q, rot.q).re);
    }
  }
}

template <class R>
void apply_local_superop(const Mat<R>& S, const SplitIndex& split, const Mat<R>& rho, Mat<R>& out) {
  out = Mat<R>(rho.rows(), rho.cols());
  const long dz = static_cast<long>(split.dz);
  const mpfr_prec_t bits = Real<R>::is_big ? working_bits() : 0;
#pragma omp parallel
  {
    std::optional<PrecisionScope> scope;
    if constexpr (Real<R>::is_big) scope.emplace(PrecisionScope::Bits{bits});
#pragma omp for schedule(static)
    for (long z = 0; z < dz; ++z)
      detail::local_superop_block<R>(S, split, rho, out, static_cast<std::size_t>(z), static_cast<std::size_t>(z) + 1);
  }
}

template void gemm<double>(const Mat<double>&, const Mat<double>&, Mat<double>&, bool);
template void gemm<BigFloat>(const Mat<BigFloat>&, const Mat<BigFloat>&, Mat<BigFloat>&, bool);
template void jacobi_sweep<double>(Mat<double>&, Mat<double>&, const double&);
template void jacobi_sweep<BigFloat>(Mat<BigFloat>&, Mat<BigFloat>&, const BigFloat&);
template void apply_local_superop<double>(const Mat<double>&, const SplitIndex&, const Mat<double>&, Mat<double>&);
template void apply_local_superop<BigFloat>(const Mat<BigFloat>&, const SplitIndex&, const Mat<BigFloat>&,
                                            Mat<BigFloat>&);

}  // namespace qbp::num::kernels::omp
