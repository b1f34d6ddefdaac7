#pragma once

#include <cstdint>
#include <vector>

#include "qbp/numkit/matrix.hpp"

namespace qbp::num {

// Index map between a full chain basis and (region, complement) factors.
// full[y * dz + z] is the full index with region digits y and complement digits z.
struct SplitIndex {
  std::size_t dy = 1, dz = 1;
  std::vector<std::uint32_t> full;
};
// sites: 1-based region sites on an n-site chain of local dimension d.
SplitIndex make_split(int n, int d, const std::vector<int>& sites);

namespace kernels {

// Jacobi rotation between indices p < q of a Hermitian matrix.
template <class R>
struct Rotation {
  std::size_t p = 0, q = 0;
  R c, s;
  Cx<R> e;  // phase of a_pq
  bool active = false;
};

namespace serial {

// C = op(A) * B, op = identity or adjoint.
template <class R>
void gemm(const Mat<R>& A, const Mat<R>& B, Mat<R>& C, bool adjoint_a = false);

// One cyclic-by-row Jacobi sweep on Hermitian A, accumulating U <- U J.
// Rotations with |a_pq| <= skip are not applied.
template <class R>
void jacobi_sweep(Mat<R>& A, Mat<R>& U, const R& skip);

// out = (S on region) vec(rho), rho full d^n x d^n, S on region of dim dy^2.
template <class R>
void apply_local_superop(const Mat<R>& S, const SplitIndex& split, const Mat<R>& rho, Mat<R>& out);

}  // namespace serial

namespace omp {

template <class R>
void gemm(const Mat<R>& A, const Mat<R>& B, Mat<R>& C, bool adjoint_a = false);

// Round-robin ordering: each round applies n/2 disjoint rotations at once.
template <class R>
void jacobi_sweep(Mat<R>& A, Mat<R>& U, const R& skip);

template <class R>
void apply_local_superop(const Mat<R>& S, const SplitIndex& split, const Mat<R>& rho, Mat<R>& out);

}  // namespace omp

// Rotation parameters zeroing a_pq.  Shared by both sweep orders.
template <class R>
Rotation<R> make_rotation(const Mat<R>& A, std::size_t p, std::size_t q, const R& skip);

// Serial kernels are the reference; the dispatcher uses OpenMP above a size
// threshold unless forced serial (tests and benchmarks toggle this).
void set_force_serial(bool on);
bool force_serial();

}  // namespace kernels
}  // namespace qbp::num
