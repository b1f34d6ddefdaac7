#pragma once

#include <functional>
#include <stdexcept>
#include <vector>

#include "qbp/numkit/kernels.hpp"
#include "qbp/numkit/linalg.hpp"

namespace qbp::num {

// Vectorized superoperators use row-major vec: vec(rho)[i*D + j] = rho(i, j),
// so vec(L rho R) = (L (x) R^T) vec(rho).

class SizeError : public std::length_error {
 public:
  using std::length_error::length_error;
};

// Throws SizeError when the vectorized dimension D^2 exceeds 2^24.
void check_superop_budget(std::size_t D);

template <class R>
struct LRPair {
  Mat<R> left;
  Mat<R> right;
  Cx<R> coef{R(1)};
};

template <class R>
Mat<R> vec(const Mat<R>& rho);  // D^2 x 1
template <class R>
Mat<R> unvec(const Mat<R>& v, std::size_t D);

template <class R>
Mat<R> vectorize_superop(const std::vector<LRPair<R>>& pairs, std::size_t D);
// Direct application sum_k c_k L_k rho R_k.
template <class R>
Mat<R> apply_pairs(const std::vector<LRPair<R>>& pairs, const Mat<R>& rho);
template <class R>
Mat<R> apply_superop(const Mat<R>& S, const Mat<R>& rho);

// -i[H, .] + sum_k r_k (J_k . J_k^dag - 1/2 {J_k^dag J_k, .})
template <class R>
struct Jump {
  Mat<R> op;
  R rate{1};
};
template <class R>
Mat<R> lindblad_superop(const Mat<R>& H, const std::vector<Jump<R>>& jumps);
template <class R>
Mat<R> lindblad_apply(const Mat<R>& H, const std::vector<Jump<R>>& jumps, const Mat<R>& rho);

// exp(t S) by scaling and squaring of a Taylor series.
template <class R>
Mat<R> superop_exp(const Mat<R>& S, const R& t);

// exp(t L) rho without forming exp: Taylor steps with ||t L / steps|| <= 1/2.
// norm_bound is any upper bound on the induced norm of L.
template <class R>
Mat<R> expv(const std::function<Mat<R>(const Mat<R>&)>& L, double norm_bound, const R& t, const Mat<R>& rho);

// Superoperator on a subset of sites, applied to full-chain operators with
// the complement as spectators.
template <class R>
struct LocalSuperop {
  std::vector<int> sites;  // sorted, 1-based
  Mat<R> S;                // (d^|sites|)^2 square
};
template <class R>
Mat<R> apply_local(const LocalSuperop<R>& L, const Mat<R>& rho, int n, int d);
// Re-express a local superoperator on a larger sorted site set.
template <class R>
LocalSuperop<R> widen(const LocalSuperop<R>& L, const std::vector<int>& sites, int d);
template <class R>
LocalSuperop<R> add(const LocalSuperop<R>& a, const LocalSuperop<R>& b, int d);

// Choi matrix C = sum_ij |i><j| (x) S(|i><j|), dimension D^2.
template <class R>
Mat<R> choi_matrix(const Mat<R>& S, std::size_t D);
// Superoperator from a Choi matrix (inverse of choi_matrix).
template <class R>
Mat<R> superop_from_choi(const Mat<R>& C, std::size_t D);

// Column-sum norm, an upper bound for the induced 1-norm on vectors.
template <class R>
double max_col_sum(const Mat<R>& S);

}  // namespace qbp::num
