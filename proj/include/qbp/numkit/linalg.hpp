#pragma once

#include <functional>
#include <vector>

#include "qbp/numkit/kernels.hpp"
#include "qbp/numkit/matrix.hpp"

namespace qbp::num {

// ---- products -------------------------------------------------------------

template <class R>
Mat<R> matmul(const Mat<R>& A, const Mat<R>& B);
// A^dagger B
template <class R>
Mat<R> matmul_adj(const Mat<R>& A, const Mat<R>& B);
template <class R>
Mat<R> commutator(const Mat<R>& A, const Mat<R>& B);
template <class R>
Mat<R> anticommutator(const Mat<R>& A, const Mat<R>& B);
template <class R>
Mat<R> kron(const Mat<R>& A, const Mat<R>& B);
template <class R>
Cx<R> trace_product(const Mat<R>& A, const Mat<R>& B);  // tr(AB)

// ---- structure checks -------------------------------------------------------

template <class R>
R max_abs_diff(const Mat<R>& A, const Mat<R>& B);
template <class R>
R hermiticity_defect(const Mat<R>& A);  // max |A - A^dagger|
template <class R>
bool is_hermitian(const Mat<R>& A, const R& tol);
template <class R>
Mat<R> hermitian_part(const Mat<R>& A);

// ---- eigensolver ------------------------------------------------------------

template <class R>
struct EigenDecomposition {
  std::vector<R> values;  // ascending
  Mat<R> vectors;         // columns
  int sweeps = 0;
};

struct EigOptions {
  // Auto: LAPACK zheevd for double above dim 32, Lifted for big floats above dim 16, else Jacobi.
  enum class Route { Auto, Jacobi, Lifted, Lapack };
  Route route = Route::Auto;
  int max_sweeps = 100;
  bool serial = false;  // force the serial reference kernel
};

class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <class R>
EigenDecomposition<R> eig_hermitian(const Mat<R>& M, const EigOptions& opt = {});

// U f(lambda) U^dagger
template <class R>
Mat<R> spectral_apply(const EigenDecomposition<R>& e, const std::function<Cx<R>(const R&)>& f);

template <class R>
Mat<R> mat_exp_hermitian(const Mat<R>& M, const R& s);
template <class R>
Mat<R> mat_log_pd(const Mat<R>& M);
template <class R>
Mat<R> sqrt_psd(const Mat<R>& M);
// Taylor-series exponential of a general matrix (oracle for small norms and superoperators).
template <class R>
Mat<R> taylor_exp(const Mat<R>& M, int terms);

// ---- norms --------------------------------------------------------------------

template <class R>
R frobenius_norm(const Mat<R>& M);
template <class R>
R trace_norm(const Mat<R>& M);
template <class R>
R op_norm(const Mat<R>& M);
template <class R>
std::vector<R> singular_values(const Mat<R>& M);

// ---- tensor structure (sites are 1-based, site 1 most significant) -------

template <class R>
Mat<R> embed_on_sites(const Mat<R>& op, const std::vector<int>& sites, int n, int d);
template <class R>
Mat<R> partial_trace(const Mat<R>& M, const std::vector<int>& keep, int n, int d);
// tr~_X(M) = tr_X(M) (x) 1_X / d^|X|, returned on the full space.
template <class R>
Mat<R> normalized_partial_trace(const Mat<R>& M, const std::vector<int>& traced, int n, int d);
// Partial transpose on the listed sites.
template <class R>
Mat<R> partial_transpose(const Mat<R>& M, const std::vector<int>& sites, int n, int d);

std::vector<int> complement(const std::vector<int>& sites, int n);

}  // namespace qbp::num
