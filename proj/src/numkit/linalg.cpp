#include "qbp/numkit/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

extern "C" void zheevd_(const char* jobz, const char* uplo, const int* n, double* a, const int* lda, double* w,
                        double* work, const int* lwork, double* rwork, const int* lrwork, int* iwork,
                        const int* liwork, int* info);

namespace qbp::num {

namespace {

template <class R>
bool use_parallel(std::size_t work) {
  if (kernels::force_serial()) return false;
  if constexpr (Real<R>::is_big) {
    return work >= 16 * 16 * 16;
  } else {
    return work >= 96 * 96 * 96;
  }
}

template <class R>
R rabs(const R& x) {
  using std::abs;
  return abs(x);
}

}  // namespace

template <class R>
Mat<R> matmul(const Mat<R>& A, const Mat<R>& B) {
  Mat<R> C;
  if (use_parallel<R>(A.rows() * A.cols() * B.cols()))
    kernels::omp::gemm(A, B, C, false);
  else
    kernels::serial::gemm(A, B, C, false);
  return C;
}

template <class R>
Mat<R> matmul_adj(const Mat<R>& A, const Mat<R>& B) {
  Mat<R> C;
  if (use_parallel<R>(A.rows() * A.cols() * B.cols()))
    kernels::omp::gemm(A, B, C, true);
  else
    kernels::serial::gemm(A, B, C, true);
  return C;
}

template <class R>
Mat<R> commutator(const Mat<R>& A, const Mat<R>& B) {
  return matmul(A, B) - matmul(B, A);
}

template <class R>
Mat<R> anticommutator(const Mat<R>& A, const Mat<R>& B) {
  return matmul(A, B) + matmul(B, A);
}

template <class R>
Mat<R> kron(const Mat<R>& A, const Mat<R>& B) {
  Mat<R> K(A.rows() * B.rows(), A.cols() * B.cols());
  for (std::size_t i = 0; i < A.rows(); ++i)
    for (std::size_t j = 0; j < A.cols(); ++j) {
      const Cx<R>& a = A(i, j);
      if (is_zero(a)) continue;
      for (std::size_t k = 0; k < B.rows(); ++k)
        for (std::size_t l = 0; l < B.cols(); ++l) K(i * B.rows() + k, j * B.cols() + l) = a * B(k, l);
    }
  return K;
}

template <class R>
Cx<R> trace_product(const Mat<R>& A, const Mat<R>& B) {
  if (A.cols() != B.rows() || A.rows() != B.cols()) throw std::invalid_argument("trace_product: shape mismatch");
  Cx<R> t;
  for (std::size_t i = 0; i < A.rows(); ++i)
    for (std::size_t k = 0; k < A.cols(); ++k) t += A(i, k) * B(k, i);
  return t;
}

template <class R>
R max_abs_diff(const Mat<R>& A, const Mat<R>& B) {
  if (A.rows() != B.rows() || A.cols() != B.cols()) throw std::invalid_argument("max_abs_diff: shape mismatch");
  R m(0);
  for (std::size_t k = 0; k < A.storage().size(); ++k) {
    R v = cabs(A.storage()[k] - B.storage()[k]);
    if (v > m) m = v;
  }
  return m;
}

template <class R>
R hermiticity_defect(const Mat<R>& A) {
  R m(0);
  for (std::size_t i = 0; i < A.rows(); ++i)
    for (std::size_t j = i; j < A.cols(); ++j) {
      R v = cabs(A(i, j) - conj(A(j, i)));
      if (v > m) m = v;
    }
  return m;
}

template <class R>
bool is_hermitian(const Mat<R>& A, const R& tol) {
  return A.square() && !(hermiticity_defect(A) > tol);
}

template <class R>
Mat<R> hermitian_part(const Mat<R>& A) {
  Mat<R> H(A.rows(), A.cols());
  const R half(0.5);
  for (std::size_t i = 0; i < A.rows(); ++i)
    for (std::size_t j = 0; j < A.cols(); ++j) H(i, j) = (A(i, j) + conj(A(j, i))) * half;
  return H;
}

namespace {

template <class R>
R off_norm(const Mat<R>& A) {
  R s(0);
  for (std::size_t i = 0; i < A.rows(); ++i)
    for (std::size_t j = 0; j < A.cols(); ++j)
      if (i != j) s += norm2(A(i, j));
  using std::sqrt;
  return sqrt(s);
}

template <class R>
void sort_ascending(EigenDecomposition<R>& e, const Mat<R>& Adiag) {
  const std::size_t n = Adiag.rows();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return Adiag(a, a).re < Adiag(b, b).re; });
  e.values.clear();
  Mat<R> V(e.vectors.rows(), n);
  for (std::size_t k = 0; k < n; ++k) {
    e.values.push_back(Adiag(idx[k], idx[k]).re);
    for (std::size_t r = 0; r < e.vectors.rows(); ++r) V(r, k) = e.vectors(r, idx[k]);
  }
  e.vectors = std::move(V);
}

template <class R>
void run_sweep(Mat<R>& A, Mat<R>& U, const R& skip, bool serial) {
  const std::size_t n = A.rows();
  if (!serial && use_parallel<R>(n * n * n))
    kernels::omp::jacobi_sweep(A, U, skip);
  else
    kernels::serial::jacobi_sweep(A, U, skip);
}

// Jacobi to the off-diagonal threshold, then one polishing sweep.
template <class R>
int jacobi_converge(Mat<R>& A, Mat<R>& U, const R& normF, const EigOptions& opt, bool polish_only_large) {
  const int P = Real<R>::digits();
  const R thr = pow10neg<R>(P - 5) * normF;
  const R tiny = pow10neg<R>(P + 3) * normF;
  const R skip = polish_only_large ? thr / R(static_cast<double>(std::max<std::size_t>(1, A.rows()))) : tiny;
  int sweeps = 0;
  while (true) {
    R off = off_norm(A);
    if (!(off > thr)) break;
    if (sweeps >= opt.max_sweeps)
      throw ConvergenceError("eig_hermitian: Jacobi did not converge within " + std::to_string(opt.max_sweeps) +
                             " sweeps");
    run_sweep(A, U, skip, opt.serial);
    ++sweeps;
  }
  run_sweep(A, U, skip, opt.serial);
  return sweeps + 1;
}

// Row-major Hermitian M is conj(M) in column-major order; eigenvectors come back conjugated.
EigenDecomposition<double> lapack_eig(const Mat<double>& M) {
  const int n = static_cast<int>(M.rows());
  std::vector<double> a(2 * M.rows() * M.rows());
  for (std::size_t k = 0; k < M.storage().size(); ++k) {
    a[2 * k] = M.storage()[k].re;
    a[2 * k + 1] = M.storage()[k].im;
  }
  std::vector<double> w(M.rows());
  int lwork = -1, lrwork = -1, liwork = -1, info = 0, iq = 0;
  double wq[2], rq;
  zheevd_("V", "U", &n, a.data(), &n, w.data(), wq, &lwork, &rq, &lrwork, &iq, &liwork, &info);
  lwork = static_cast<int>(wq[0]);
  lrwork = static_cast<int>(rq);
  liwork = iq;
  std::vector<double> work(2 * static_cast<std::size_t>(lwork)), rwork(static_cast<std::size_t>(lrwork));
  std::vector<int> iwork(static_cast<std::size_t>(liwork));
  zheevd_("V", "U", &n, a.data(), &n, w.data(), work.data(), &lwork, rwork.data(), &lrwork, iwork.data(), &liwork,
          &info);
  if (info != 0) throw ConvergenceError("eig_hermitian: zheevd failed, info = " + std::to_string(info));
  EigenDecomposition<double> e;
  e.values = w;
  e.vectors = Mat<double>(M.rows(), M.rows());
  for (std::size_t k = 0; k < M.rows(); ++k)
    for (std::size_t r = 0; r < M.rows(); ++r) {
      std::size_t idx = 2 * (k * M.rows() + r);
      e.vectors(r, k) = Cx<double>(a[idx], -a[idx + 1]);
    }
  return e;
}

// One refinement step for an approximate eigenbasis X of Hermitian A
// (quadratically convergent; clustered pairs are left to the Jacobi polish).
// Returns max |E_ij|.
double refine_step(const Mat<BigFloat>& A, Mat<BigFloat>& X) {
  const std::size_t n = A.rows();
  Mat<BigFloat> G = matmul_adj(X, X);
  Mat<BigFloat> AX = matmul(A, X);
  Mat<BigFloat> S = matmul_adj(X, AX);
  std::vector<BigFloat> lam(n);
  for (std::size_t i = 0; i < n; ++i) lam[i] = S(i, i).re / G(i, i).re;
  // Frobenius bounds as a conservative cluster radius
  BigFloat sOff(0), rN(0), aN(0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      Cx<BigFloat> r = (i == j ? Cx<BigFloat>(BigFloat(1)) : Cx<BigFloat>()) - G(i, j);
      rN += norm2(r);
      aN += norm2(A(i, j));
      if (i != j) sOff += norm2(S(i, j));
    }
  BigFloat delta = BigFloat(2) * (sqrt(sOff) + sqrt(aN) * sqrt(rN));
  Mat<BigFloat> E(n, n);
  double emax = 0;
  const BigFloat half(0.5);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      Cx<BigFloat> r = (i == j ? Cx<BigFloat>(BigFloat(1)) : Cx<BigFloat>()) - G(i, j);
      if (i == j) {
        E(i, j) = Cx<BigFloat>(r.re * half);
      } else {
        BigFloat gap = lam[j] - lam[i];
        if (abs(gap) > delta) {
          E(i, j) = (S(i, j) + lam[j] * r) / Cx<BigFloat>(gap);
        } else {
          E(i, j) = r * half;
        }
        emax = std::max(emax, cabs(E(i, j)).to_double());
      }
    }
  X += matmul(X, E);
  return emax;
}

}  // namespace

template <class R>
EigenDecomposition<R> eig_hermitian(const Mat<R>& M, const EigOptions& opt) {
  if (!M.square()) throw std::invalid_argument("eig_hermitian: matrix not square");
  const std::size_t n = M.rows();
  R scale(1);
  for (const auto& z : M.storage()) {
    R a = cabs(z);
    if (a > scale) scale = a;
  }
  if (hermiticity_defect(M) > tol3<R>() * scale) throw std::invalid_argument("eig_hermitian: input not Hermitian");
  EigenDecomposition<R> e;
  R normF = frobenius_norm(M);
  if (is_zero(normF)) normF = R(1);
  bool lifted = false;
  if constexpr (!Real<R>::is_big) {
    if (opt.route == EigOptions::Route::Lapack || (opt.route == EigOptions::Route::Auto && n > 32))
      return lapack_eig(hermitian_part(M));
  } else {
    if (opt.route == EigOptions::Route::Lapack) throw std::invalid_argument("eig_hermitian: LAPACK route is double only");
    lifted = opt.route == EigOptions::Route::Lifted || (opt.route == EigOptions::Route::Auto && n > 16);
  }
  if (!lifted) {
    Mat<R> A = hermitian_part(M);
    Mat<R> U = Mat<R>::identity(n);
    e.sweeps = jacobi_converge(A, U, normF, opt, false);
    e.vectors = std::move(U);
    sort_ascending(e, A);
    return e;
  }
  if constexpr (Real<R>::is_big) {
    const int P = working_digits();
    // double-precision warm start
    Mat<double> Md = convert<double>(M);
    EigOptions dopt = opt;
    dopt.route = opt.route == EigOptions::Route::Auto ? EigOptions::Route::Auto : EigOptions::Route::Jacobi;
    auto ed = eig_hermitian<double>(hermitian_part(Md), dopt);
    std::vector<int> levels;
    for (int L = P; L > 28; L = (L + 1) / 2) levels.push_back(std::max(L, 20));
    std::reverse(levels.begin(), levels.end());
    Mat<BigFloat> X;
    {
      PrecisionScope ps(std::max(levels.front(), 20));
      X = convert<BigFloat>(ed.vectors);
    }
    for (std::size_t k = 0; k < levels.size(); ++k) {
      PrecisionScope ps(levels[k]);
      Mat<BigFloat> XL = convert<BigFloat>(X);
      Mat<BigFloat> AL = convert<BigFloat>(M);
      double emax = refine_step(AL, XL);
      if (k + 1 == levels.size()) {
        // iterate at full precision until the correction is below the threshold
        for (int extra = 0; extra < 6 && emax > std::pow(10.0, -(P - 5)); ++extra) emax = refine_step(AL, XL);
      }
      X = std::move(XL);
      ++e.sweeps;
    }
    Mat<BigFloat> S = matmul_adj(X, matmul(M, X));
    S = hermitian_part(S);
    e.sweeps += jacobi_converge(S, X, normF, opt, true);
    e.vectors = std::move(X);
    sort_ascending(e, S);
  }
  return e;
}

template <class R>
Mat<R> spectral_apply(const EigenDecomposition<R>& e, const std::function<Cx<R>(const R&)>& f) {
  const std::size_t n = e.vectors.rows();
  Mat<R> W = e.vectors;
  for (std::size_t k = 0; k < e.values.size(); ++k) {
    Cx<R> fk = f(e.values[k]);
    for (std::size_t r = 0; r < n; ++r) W(r, k) = W(r, k) * fk;
  }
  return matmul(W, e.vectors.adjoint());
}

template <class R>
Mat<R> mat_exp_hermitian(const Mat<R>& M, const R& s) {
  auto e = eig_hermitian(M);
  return spectral_apply<R>(e, [&](const R& x) {
    using std::exp;
    return Cx<R>(exp(s * x));
  });
}

template <class R>
Mat<R> mat_log_pd(const Mat<R>& M) {
  auto e = eig_hermitian(M);
  for (const auto& v : e.values)
    if (!(v > R(0))) throw std::domain_error("mat_log_pd: non-positive eigenvalue");
  return spectral_apply<R>(e, [](const R& x) {
    using std::log;
    return Cx<R>(log(x));
  });
}

template <class R>
Mat<R> sqrt_psd(const Mat<R>& M) {
  auto e = eig_hermitian(M);
  return spectral_apply<R>(e, [](const R& x) {
    using std::sqrt;
    return x > R(0) ? Cx<R>(sqrt(x)) : Cx<R>();
  });
}

template <class R>
Mat<R> taylor_exp(const Mat<R>& M, int terms) {
  const std::size_t n = M.rows();
  Mat<R> out = Mat<R>::identity(n);
  Mat<R> term = Mat<R>::identity(n);
  for (int k = 1; k <= terms; ++k) {
    term = matmul(term, M);
    term *= R(1) / R(k);
    out += term;
  }
  return out;
}

template <class R>
R frobenius_norm(const Mat<R>& M) {
  R s(0);
  for (const auto& z : M.storage()) s += norm2(z);
  using std::sqrt;
  return sqrt(s);
}

template <class R>
std::vector<R> singular_values(const Mat<R>& M) {
  const std::size_t r = M.rows(), c = M.cols();
  Mat<R> Dl(r + c, r + c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) {
      Dl(i, r + j) = M(i, j);
      Dl(r + j, i) = conj(M(i, j));
    }
  auto e = eig_hermitian(Dl);
  std::vector<R> sv;
  // the top min(r,c) eigenvalues of the dilation are the singular values
  for (std::size_t k = 0; k < std::min(r, c); ++k) {
    R v = e.values[e.values.size() - 1 - k];
    sv.push_back(v > R(0) ? v : R(0));
  }
  return sv;
}

template <class R>
R trace_norm(const Mat<R>& M) {
  R scale(1);
  for (const auto& z : M.storage()) {
    R a = cabs(z);
    if (a > scale) scale = a;
  }
  if (M.square() && !(hermiticity_defect(M) > tol3<R>() * scale)) {
    auto e = eig_hermitian(hermitian_part(M));
    R s(0);
    for (const auto& v : e.values) s += rabs(v);
    return s;
  }
  R s(0);
  for (const auto& v : singular_values(M)) s += v;
  return s;
}

template <class R>
R op_norm(const Mat<R>& M) {
  R scale(1);
  for (const auto& z : M.storage()) {
    R a = cabs(z);
    if (a > scale) scale = a;
  }
  if (M.square() && !(hermiticity_defect(M) > tol3<R>() * scale)) {
    auto e = eig_hermitian(hermitian_part(M));
    R a = rabs(e.values.front()), b = rabs(e.values.back());
    return a > b ? a : b;
  }
  return singular_values(M).front();
}

std::vector<int> complement(const std::vector<int>& sites, int n) {
  std::vector<int> out;
  for (int i = 1; i <= n; ++i)
    if (std::find(sites.begin(), sites.end(), i) == sites.end()) out.push_back(i);
  return out;
}

template <class R>
Mat<R> embed_on_sites(const Mat<R>& op, const std::vector<int>& sites, int n, int d) {
  SplitIndex s = make_split(n, d, sites);
  if (op.rows() != s.dy || op.cols() != s.dy) throw std::invalid_argument("embed_on_sites: operator dimension mismatch");
  Mat<R> M(s.dy * s.dz, s.dy * s.dz);
  for (std::size_t y1 = 0; y1 < s.dy; ++y1)
    for (std::size_t y2 = 0; y2 < s.dy; ++y2) {
      const Cx<R>& v = op(y1, y2);
      if (is_zero(v)) continue;
      for (std::size_t z = 0; z < s.dz; ++z) M(s.full[y1 * s.dz + z], s.full[y2 * s.dz + z]) = v;
    }
  return M;
}

template <class R>
Mat<R> partial_trace(const Mat<R>& M, const std::vector<int>& keep, int n, int d) {
  SplitIndex s = make_split(n, d, keep);
  if (M.rows() != s.dy * s.dz || !M.square()) throw std::invalid_argument("partial_trace: dimension is not d^n");
  Mat<R> out(s.dy, s.dy);
  for (std::size_t y1 = 0; y1 < s.dy; ++y1)
    for (std::size_t y2 = 0; y2 < s.dy; ++y2) {
      Cx<R> acc;
      for (std::size_t z = 0; z < s.dz; ++z) acc += M(s.full[y1 * s.dz + z], s.full[y2 * s.dz + z]);
      out(y1, y2) = acc;
    }
  return out;
}

template <class R>
Mat<R> normalized_partial_trace(const Mat<R>& M, const std::vector<int>& traced, int n, int d) {
  std::vector<int> keep = complement(traced, n);
  Mat<R> red = partial_trace(M, keep, n, d);
  std::size_t dt = 1;
  for (std::size_t k = 0; k < traced.size(); ++k) dt *= static_cast<std::size_t>(d);
  red *= R(1) / R(static_cast<long>(dt));
  if (keep.empty()) {
    std::size_t D = M.rows();
    Mat<R> I = Mat<R>::identity(D);
    I *= red(0, 0);
    return I;
  }
  return embed_on_sites(red, keep, n, d);
}

template <class R>
Mat<R> partial_transpose(const Mat<R>& M, const std::vector<int>& sites, int n, int d) {
  SplitIndex s = make_split(n, d, sites);
  Mat<R> out(M.rows(), M.cols());
  for (std::size_t y1 = 0; y1 < s.dy; ++y1)
    for (std::size_t y2 = 0; y2 < s.dy; ++y2)
      for (std::size_t z1 = 0; z1 < s.dz; ++z1)
        for (std::size_t z2 = 0; z2 < s.dz; ++z2)
          out(s.full[y2 * s.dz + z1], s.full[y1 * s.dz + z2]) = M(s.full[y1 * s.dz + z1], s.full[y2 * s.dz + z2]);
  return out;
}

#define QBP_INST(R)                                                                                    \
  template Mat<R> matmul<R>(const Mat<R>&, const Mat<R>&);                                             \
  template Mat<R> matmul_adj<R>(const Mat<R>&, const Mat<R>&);                                         \
  template Mat<R> commutator<R>(const Mat<R>&, const Mat<R>&);                                         \
  template Mat<R> anticommutator<R>(const Mat<R>&, const Mat<R>&);                                     \
  template Mat<R> kron<R>(const Mat<R>&, const Mat<R>&);                                               \
  template Cx<R> trace_product<R>(const Mat<R>&, const Mat<R>&);                                       \
  template R max_abs_diff<R>(const Mat<R>&, const Mat<R>&);                                            \
  template R hermiticity_defect<R>(const Mat<R>&);                                                     \
  template bool is_hermitian<R>(const Mat<R>&, const R&);                                              \
  template Mat<R> hermitian_part<R>(const Mat<R>&);                                                    \
  template EigenDecomposition<R> eig_hermitian<R>(const Mat<R>&, const EigOptions&);                   \
  template Mat<R> spectral_apply<R>(const EigenDecomposition<R>&, const std::function<Cx<R>(const R&)>&); \
  template Mat<R> mat_exp_hermitian<R>(const Mat<R>&, const R&);                                       \
  template Mat<R> mat_log_pd<R>(const Mat<R>&);                                                        \
  template Mat<R> sqrt_psd<R>(const Mat<R>&);                                                          \
  template Mat<R> taylor_exp<R>(const Mat<R>&, int);                                                   \
  template R frobenius_norm<R>(const Mat<R>&);                                                         \
  template std::vector<R> singular_values<R>(const Mat<R>&);                                           \
  template R trace_norm<R>(const Mat<R>&);                                                             \
  template R op_norm<R>(const Mat<R>&);                                                                \
  template Mat<R> embed_on_sites<R>(const Mat<R>&, const std::vector<int>&, int, int);                 \
  template Mat<R> partial_trace<R>(const Mat<R>&, const std::vector<int>&, int, int);                  \
  template Mat<R> normalized_partial_trace<R>(const Mat<R>&, const std::vector<int>&, int, int);       \
  template Mat<R> partial_transpose<R>(const Mat<R>&, const std::vector<int>&, int, int);

QBP_INST(double)
QBP_INST(BigFloat)
#undef QBP_INST

}  // namespace qbp::num
