#include "qbp/bch/bch.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "qbp/numkit/fit.hpp"
#include "qbp/numkit/superop.hpp"

namespace qbp::bch {

using num::BigFloat;
using num::Cx;

namespace {

template <class R>
R to_real(const Rational& q) {
  if constexpr (std::is_same_v<R, double>) {
    return q.get_d();
  } else {
    return num::from_rational_string(q.get_num().get_str(), q.get_den().get_str());
  }
}

template <class R>
Mat<R> identity(std::size_t D) {
  Mat<R> I(D, D);
  for (std::size_t i = 0; i < D; ++i) I(i, i) = Cx<R>(R(1));
  return I;
}

template <class R>
Mat<R> adjoint(const Mat<R>& M) {
  return M.conjugate().transpose();
}

// (e^nu - 1) / nu, 1 at nu = 0
template <class R>
R phi(const R& nu) {
  if (num::is_zero(nu)) return R(1);
  using std::expm1;
  return expm1(nu) / nu;
}

template <class R>
R sqr_abs(const Cx<R>& z) {
  return z.re * z.re + z.im * z.im;
}

std::size_t bond_index(const lat::Hamiltonian& H) {
  const int n = H.lattice.n;
  std::size_t kb = H.terms.size();
  for (std::size_t k = 0; k < H.terms.size(); ++k) {
    const auto& s = H.terms[k].sites;
    if (s == std::vector<int>{n - 1, n}) {
      if (kb != H.terms.size()) throw std::invalid_argument("split_boundary: duplicate bond (n-1, n)");
      kb = k;
    }
  }
  if (kb == H.terms.size()) throw std::invalid_argument("split_boundary: no bond (n-1, n)");
  return kb;
}

// Rows of a sparse operator: (column, value) with value parts split for fused updates.
template <class R>
struct SparseRows {
  struct Entry {
    std::size_t col;
    R re, im, nre, nim;  // h and -h
    bool re0, im0;
  };
  std::vector<std::vector<Entry>> rows;
};

template <class R>
SparseRows<R> sparse_of(const Mat<R>& H) {
  SparseRows<R> S;
  S.rows.resize(H.rows());
  for (std::size_t i = 0; i < H.rows(); ++i)
    for (std::size_t j = 0; j < H.cols(); ++j) {
      const auto& z = H(i, j);
      if (num::is_zero(z)) continue;
      S.rows[i].push_back({j, z.re, z.im, -z.re, -z.im, num::is_zero(z.re), num::is_zero(z.im)});
    }
  return S;
}

// acc += x (hr + i hi); mhi = -hi
inline void mul_acc(Cx<double>& acc, const Cx<double>& x, const double& hr, const double& hi, const double&, bool re0,
                    bool im0) {
  if (!re0) {
    acc.re += x.re * hr;
    acc.im += x.im * hr;
  }
  if (!im0) {
    acc.re -= x.im * hi;
    acc.im += x.re * hi;
  }
}

inline void mul_acc(Cx<BigFloat>& acc, const Cx<BigFloat>& x, const BigFloat& hr, const BigFloat& hi,
                    const BigFloat& mhi, bool re0, bool im0) {
  if (!re0) {
    mpfr_fma(acc.re.raw(), x.re.raw(), hr.raw(), acc.re.raw(), MPFR_RNDN);
    mpfr_fma(acc.im.raw(), x.im.raw(), hr.raw(), acc.im.raw(), MPFR_RNDN);
  }
  if (!im0) {
    mpfr_fma(acc.re.raw(), x.im.raw(), mhi.raw(), acc.re.raw(), MPFR_RNDN);
    mpfr_fma(acc.im.raw(), x.re.raw(), hi.raw(), acc.im.raw(), MPFR_RNDN);
  }
}

template <class R>
void set_zero(Cx<R>& z) {
  if constexpr (std::is_same_v<R, double>) {
    z = Cx<double>();
  } else {
    mpfr_set_zero(z.re.raw(), 1);
    mpfr_set_zero(z.im.raw(), 1);
  }
}

// out = X H - H X, out preallocated at the working precision
template <class R>
void ad_sparse(const SparseRows<R>& H, const Mat<R>& X, Mat<R>& out, bool serial) {
  const long D = static_cast<long>(X.rows());
#pragma omp parallel for schedule(dynamic, 4) if (!serial)
  for (long il = 0; il < D; ++il) {
    const std::size_t i = static_cast<std::size_t>(il);
    for (std::size_t k = 0; k < X.cols(); ++k) set_zero(out(i, k));
    // (X H)_{ik} = sum_j X_ij H_jk
    for (std::size_t j = 0; j < H.rows.size(); ++j) {
      const auto& x = X(i, j);
      if (num::is_zero(x)) continue;
      for (const auto& e : H.rows[j]) mul_acc(out(i, e.col), x, e.re, e.im, e.nim, e.re0, e.im0);
    }
    // -(H X)_{ik} = sum_j (-H_ij) X_jk
    for (const auto& e : H.rows[i])
      for (std::size_t k = 0; k < X.cols(); ++k) mul_acc(out(i, k), X(e.col, k), e.nre, e.nim, e.im, e.re0, e.im0);
  }
}

}  // namespace

std::vector<Rational> bernoulli_table(int m_max, bool plus_half) {
  if (m_max < 0 || m_max > 100) throw std::invalid_argument("bernoulli_table: 0 <= m_max <= 100");
  std::vector<Rational> B(m_max + 1);
  B[0] = 1;
  for (int m = 1; m <= m_max; ++m) {
    Rational s = 0;
    mpz_class c = 1;  // C(m+1, k)
    for (int k = 0; k < m; ++k) {
      s += Rational(c) * B[k];
      c = c * (m + 1 - k) / (k + 1);
    }
    B[m] = -s / (m + 1);
    B[m].canonicalize();
  }
  if (plus_half && m_max >= 1) B[1] = Rational(1, 2);
  return B;
}

double bernoulli_asymptotic(int j) {
  const double v = 4 * std::sqrt(M_PI * j) * std::pow(j / (M_PI * M_E), 2.0 * j);
  return (j % 2 == 1) ? v : -v;
}

template <class R>
Mat<R> ad(const Mat<R>& A, const Mat<R>& X) {
  return num::matmul(X, A) - num::matmul(A, X);
}

template <class R>
BoundarySplit<R> split_boundary(const lat::Hamiltonian& H) {
  const int n = H.lattice.n;
  if (n < 2 || H.lattice.d != 2) throw std::invalid_argument("split_boundary: need a qubit chain with n >= 2");
  const std::size_t kb = bond_index(H);
  BoundarySplit<R> s;
  s.n = n;
  s.hn = Mat<R>(2, 2);
  lat::Hamiltonian left = lat::subset_hamiltonian(H, lat::interval(1, n - 1));
  left.lattice.n = n - 1;
  s.Hle = lat::assemble_dense<R>(left);
  for (std::size_t k = 0; k < H.terms.size(); ++k) {
    const auto& st = H.terms[k].sites;
    if (std::find(st.begin(), st.end(), n) == st.end() || k == kb) continue;
    if (st != std::vector<int>{n}) throw std::invalid_argument("split_boundary: a term other than h_{n-1,n} and h_n touches site n");
    s.hn += lat::term_local<R>(H, k);
  }
  // h = sum_k P_k (x) sigma_k with P_k = tr_n(h (1 (x) sigma_k)) / 2
  const Mat<R> h = lat::term_local<R>(H, kb);
  for (char c : std::string("IXYZ")) {
    const Mat<R> sig = lat::pauli<R>(c);
    Mat<R> P(2, 2);
    bool nonzero = false;
    for (std::size_t a = 0; a < 2; ++a)
      for (std::size_t b = 0; b < 2; ++b) {
        Cx<R> acc;
        for (std::size_t u = 0; u < 2; ++u)
          for (std::size_t v = 0; v < 2; ++v) acc += h(a * 2 + u, b * 2 + v) * sig(v, u);
        P(a, b) = acc * Cx<R>(R(1) / R(2));
        nonzero = nonzero || !num::is_zero(P(a, b));
      }
    if (!nonzero) continue;
    s.P.push_back(num::embed_on_sites(P, {n - 1}, n - 1, 2));
    s.Q.push_back(sig);
  }
  return s;
}

template <class R>
BoundaryTerm<R> boundary_effective_term(const lat::Hamiltonian& H, const R& beta, Duhamel mode) {
  const auto s = split_boundary<R>(H);
  const Mat<R> ehn = num::mat_exp_hermitian(s.hn, beta);
  BoundaryTerm<R> out;
  out.G = ehn.trace().re;
  const std::size_t D = s.Hle.rows();
  out.matrix = Mat<R>(D, D);
  if (s.P.empty()) return out;
  const auto e = num::eig_hermitian(s.Hle);
  const R scale = (mode == Duhamel::Beta) ? beta : R(1);
  Mat<R> W(D, D);
  for (std::size_t k = 0; k < s.P.size(); ++k) {
    const Cx<R> c = num::trace_product(ehn, s.Q[k]);
    W += num::matmul_adj(e.vectors, num::matmul(s.P[k], e.vectors)) * c;
  }
  for (std::size_t j = 0; j < D; ++j)
    for (std::size_t k = 0; k < D; ++k) W(j, k) = W(j, k) * Cx<R>(phi<R>(scale * (e.values[k] - e.values[j])));
  out.matrix = num::matmul(e.vectors, num::matmul(W, adjoint(e.vectors))) * Cx<R>(R(1) / (R(2) * out.G));
  return out;
}

template <class R>
void gauss_legendre_unit(int N, std::vector<R>& x, std::vector<R>& w) {
  if (N < 1) throw std::invalid_argument("gauss_legendre_unit: N >= 1");
  x.assign(N, R(0));
  w.assign(N, R(0));
  const int iters = 8 + static_cast<int>(std::log2(std::max(num::Real<R>::digits(), 16)));
  for (int i = 0; i < (N + 1) / 2; ++i) {
    R z = R(std::cos(M_PI * (i + 0.75) / (N + 0.5)));
    R dp;
    for (int it = 0; it < iters; ++it) {
      R p0 = R(1), p1 = z;
      for (int k = 2; k <= N; ++k) {
        R p2 = (R(2 * k - 1) * z * p1 - R(k - 1) * p0) / R(k);
        p0 = p1;
        p1 = p2;
      }
      if (N == 1) p0 = R(1);
      dp = R(N) * (z * p1 - p0) / (z * z - R(1));
      z = z - p1 / dp;
    }
    // map [-1, 1] -> [0, 1]
    const R wi = R(1) / ((R(1) - z * z) * dp * dp);
    x[i] = (R(1) - z) / R(2);
    x[N - 1 - i] = (R(1) + z) / R(2);
    w[i] = wi;
    w[N - 1 - i] = wi;
  }
}

template <class R>
BoundaryTerm<R> boundary_effective_term_quadrature(const lat::Hamiltonian& H, const R& beta, int nodes,
                                                   Duhamel mode) {
  const int n = H.lattice.n;
  if (n > 6) throw num::SizeError("boundary_effective_term_quadrature: n <= 6");
  const std::size_t kb = bond_index(H);
  const Mat<R> bond = num::embed_on_sites(lat::term_local<R>(H, kb), H.terms[kb].sites, n, 2);
  const Mat<R> H0 = lat::assemble_dense<R>(lat::without_terms(H, {kb}));
  Mat<R> hn(2, 2);
  for (std::size_t k = 0; k < H.terms.size(); ++k)
    if (H.terms[k].sites == std::vector<int>{n}) hn += lat::term_local<R>(H, k);
  const Mat<R> ehn = num::mat_exp_hermitian(hn, beta);
  const Mat<R> E = num::embed_on_sites(ehn, {n}, n, 2);
  const auto e = num::eig_hermitian(H0);
  const R scale = (mode == Duhamel::Beta) ? beta : R(1);
  std::vector<R> x, w;
  gauss_legendre_unit<R>(nodes, x, w);
  Mat<R> acc(H0.rows(), H0.cols());
  for (int q = 0; q < nodes; ++q) {
    const R t = x[q] * scale;
    Mat<R> plus = num::spectral_apply<R>(e, [&](const R& v) {
      using std::exp;
      return Cx<R>(exp(t * v));
    });
    Mat<R> minus = num::spectral_apply<R>(e, [&](const R& v) {
      using std::exp;
      return Cx<R>(exp(-(t * v)));
    });
    acc += num::matmul(E, num::matmul(num::matmul(minus, bond), plus)) * Cx<R>(w[q]);
  }
  BoundaryTerm<R> out;
  out.G = ehn.trace().re;
  out.matrix = num::partial_trace(acc, lat::interval(1, n - 1), n, 2) * Cx<R>(R(1) / (R(2) * out.G));
  return out;
}

int required_digits(double h0_norm, int m_max) {
  return 15 + static_cast<int>(std::ceil(m_max * std::log10(2 * h0_norm + 1)));
}

double h0_norm(const lat::Hamiltonian& H) {
  const auto s = split_boundary<double>(H);
  const auto a = num::eig_hermitian(s.Hle).values;
  const auto b = num::eig_hermitian(s.hn).values;
  return std::max(std::fabs(a.back() + b.back()), std::fabs(a.front() + b.front()));
}

QSequence q_sequence(const lat::Hamiltonian& H, double beta, int m_max, int digits, const QOptions& opt) {
  if (m_max < 0 || m_max > 80) throw std::invalid_argument("q_sequence: 0 <= m_max <= 80");
  if (!(beta > 0)) throw std::invalid_argument("q_sequence: beta must be positive");
  const auto t0 = std::chrono::steady_clock::now();
  QSequence out;
  out.n = H.lattice.n;
  out.beta = beta;
  out.digits = digits;
  out.mode = opt.mode;
  out.h0_norm = h0_norm(H);
  out.p_min = opt.min_digits >= 0 ? opt.min_digits : required_digits(out.h0_norm, m_max);
  if (digits < out.p_min)
    throw PrecisionError("q_sequence: " + std::to_string(digits) + " digits is below the required " +
                             std::to_string(out.p_min) + " for m_max = " + std::to_string(m_max),
                         out.p_min);

  num::PrecisionScope ps(digits);
  const auto B = bernoulli_table(m_max);
  const BigFloat b(beta);
  const auto s = split_boundary<BigFloat>(H);
  const auto term = boundary_effective_term<BigFloat>(H, b, opt.mode);
  const auto S = sparse_of(s.Hle);
  Mat<BigFloat> X = term.matrix, next(X.rows(), X.cols());

  BigFloat bpow = b;  // beta^{m+1}
  BigFloat fact(1);   // m!
  for (int m = 0; m <= m_max; ++m) {
    if (m > 0) {
      ad_sparse(S, X, next, opt.serial);
      std::swap(X, next);
      bpow *= b;
      fact *= BigFloat(m);
    }
    out.m.push_back(m);
    if (B[m] == 0) {
      out.q.push_back("0");
      out.log10q.push_back(-std::numeric_limits<double>::infinity());
      continue;
    }
    BigFloat f2(0);
    for (std::size_t i = 0; i < X.rows(); ++i)
      for (std::size_t j = 0; j < X.cols(); ++j) {
        const Cx<BigFloat> z(X(i, j).re + X(j, i).re, X(i, j).im - X(j, i).im);
        f2 += sqr_abs(z);
      }
    BigFloat q = num::abs(bpow * to_real<BigFloat>(B[m]) / fact) * num::sqrt(f2);
    out.q.push_back(q.str(digits));
    out.log10q.push_back((num::log(q) / num::log(BigFloat(10))).to_double());
  }
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

DivergenceShape analyze_shape(const QSequence& s) {
  std::vector<int> ms;
  std::vector<double> v;
  for (std::size_t k = 0; k < s.m.size(); ++k)
    if (s.m[k] >= 2 && s.m[k] % 2 == 0) {
      ms.push_back(s.m[k]);
      v.push_back(s.log10q[k]);
    }
  DivergenceShape d;
  if (v.empty()) return d;
  const auto it = std::min_element(v.begin(), v.end());
  const std::size_t imin = static_cast<std::size_t>(it - v.begin());
  d.argmin = ms[imin];
  bool down = false, up = false;
  for (std::size_t k = 1; k < v.size(); ++k) {
    down = down || v[k] < v[k - 1];
    up = up || v[k] > v[k - 1];
  }
  d.non_monotone = down && up;
  d.growing_tail = imin + 1 < v.size();
  for (std::size_t k = imin + 1; k < v.size(); ++k) d.growing_tail = d.growing_tail && v[k] > v[k - 1];
  for (std::size_t k = v.size() - 1; k >= 1 && v[k] > v[k - 1]; --k) ++d.tail_run;
  return d;
}

PrecisionLadder precision_ladder(const QSequence& lo, const QSequence& hi) {
  if (lo.m != hi.m) throw std::invalid_argument("precision_ladder: m grids differ");
  PrecisionLadder L;
  num::PrecisionScope ps(hi.digits);
  L.min_agree = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < lo.m.size(); ++k) {
    const BigFloat a(lo.q[k]), b(hi.q[k]);
    double agree = 2.0 * hi.digits;
    if (!num::is_zero(b)) {
      const BigFloat rel = num::abs(a - b) / num::abs(b);
      if (!num::is_zero(rel)) agree = std::min(agree, -(num::log(rel) / num::log(BigFloat(10))).to_double());
    } else if (!num::is_zero(a)) {
      agree = 0;
    }
    L.m.push_back(lo.m[k]);
    L.agree_digits.push_back(agree);
    L.min_agree = std::min(L.min_agree, agree);
  }
  L.holds = L.min_agree >= lo.digits / 2.0;
  return L;
}

namespace {

FirstOrderAudit finish(const std::vector<double>& a, std::vector<double> res) {
  FirstOrderAudit out;
  out.a = a;
  out.residual = std::move(res);
  std::vector<double> la, lr;
  for (std::size_t k = 0; k < a.size(); ++k)
    if (a[k] > 0) {
      la.push_back(std::log(a[k]));
      lr.push_back(std::log(std::max(out.residual[k], 1e-300)));
      out.C = std::max(out.C, out.residual[k] / (a[k] * a[k]));
    }
  if (la.size() >= 2) out.slope = num::linear_fit(la, lr).slope;
  return out;
}

}  // namespace

template <class R>
FirstOrderAudit bch_first_order_audit(const Mat<R>& A, const Mat<R>& B, double beta, const std::vector<double>& a,
                                      int M, bool plus_half) {
  if (!num::is_hermitian(A, num::tol3<R>(static_cast<int>(A.rows()))))
    throw std::invalid_argument("bch_first_order_audit: A must be Hermitian");
  const auto Bn = bernoulli_table(M, plus_half);
  const R b(beta);
  Mat<R> S(A.rows(), A.cols());
  Mat<R> X = B;
  R f = R(1);  // beta^m / m!
  for (int m = 0; m <= M; ++m) {
    if (m > 0) {
      X = ad(A, X);
      f = f * b / R(m);
    }
    if (Bn[m] == 0) continue;
    S += (X + adjoint(X)) * (f * to_real<R>(Bn[m]));
  }
  const Mat<R> eA = num::mat_exp_hermitian(A, b);
  std::vector<double> res;
  for (double av : a) {
    const R ba = b * R(av);
    Mat<R> left = num::taylor_exp(Mat<R>(adjoint(B) * ba), 40);
    Mat<R> right = num::taylor_exp(Mat<R>(B * ba), 40);
    Mat<R> P = num::hermitian_part(Mat<R>(num::matmul(num::matmul(left, eA), right)));
    Mat<R> L;
    try {
      L = num::mat_log_pd(P);
    } catch (const std::domain_error&) {
      throw std::domain_error("bch_first_order_audit: product is not positive definite (matrix log branch)");
    }
    res.push_back(num::to_d(num::frobenius_norm(Mat<R>(L - A * b - S * ba))));
  }
  return finish(a, std::move(res));
}

template <class R>
FirstOrderAudit reduced_gibbs_first_order_audit(const lat::Hamiltonian& H, double beta, const std::vector<double>& a,
                                                Duhamel mode, int quad_nodes) {
  const int n = H.lattice.n;
  if (n > 8) throw num::SizeError("reduced_gibbs_first_order_audit: n <= 8");
  const std::size_t kb = bond_index(H);
  const R b(beta);
  const auto s = split_boundary<R>(H);
  const auto term = quad_nodes > 0 ? boundary_effective_term_quadrature<R>(H, b, quad_nodes, mode)
                                    : boundary_effective_term<R>(H, b, mode);
  const Mat<R> eH = num::mat_exp_hermitian(s.Hle, b);
  std::vector<double> res;
  for (double av : a) {
    lat::Hamiltonian Ha = H;
    Ha.coef[kb] *= av;
    const Mat<R> lhs = num::partial_trace(num::mat_exp_hermitian(lat::assemble_dense<R>(Ha), b), lat::interval(1, n - 1), n, 2);
    const R ba = b * R(av);
    const Mat<R> left = num::taylor_exp(Mat<R>(adjoint(term.matrix) * ba), 40);
    const Mat<R> right = num::taylor_exp(Mat<R>(term.matrix * ba), 40);
    const Mat<R> rhs = num::matmul(num::matmul(left, eH), right) * Cx<R>(term.G);
    res.push_back(num::to_d(num::frobenius_norm(Mat<R>(lhs - rhs))));
  }
  return finish(a, std::move(res));
}

#define QBP_BCH_INST(R)                                                                                          \
  template Mat<R> ad<R>(const Mat<R>&, const Mat<R>&);                                                          \
  template BoundarySplit<R> split_boundary<R>(const lat::Hamiltonian&);                                         \
  template BoundaryTerm<R> boundary_effective_term<R>(const lat::Hamiltonian&, const R&, Duhamel);              \
  template BoundaryTerm<R> boundary_effective_term_quadrature<R>(const lat::Hamiltonian&, const R&, int, Duhamel); \
  template void gauss_legendre_unit<R>(int, std::vector<R>&, std::vector<R>&);                                  \
  template FirstOrderAudit bch_first_order_audit<R>(const Mat<R>&, const Mat<R>&, double,                       \
                                                    const std::vector<double>&, int, bool);                     \
  template FirstOrderAudit reduced_gibbs_first_order_audit<R>(const lat::Hamiltonian&, double,                  \
                                                              const std::vector<double>&, Duhamel, int);

QBP_BCH_INST(double)
QBP_BCH_INST(num::BigFloat)

}  // namespace qbp::bch
