#include "qbp/numkit/superop.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace qbp::num {

void check_superop_budget(std::size_t D) {
  const std::size_t limit = std::size_t(1) << 24;
  if (D * D > limit)
    throw SizeError("superoperator dimension " + std::to_string(D * D) + " exceeds the 2^24 budget");
}

template <class R>
Mat<R> vec(const Mat<R>& rho) {
  Mat<R> v(rho.rows() * rho.cols(), 1);
  v.storage() = rho.storage();
  return v;
}

template <class R>
Mat<R> unvec(const Mat<R>& v, std::size_t D) {
  if (v.rows() * v.cols() != D * D) throw std::invalid_argument("unvec: length is not D^2");
  Mat<R> rho(D, D);
  rho.storage() = v.storage();
  return rho;
}

template <class R>
Mat<R> vectorize_superop(const std::vector<LRPair<R>>& pairs, std::size_t D) {
  check_superop_budget(D);
  Mat<R> S(D * D, D * D);
  for (const auto& p : pairs) {
    Mat<R> K = kron(p.left, p.right.transpose());
    K *= p.coef;
    S += K;
  }
  return S;
}

template <class R>
Mat<R> apply_pairs(const std::vector<LRPair<R>>& pairs, const Mat<R>& rho) {
  Mat<R> out(rho.rows(), rho.cols());
  for (const auto& p : pairs) {
    Mat<R> t = matmul(matmul(p.left, rho), p.right);
    t *= p.coef;
    out += t;
  }
  return out;
}

template <class R>
Mat<R> apply_superop(const Mat<R>& S, const Mat<R>& rho) {
  const std::size_t D = rho.rows();
  if (S.rows() != D * D) throw std::invalid_argument("apply_superop: dimension mismatch");
  return unvec(matmul(S, vec(rho)), D);
}

template <class R>
Mat<R> lindblad_superop(const Mat<R>& H, const std::vector<Jump<R>>& jumps) {
  const std::size_t D = H.rows();
  check_superop_budget(D);
  const std::size_t D2 = D * D;
  // Heff = H - (i/2) sum r J^dag J gives -i Heff (x) 1 + i 1 (x) conj(Heff)
  Mat<R> Heff = H;
  const R half(0.5);
  // V[k, (j,l)] = conj(sqrt(r_k) J_k(j,l)), so (V^dag V)[(j,l),(m,p)] = sum_k r_k J_jl conj(J_mp)
  Mat<R> V(jumps.size(), D2);
  for (std::size_t k = 0; k < jumps.size(); ++k) {
    const auto& j = jumps[k];
    if (j.rate < R(0)) throw std::invalid_argument("lindblad_superop: negative rate");
    Mat<R> JdJ = matmul_adj(j.op, j.op);
    JdJ *= Cx<R>(R(0), -half * j.rate);
    Heff += JdJ;
    using std::sqrt;
    const R sr = sqrt(j.rate);
    for (std::size_t e = 0; e < D2; ++e) V(k, e) = conj(j.op.storage()[e]) * sr;
  }
  Mat<R> T = jumps.empty() ? Mat<R>(D2, D2) : matmul_adj(V, V);
  Mat<R> S(D2, D2);
  const Cx<R> mi(R(0), R(-1)), pi(R(0), R(1));
  for (std::size_t j = 0; j < D; ++j)
    for (std::size_t m = 0; m < D; ++m) {
      const std::size_t row = j * D + m;
      for (std::size_t l = 0; l < D; ++l) {
        const std::size_t tr = j * D + l;
        for (std::size_t p = 0; p < D; ++p) S(row, l * D + p) = T(tr, m * D + p);
      }
      for (std::size_t l = 0; l < D; ++l) S(row, l * D + m) += mi * Heff(j, l);
      for (std::size_t p = 0; p < D; ++p) S(row, j * D + p) += pi * conj(Heff(m, p));
    }
  return S;
}

template <class R>
Mat<R> lindblad_apply(const Mat<R>& H, const std::vector<Jump<R>>& jumps, const Mat<R>& rho) {
  const Cx<R> mi(R(0), R(-1));
  Mat<R> out = commutator(H, rho);
  out *= mi;
  const R half(0.5);
  for (const auto& j : jumps) {
    Mat<R> JdJ = matmul_adj(j.op, j.op);
    Mat<R> t = matmul(matmul(j.op, rho), j.op.adjoint());
    Mat<R> a = anticommutator(JdJ, rho);
    a *= half;
    t -= a;
    t *= j.rate;
    out += t;
  }
  return out;
}

namespace {

template <class R>
R taylor_cutoff() {
  return pow10neg<R>(Real<R>::digits() + 3);
}

}  // namespace

template <class R>
Mat<R> superop_exp(const Mat<R>& S, const R& t) {
  Mat<R> A = S;
  A *= t;
  double nrm = to_d(frobenius_norm(A));
  int s = 0;
  if (nrm > 0.5) s = static_cast<int>(std::ceil(std::log2(nrm / 0.5)));
  A *= R(std::ldexp(1.0, -s));
  const std::size_t n = A.rows();
  Mat<R> out = Mat<R>::identity(n);
  Mat<R> term = Mat<R>::identity(n);
  const R cut = taylor_cutoff<R>();
  for (int k = 1; k < 400; ++k) {
    term = matmul(term, A);
    term *= R(1) / R(k);
    out += term;
    if (frobenius_norm(term) < cut) break;
  }
  for (int k = 0; k < s; ++k) out = matmul(out, out);
  return out;
}

template <class R>
Mat<R> expv(const std::function<Mat<R>(const Mat<R>&)>& L, double norm_bound, const R& t, const Mat<R>& rho) {
  const double tn = std::fabs(to_d(t)) * norm_bound;
  const int steps = std::max(1, static_cast<int>(std::ceil(tn / 0.5)));
  const R h = t / R(steps);
  const R cut = taylor_cutoff<R>();
  Mat<R> cur = rho;
  for (int s = 0; s < steps; ++s) {
    Mat<R> term = cur;
    Mat<R> acc = cur;
    R scale = frobenius_norm(cur);
    for (int k = 1; k < 200; ++k) {
      term = L(term);
      term *= h / R(k);
      acc += term;
      if (!(frobenius_norm(term) > cut * scale)) break;
    }
    cur = std::move(acc);
  }
  return cur;
}

template <class R>
Mat<R> apply_local(const LocalSuperop<R>& L, const Mat<R>& rho, int n, int d) {
  SplitIndex s = make_split(n, d, L.sites);
  if (L.S.rows() != s.dy * s.dy) throw std::invalid_argument("apply_local: superoperator dimension mismatch");
  Mat<R> out;
  if (!kernels::force_serial() && s.dz >= 4)
    kernels::omp::apply_local_superop(L.S, s, rho, out);
  else
    kernels::serial::apply_local_superop(L.S, s, rho, out);
  return out;
}

template <class R>
LocalSuperop<R> widen(const LocalSuperop<R>& L, const std::vector<int>& sites, int d) {
  std::vector<int> pos;
  for (int x : L.sites) {
    auto it = std::find(sites.begin(), sites.end(), x);
    if (it == sites.end()) throw std::invalid_argument("widen: target does not contain the support");
    pos.push_back(static_cast<int>(it - sites.begin()) + 1);
  }
  if (L.sites == sites) return L;
  const int m = static_cast<int>(sites.size());
  std::size_t D = 1;
  for (int k = 0; k < m; ++k) D *= static_cast<std::size_t>(d);
  check_superop_budget(D);
  SplitIndex s = make_split(m, d, pos);
  if (L.S.rows() != s.dy * s.dy) throw std::invalid_argument("widen: superoperator dimension mismatch");
  LocalSuperop<R> out{sites, Mat<R>(D * D, D * D)};
  // (S (x) id)[(y1 z1, y2 z2), (y3 z1, y4 z2)] = S[(y1, y2), (y3, y4)]
  const std::size_t dy = s.dy, dz = s.dz;
  for (std::size_t a = 0; a < dy * dy; ++a)
    for (std::size_t b = 0; b < dy * dy; ++b) {
      const Cx<R>& v = L.S(a, b);
      if (v == Cx<R>()) continue;
      const std::size_t y1 = a / dy, y2 = a % dy, y3 = b / dy, y4 = b % dy;
      for (std::size_t z1 = 0; z1 < dz; ++z1)
        for (std::size_t z2 = 0; z2 < dz; ++z2) {
          const std::size_t row = s.full[y1 * dz + z1] * D + s.full[y2 * dz + z2];
          const std::size_t col = s.full[y3 * dz + z1] * D + s.full[y4 * dz + z2];
          out.S(row, col) = v;
        }
    }
  return out;
}

template <class R>
LocalSuperop<R> add(const LocalSuperop<R>& a, const LocalSuperop<R>& b, int d) {
  std::vector<int> u = a.sites;
  u.insert(u.end(), b.sites.begin(), b.sites.end());
  std::sort(u.begin(), u.end());
  u.erase(std::unique(u.begin(), u.end()), u.end());
  LocalSuperop<R> wa = u == a.sites ? a : widen(a, u, d);
  LocalSuperop<R> wb = u == b.sites ? b : widen(b, u, d);
  wa.S += wb.S;
  return wa;
}

template <class R>
Mat<R> choi_matrix(const Mat<R>& S, std::size_t D) {
  Mat<R> C(D * D, D * D);
  for (std::size_t i = 0; i < D; ++i)
    for (std::size_t j = 0; j < D; ++j)
      for (std::size_t k = 0; k < D; ++k)
        for (std::size_t l = 0; l < D; ++l) C(i * D + k, j * D + l) = S(k * D + l, i * D + j);
  return C;
}

template <class R>
Mat<R> superop_from_choi(const Mat<R>& C, std::size_t D) {
  Mat<R> S(D * D, D * D);
  for (std::size_t i = 0; i < D; ++i)
    for (std::size_t j = 0; j < D; ++j)
      for (std::size_t k = 0; k < D; ++k)
        for (std::size_t l = 0; l < D; ++l) S(k * D + l, i * D + j) = C(i * D + k, j * D + l);
  return S;
}

template <class R>
double max_col_sum(const Mat<R>& S) {
  double best = 0;
  for (std::size_t j = 0; j < S.cols(); ++j) {
    double s = 0;
    for (std::size_t i = 0; i < S.rows(); ++i) s += to_d(cabs(S(i, j)));
    best = std::max(best, s);
  }
  return best;
}

#define QBP_INST(R)                                                                                          \
  template Mat<R> vec<R>(const Mat<R>&);                                                                     \
  template Mat<R> unvec<R>(const Mat<R>&, std::size_t);                                                      \
  template Mat<R> vectorize_superop<R>(const std::vector<LRPair<R>>&, std::size_t);                          \
  template Mat<R> apply_pairs<R>(const std::vector<LRPair<R>>&, const Mat<R>&);                              \
  template Mat<R> apply_superop<R>(const Mat<R>&, const Mat<R>&);                                            \
  template Mat<R> lindblad_superop<R>(const Mat<R>&, const std::vector<Jump<R>>&);                           \
  template Mat<R> lindblad_apply<R>(const Mat<R>&, const std::vector<Jump<R>>&, const Mat<R>&);              \
  template Mat<R> superop_exp<R>(const Mat<R>&, const R&);                                                   \
  template Mat<R> expv<R>(const std::function<Mat<R>(const Mat<R>&)>&, double, const R&, const Mat<R>&);     \
  template Mat<R> apply_local<R>(const LocalSuperop<R>&, const Mat<R>&, int, int);                           \
  template LocalSuperop<R> widen<R>(const LocalSuperop<R>&, const std::vector<int>&, int);                   \
  template LocalSuperop<R> add<R>(const LocalSuperop<R>&, const LocalSuperop<R>&, int);                      \
  template Mat<R> choi_matrix<R>(const Mat<R>&, std::size_t);                                                \
  template Mat<R> superop_from_choi<R>(const Mat<R>&, std::size_t);                                          \
  template double max_col_sum<R>(const Mat<R>&);

QBP_INST(double)
QBP_INST(BigFloat)
#undef QBP_INST

}  // namespace qbp::num
