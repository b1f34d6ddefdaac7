#include "qbp/bp/bp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qbp::bp {

using num::BigFloat;
using num::Cx;
using num::Real;

namespace {

void check_pair(const lat::Hamiltonian& H, const lat::Hamiltonian& Hp) {
  if (H.lattice.n != Hp.lattice.n || H.lattice.d != Hp.lattice.d)
    throw std::invalid_argument("bp: H and H' live on different lattices");
}

void check_site(int i0, int n) {
  if (i0 < 1 || i0 > n) throw std::out_of_range("bp: update site out of range");
}

}  // namespace

SiteUpdate site_update(const lat::Hamiltonian& full, int i0) {
  check_site(i0, full.lattice.n);
  std::vector<std::size_t> touching;
  for (std::size_t k = 0; k < full.terms.size(); ++k) {
    const auto& s = full.terms[k].sites;
    if (std::find(s.begin(), s.end(), i0) != s.end()) touching.push_back(k);
  }
  return {lat::without_terms(full, touching), full, i0};
}

template <class R>
std::vector<int> update_support(const lat::Hamiltonian& H, const lat::Hamiltonian& Hp) {
  check_pair(H, Hp);
  const int n = H.lattice.n, d = H.lattice.d;
  Mat<R> v = lat::assemble_dense<R>(Hp) - lat::assemble_dense<R>(H);
  const R scale = num::frobenius_norm(v);
  std::vector<int> out;
  if (scale == R(0)) return out;
  for (int s = 1; s <= n; ++s) {
    Mat<R> loc = num::normalized_partial_trace(v, {s}, n, d);
    if (num::frobenius_norm(Mat<R>(v - loc)) > num::tol3<R>(static_cast<int>(v.rows())) * scale) out.push_back(s);
  }
  return out;
}

template <class R>
Mat<R> exact_bp_dense(const Mat<R>& H, const Mat<R>& Hp, double beta) {
  if (H.rows() != Hp.rows()) throw std::invalid_argument("exact_bp: dimension mismatch");
  return num::matmul(num::mat_exp_hermitian(H, R(-beta / 2)), num::mat_exp_hermitian(Hp, R(beta / 2)));
}

template <class R>
BPOperator<R> exact_bp(const lat::Hamiltonian& H, const lat::Hamiltonian& Hp, double beta, int i0) {
  check_pair(H, Hp);
  check_site(i0, H.lattice.n);
  BPOperator<R> op;
  op.phi = exact_bp_dense(lat::assemble_dense<R>(H), lat::assemble_dense<R>(Hp), beta);
  op.source = H;
  op.target = Hp;
  op.beta = beta;
  op.i0 = i0;
  op.ell = -1;
  op.support = lat::interval(1, H.lattice.n);
  return op;
}

template <class R>
R conjugation_residual(const BPOperator<R>& op) {
  Mat<R> eH = num::mat_exp_hermitian(lat::assemble_dense<R>(op.source), R(op.beta));
  Mat<R> eHp = num::mat_exp_hermitian(lat::assemble_dense<R>(op.target), R(op.beta));
  Mat<R> lhs = num::matmul_adj(op.phi, num::matmul(eH, op.phi));
  return num::frobenius_norm(Mat<R>(lhs - eHp)) / num::frobenius_norm(eHp);
}

template <class R>
BPOperator<R> truncate_bp(const BPOperator<R>& phi, int ell) {
  if (ell < 0) throw std::invalid_argument("truncate_bp: ell must be >= 0");
  const int n = phi.source.lattice.n, d = phi.source.lattice.d;
  BPOperator<R> out = phi;
  out.ell = ell;
  out.support = lat::ball(phi.i0, ell, n);
  out.phi = num::normalized_partial_trace(phi.phi, num::complement(out.support, n), n, d);
  return out;
}

template <class R>
BPError<R> bp_truncation_error(const BPOperator<R>& exact, int ell) {
  auto G = gibbs::gibbs_from_dense<R>(lat::assemble_dense<R>(exact.source), exact.beta);
  auto Gp = gibbs::gibbs_from_dense<R>(lat::assemble_dense<R>(exact.target), exact.beta);
  BPOperator<R> t = truncate_bp(exact, ell);
  // Phi~^dag e^{bH} Phi~ / tr e^{bH'} = Phi~^dag rho Phi~ * Z / Z'
  using std::exp;
  Mat<R> M = num::hermitian_part(num::matmul_adj(t.phi, num::matmul(G.rho, t.phi)));
  M *= exp(G.logZ - Gp.logZ);
  BPError<R> e;
  e.ell = ell;
  e.raw = num::trace_norm(Mat<R>(Gp.rho - M));
  const R tr = M.trace().re;
  if (tr > R(0)) {
    Mat<R> Mn = M;
    Mn *= R(1) / tr;
    e.renormalized = num::trace_norm(Mat<R>(Gp.rho - Mn));
  } else {
    e.renormalized = R(2);
  }
  return e;
}

template <class R>
BPError<R> bp_truncation_error(const lat::Hamiltonian& H, const lat::Hamiltonian& Hp, double beta, int i0, int ell) {
  return bp_truncation_error(exact_bp<R>(H, Hp, beta, i0), ell);
}

template <class R>
R local_indistinguishability(const lat::Hamiltonian& H, const lat::Hamiltonian& Hp, double beta, int i0, int ell) {
  check_pair(H, Hp);
  const int n = H.lattice.n, d = H.lattice.d;
  check_site(i0, n);
  if (ell < 0) throw std::invalid_argument("local_indistinguishability: ell must be >= 0");
  std::vector<int> far = num::complement(lat::ball(i0, ell, n), n);
  if (far.empty()) return R(0);
  auto G = gibbs::gibbs_state<R>(H, beta);
  auto Gp = gibbs::gibbs_state<R>(Hp, beta);
  Mat<R> diff = num::partial_trace(G.rho, far, n, d) - num::partial_trace(Gp.rho, far, n, d);
  return num::trace_norm(num::hermitian_part(diff)) / R(2);
}

template <class R>
NormRatio<R> norm_ratio_audit(const lat::Hamiltonian& H, const lat::Hamiltonian& Hp, double beta) {
  check_pair(H, Hp);
  Mat<R> Hd = lat::assemble_dense<R>(H), Hpd = lat::assemble_dense<R>(Hp);
  auto G = gibbs::gibbs_from_dense<R>(Hd, beta);
  auto Gp = gibbs::gibbs_from_dense<R>(Hpd, beta);
  using std::exp;
  NormRatio<R> out;
  out.ratio = exp(G.logZ - Gp.logZ);
  out.bound = exp(R(beta) * num::op_norm(Mat<R>(Hpd - Hd)));
  out.holds = out.ratio <= out.bound * (R(1) + num::tol3<R>(static_cast<int>(Hd.rows())));
  return out;
}

#define QBP_INST(R)                                                                                           \
  template std::vector<int> update_support<R>(const lat::Hamiltonian&, const lat::Hamiltonian&);              \
  template Mat<R> exact_bp_dense<R>(const Mat<R>&, const Mat<R>&, double);                                    \
  template BPOperator<R> exact_bp<R>(const lat::Hamiltonian&, const lat::Hamiltonian&, double, int);          \
  template R conjugation_residual<R>(const BPOperator<R>&);                                                   \
  template BPOperator<R> truncate_bp<R>(const BPOperator<R>&, int);                                           \
  template BPError<R> bp_truncation_error<R>(const BPOperator<R>&, int);                                      \
  template BPError<R> bp_truncation_error<R>(const lat::Hamiltonian&, const lat::Hamiltonian&, double, int,   \
                                             int);                                                            \
  template R local_indistinguishability<R>(const lat::Hamiltonian&, const lat::Hamiltonian&, double, int, int); \
  template NormRatio<R> norm_ratio_audit<R>(const lat::Hamiltonian&, const lat::Hamiltonian&, double);

QBP_INST(double)
QBP_INST(BigFloat)
#undef QBP_INST

}  // namespace qbp::bp
