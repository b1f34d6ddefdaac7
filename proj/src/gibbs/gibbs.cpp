#include "qbp/gibbs/gibbs.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qbp::gibbs {

using num::BigFloat;
using num::Real;

template <class R>
GibbsState<R> gibbs_from_dense(const Mat<R>& H, double beta) {
  if (!(beta >= 0) || !std::isfinite(beta)) throw std::invalid_argument("gibbs_state: beta must be finite and >= 0");
  GibbsState<R> st;
  st.beta = beta;
  st.eig = num::eig_hermitian(H);
  const auto& lam = st.eig.values;
  if constexpr (!Real<R>::is_big) {
    double m = std::max(std::fabs(lam.front()), std::fabs(lam.back()));
    if (beta * m > 700)
      throw std::overflow_error("gibbs_state: beta*||H|| exceeds 700 in double mode; rerun with big-float precision");
  }
  const R b(beta);
  const R top = lam.back();
  std::vector<R> w(lam.size());
  R Zs(0);
  for (std::size_t k = 0; k < lam.size(); ++k) {
    using std::exp;
    w[k] = exp(b * (lam[k] - top));
    Zs += w[k];
  }
  using std::log;
  st.logZ = b * top + log(Zs);
  st.rho = num::spectral_apply<R>(st.eig, [&](const R& x) {
    using std::exp;
    return Cx<R>(exp(b * (x - top)) / Zs);
  });
  st.rho = num::hermitian_part(st.rho);
  return st;
}

template <class R>
GibbsState<R> gibbs_state(const lat::Hamiltonian& H, double beta) {
  GibbsState<R> st = gibbs_from_dense<R>(lat::assemble_dense<R>(H), beta);
  st.source = H;
  return st;
}

template <class R>
Mat<R> gibbs_operator(const Mat<R>& H, double s) {
  return num::mat_exp_hermitian(H, R(s));
}

template <class R>
Mat<R> reduced(const GibbsState<R>& st, const std::vector<int>& region) {
  return num::partial_trace(st.rho, region, st.source.lattice.n, st.source.lattice.d);
}

template <class R>
R entropy(const Mat<R>& rho) {
  auto e = num::eig_hermitian(num::hermitian_part(rho));
  const R cut = num::pow10neg<R>(Real<R>::digits() - 8);
  R s(0);
  for (const auto& p : e.values) {
    if (p < cut) continue;
    using std::log2;
    s -= p * log2(p);
  }
  return s;
}

namespace {

template <class R>
R region_entropy(const Mat<R>& rho, std::vector<int> region, int n, int d) {
  std::sort(region.begin(), region.end());
  if (region.empty()) return R(0);
  return entropy(num::partial_trace(rho, region, n, d));
}

}  // namespace

template <class R>
CmiValue<R> cmi(const Mat<R>& rho, const std::vector<int>& A, const std::vector<int>& B, const std::vector<int>& C,
                int n, int d) {
  auto AB = lat::set_union(A, B), BC = lat::set_union(B, C), ABC = lat::set_union(AB, C);
  if (AB.size() != A.size() + B.size() || ABC.size() != AB.size() + C.size())
    throw std::invalid_argument("cmi: regions must be disjoint");
  CmiValue<R> out;
  out.raw = region_entropy(rho, AB, n, d) + region_entropy(rho, BC, n, d) - region_entropy(rho, ABC, n, d) -
            region_entropy(rho, B, n, d);
  out.value = out.raw < R(0) ? R(0) : out.raw;
  return out;
}

template <class R>
Cx<R> correlation(const Mat<R>& rho, const Mat<R>& OX, const std::vector<int>& X, const Mat<R>& OY,
                  const std::vector<int>& Y, int n, int d) {
  for (int x : X)
    if (std::find(Y.begin(), Y.end(), x) != Y.end()) throw std::invalid_argument("correlation: supports overlap");
  Mat<R> FX = num::embed_on_sites(OX, X, n, d), FY = num::embed_on_sites(OY, Y, n, d);
  Cx<R> xy = num::trace_product(rho, num::matmul(FX, FY));
  return xy - num::trace_product(rho, FX) * num::trace_product(rho, FY);
}

template <class R>
Mat<R> heisenberg_evolve(const Mat<R>& O, const num::EigenDecomposition<R>& eigH, double t) {
  const auto& U = eigH.vectors;
  Mat<R> Ot = num::matmul_adj(U, num::matmul(O, U));
  const std::size_t D = Ot.rows();
  const R tt(t);
  for (std::size_t j = 0; j < D; ++j)
    for (std::size_t k = 0; k < D; ++k) Ot(j, k) = Ot(j, k) * num::expi(R((eigH.values[j] - eigH.values[k]) * tt));
  return num::matmul(num::matmul(U, Ot), U.adjoint());
}

template <class R>
Mat<R> heisenberg_evolve(const Mat<R>& O, const Mat<R>& H, double t) {
  return heisenberg_evolve(O, num::eig_hermitian(H), t);
}

template <class R>
Mat<R> truncated_heisenberg(const Mat<R>& O_full_t, int i, double r, int n, int d) {
  std::vector<int> keep = lat::ball(i, r, n);
  return num::normalized_partial_trace(O_full_t, num::complement(keep, n), n, d);
}

Partition make_partition(const lat::Hamiltonian& H, const std::vector<int>& A, const std::vector<int>& C) {
  const int n = H.lattice.n;
  if (A.empty() || C.empty()) throw std::invalid_argument("partition: A and C must be nonempty");
  Partition p;
  p.A = A;
  p.C = C;
  std::sort(p.A.begin(), p.A.end());
  std::sort(p.C.begin(), p.C.end());
  p.B = num::complement(lat::set_union(p.A, p.C), n);
  if (lat::set_union(p.A, p.C).size() != p.A.size() + p.C.size())
    throw std::invalid_argument("partition: A and C overlap");
  p.lH = std::max(1, lat::interaction_length(H));
  p.R = lat::distance(p.A, p.C);
  if (!(p.R > 2 * p.lH))
    throw std::invalid_argument("partition: d(A,C) = " + std::to_string(p.R) + " must exceed 2*l_H = " +
                                std::to_string(2 * p.lH));
  p.dAB2 = (p.R + 1) / 2;
  for (int b : p.B) (lat::distance(p.A, {b}) >= p.dAB2 ? p.B2 : p.B1).push_back(b);
  if (p.B1.empty() || p.B2.empty()) throw std::invalid_argument("partition: B1 or B2 is empty");
  for (int b : p.B1)
    if (lat::distance({b}, p.B2) > p.lH) p.B1c.push_back(b);
  for (int b : p.B2)
    if (lat::distance({b}, p.B1) > p.lH) p.B2c.push_back(b);
  return p;
}

#define QBP_INST(R)                                                                                              \
  template GibbsState<R> gibbs_state<R>(const lat::Hamiltonian&, double);                                        \
  template GibbsState<R> gibbs_from_dense<R>(const Mat<R>&, double);                                             \
  template Mat<R> gibbs_operator<R>(const Mat<R>&, double);                                                      \
  template Mat<R> reduced<R>(const GibbsState<R>&, const std::vector<int>&);                                     \
  template R entropy<R>(const Mat<R>&);                                                                          \
  template CmiValue<R> cmi<R>(const Mat<R>&, const std::vector<int>&, const std::vector<int>&,                   \
                              const std::vector<int>&, int, int);                                                \
  template Cx<R> correlation<R>(const Mat<R>&, const Mat<R>&, const std::vector<int>&, const Mat<R>&,            \
                                const std::vector<int>&, int, int);                                              \
  template Mat<R> heisenberg_evolve<R>(const Mat<R>&, const num::EigenDecomposition<R>&, double);                \
  template Mat<R> heisenberg_evolve<R>(const Mat<R>&, const Mat<R>&, double);                                    \
  template Mat<R> truncated_heisenberg<R>(const Mat<R>&, int, double, int, int);

QBP_INST(double)
QBP_INST(BigFloat)
#undef QBP_INST

}  // namespace qbp::gibbs
