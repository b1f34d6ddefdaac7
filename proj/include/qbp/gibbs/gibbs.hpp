#pragma once

#include <vector>

#include "qbp/lattice/lattice.hpp"

namespace qbp::gibbs {

using num::Cx;
using num::Mat;

// rho = e^{beta H} / Z  (note the sign: +beta H).
template <class R>
struct GibbsState {
  lat::Hamiltonian source;
  double beta = 0;
  Mat<R> rho;
  R logZ;
  num::EigenDecomposition<R> eig;  // of dense H
};

template <class R>
GibbsState<R> gibbs_state(const lat::Hamiltonian& H, double beta);
// Same, from a dense matrix.
template <class R>
GibbsState<R> gibbs_from_dense(const Mat<R>& H, double beta);
// Unnormalized e^{s H}.
template <class R>
Mat<R> gibbs_operator(const Mat<R>& H, double s);

template <class R>
Mat<R> reduced(const GibbsState<R>& st, const std::vector<int>& region);

// Von Neumann entropy in bits; eigenvalues below 10^{-(P-8)} contribute 0.
template <class R>
R entropy(const Mat<R>& rho);

template <class R>
struct CmiValue {
  R value;  // max(raw, 0)
  R raw;
};
// I(A:C|B) in bits for rho on n sites; sites outside A u B u C are traced out.
template <class R>
CmiValue<R> cmi(const Mat<R>& rho, const std::vector<int>& A, const std::vector<int>& B, const std::vector<int>& C,
                int n, int d);

// tr[rho OX OY] - tr[rho OX] tr[rho OY]; supports must be disjoint.
template <class R>
Cx<R> correlation(const Mat<R>& rho, const Mat<R>& OX, const std::vector<int>& X, const Mat<R>& OY,
                  const std::vector<int>& Y, int n, int d);

// e^{iHt} O e^{-iHt} with O and H on the full chain.
template <class R>
Mat<R> heisenberg_evolve(const Mat<R>& O, const num::EigenDecomposition<R>& eigH, double t);
template <class R>
Mat<R> heisenberg_evolve(const Mat<R>& O, const Mat<R>& H, double t);
// tr~ of O_i(t) onto i[r]: returned on the full chain.
template <class R>
Mat<R> truncated_heisenberg(const Mat<R>& O_full_t, int i, double r, int n, int d);

// A | B1 B2 | C on a chain, d(A, B2) = ceil(R/2).
struct Partition {
  std::vector<int> A, B, C, B1, B2, B1c, B2c;  // B1c, B2c: trimmed cores
  int R = 0;
  int lH = 1;
  int dAB2 = 0;
};
Partition make_partition(const lat::Hamiltonian& H, const std::vector<int>& A, const std::vector<int>& C);

}  // namespace qbp::gibbs
