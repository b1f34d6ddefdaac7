#pragma once

#include <vector>

#include "qbp/gibbs/gibbs.hpp"

namespace qbp::bp {

using num::Mat;

// Phi with Phi^dagger e^{beta H} Phi = e^{beta H'}. CP, not TP.
template <class R>
struct BPOperator {
  Mat<R> phi;
  lat::Hamiltonian source, target;
  double beta = 0;
  int i0 = 0;                // update site
  int ell = -1;              // -1: full chain, otherwise support is i0[ell]
  std::vector<int> support;  // sites phi acts on
};

// H' = H + v with v = sum of terms touching i0: returns {H, H'} where H' is the input.
struct SiteUpdate {
  lat::Hamiltonian H, Hp;
  int i0 = 0;
};
SiteUpdate site_update(const lat::Hamiltonian& full, int i0);

// Sites on which H' - H acts nontrivially.
template <class R>
std::vector<int> update_support(const lat::Hamiltonian& H, const lat::Hamiltonian& Hp);

// Phi = e^{-beta H/2} e^{beta H'/2}
template <class R>
BPOperator<R> exact_bp(const lat::Hamiltonian& H, const lat::Hamiltonian& Hp, double beta, int i0);
template <class R>
Mat<R> exact_bp_dense(const Mat<R>& H, const Mat<R>& Hp, double beta);

// ||Phi^dagger e^{beta H} Phi - e^{beta H'}||_F / ||e^{beta H'}||_F
template <class R>
R conjugation_residual(const BPOperator<R>& op);

// tr~ over i0[ell]^c.
template <class R>
BPOperator<R> truncate_bp(const BPOperator<R>& phi, int ell);

template <class R>
struct BPError {
  int ell = 0;
  R raw;           // ||e^{bH'} - Phi~^dag e^{bH} Phi~||_1 / tr e^{bH'}
  R renormalized;  // same with Phi~^dag e^{bH} Phi~ rescaled to trace tr e^{bH'}
};
template <class R>
BPError<R> bp_truncation_error(const BPOperator<R>& exact, int ell);
template <class R>
BPError<R> bp_truncation_error(const lat::Hamiltonian& H, const lat::Hamiltonian& Hp, double beta, int i0, int ell);

// 1/2 ||rho_{i0[ell]^c}(H) - rho_{i0[ell]^c}(H')||_1; 0 when i0[ell] covers the chain.
template <class R>
R local_indistinguishability(const lat::Hamiltonian& H, const lat::Hamiltonian& Hp, double beta, int i0, int ell);

template <class R>
struct NormRatio {
  R ratio;       // tr e^{bH} / tr e^{bH'}
  R bound;       // e^{b ||v||}
  bool holds = false;
};
template <class R>
NormRatio<R> norm_ratio_audit(const lat::Hamiltonian& H, const lat::Hamiltonian& Hp, double beta);

}  // namespace qbp::bp
