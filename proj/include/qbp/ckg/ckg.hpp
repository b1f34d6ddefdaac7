#pragma once

#include <stdexcept>
#include <vector>

#include "qbp/gibbs/gibbs.hpp"
#include "qbp/numkit/random.hpp"
#include "qbp/numkit/superop.hpp"

// CKG Lindbladian with fixed point e^{+beta H}/Z. Built from Hs = -H, for which
// the generator (filters centred at omega = -1/beta) fixes e^{-beta Hs}.
namespace qbp::ckg {

using num::cd;
using num::MatD;
using Superop = num::LocalSuperop<double>;

struct QuadConfig {
  int K = 32;                  // 2K+1 Gauss-Legendre omega nodes
  double omega_pad = 6;        // omega interval padding, units of 1/beta
  double t_trunc = 6;          // |t| cut for b1 (outer integral)
  int t_nodes = 2401;
  double s_trunc = 4;          // |s| cut inside b1
  int s_nodes = 2000;
  double tprime_trunc = 6;     // |t'| cut for b2 in truncated coherent terms
  int tprime_nodes = 241;
  double jump_floor = 1e-20;   // omega nodes with rate*||A(w)||^2 below this are dropped
  double ladder_tol = 1e-8;    // coherent-term refinement agreement
};

class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(const std::string& what, double coarse, double fine)
      : std::runtime_error(what), coarse_value(coarse), fine_value(fine) {}
  double coarse_value, fine_value;
};

// ---- kernels --------------------------------------------------------------

double jump_prefactor(double beta);             // beta^{1/2} / (2 pi)^{1/4}
double gamma_weight(double beta, double omega);  // exp(-(beta omega + 1)^2 / 2)
double b1(double t, const QuadConfig& q);        // trapezoid over s
cd b2(double t);
// Fourier transforms  f^(x) = int f(t) e^{ixt} dt.
cd b1_hat(double x, const QuadConfig& q);  // quadrature over the tabulated b1
cd b1_hat_closed(double x);
cd b2_hat(double x);                       // closed Gaussian form
double b1_abs_integral(const QuadConfig& q);
double b2_abs_integral();
double coherent_norm_bound();  // e^{1/8} / (4 sqrt 2)

// ---- spectral data ------------------------------------------------------------

struct Spectrum {
  std::vector<double> E;  // eigenvalues of Hs = -H, ascending
  MatD U;
  double beta = 0;
  int n = 0, d = 2;
};
Spectrum spectrum(const MatD& H, double beta, int n, int d = 2);

struct OmegaRule {
  std::vector<double> nodes, weights;
};
OmegaRule omega_rule(const Spectrum& sp, const QuadConfig& q);

// A(omega) on the full space; A is a full-space Hermitian operator.
MatD jump_operator(const Spectrum& sp, const MatD& A, double omega);
MatD jump_operator(const MatD& H, const MatD& A, double omega, double beta);
// Time-domain oracle: trapezoid over |t| <= t_cut of A(H,t) e^{-i omega t} e^{-t^2/beta^2}.
MatD jump_operator_quadrature(const MatD& H, const MatD& A, double omega, double beta, double t_cut, int nodes);

// B for site operator A (full space). Throws QuadratureError when the b1
// transform disagrees with its refined ladder value beyond q.ladder_tol.
MatD coherent_term(const Spectrum& sp, const MatD& A, const QuadConfig& q);
MatD coherent_term(const MatD& H, const MatD& A, double beta, const QuadConfig& q);
// Detailed-balance closed form (i/2) tanh(beta nu/4) o R with R = int gamma A^dag A.
MatD coherent_term_tanh(const Spectrum& sp, const MatD& A);

// ---- generator ------------------------------------------------------------------

// One Lindblad block acting on `sites` (operators are local to those sites).
struct Block {
  int site = 0;
  int a = 0;  // 1,2,3 = X,Y,Z
  int ell = -1;
  std::vector<int> sites;
  MatD B;
  std::vector<num::Jump<double>> jumps;
};

struct Generator {
  lat::Hamiltonian H;
  double beta = 0;
  QuadConfig quad;
  Spectrum sp;
  std::vector<Block> blocks;  // full-support blocks, ordered (i, a)
  int n = 0, d = 2;
};

Generator build_ckg(const lat::Hamiltonian& H, double beta, const QuadConfig& q = {});
Generator build_ckg_dense(const MatD& H, int n, double beta, const QuadConfig& q = {});

Superop block_superop(const Block& b);
Superop site_superop(const Generator& G, int i);  // sum over a
MatD full_superop(const Generator& G);
MatD apply_block(const Block& b, const MatD& rho, int n, int d);
MatD apply_generator(const Generator& G, const MatD& rho);

// ||L_{i,a}(rho_beta)||_1 for every block.
std::vector<double> stationarity(const Generator& G);

MatD evolve(const Generator& G, const MatD& rho, double t);
MatD evolve_superop(const MatD& S, const MatD& rho, double t);
// sqrt(max row sum * max column sum) of |S|, an upper bound on ||S||_2.
double superop_norm_bound(const MatD& S);

struct GapResult {
  double gap = 0;
  int iterations = 0;
  double residual = 0;
};
GapResult spectral_gap(const Generator& G, int max_iter = 200000, double tol = 1e-10);
// Oracle: eigenvalues of the KMS-symmetrized superoperator (Hermitian under detailed balance).
std::vector<double> kms_spectrum(const Generator& G);

// ---- norms ------------------------------------------------------------------------

// max over samples of ||S(X)||_1 / ||X||_1 with random Ginibre X: a lower bound on ||S||_{1->1}.
double sampled_one_to_one(const MatD& S, std::size_t D, int samples, num::Rng& rng);
// ||Choi(S)||_1: an upper bound on ||S||_{1->1}.
double choi_one_to_one_bound(const MatD& S, std::size_t D);

// ---- chi^2 ------------------------------------------------------------------------

double chi2(const MatD& rho_p, const MatD& rho);  // tr[(p - r) r^{-1/2} (p - r) r^{-1/2}]

struct Chi2Audit {
  double chi2 = 0;
  double bound = 0;       // 4 e^{3 beta g0}
  double g0 = 0;
  double beta_max = 0;    // 1/(4 g k)
  bool applicable = false;
  bool holds = false;
};
// H' = H + v; v given as the extra terms.
Chi2Audit chi2_bound_audit(const lat::Hamiltonian& H, const lat::Hamiltonian& v, double beta);

struct MixingPoint {
  double t = 0;
  double distance = 0;  // ||e^{L' t} rho_beta - rho'_beta||_1
  double bound = 0;     // 4 e^{3 beta g0 - t/4}
};
std::vector<MixingPoint> mixing_curve(const lat::Hamiltonian& H, const lat::Hamiltonian& v, double beta,
                                      const std::vector<double>& times, const QuadConfig& q = {});

// ---- locality-truncated blocks ----------------------------------------------------

// L~_{i[ell],a}: every Heisenberg operator replaced by its tr~ onto i[ell].
Block truncated_block(const Generator& G, int i, int a, int ell);
Superop truncated_generator(const Generator& G, int i, int ell);  // sum over a
// delta L_{i[l]} for l = 0..ell_max (delta at 0 is L~_{i[0]}).
std::vector<Superop> delta_blocks(const Generator& G, int i, int ell_max);
// Largest ell with i[ell] inside X (n-1 when X is the chain); -1 if i is not in X.
int inner_radius(int i, const std::vector<int>& X, int n);
// sum over i in centers of L~_{i[l_i]} with l_i = inner_radius(i, X), on X.
Superop subset_liouvillian(const Generator& G, const std::vector<int>& X, const std::vector<int>& centers);
Superop subset_liouvillian(const Generator& G, const std::vector<int>& X);

}  // namespace qbp::ckg
