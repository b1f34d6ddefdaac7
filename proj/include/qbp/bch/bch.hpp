#pragma once

#include <gmpxx.h>

#include <stdexcept>
#include <string>
#include <vector>

#include "qbp/lattice/lattice.hpp"

namespace qbp::bch {

using num::Mat;
using num::MatD;
using Rational = mpq_class;

// B_0..B_{m_max} from sum_{k<=m} C(m+1,k) B_k = 0, so B_1 = -1/2.  plus_half flips B_1 only.
std::vector<Rational> bernoulli_table(int m_max, bool plus_half = false);
// (-1)^{j+1} 4 sqrt(pi j) (j / (pi e))^{2j}
double bernoulli_asymptotic(int j);

// ad_A(X) = [X, A] = X A - A X.  With this orientation the first-order expansion
// log(e^{ea B^dag} e^{A} e^{ea B}) uses the B_1 = -1/2 table.
template <class R>
Mat<R> ad(const Mat<R>& A, const Mat<R>& X);

// H = H_{<=n-1} (x) 1 + 1 (x) h_n + h_{n-1,n}, with the bond split as sum_k P_k (x) Q_k
// over the Pauli basis on site n.  Throws if any other term touches site n.
template <class R>
struct BoundarySplit {
  int n = 0;
  Mat<R> Hle;                  // H_{<=n-1} on sites 1..n-1
  Mat<R> hn;                   // field on site n
  std::vector<Mat<R>> P;       // on sites 1..n-1
  std::vector<Mat<R>> Q;       // Paulis on site n
};
template <class R>
BoundarySplit<R> split_boundary(const lat::Hamiltonian& H);

// Duhamel variable of the x-integral: Beta integrates e^{-x beta H_0} h e^{x beta H_0}
// (first-order exact); Unit integrates e^{-x H_0} h e^{x H_0}.
enum class Duhamel { Beta, Unit };

template <class R>
struct BoundaryTerm {
  Mat<R> matrix;  // dh~_n on sites 1..n-1
  R G;            // tr_n(e^{beta h_n})
};

// dh~_n = (1 / 2G) int_0^1 tr_n(e^{beta h_n} e^{-x s H_0} h_{n-1,n} e^{x s H_0}) dx, s = beta or 1.
// Evaluated in the eigenbasis of H_0 = H_{<=n-1} (x) 1 + 1 (x) h_n: the site-n factor of each
// P_k (x) Q_k reduces to tr(e^{beta h_n} Q_k), and the remaining x-integral is (e^nu - 1)/nu
// entrywise with nu = s (E_k - E_j).
template <class R>
BoundaryTerm<R> boundary_effective_term(const lat::Hamiltonian& H, const R& beta, Duhamel mode = Duhamel::Beta);

// Same quantity by Gauss-Legendre quadrature on [0, 1] with full e^{x s H_0} on n sites.
template <class R>
BoundaryTerm<R> boundary_effective_term_quadrature(const lat::Hamiltonian& H, const R& beta, int nodes,
                                                   Duhamel mode = Duhamel::Beta);

// Gauss-Legendre nodes and weights on [0, 1] at the precision of R.
template <class R>
void gauss_legendre_unit(int N, std::vector<R>& x, std::vector<R>& w);

class PrecisionError : public std::runtime_error {
 public:
  PrecisionError(const std::string& what, int required) : std::runtime_error(what), required_digits(required) {}
  int required_digits;
};

// 15 + ceil(m_max log10(2 ||H_0|| + 1))
int required_digits(double h0_norm, int m_max);
double h0_norm(const lat::Hamiltonian& H);

struct QSequence {
  int n = 0;
  double beta = 0;
  int digits = 0;
  int p_min = 0;
  double h0_norm = 0;
  Duhamel mode = Duhamel::Beta;
  std::vector<int> m;               // 0..m_max
  std::vector<std::string> q;       // decimal at full precision; "0" for odd m >= 3
  std::vector<double> log10q;       // -inf where Q = 0
  double seconds = 0;
};

struct QOptions {
  Duhamel mode = Duhamel::Beta;
  int min_digits = -1;  // refusal threshold; -1 uses required_digits
  bool serial = false;  // serial reference for the ad recurrence
};

// Q(m) = || beta (beta^m B_m / m!) [ad^m_{H<=n-1}(dh~_n) + h.c.] ||_F at `digits` decimal digits,
// with X_m = X_{m-1} H - H X_{m-1} applied through the sparse structure of H_{<=n-1}.
QSequence q_sequence(const lat::Hamiltonian& H, double beta, int m_max, int digits, const QOptions& opt = {});

// Even m >= 2 only.
struct DivergenceShape {
  int argmin = -1;
  bool non_monotone = false;
  bool growing_tail = false;  // strictly increasing from argmin to the last even m
  int tail_run = 0;           // consecutive increases ending at the last even m
};
DivergenceShape analyze_shape(const QSequence& s);

struct PrecisionLadder {
  std::vector<int> m;
  std::vector<double> agree_digits;  // -log10 |Q_P - Q_2P| / |Q_2P|, capped at 2P
  double min_agree = 0;
  bool holds = false;                // min_agree >= P / 2
};
PrecisionLadder precision_ladder(const QSequence& lo, const QSequence& hi);

struct FirstOrderAudit {
  std::vector<double> a;
  std::vector<double> residual;
  double slope = 0;  // log-log over a > 0
  double C = 0;      // max residual / a^2 over a > 0
};

// || log(e^{beta a B^dag} e^{beta A} e^{beta a B}) - beta A - beta a S_M ||_F with
// S_M = sum_{m=0}^{M} (beta^m B_m / m!) [ad_A^m(B) + h.c.].
template <class R>
FirstOrderAudit bch_first_order_audit(const Mat<R>& A, const Mat<R>& B, double beta, const std::vector<double>& a,
                                      int M = 30, bool plus_half = false);

// || tr_n(e^{beta H_a}) - G e^{beta a dh~^dag} e^{beta H_{<=n-1}} e^{beta a dh~} ||_F with
// H_a = H_0 + a h_{n-1,n}.  quad_nodes > 0 takes dh~ from the quadrature route instead.
template <class R>
FirstOrderAudit reduced_gibbs_first_order_audit(const lat::Hamiltonian& H, double beta, const std::vector<double>& a,
                                                Duhamel mode = Duhamel::Beta, int quad_nodes = 0);

}  // namespace qbp::bch
