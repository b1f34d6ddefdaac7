#pragma once

#include <gmpxx.h>

#include <stdexcept>
#include <string>
#include <vector>

#include "qbp/numkit/linalg.hpp"
#include "qbp/numkit/random.hpp"

namespace qbp::cluster {

using num::Mat;
using num::MatD;
using Rational = mpq_class;

// Ordered composition m_1 + ... + m_q = m, all parts >= 1.
struct Composition {
  std::vector<int> parts;
  int m() const;
  int q() const { return static_cast<int>(parts.size()); }
};

class BudgetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Throws invalid_argument on an empty list or a part < 1.
void validate_parts(const std::vector<int>& parts);

// All ordered compositions of m, grouped by q, each group lexicographic.
std::vector<Composition> compositions(int m);

// Coefficients with d_{L^c}^q multiplied out and sign convention e^{-beta H}.
// Closed form: (-1)^{m+q-1} / (q q!) * m! / (m_1! ... m_q!).
Rational coeff_closed(const std::vector<int>& parts);

// Sum over iota in Delta_m of prod_k (1 - (k+1) delta_{i_k, k+1}), bucketed by the
// nonzero occupation numbers (N(iota,1), ..., N(iota,m))^x.  m <= 9.
std::vector<std::pair<std::vector<int>, mpz_class>> occupation_sums(int m);

// Combinatorial form: (-1)^m / q! times the average of the occupation sums over the
// distinct rearrangements of the parts.  m <= 9, else BudgetError.
Rational coeff_combinatorial(const std::vector<int>& parts);

struct TableRow {
  std::vector<std::vector<int>> arrangements;  // distinct orderings of one multiset
  Rational closed;
  Rational combinatorial;
};
// One row per multiset, ordered by q then by the sorted parts.
std::vector<TableRow> coefficient_table(int m);

// sum over compositions of m of q! C(parts).  Equals -1 at m = 1 and 0 for m >= 2
// (log e^{-beta h} for scalar h).
Rational scalar_collapse(int m, bool combinatorial);

// W_O / W_S check at m = 3 on H^L (x) H^{L^c}_1 (x) H^{L^c}_2 (x) H^{L^c}_3.
struct WFixtureReport {
  MatD lhs;               // tr_{L^c_{1:3}}(W_S W_O H~(0) H~(1) H~(2))
  MatD rhs;               // d^2 tr(H^3) - 3/2 d {tr(H^2) tr(H) + tr(H) tr(H^2)} + 2 tr(H)^3
  MatD raw;               // same trace without W_S W_O
  double residual = 0;    // max |lhs - rhs|
  double formula_residual = 0;  // max |(-1)^3 lhs / d^3 - sum_C C P_q prod tr(H^{m_i})|
  double raw_gap = 0;     // max |raw - rhs|, nonzero when L and L^c do not decouple
  std::size_t ext_dim = 0;
};
// H is a dense operator on n qubits, L a single site.  Extended dimension <= 128.
WFixtureReport w_ops_m3_fixture(const MatD& H, int n, const std::vector<int>& L);

// Random open chain on n qubits: bonds and fields drawn with random_hermitian, each scaled
// to unit operator norm.  Draw order: bonds left to right, then fields.
MatD random_chain_hamiltonian(int n, num::Rng& rng);

// m-th beta-derivative at beta = 0 of log[tr_{L^c}(e^{-beta H}) / d_{L^c}], m = 1..m_max,
// assembled from the closed-form coefficients and P_q (sum over the q! factor orderings).
template <class R>
std::vector<Mat<R>> log_derivatives(const Mat<R>& H, int n, const std::vector<int>& L, int m_max);

// Taylor terms beta^m / m! * D_m for m = 1..m_max.
template <class R>
std::vector<Mat<R>> taylor_log_reduced(const Mat<R>& H, int n, const std::vector<int>& L, const R& beta,
                                       int m_max);

class FitConditionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DerivativeAudit {
  std::vector<double> residual;  // max |D_m - m! a_m| per m
  std::vector<double> noise;     // roundoff estimate of the fitted m! a_m
  double h = 0;
  int nodes = 0;
  int digits = 0;
};

// Fits f(beta) = log[tr_{L^c}(e^{-beta H}) / d_{L^c}] at beta = +-h, ..., +-K h by the
// polynomial sum_{p=1}^{2K} a_p beta^p (f(0) = 0) and compares m! a_m with D_m.
// Throws FitConditionError when the roundoff estimate exceeds tol.
template <class R>
DerivativeAudit derivative_identity_audit(const Mat<R>& H, int n, const std::vector<int>& L, int m_max,
                                          double h = 1e-2, int K = 4, double tol = 1e-7);

}  // namespace qbp::cluster
