#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "qbp/cluster/cluster.hpp"

using namespace qbp;
using cluster::Rational;
using num::MatD;

namespace {

// Reference coefficients (d^q multiplied out), keyed by the sorted parts.
const std::map<std::vector<int>, Rational>& reference_table() {
  static const std::map<std::vector<int>, Rational> t = {
      {{3}, Rational(-1)},          {{1, 2}, Rational(3, 4)},      {{1, 1, 1}, Rational(-1, 3)},
      {{4}, Rational(1)},           {{1, 3}, Rational(-1)},        {{2, 2}, Rational(-3, 2)},
      {{1, 1, 2}, Rational(2, 3)},  {{1, 1, 1, 1}, Rational(-1, 4)}, {{5}, Rational(-1)},
      {{1, 4}, Rational(5, 4)},     {{2, 3}, Rational(5, 2)},      {{1, 1, 3}, Rational(-10, 9)},
      {{1, 2, 2}, Rational(-5, 3)}, {{1, 1, 1, 2}, Rational(5, 8)}, {{1, 1, 1, 1, 1}, Rational(-1, 5)},
  };
  return t;
}

std::vector<int> sorted(std::vector<int> v) {
  std::sort(v.begin(), v.end());
  return v;
}

double max_abs(const MatD& M) {
  double v = 0;
  for (const auto& z : M.storage()) v = std::max(v, num::cabs(z));
  return v;
}

}  // namespace

TEST(Compositions, CountsAndOrder) {
  for (int m = 1; m <= 8; ++m) EXPECT_EQ(cluster::compositions(m).size(), std::size_t(1) << (m - 1));
  auto c = cluster::compositions(3);
  EXPECT_EQ(c[0].parts, (std::vector<int>{3}));
  EXPECT_EQ(c[1].parts, (std::vector<int>{1, 2}));
  EXPECT_EQ(c[2].parts, (std::vector<int>{2, 1}));
  EXPECT_EQ(c[3].parts, (std::vector<int>{1, 1, 1}));
  EXPECT_THROW(cluster::validate_parts({}), std::invalid_argument);
  EXPECT_THROW(cluster::validate_parts({2, 0}), std::invalid_argument);
}

TEST(Coefficients, ReferenceTablesBothRoutes) {
  int checked = 0;
  for (int m = 3; m <= 5; ++m)
    for (const auto& c : cluster::compositions(m)) {
      const Rational& want = reference_table().at(sorted(c.parts));
      EXPECT_EQ(cluster::coeff_closed(c.parts), want) << m;
      EXPECT_EQ(cluster::coeff_combinatorial(c.parts), want) << m;
      ++checked;
    }
  EXPECT_EQ(checked, 4 + 8 + 16);
}

TEST(Coefficients, TableRowsGroupArrangements) {
  auto rows = cluster::coefficient_table(4);
  ASSERT_EQ(rows.size(), 5u);
  EXPECT_EQ(rows[0].arrangements, (std::vector<std::vector<int>>{{4}}));
  EXPECT_EQ(rows[1].arrangements, (std::vector<std::vector<int>>{{1, 3}, {3, 1}}));
  EXPECT_EQ(rows[3].arrangements.size(), 3u);
  for (const auto& r : rows) EXPECT_EQ(r.closed, r.combinatorial);
}

TEST(Coefficients, CombinatorialEqualsClosedUpToSeven) {
  for (int m = 1; m <= 7; ++m)
    for (const auto& c : cluster::compositions(m))
      EXPECT_EQ(cluster::coeff_combinatorial(c.parts), cluster::coeff_closed(c.parts)) << m;
}

TEST(Coefficients, PermutationInvariance) {
  for (std::vector<int> p : {std::vector<int>{1, 2, 3}, {1, 1, 2, 3}, {2, 2, 3}}) {
    const Rational a = cluster::coeff_closed(p), b = cluster::coeff_combinatorial(p);
    std::sort(p.begin(), p.end());
    do {
      EXPECT_EQ(cluster::coeff_closed(p), a);
      EXPECT_EQ(cluster::coeff_combinatorial(p), b);
    } while (std::next_permutation(p.begin(), p.end()));
  }
}

TEST(Coefficients, OccupationSums) {
  // c_(1,2,3) = (-1)(-2) = 2 is the only iota with occupation (1,1,1) at m = 3
  std::map<std::vector<int>, long> m3;
  for (const auto& [k, v] : cluster::occupation_sums(3)) m3[k] = v.get_si();
  EXPECT_EQ(m3.at({1, 1, 1}), 2);
  EXPECT_EQ(m3.at({3}), 1);
  // sum over Delta_m of c_iota = prod_{k=1}^{m-1} (k - k) = 0
  for (int m = 2; m <= 8; ++m) {
    mpz_class s = 0;
    for (const auto& [k, v] : cluster::occupation_sums(m)) s += v;
    EXPECT_EQ(s, 0) << m;
  }
  EXPECT_THROW(cluster::coeff_combinatorial({5, 5}), cluster::BudgetError);
  EXPECT_THROW(cluster::occupation_sums(10), cluster::BudgetError);
}

TEST(Coefficients, ScalarCollapse) {
  EXPECT_EQ(cluster::scalar_collapse(1, false), Rational(-1));
  EXPECT_EQ(cluster::scalar_collapse(1, true), Rational(-1));
  for (int m = 2; m <= 7; ++m) {
    EXPECT_EQ(cluster::scalar_collapse(m, false), Rational(0)) << m;
    EXPECT_EQ(cluster::scalar_collapse(m, true), Rational(0)) << m;
  }
}

TEST(WFixture, TrivialHamiltonians) {
  auto id = cluster::w_ops_m3_fixture(MatD::identity(8), 3, {2});
  EXPECT_EQ(id.ext_dim, 128u);
  EXPECT_LT(max_abs(id.lhs), 1e-12);
  EXPECT_LT(id.residual, 1e-12);
  // H on L only: every copy factor is the identity on L^c
  num::Rng rng(4);
  MatD h = num::random_hermitian(2, rng);
  auto loc = cluster::w_ops_m3_fixture(num::embed_on_sites(h, {1}, 3, 2), 3, {1});
  EXPECT_LT(loc.residual, 1e-10);
  EXPECT_LT(max_abs(loc.lhs), 1e-10);
  EXPECT_LT(loc.raw_gap, 1e-10);
  EXPECT_THROW(cluster::w_ops_m3_fixture(MatD::identity(16), 4, {1}), cluster::BudgetError);
}

TEST(WFixture, RandomHamiltonians) {
  num::Rng rng(11);
  for (int k = 0; k < 20; ++k) {
    const int n = (k % 2 == 0) ? 3 : 2;
    MatD H = num::random_hermitian(std::size_t(1) << n, rng);
    auto r = cluster::w_ops_m3_fixture(H, n, {1 + k % n});
    EXPECT_LT(r.residual, 1e-10) << k;
    EXPECT_LT(r.formula_residual, 1e-10) << k;
    // without W_S W_O the identity fails for generic H
    EXPECT_GT(r.raw_gap, 1e-3) << k;
  }
}

TEST(LogDerivatives, FirstOrder) {
  num::Rng rng(2);
  MatD H = cluster::random_chain_hamiltonian(3, rng);
  auto D = cluster::log_derivatives(H, 3, {2}, 1);
  MatD want = num::partial_trace(H, {2}, 3, 2) * (-0.25);
  EXPECT_LT(num::max_abs_diff(D[0], want), 1e-14);
}

TEST(LogDerivatives, CommutingMatchesCumulants) {
  MatD H(8, 8);
  std::vector<double> e(8);
  for (int i = 0; i < 8; ++i) H(i, i) = e[i] = num::Rng(100 + i).normal();
  auto D = cluster::log_derivatives(H, 3, {1}, 3);
  for (int l = 0; l < 2; ++l) {
    // energies of the four L^c states for L = |l>
    double m1 = 0, m2 = 0, m3 = 0;
    for (int c = 0; c < 4; ++c) {
      const double x = -e[l * 4 + c];
      m1 += x / 4, m2 += x * x / 4, m3 += x * x * x / 4;
    }
    EXPECT_NEAR(D[0](l, l).re, m1, 1e-13);
    EXPECT_NEAR(D[1](l, l).re, m2 - m1 * m1, 1e-13);
    EXPECT_NEAR(D[2](l, l).re, m3 - 3 * m2 * m1 + 2 * m1 * m1 * m1, 1e-12);
    EXPECT_NEAR(num::cabs(D[1](l, 1 - l)), 0.0, 1e-15);
  }
}

TEST(LogDerivatives, TaylorSumApproximatesLog) {
  num::Rng rng(5);
  MatD H = cluster::random_chain_hamiltonian(3, rng);
  const double beta = 0.05;
  auto T = cluster::taylor_log_reduced(H, 3, {1}, beta, 6);
  MatD sum(2, 2);
  for (const auto& t : T) sum += t;
  MatD X = num::partial_trace(num::mat_exp_hermitian(H, -beta), {1}, 3, 2) * 0.25;
  EXPECT_LT(num::max_abs_diff(sum, num::mat_log_pd(X)), 1e-7);
}

TEST(DerivativeAudit, DoubleRandomChains) {
  num::Rng rng(2024);
  for (int k = 0; k < 10; ++k) {
    MatD H = cluster::random_chain_hamiltonian(3, rng);
    auto a = cluster::derivative_identity_audit<double>(H, 3, {1 + k % 3}, 4);
    for (int m = 0; m < 4; ++m) EXPECT_LT(a.residual[m], 1e-7) << k << " m=" << m + 1;
  }
}

TEST(DerivativeAudit, BigFloatFifty) {
  num::PrecisionScope ps(50);
  num::Rng rng(77);
  auto H = num::convert<num::BigFloat>(cluster::random_chain_hamiltonian(3, rng));
  auto a = cluster::derivative_identity_audit<num::BigFloat>(H, 3, {2}, 6, 1e-4, 8, 1e-20);
  EXPECT_EQ(a.digits, 50);
  for (int m = 0; m < 6; ++m) EXPECT_LT(a.residual[m], 1e-20) << m + 1;
}

TEST(DerivativeAudit, IllConditionedFitRefuses) {
  num::Rng rng(1);
  MatD H = cluster::random_chain_hamiltonian(3, rng);
  try {
    cluster::derivative_identity_audit<double>(H, 3, {2}, 6);
    FAIL() << "expected FitConditionError";
  } catch (const cluster::FitConditionError& e) {
    EXPECT_NE(std::string(e.what()).find("big-float"), std::string::npos);
  }
}
