#include <gtest/gtest.h>

#include <cmath>

#include "qbp/gibbs/gibbs.hpp"
#include "qbp/numkit/fit.hpp"
#include "qbp/numkit/random.hpp"

using namespace qbp;
using num::cd;
using num::MatD;

namespace {

lat::Hamiltonian single_z() {
  lat::Term t{{1}, lat::pauli<double>('Z'), "z", {}};
  return lat::make_hamiltonian({1, 2}, {t});
}

MatD ghz3() {
  MatD g(8, 8);
  g(0, 0) = g(0, 7) = g(7, 0) = g(7, 7) = cd(0.5);
  return g;
}

}  // namespace

TEST(Gibbs, InfiniteTemperature) {
  auto st = gibbs::gibbs_state<double>(lat::build_xyz_chain(3), 0.0);
  MatD I = MatD::identity(8);
  I *= 1.0 / 8.0;
  EXPECT_LT(num::max_abs_diff(st.rho, I), 1e-15);
  EXPECT_NEAR(st.logZ, 3 * std::log(2.0), 1e-14);
}

TEST(Gibbs, SingleQubit) {
  auto st = gibbs::gibbs_state<double>(single_z(), 1.0);
  double Z = std::exp(1.0) + std::exp(-1.0);
  EXPECT_NEAR(st.rho(0, 0).re, std::exp(1.0) / Z, 1e-15);
  EXPECT_NEAR(st.rho(1, 1).re, std::exp(-1.0) / Z, 1e-15);
  EXPECT_NEAR(st.logZ, std::log(Z), 1e-15);
}

TEST(Gibbs, EnergyMatchesEigenSum) {
  auto H = lat::build_xyz_chain(4);
  auto st = gibbs::gibbs_state<double>(H, 0.5);
  MatD Hd = lat::assemble_dense<double>(H);
  double E = num::trace_product(st.rho, Hd).re;
  double num = 0, den = 0;
  for (double l : st.eig.values) {
    num += l * std::exp(0.5 * l);
    den += std::exp(0.5 * l);
  }
  EXPECT_NEAR(E, num / den, 1e-13);
  EXPECT_NEAR(st.rho.trace().re, 1.0, 1e-13);
  // rho = e^{beta H}/Z reconstructs from the source
  MatD rec = num::mat_exp_hermitian(Hd, 0.5);
  rec *= std::exp(-st.logZ);
  EXPECT_LT(num::max_abs_diff(rec, st.rho), 1e-13);
}

TEST(Gibbs, DoubleOverflowGuard) {
  EXPECT_THROW(gibbs::gibbs_state<double>(single_z(), 800.0), std::overflow_error);
  num::PrecisionScope ps(30);
  auto st = gibbs::gibbs_state<num::BigFloat>(single_z(), 800.0);
  EXPECT_NEAR(st.rho(0, 0).re.to_double(), 1.0, 1e-15);
}

TEST(Gibbs, Reduced) {
  auto H = lat::build_xyz_chain(4);
  auto st = gibbs::gibbs_state<double>(H, 0.7);
  EXPECT_LT(num::max_abs_diff(gibbs::reduced(st, {1, 2, 3, 4}), st.rho), 1e-15);
  auto inf = gibbs::gibbs_state<double>(H, 0.0);
  MatD I = MatD::identity(4);
  I *= 0.25;
  EXPECT_LT(num::max_abs_diff(gibbs::reduced(inf, {2, 4}), I), 1e-15);
  MatD ab = gibbs::reduced(st, {1, 2});
  EXPECT_LT(num::max_abs_diff(num::partial_trace(ab, {1}, 2, 2), gibbs::reduced(st, {1})), 1e-14);
  EXPECT_GT(num::eig_hermitian(ab).values.front(), 0.0);
}

TEST(Entropy, Basics) {
  MatD pure(2, 2);
  pure(0, 0) = cd(1.0);
  EXPECT_NEAR(gibbs::entropy(pure), 0.0, 1e-15);
  MatD mixed = MatD::identity(2);
  mixed *= 0.5;
  EXPECT_NEAR(gibbs::entropy(mixed), 1.0, 1e-14);
}

TEST(Entropy, GhzCmiIsOneBit) {
  auto v = gibbs::cmi(ghz3(), {1}, {2}, {3}, 3, 2);
  EXPECT_NEAR(v.raw, 1.0, 1e-13);
}

TEST(Entropy, StrongSubadditivityInstances) {
  num::Rng rng(1234);
  for (int k = 0; k < 200; ++k) {
    MatD rho = num::random_density(8, rng);
    auto v = gibbs::cmi(rho, {1}, {2}, {3}, 3, 2);
    EXPECT_GE(v.raw, -10 * 8 * 1e-12);
    EXPECT_GE(v.value, 0.0);
  }
}

TEST(Entropy, FactorizedGibbsHasZeroCmi) {
  // terms only on A-B and on C: rho = rho_AB (x) rho_C
  auto X = lat::build_xyz_chain(3);
  auto H = lat::without_terms(X, {lat::find_term(X, "h2,3")});
  auto st = gibbs::gibbs_state<double>(H, 0.8);
  EXPECT_LE(gibbs::cmi(st.rho, {1}, {2}, {3}, 3, 2).value, 1e-10);
}

TEST(Correlation, Basics) {
  MatD Z = lat::pauli<double>('Z');
  MatD prod = num::kron(MatD::diag({0.3, 0.7}), MatD::diag({0.6, 0.4}));
  EXPECT_LT(num::cabs(gibbs::correlation(prod, Z, {1}, Z, {2}, 2, 2)), 1e-15);
  MatD bell(4, 4);
  bell(0, 0) = bell(0, 3) = bell(3, 0) = bell(3, 3) = cd(0.5);
  EXPECT_NEAR(gibbs::correlation(bell, Z, {1}, Z, {2}, 2, 2).re, 1.0, 1e-15);
  EXPECT_THROW(gibbs::correlation(bell, Z, {1}, Z, {1}, 2, 2), std::invalid_argument);
}

TEST(Correlation, XyzSweepMatchesDirectTraceAndDecays) {
  auto H = lat::build_xyz_chain(6);
  auto st = gibbs::gibbs_state<double>(H, 0.5);
  MatD Z = lat::pauli<double>('Z');
  std::vector<double> mags;
  for (int j = 2; j <= 6; ++j) {
    cd c = gibbs::correlation(st.rho, Z, {1}, Z, {j}, 6, 2);
    MatD Z1 = num::embed_on_sites(Z, {1}, 6, 2), Zj = num::embed_on_sites(Z, {j}, 6, 2);
    cd direct = num::matmul(st.rho, num::matmul(Z1, Zj)).trace() -
                num::matmul(st.rho, Z1).trace() * num::matmul(st.rho, Zj).trace();
    EXPECT_LT(num::cabs(c - direct), 1e-14);
    EXPECT_LE(num::cabs(c), 2.0);
    mags.push_back(num::cabs(c));
  }
  EXPECT_TRUE(num::strictly_decreasing(mags));
}

TEST(Correlation, ClusteringFit) {
  auto H = lat::build_xyz_chain(8);
  MatD Z = lat::pauli<double>('Z');
  for (double beta : {0.25, 0.5}) {
    auto st = gibbs::gibbs_state<double>(H, beta);
    std::vector<double> x, y;
    for (int j = 3; j <= 8; ++j) {
      x.push_back(j);
      y.push_back(num::cabs(gibbs::correlation(st.rho, Z, {1}, Z, {j}, 8, 2)));
    }
    auto f = num::log_linear_fit(x, y);
    EXPECT_GE(std::fabs(f.r), 0.98) << "beta=" << beta;
    EXPECT_LT(f.slope, 0.0);
  }
}

TEST(Heisenberg, TrivialCases) {
  auto H = lat::build_xyz_chain(3);
  MatD Hd = lat::assemble_dense<double>(H);
  EXPECT_LT(num::max_abs_diff(gibbs::heisenberg_evolve(Hd, Hd, 1.7), Hd), 1e-13);
  MatD O = num::embed_on_sites(lat::pauli<double>('X'), {2}, 3, 2);
  EXPECT_LT(num::max_abs_diff(gibbs::heisenberg_evolve(O, Hd, 0.0), O), 1e-14);
  for (double t : {0.3, 1.0, 4.0})
    EXPECT_NEAR(num::frobenius_norm(gibbs::heisenberg_evolve(O, Hd, t)), num::frobenius_norm(O), 1e-12);
  // sign: d/dt O(t) = i[H, O(t)]
  double h = 1e-5;
  MatD dO = gibbs::heisenberg_evolve(O, Hd, h) - gibbs::heisenberg_evolve(O, Hd, -h);
  dO *= 1.0 / (2 * h);
  MatD expect = num::commutator(Hd, O);
  expect *= cd(0.0, 1.0);
  EXPECT_LT(num::max_abs_diff(dO, expect), 1e-8);
}

namespace {

std::vector<double> shell_differences(const MatD& Ot, int i, int n) {
  std::vector<double> diff;  // index r-1 holds ||O_{i[r]} - O_{i[r-1]}||
  MatD prev = gibbs::truncated_heisenberg(Ot, i, 0, n, 2);
  for (int r = 1; r < n; ++r) {
    MatD cur = gibbs::truncated_heisenberg(Ot, i, r, n, 2);
    diff.push_back(num::op_norm(MatD(cur - prev)));
    prev = cur;
  }
  return diff;
}

}  // namespace

TEST(Heisenberg, ShellDifferencesDecay) {
  auto H = lat::build_xyz_chain(8);
  auto eig = num::eig_hermitian(lat::assemble_dense<double>(H));
  // central site: shells r = 1..4 reach both chain ends at r = 4
  MatD O = num::embed_on_sites(lat::pauli<double>('Z'), {4}, 8, 2);
  MatD Ot = gibbs::heisenberg_evolve(O, eig, 0.5);
  auto diff = shell_differences(Ot, 4, 8);
  for (std::size_t k = 1; k < 4; ++k) EXPECT_LT(diff[k], diff[k - 1]);
  for (std::size_t k = 4; k < diff.size(); ++k) EXPECT_LT(diff[k], 1e-13);
  EXPECT_LT(num::max_abs_diff(gibbs::truncated_heisenberg(Ot, 4, 4, 8, 2), Ot), 1e-13);
  // fit C (v t l_H / r)^r on r = 2, 3 and check r = 4 lies below
  double l2 = std::log(diff[1]), l3 = std::log(diff[2]);
  double lvt = l3 - l2 + 3 * std::log(3.0) - 2 * std::log(2.0);
  double lC = l2 - 2 * lvt + 2 * std::log(2.0);
  EXPECT_LE(std::log(diff[3]), lC + 4 * (lvt - std::log(4.0)));
  // edge site: seven shells, strictly decreasing
  MatD O1 = num::embed_on_sites(lat::pauli<double>('Z'), {1}, 8, 2);
  auto d1 = shell_differences(gibbs::heisenberg_evolve(O1, eig, 0.5), 1, 8);
  EXPECT_TRUE(num::strictly_decreasing(d1));
}

TEST(Partition, ChainSplit) {
  auto H = lat::build_xyz_chain(6);
  auto p = gibbs::make_partition(H, {1}, {6});
  EXPECT_EQ(p.R, 5);
  EXPECT_EQ(p.dAB2, 3);
  EXPECT_EQ(p.B1, (std::vector<int>{2, 3}));
  EXPECT_EQ(p.B2, (std::vector<int>{4, 5}));
  EXPECT_EQ(p.B1c, (std::vector<int>{2}));
  EXPECT_EQ(p.B2c, (std::vector<int>{5}));
  EXPECT_EQ(lat::distance(p.A, p.B2), 3);
  EXPECT_THROW(gibbs::make_partition(H, {1, 2}, {4, 5, 6}), std::invalid_argument);
  auto q = gibbs::make_partition(lat::build_xyz_chain(8), {1, 2}, {7, 8});
  EXPECT_EQ(q.R, 5);
  EXPECT_EQ(q.B1, (std::vector<int>{3, 4}));
  EXPECT_EQ(q.B2, (std::vector<int>{5, 6}));
}
