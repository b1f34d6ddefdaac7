#include <gtest/gtest.h>

#include <cmath>

#include "qbp/lattice/lattice.hpp"
#include "qbp/numkit/random.hpp"

using namespace qbp;
using namespace qbp::lat;
using num::MatD;

TEST(Xyz, SmallChainIsHermitian) {
  Hamiltonian H = build_xyz_chain(2);
  MatD M = assemble_dense<double>(H);
  EXPECT_EQ(M.rows(), 4u);
  EXPECT_LT(num::hermiticity_defect(M), 1e-15);
  EXPECT_EQ(H.terms.size(), 3u);
  EXPECT_EQ(interaction_length(H), 1);
  EXPECT_THROW(build_xyz_chain(1), std::invalid_argument);
}

TEST(Xyz, TermNorms) {
  Hamiltonian H = build_xyz_chain(3);
  EXPECT_NEAR(term_norm(H, find_term(H, "h1")), 1.0 / std::sqrt(3.0), 1e-14);
  // bond spectrum in the Bell basis: {-1, 0, 1/3, 2/3}
  auto e = num::eig_hermitian(H.terms[find_term(H, "h1,2")].op);
  const double expect[4] = {-1.0, 0.0, 1.0 / 3.0, 2.0 / 3.0};
  for (int k = 0; k < 4; ++k) EXPECT_NEAR(e.values[static_cast<std::size_t>(k)], expect[k], 1e-14);
  EXPECT_NEAR(term_norm(H, find_term(H, "h1,2")), 1.0, 1e-14);
}

TEST(Xyz, SumOfEmbedsOracle) {
  Hamiltonian H = build_xyz_chain(3);
  MatD X = pauli<double>('X'), Y = pauli<double>('Y'), Z = pauli<double>('Z'), I = MatD::identity(2);
  MatD oracle(8, 8);
  auto k3 = [](const MatD& a, const MatD& b, const MatD& c) { return num::kron(num::kron(a, b), c); };
  for (int s = 0; s < 3; ++s) {
    MatD P[3] = {I, I, I};
    for (const MatD* p : {&X, &Y, &Z}) {
      P[s] = *p;
      MatD t = k3(P[0], P[1], P[2]);
      t *= 1.0 / 3.0;
      oracle += t;
    }
  }
  const double w[3] = {3.0 / 6.0, 2.0 / 6.0, 1.0 / 6.0};
  const MatD* pp[3] = {&X, &Y, &Z};
  for (int b = 0; b < 2; ++b)
    for (int k = 0; k < 3; ++k) {
      MatD P[3] = {I, I, I};
      P[b] = *pp[k];
      P[b + 1] = *pp[k];
      MatD t = k3(P[0], P[1], P[2]);
      t *= w[k];
      oracle += t;
    }
  EXPECT_LT(num::max_abs_diff(assemble_dense<double>(H), oracle), 1e-14);
}

TEST(Xyz, ExactBigFloatAssembly) {
  num::PrecisionScope ps(60);
  Hamiltonian H = build_xyz_chain(3);
  auto M = assemble_dense<num::BigFloat>(H);
  // entry (0,0) = 2*(1/6) [ZZ on two bonds] + 3*(1/3) [Z fields] = 4/3 at working precision
  EXPECT_LT((M(0, 0).re - num::BigFloat(4) / num::BigFloat(3)).log10_abs(), -58);
  auto H12 = term_matrix<num::BigFloat>(H.terms[0]);
  EXPECT_LT((H12(0, 0).re - num::BigFloat(1) / num::BigFloat(6)).log10_abs(), -58);
}

TEST(Subset, ThreeWaySplitIsExact) {
  Hamiltonian H = build_xyz_chain(5);
  MatD full = assemble_dense<double>(H);
  for (std::vector<int> L : {std::vector<int>{1, 2}, {2, 4}, {3}, {1, 3, 5}, {}, {1, 2, 3, 4, 5}}) {
    std::vector<int> Lc = num::complement(L, 5);
    MatD sum = assemble_dense<double>(subset_hamiltonian(H, L));
    sum += assemble_dense<double>(subset_hamiltonian(H, Lc));
    sum += boundary_term<double>(H, L);
    // terms are partitioned: every term lands in exactly one of the three parts
    std::size_t parts = subset_hamiltonian(H, L).terms.size() + subset_hamiltonian(H, Lc).terms.size() +
                        boundary_hamiltonian(H, L).terms.size();
    EXPECT_EQ(parts, H.terms.size());
    // dense sums differ only by summation order
    EXPECT_LT(num::max_abs_diff(sum, full), 1e-15);
  }
}

TEST(Subset, EdgeCases) {
  Hamiltonian H = build_xyz_chain(4);
  EXPECT_EQ(num::max_abs_diff(assemble_dense<double>(subset_hamiltonian(H, {1, 2, 3, 4})), assemble_dense<double>(H)),
            0.0);
  EXPECT_EQ(num::frobenius_norm(boundary_term<double>(H, {1, 2, 3, 4})), 0.0);
  EXPECT_EQ(num::frobenius_norm(assemble_dense<double>(subset_hamiltonian(H, {}))), 0.0);
  // term-listing oracle: the only crossing term for L={1,2} is h_{2,3}
  Hamiltonian b = boundary_hamiltonian(H, {1, 2});
  ASSERT_EQ(b.terms.size(), 1u);
  EXPECT_EQ(b.terms[0].label, "h2,3");
  EXPECT_EQ(num::max_abs_diff(boundary_term<double>(H, {1, 2}),
                              num::embed_on_sites(H.terms[find_term(H, "h2,3")].op, {2, 3}, 4, 2)),
            0.0);
}

TEST(Parameterize, Family) {
  Hamiltonian H = build_xyz_chain(4);
  std::map<std::string, double> ones, zeros;
  for (const auto& t : H.terms) {
    ones[t.label] = 1.0;
    zeros[t.label] = 0.0;
  }
  EXPECT_EQ(num::max_abs_diff(assemble_dense<double>(parameterize(H, ones)), assemble_dense<double>(H)), 0.0);
  EXPECT_EQ(num::frobenius_norm(assemble_dense<double>(parameterize(H, zeros))), 0.0);
  MatD half = assemble_dense<double>(single_coupling_family(H, "h3,4", 0.5));
  MatD oracle = assemble_dense<double>(without_terms(H, {find_term(H, "h3,4")}));
  MatD b = num::embed_on_sites(H.terms[find_term(H, "h3,4")].op, {3, 4}, 4, 2);
  b *= 0.5;
  oracle += b;
  EXPECT_LT(num::max_abs_diff(half, oracle), 1e-15);
  EXPECT_THROW(parameterize(H, {{"nope", 1.0}}), std::invalid_argument);
}

TEST(Geometry, BallsDistancesTrim) {
  EXPECT_EQ(ball(3, 0, 5), (std::vector<int>{3}));
  EXPECT_EQ(ball(1, 2, 5), (std::vector<int>{1, 2, 3}));
  EXPECT_EQ(ball(3, 1.5, 5), (std::vector<int>{2, 3, 4}));
  EXPECT_EQ(distance({1}, {4}), 3);
  std::vector<int> Bc = trim_region({4, 5, 6, 7}, 1, 10);
  EXPECT_EQ(Bc, (std::vector<int>{5, 6}));
  // term scan: after trimming no bond couples the left side {1..5} to the right side {6..10}
  Hamiltonian H = build_xyz_chain(10);
  std::vector<int> left = {1, 2, 3, 4, 5}, right = {6, 7, 8, 9, 10};
  std::vector<int> B1c = trim_region({4, 5}, 1, 10), B2c = trim_region({6, 7}, 1, 10);
  for (const auto& t : H.terms) {
    bool hits1 = false, hits2 = false;
    for (int s : t.sites) {
      hits1 |= std::find(B1c.begin(), B1c.end(), s) != B1c.end();
      hits2 |= std::find(B2c.begin(), B2c.end(), s) != B2c.end();
    }
    EXPECT_FALSE(hits1 && hits2);
  }
  // a region touching the chain end is only trimmed on its exposed side
  EXPECT_EQ(trim_region({1, 2, 3}, 1, 6), (std::vector<int>{1, 2}));
}

TEST(Geometry, LocalStrength) {
  Hamiltonian H = build_xyz_chain(6);
  auto s = site_strengths(H);
  double g = local_strength(H);
  for (int i = 1; i <= 6; ++i) EXPECT_LE(s[static_cast<std::size_t>(i)], g + 1e-15);
  EXPECT_NEAR(g, 2.0 + 1.0 / std::sqrt(3.0), 1e-13);
  EXPECT_NEAR(s[1], 1.0 + 1.0 / std::sqrt(3.0), 1e-13);
}

TEST(Json, RoundTrip) {
  Hamiltonian H = parameterize(build_xyz_chain(3), {{"h2", 0.25}});
  Hamiltonian G = from_json(to_json(H));
  EXPECT_EQ(G.lattice.n, 3);
  EXPECT_EQ(G.terms.size(), H.terms.size());
  EXPECT_EQ(num::max_abs_diff(assemble_dense<double>(G), assemble_dense<double>(H)), 0.0);
  EXPECT_THROW(from_json("{\"n\": 2}"), std::invalid_argument);
  EXPECT_THROW(from_json("{\"n\": 2, \"terms\": [{\"sites\": [1], \"matrix\": [[0,1],[0,0],[1,0],[0,0]]}]}"),
               std::invalid_argument);
}
