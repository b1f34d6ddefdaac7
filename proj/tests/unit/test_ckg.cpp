#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "qbp/ckg/ckg.hpp"
#include "qbp/numkit/fit.hpp"

using namespace qbp;
using num::cd;
using num::MatD;

namespace {

MatD site_pauli(char c, int i, int n) { return num::embed_on_sites(lat::pauli<double>(c), {i}, n, 2); }

MatD gibbs_rho(const lat::Hamiltonian& H, double beta) { return gibbs::gibbs_state<double>(H, beta).rho; }

const ckg::Generator& xyz3() {
  static const ckg::Generator G = ckg::build_ckg(lat::build_xyz_chain(3), 0.25);
  return G;
}

double max_of(const std::vector<double>& v) { return *std::max_element(v.begin(), v.end()); }

}  // namespace

TEST(Kernels, B1TransformMatchesClosedForm) {
  ckg::QuadConfig q;
  for (double x : {-6.0, -2.5, -0.3, 0.0, 0.7, 1.9, 4.0}) {
    cd a = ckg::b1_hat(x, q), b = ckg::b1_hat_closed(x);
    EXPECT_NEAR(a.re, b.re, 1e-10) << x;
    EXPECT_NEAR(a.im, b.im, 1e-10) << x;
  }
}

TEST(Kernels, B2TransformByQuadrature) {
  for (double x : {-3.0, 0.0, 1.5, 2.0, 5.0}) {
    double re = 0, im = 0;
    const int N = 4001;
    const double h = 12.0 / (N - 1);
    for (int k = 0; k < N; ++k) {
      double t = -6 + k * h;
      cd b = ckg::b2(t);
      double c = std::cos(x * t), s = std::sin(x * t);
      re += h * (b.re * c - b.im * s);
      im += h * (b.re * s + b.im * c);
    }
    EXPECT_NEAR(re, ckg::b2_hat(x).re, 1e-12);
    EXPECT_NEAR(im, 0.0, 1e-12);
  }
}

TEST(Kernels, CoherentIntegralBound) {
  ckg::QuadConfig q;
  double prod = ckg::b1_abs_integral(q) * ckg::b2_abs_integral();
  EXPECT_LE(prod, ckg::coherent_norm_bound());
  EXPECT_NEAR(ckg::b2_abs_integral(), 1 / (4 * M_PI), 1e-15);
}

TEST(JumpOperator, ClosedFormMatchesTimeQuadrature) {
  auto H = lat::assemble_dense<double>(lat::build_xyz_chain(3));
  MatD A = site_pauli('X', 2, 3);
  for (double beta : {0.25, 1.0}) {
    for (double w : {-1.3, 0.0, 2.1}) {
      MatD J = ckg::jump_operator(H, A, w, beta);
      MatD Jq = ckg::jump_operator_quadrature(H, A, w, beta, 8 * beta, 4000);
      EXPECT_LT(num::max_abs_diff(J, Jq), 1e-8) << beta << " " << w;
    }
  }
}

TEST(JumpOperator, TrivialHamiltonian) {
  MatD H(8, 8);
  MatD A = site_pauli('Y', 1, 3);
  const double beta = 0.7, w = 0.4;
  MatD J = ckg::jump_operator(H, A, w, beta);
  MatD expect = A;
  expect *= ckg::jump_prefactor(beta) * std::exp(-beta * beta * w * w / 4);
  EXPECT_LT(num::max_abs_diff(J, expect), 1e-14);
}

TEST(JumpOperator, NormBoundOnRandomDraws) {
  num::Rng rng(5);
  auto H = lat::assemble_dense<double>(lat::build_xyz_chain(3));
  for (int k = 0; k < 20; ++k) {
    MatD A = num::random_hermitian(8, rng);
    A *= 1.0 / num::op_norm(A);
    double beta = 0.2 + rng.uniform() * 2, w = rng.uniform() * 6 - 3;
    EXPECT_LE(num::op_norm(ckg::jump_operator(H, A, w, beta)), ckg::jump_prefactor(beta) + 1e-12);
  }
}

TEST(Coherent, HermitianBoundedAndMatchesTanhForm) {
  const auto& G = xyz3();
  for (int i = 1; i <= 3; ++i)
    for (char c : {'X', 'Y', 'Z'}) {
      MatD A = site_pauli(c, i, 3);
      MatD B = ckg::coherent_term(G.sp, A, G.quad);
      EXPECT_LT(num::hermiticity_defect(B), 1e-14);
      EXPECT_LE(num::op_norm(B), ckg::coherent_norm_bound());
      EXPECT_LT(num::max_abs_diff(B, ckg::coherent_term_tanh(G.sp, A)), 1e-9) << i << c;
    }
}

TEST(Coherent, LadderRefusesCoarseRule) {
  ckg::QuadConfig q;
  q.t_nodes = 41;
  q.s_nodes = 40;
  auto H = lat::assemble_dense<double>(lat::build_xyz_chain(3));
  EXPECT_THROW(ckg::coherent_term(H, site_pauli('X', 1, 3), 0.25, q), ckg::QuadratureError);
}

TEST(Generator, StationaryAndTracePreserving) {
  const auto& G = xyz3();
  EXPECT_EQ(G.blocks.size(), 9u);
  EXPECT_LE(max_of(ckg::stationarity(G)), 1e-6);
  MatD S = ckg::full_superop(G);
  // trace preservation: the identity is a left null vector
  num::Rng rng(3);
  MatD X = num::random_ginibre(8, rng);
  EXPECT_LT(num::cabs(ckg::apply_generator(G, X).trace()), 1e-12);
  MatD rho = gibbs_rho(G.H, G.beta);
  EXPECT_LT(num::trace_norm(num::apply_superop(S, rho)), 1e-6);
}

TEST(Generator, StationarityTightensWithOmegaNodes) {
  auto H = lat::build_xyz_chain(3);
  ckg::QuadConfig q8, q16;
  q8.K = 8;
  q16.K = 16;
  double e8 = max_of(ckg::stationarity(ckg::build_ckg(H, 0.25, q8)));
  double e16 = max_of(ckg::stationarity(ckg::build_ckg(H, 0.25, q16)));
  EXPECT_LE(e16 * 10, e8) << e8 << " " << e16;
}

TEST(Generator, ChannelIsCptp) {
  const auto& G = xyz3();
  MatD S = ckg::full_superop(G);
  for (double t : {0.1, 1.0}) {
    MatD E = num::superop_exp(S, t);
    MatD C = num::choi_matrix(E, 8);
    auto ev = num::eig_hermitian(num::hermitian_part(C)).values;
    EXPECT_GE(ev.front(), -1e-10) << t;
    EXPECT_LT(num::hermiticity_defect(C), 1e-10);
  }
}

TEST(Generator, OneToOneNormBounded) {
  const auto& G = xyz3();
  num::Rng rng(11);
  for (int i = 1; i <= 3; ++i) {
    auto L = ckg::site_superop(G, i);
    double lo = ckg::sampled_one_to_one(L.S, 8, 200, rng);
    double hi = ckg::choi_one_to_one_bound(L.S, 8);
    EXPECT_LE(lo, hi + 1e-12);
    EXPECT_LE(lo, 3.0);
  }
}

TEST(Generator, SemigroupContracts) {
  const auto& G = xyz3();
  MatD S = ckg::full_superop(G);
  num::Rng rng(17);
  for (double t : {0.1, 1.0, 5.0}) EXPECT_LE(ckg::sampled_one_to_one(num::superop_exp(S, t), 8, 100, rng), 1 + 1e-8);
}

TEST(Generator, GapPowerIterationMatchesKmsOracle) {
  const auto& G = xyz3();
  auto g = ckg::spectral_gap(G);
  auto ev = ckg::kms_spectrum(G);
  EXPECT_NEAR(ev.back(), 0.0, 1e-8);
  double oracle = -ev[ev.size() - 2];
  EXPECT_NEAR(g.gap, oracle, 1e-6);
  EXPECT_GT(g.gap, 0.25);
}

TEST(Evolve, EndpointsAndConvergence) {
  const auto& G = xyz3();
  num::Rng rng(2);
  MatD rho0 = num::random_density(8, rng);
  EXPECT_LT(num::max_abs_diff(ckg::evolve(G, rho0, 0.0), rho0), 1e-15);
  MatD late = ckg::evolve(G, rho0, 80.0);
  EXPECT_LT(num::trace_norm(num::hermitian_part(MatD(late - gibbs_rho(G.H, G.beta)))), 1e-6);
  EXPECT_THROW(ckg::evolve(G, rho0, -1.0), std::invalid_argument);
}

TEST(Evolve, ExpvRouteMatchesSuperopExp) {
  auto G = ckg::build_ckg(lat::build_xyz_chain(3), 0.5);
  MatD S = ckg::full_superop(G);
  num::Rng rng(8);
  MatD rho0 = num::random_density(8, rng);
  MatD a = num::apply_superop(num::superop_exp(S, 1.5), rho0);
  auto L = [&](const MatD& v) { return num::matmul(S, v); };
  MatD b = num::unvec(num::expv<double>(L, num::frobenius_norm(S), 1.5, num::vec(rho0)), 8);
  EXPECT_LT(num::max_abs_diff(a, b), 1e-12);
}

TEST(Chi2, Cases) {
  num::Rng rng(4);
  MatD rho = num::random_density(4, rng);
  EXPECT_NEAR(ckg::chi2(rho, rho), 0.0, 1e-14);
  // commuting case reduces to the classical sum (p' - p)^2 / p
  MatD p(2, 2), pp(2, 2);
  p(0, 0) = 0.3, p(1, 1) = 0.7, pp(0, 0) = 0.6, pp(1, 1) = 0.4;
  EXPECT_NEAR(ckg::chi2(pp, p), 0.09 / 0.3 + 0.09 / 0.7, 1e-14);
  MatD sing(2, 2);
  sing(0, 0) = 1;
  EXPECT_THROW(ckg::chi2(p, sing), std::domain_error);

  auto H = lat::build_xyz_chain(3);
  lat::Hamiltonian v = lat::make_hamiltonian({3, 2}, {{{2}, lat::pauli<double>('Z'), "v", {}}});
  auto a = ckg::chi2_bound_audit(H, v, 0.25);
  EXPECT_NEAR(a.g0, 1.0, 1e-14);
  EXPECT_TRUE(a.holds);
  EXPECT_FALSE(a.applicable);  // g = 2 + 1/sqrt(3) gives beta_max < 1/4
  auto small = ckg::chi2_bound_audit(H, v, 0.03);  // beta_max = 1/(8 (g + 1))
  EXPECT_TRUE(small.applicable);
  EXPECT_TRUE(small.holds);
  lat::Hamiltonian bond = lat::make_hamiltonian(
      {3, 2}, {{{1, 2}, num::kron(lat::pauli<double>('Z'), lat::pauli<double>('Z')), "zz12", {}}});
  auto b = ckg::chi2_bound_audit(H, bond, 0.2);
  EXPECT_TRUE(b.holds);
  EXPECT_GT(b.bound - b.chi2, 0.0);
}

TEST(Mixing, BoundHolds) {
  auto H = lat::build_xyz_chain(3);
  lat::Hamiltonian v = lat::make_hamiltonian({3, 2}, {{{2}, lat::pauli<double>('Z'), "v", {}}});
  auto curve = ckg::mixing_curve(H, v, 0.25, {0.0, 1.0, 4.0, 10.0, 20.0});
  ASSERT_EQ(curve.size(), 5u);
  for (const auto& p : curve) EXPECT_LE(p.distance, p.bound) << p.t;
  for (std::size_t k = 1; k < curve.size(); ++k) EXPECT_LE(curve[k].distance, curve[k - 1].distance + 1e-12);
}

TEST(Truncated, FullCoverMatchesGenerator) {
  const auto& G = xyz3();
  for (int i = 1; i <= 3; ++i) {
    auto T = ckg::truncated_generator(G, i, 2);
    auto F = ckg::site_superop(G, i);
    EXPECT_LT(num::max_abs_diff(T.S, F.S), 1e-10) << i;
  }
}

TEST(Truncated, TelescopesToFullBlock) {
  const auto& G = xyz3();
  auto ds = ckg::delta_blocks(G, 1, 2);
  ckg::Superop acc = ds.front();
  for (std::size_t k = 1; k < ds.size(); ++k) acc = num::add(acc, ds[k], 2);
  EXPECT_LT(num::max_abs_diff(num::widen(acc, {1, 2, 3}, 2).S, ckg::site_superop(G, 1).S), 1e-10);
}

TEST(Truncated, BlocksAreLindblad) {
  const auto& G = xyz3();
  for (int a = 1; a <= 3; ++a) {
    auto b = ckg::truncated_block(G, 2, a, 0);
    EXPECT_EQ(b.sites, (std::vector<int>{2}));
    EXPECT_LT(num::hermiticity_defect(b.B), 1e-14);
    for (const auto& j : b.jumps) EXPECT_GE(j.rate, 0.0);
  }
}

TEST(Truncated, DeltaDecaysOnFiveSites) {
  auto G = ckg::build_ckg(lat::build_xyz_chain(5), 0.25);
  auto ds = ckg::delta_blocks(G, 3, 2);
  num::Rng rng(13);
  std::vector<double> x, y;
  for (std::size_t k = 0; k < ds.size(); ++k) {
    x.push_back(static_cast<double>(k));
    y.push_back(ckg::sampled_one_to_one(ds[k].S, std::size_t(1) << ds[k].sites.size(), 50, rng));
  }
  EXPECT_TRUE(num::strictly_decreasing(y));
  auto f = num::log_linear_fit(x, y);
  EXPECT_LT(f.slope, 0.0);
  EXPECT_GE(std::fabs(f.r), 0.9);
}

TEST(Truncated, SubsetLiouvillianIsTpAndCp) {
  const auto& G = xyz3();
  auto L = ckg::subset_liouvillian(G, {1, 2});
  EXPECT_EQ(ckg::inner_radius(1, {1, 2}, 3), 1);
  EXPECT_EQ(ckg::inner_radius(2, {1, 2}, 3), 0);
  EXPECT_EQ(ckg::inner_radius(3, {1, 2}, 3), -1);
  EXPECT_EQ(ckg::inner_radius(2, {1, 2, 3}, 3), 2);
  num::Rng rng(6);
  MatD X = num::random_ginibre(4, rng);
  EXPECT_LT(num::cabs(num::apply_superop(L.S, X).trace()), 1e-12);
  MatD E = num::superop_exp(L.S, 0.5);
  auto ev = num::eig_hermitian(num::hermitian_part(num::choi_matrix(E, 4))).values;
  EXPECT_GE(ev.front(), -1e-10);
}
