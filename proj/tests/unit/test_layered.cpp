#include <gtest/gtest.h>

#include <cmath>

#include "qbp/bp/bp.hpp"
#include "qbp/ckg/layered.hpp"

using namespace qbp;
using num::MatD;

namespace {

MatD gibbs_rho(const lat::Hamiltonian& H, double beta) { return gibbs::gibbs_state<double>(H, beta).rho; }


}  // namespace

TEST(Layers, Geometry) {
  auto g = ckg::layer_geometry(3, 4.0, 2.0, 1, 5);
  EXPECT_DOUBLE_EQ(g.dr, 2.0);
  EXPECT_DOUBLE_EQ(g.dt, 2.0);
  EXPECT_EQ(g.X[0], (std::vector<int>{1, 2, 3, 4, 5}));
  EXPECT_EQ(g.Xt[0], (std::vector<int>{2, 3, 4}));
  auto h = ckg::layer_geometry(2, 3.0, 1.0, 2, 6);
  EXPECT_EQ(h.X[0], (std::vector<int>{1, 2, 3}));
  EXPECT_EQ(h.Xt[0], (std::vector<int>{2}));
  EXPECT_EQ(h.X[1], (std::vector<int>{1, 2, 3, 4}));
  EXPECT_THROW(ckg::layer_geometry(2, 1.0, 1.0, 0, 6), std::invalid_argument);
}

TEST(Layers, ZeroTimeAndFullCover) {
  auto u = bp::site_update(lat::build_xyz_chain(3), 2);
  auto G = ckg::build_ckg(u.Hp, 0.25);
  MatD rho0 = gibbs_rho(u.H, 0.25);
  auto zero = ckg::layered_local_evolution(G, rho0, 2, 2.0, 0.0, 2);
  EXPECT_EQ(zero.error, 0.0);
  EXPECT_LT(num::max_abs_diff(zero.state, rho0), 1e-15);
  auto cover = ckg::layered_local_evolution(G, rho0, 2, 12.0, 1.5, 1);
  EXPECT_LE(cover.error, 1e-9);
}

TEST(Layers, ErrorShrinksWithRadius) {
  auto u = bp::site_update(lat::build_xyz_chain(5), 3);
  auto G = ckg::build_ckg(u.Hp, 0.25);
  MatD rho0 = gibbs_rho(u.H, 0.25);
  double prev = 1e300;
  for (double r : {1.0, 2.0, 4.0}) {
    double e = ckg::layered_local_evolution(G, rho0, 3, r, 1.0, 1).error;
    EXPECT_LT(e, prev) << r;
    prev = e;
  }
}

TEST(Channel, PrepareStage) {
  num::Rng rng(3);
  MatD sigma = num::random_density(2, rng);
  auto c = ckg::prepare_channel(3, {2}, sigma);
  MatD rho = num::random_density(8, rng);
  MatD out = c.apply(rho);
  EXPECT_LT(num::max_abs_diff(num::partial_trace(out, {2}, 3, 2), sigma), 1e-15);
  EXPECT_LT(num::max_abs_diff(num::partial_trace(out, {1, 3}, 3, 2), num::partial_trace(rho, {1, 3}, 3, 2)), 1e-15);
  EXPECT_LT(num::max_abs_diff(c.apply(out), out), 1e-15);
  MatD expect = num::kron(num::partial_trace(rho, {1}, 3, 2), sigma);
  expect = num::kron(expect, num::partial_trace(rho, {3}, 3, 2));
  // product input: placement respects site order
  MatD prod = num::kron(num::kron(num::partial_trace(rho, {1}, 3, 2), num::random_density(2, rng)),
                        num::partial_trace(rho, {3}, 3, 2));
  EXPECT_LT(num::max_abs_diff(c.apply(prod), expect), 1e-15);
}

TEST(Channel, CptpAndLocal) {
  auto u = bp::site_update(lat::build_xyz_chain(3), 3);
  auto c = ckg::bp_channel_lindblad(u.H, u.Hp, 0.25, 2.0, 1.0);
  EXPECT_EQ(c.support, (std::vector<int>{2, 3}));
  MatD S = c.superop();
  MatD C = num::choi_matrix(S, 8);
  EXPECT_GE(num::eig_hermitian(num::hermitian_part(C)).values.front(), -1e-8);
  num::Rng rng(5);
  MatD X = num::random_ginibre(8, rng);
  EXPECT_LT(num::cabs(MatD(c.apply(X) - X).trace()), 1e-8);
  // identity on the complement: Heisenberg action fixes observables on site 1
  MatD O = num::embed_on_sites(num::random_hermitian(2, rng), {1}, 3, 2);
  MatD rho = num::random_density(8, rng);
  EXPECT_LT(std::fabs(num::trace_product(O, c.apply(rho)).re - num::trace_product(O, rho).re), 1e-10);
}

TEST(Channel, UpdatedSite) {
  auto u = bp::site_update(lat::build_xyz_chain(5), 3);
  EXPECT_EQ(ckg::updated_site(u.H, u.Hp), 3);
  EXPECT_EQ(ckg::updated_site(u.Hp, u.H), 3);
  auto e = bp::site_update(lat::build_xyz_chain(5), 5);
  EXPECT_EQ(ckg::updated_site(e.H, e.Hp), 5);
  auto H = lat::build_xyz_chain(4);
  EXPECT_THROW(ckg::updated_site(H, H), std::invalid_argument);
}

TEST(BpChannel, NoUpdateIsExactWithoutTruncation) {
  auto H = lat::build_xyz_chain(3);
  for (double t : {0.5, 4.0, 20.0}) EXPECT_LE(ckg::bp_channel_lindblad(H, H, 0.25, 6.0, t, 1, 2).epsilon, 1e-9);
}

TEST(BpChannel, NoUpdateResidualIsTruncationOnly) {
  // truncated blocks fix rho_beta only up to their locality error
  auto H = lat::build_xyz_chain(5);
  double e1 = ckg::bp_channel_lindblad(H, H, 0.25, 1.0, 4.0, 1, 3).epsilon;
  double e2 = ckg::bp_channel_lindblad(H, H, 0.25, 2.0, 4.0, 1, 3).epsilon;
  double e4 = ckg::bp_channel_lindblad(H, H, 0.25, 4.0, 4.0, 1, 3).epsilon;
  EXPECT_GT(e1, e2);
  EXPECT_GT(e2, e4);
  EXPECT_LE(e4, 1e-9);
}

TEST(BpChannel, FullCoverMixes) {
  auto u = bp::site_update(lat::build_xyz_chain(3), 3);
  auto G = ckg::build_ckg(u.Hp, 0.25);
  const double t = 50 / ckg::spectral_gap(G).gap;
  EXPECT_LE(ckg::bp_channel_lindblad(u.H, u.Hp, 0.25, 12.0, t, 1).epsilon, 1e-5);
}

TEST(BpChannel, EpsilonNonIncreasingInRadius) {
  auto u = bp::site_update(lat::build_xyz_chain(5), 3);
  double prev = 1e300;
  for (double r : {1.0, 2.0, 3.0, 4.0}) {
    double e = ckg::bp_channel_lindblad(u.H, u.Hp, 0.25, r, 8.0).epsilon;
    EXPECT_LE(e, prev + 1e-12) << r;
    prev = e;
  }
}
