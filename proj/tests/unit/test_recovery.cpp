#include <gtest/gtest.h>

#include <cmath>

#include "qbp/recovery/recovery.hpp"

using namespace qbp;
using num::MatD;

namespace {

lat::Hamiltonian drop_bonds(const lat::Hamiltonian& H, const std::vector<std::vector<int>>& bonds) {
  std::vector<std::size_t> idx;
  for (std::size_t k = 0; k < H.terms.size(); ++k)
    for (const auto& b : bonds)
      if (H.terms[k].sites == b) idx.push_back(k);
  return lat::without_terms(H, idx);
}

double td(const MatD& a, const MatD& b) { return num::trace_norm(num::hermitian_part(MatD(a - b))); }

}  // namespace

TEST(Plan, EightSiteChain) {
  auto H = lat::build_xyz_chain(8);
  auto p = gibbs::make_partition(H, {1, 2}, {7, 8});
  auto plan = rec::plan_recovery(H, p, 0.25, 1.0, 1.0);
  EXPECT_EQ(plan.order, (std::vector<int>{4, 5}));
  EXPECT_EQ(plan.nbar, 2);
  EXPECT_EQ(plan.nbar_refined, 3);
  EXPECT_GE(plan.nbar_refined, plan.nbar);
  EXPECT_LE(plan.nbar_refined, plan.nbar_bound);
  ASSERT_EQ(plan.chain.size(), 3u);
  // each step adds exactly the incident terms of one site
  for (std::size_t k = 1; k < plan.chain.size(); ++k) {
    EXPECT_GT(plan.chain[k].terms.size(), plan.chain[k - 1].terms.size());
    int s = plan.order[k - 1];
    for (const auto& t : plan.chain[k].terms) {
      bool old = false;
      for (const auto& u : plan.chain[k - 1].terms) old = old || u.label == t.label;
      if (!old) EXPECT_TRUE(std::find(t.sites.begin(), t.sites.end(), s) != t.sites.end());
    }
  }
  EXPECT_TRUE(plan.support_ok);
  EXPECT_FALSE(rec::plan_recovery(H, p, 0.25, 2.5, 1.0).support_ok);
}

TEST(Plan, FactorizationOfH0) {
  auto H = lat::build_xyz_chain(6);
  auto p = gibbs::make_partition(H, {1}, {6});
  auto plan = rec::plan_recovery(H, p, 0.25, 1.0, 1.0);
  MatD H0 = lat::assemble_dense<double>(plan.chain.front());
  MatD L = lat::assemble_dense<double>(lat::subset_hamiltonian(H, lat::set_union(p.A, p.B1c)));
  MatD R = lat::assemble_dense<double>(lat::subset_hamiltonian(H, lat::set_union(p.B2c, p.C)));
  EXPECT_LT(num::max_abs_diff(H0, MatD(L + R)), 1e-14);
  EXPECT_LT(num::frobenius_norm(num::commutator(L, R)), 1e-12);
}

TEST(Plan, Preconditions) {
  auto H = lat::build_xyz_chain(6);
  try {
    rec::plan_recovery(H, gibbs::make_partition(H, {1}, {5}), 0.25, 1.0, 1.0);
    FAIL() << "expected a refusal";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("R > 2 l_H + 2"), std::string::npos);
  }
  // B too thin for a core on each side
  auto thin = lat::build_xyz_chain(4);
  EXPECT_THROW(rec::plan_recovery(thin, gibbs::make_partition(thin, {1}, {4}), 0.25, 1.0, 1.0), std::invalid_argument);
  auto p = gibbs::make_partition(H, {1}, {6});
  EXPECT_THROW(rec::plan_recovery(H, p, 0.25, 1.0, 1.0, 1, {3}), std::invalid_argument);
  EXPECT_EQ(rec::plan_recovery(H, p, 0.25, 1.0, 1.0, 1, {4, 3}).order, (std::vector<int>{4, 3}));
}

TEST(Tau2, ExactPreparation) {
  auto H = lat::build_xyz_chain(6);
  auto p = gibbs::make_partition(H, {1}, {6});
  auto t2 = rec::tau2_prepare(H, p, 0.25);
  num::Rng rng(9);
  MatD rho = num::random_density(64, rng);
  MatD out = t2.apply(rho);
  EXPECT_NEAR(out.trace().re, 1.0, 1e-13);
  EXPECT_LT(num::max_abs_diff(t2.apply(out), out), 1e-14);
  std::vector<int> B2C = lat::set_union(p.B2, p.C);
  MatD target = gibbs::gibbs_state<double>(lat::subset_hamiltonian(H, lat::set_union(p.B2c, p.C)), 0.25).rho;
  EXPECT_LT(num::max_abs_diff(num::partial_trace(out, B2C, 6, 2), num::partial_trace(target, B2C, 6, 2)), 1e-12);
  // the B2 \ B2c shell is maximally mixed
  MatD shell = num::partial_trace(out, {4}, 6, 2);
  EXPECT_LT(num::max_abs_diff(shell, MatD(MatD::identity(2) * 0.5)), 1e-12);
  // tau2 (tr_C rho~) = rho~ for the factorized state
  auto plan = rec::plan_recovery(H, p, 0.25, 1.0, 1.0);
  MatD tilde = gibbs::gibbs_state<double>(plan.chain.front(), 0.25).rho;
  MatD in = ckg::prepare_channel(6, p.C, MatD(MatD::identity(2) * 0.5)).apply(tilde);
  EXPECT_LE(td(t2.apply(in), tilde), 1e-10);
}

TEST(Chain, EmptyShellIsIdentity) {
  // no term crosses the B1|B2 cut, so the term scan leaves no shell
  auto H = drop_bonds(lat::build_xyz_chain(6), {{3, 4}});
  auto plan = rec::plan_recovery(H, gibbs::make_partition(H, {1}, {6}), 0.25, 1.0, 1.0);
  EXPECT_EQ(plan.nbar, 0);
  EXPECT_EQ(plan.part.B1c, (std::vector<int>{2, 3}));
  auto c = rec::chain_bp_channels(plan, rec::Direction::Recouple);
  EXPECT_TRUE(c.step_errors.empty());
  EXPECT_EQ(c.composite_error, 0.0);
  EXPECT_TRUE(c.channel.stages.empty());
}

TEST(Chain, SingleStepEqualsStepError) {
  // first step of the XYZ chain as a one-step plan
  auto H = lat::build_xyz_chain(6);
  auto plan = rec::plan_recovery(H, gibbs::make_partition(H, {1}, {6}), 0.25, 2.0, 1.0);
  plan.chain.resize(2);
  plan.order.resize(1);
  plan.nbar = 1;
  auto c = rec::chain_bp_channels(plan, rec::Direction::Recouple);
  ASSERT_EQ(c.step_errors.size(), 1u);
  EXPECT_NEAR(c.composite_error, c.step_errors[0], 1e-14);
  EXPECT_GT(c.composite_error, 0.0);
}

TEST(Chain, TwoStepsObeyTriangleInequality) {
  auto H = lat::build_xyz_chain(6);
  auto plan = rec::plan_recovery(H, gibbs::make_partition(H, {1}, {6}), 0.25, 2.0, 1.0);
  for (auto dir : {rec::Direction::Decouple, rec::Direction::Recouple}) {
    auto c = rec::chain_bp_channels(plan, dir);
    ASSERT_EQ(c.step_errors.size(), 2u);
    EXPECT_LE(c.composite_error, c.step_errors[0] + c.step_errors[1] + 1e-12);
    EXPECT_TRUE(lat::subset_of(c.channel.support, {2, 3, 4, 5}));
  }
  // wide balls escape B1 u B2
  auto wide = rec::plan_recovery(H, gibbs::make_partition(H, {1}, {6}), 0.25, 4.0, 1.0);
  EXPECT_THROW(rec::chain_bp_channels(wide, rec::Direction::Recouple), std::runtime_error);
}

TEST(Audit, InfiniteTemperature) {
  auto H = lat::build_xyz_chain(6);
  auto rep = rec::full_recovery_audit(H, gibbs::make_partition(H, {1}, {6}), 0.0, 1.0, 1.0);
  EXPECT_LE(rep.recovery_error, 1e-10);
  EXPECT_LE(rep.cmi_bits, 1e-10);
}

TEST(Audit, DecoupledHamiltonian) {
  auto H = drop_bonds(lat::build_xyz_chain(6), {{2, 3}, {3, 4}, {4, 5}});
  auto p = gibbs::make_partition(H, {1}, {6});
  auto rep = rec::full_recovery_audit(H, p, 0.25, 1.0, 1.0);
  EXPECT_LE(rep.recovery_error, 1e-12);
  for (double e : rep.per_step_errors) EXPECT_LE(e, 1e-12);
  EXPECT_LE(rep.cmi_bits, 1e-10);
}

TEST(Audit, XyzSixSites) {
  auto H = lat::build_xyz_chain(6);
  auto p = gibbs::make_partition(H, {1}, {6});
  ckg::QuantumChannel tau;
  auto rep = rec::run_recovery(rec::plan_recovery(H, p, 0.25, 2.0, 2.0), &tau);
  EXPECT_TRUE(rep.chain_holds);
  EXPECT_LE(rep.recovery_error, rep.tau1_error + rep.tau3_error + 1e-12);
  EXPECT_TRUE(rep.fr_holds);
  EXPECT_LE(rep.cmi_bits, rep.fr_rhs);
  EXPECT_EQ(rep.per_step_errors.size(), 4u);
  EXPECT_EQ(rep.nbar, 2);
  // the assembled map acts trivially on A
  num::Rng rng(21);
  MatD O = num::embed_on_sites(num::random_hermitian(2, rng), {1}, 6, 2);
  MatD rho = num::random_density(64, rng);
  EXPECT_LE(num::op_norm(MatD(tau.apply(num::matmul(O, rho)) - num::matmul(O, tau.apply(rho)))), 1e-8);
  auto js = rec::to_json(rep);
  for (const char* key : {"recovery_error", "per_step_errors", "cmi_bits", "fr_rhs", "nbar", "nbar_refined"})
    EXPECT_NE(js.find(key), std::string::npos) << key;
}

TEST(Purification, Counterexample) {
  auto r = rec::purification_counterexample();
  EXPECT_TRUE(r.cnot_fixture);
  EXPECT_NEAR(r.bell_pt_min, -0.5, 1e-14);
  EXPECT_GE(r.mixture_pt_min, -1e-15);
  EXPECT_NEAR(r.bell_fidelity, 1.0, 1e-14);
  EXPECT_NEAR(r.ghz_cmi_bits, 1.0, 1e-12);
}
