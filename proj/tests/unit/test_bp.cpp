#include <gtest/gtest.h>

#include <cmath>

#include "qbp/bp/bp.hpp"
#include "qbp/numkit/fit.hpp"
#include "qbp/numkit/random.hpp"

using namespace qbp;
using num::BigFloat;
using num::cd;
using num::MatD;

namespace {

lat::Hamiltonian zz_chain(int n) {
  std::vector<lat::Term> terms;
  MatD ZZ = num::kron(lat::pauli<double>('Z'), lat::pauli<double>('Z'));
  for (int i = 1; i < n; ++i) terms.push_back({{i, i + 1}, ZZ, "zz" + std::to_string(i), {}});
  return lat::make_hamiltonian({n, 2}, terms);
}

lat::Hamiltonian add_term(lat::Hamiltonian H, const std::vector<int>& sites, const MatD& op, const std::string& label) {
  H.terms.push_back({sites, op, label, {}});
  H.coef.push_back(1.0);
  return H;
}

}  // namespace

TEST(ExactBp, IdentityWhenUnchanged) {
  auto H = lat::build_xyz_chain(4);
  auto op = bp::exact_bp<double>(H, H, 0.7, 2);
  EXPECT_LT(num::max_abs_diff(op.phi, MatD::identity(16)), 1e-13);
}

TEST(ExactBp, CommutingUpdateFactorizes) {
  auto H = zz_chain(3);
  MatD Z = lat::pauli<double>('Z');
  Z *= 0.7;
  auto Hp = add_term(H, {2}, Z, "z2");
  const double beta = 0.9;
  auto op = bp::exact_bp<double>(H, Hp, beta, 2);
  MatD v = num::embed_on_sites(Z, {2}, 3, 2);
  EXPECT_LT(num::max_abs_diff(op.phi, num::mat_exp_hermitian(v, beta / 2)), 1e-13);
  EXPECT_EQ(bp::update_support<double>(H, Hp), (std::vector<int>{2}));
}

TEST(ExactBp, LastSiteResidual) {
  auto u = bp::site_update(lat::build_xyz_chain(5), 5);
  EXPECT_EQ(u.H.terms.size() + 2, u.Hp.terms.size());
  EXPECT_EQ(bp::update_support<double>(u.H, u.Hp), (std::vector<int>{4, 5}));
  auto op = bp::exact_bp<double>(u.H, u.Hp, 0.5, 5);
  EXPECT_LE(bp::conjugation_residual(op), 1e-10);
}

TEST(ExactBp, ResidualScalesWithPrecision) {
  auto u = bp::site_update(lat::build_xyz_chain(3), 3);
  double r30, r60;
  {
    num::PrecisionScope ps(30);
    r30 = bp::conjugation_residual(bp::exact_bp<BigFloat>(u.H, u.Hp, 0.5, 3)).to_double();
  }
  {
    num::PrecisionScope ps(60);
    r60 = bp::conjugation_residual(bp::exact_bp<BigFloat>(u.H, u.Hp, 0.5, 3)).to_double();
  }
  // dim^2 10^{6-P}
  EXPECT_LE(r30, 64 * 1e-24);
  EXPECT_LE(r60, 64 * 1e-54);
  EXPECT_LE(r60, r30 * 1e-15);
}

TEST(TruncateBp, FullCoverAndNoUpdate) {
  auto u = bp::site_update(lat::build_xyz_chain(5), 5);
  auto op = bp::exact_bp<double>(u.H, u.Hp, 0.5, 5);
  auto e = bp::bp_truncation_error(op, 4);
  EXPECT_LE(e.raw, 1e-10);
  EXPECT_LE(e.renormalized, 1e-10);
  EXPECT_LT(num::max_abs_diff(bp::truncate_bp(op, 4).phi, op.phi), 1e-14);
  auto H = lat::build_xyz_chain(4);
  for (int ell = 0; ell <= 3; ++ell) EXPECT_LT(bp::bp_truncation_error<double>(H, H, 0.5, 2, ell).raw, 1e-13);
}

TEST(TruncateBp, StrictlyLocal) {
  auto u = bp::site_update(lat::build_xyz_chain(5), 5);
  auto op = bp::exact_bp<double>(u.H, u.Hp, 0.5, 5);
  num::Rng rng(77);
  for (int ell = 0; ell <= 3; ++ell) {
    auto t = bp::truncate_bp(op, ell);
    auto far = num::complement(t.support, 5);
    MatD O = num::embed_on_sites(num::random_ginibre(1u << far.size(), rng), far, 5, 2);
    EXPECT_LE(num::op_norm(num::commutator(t.phi, O)), 1e-12) << "ell=" << ell;
  }
}

TEST(TruncateBp, DecayOnXyz8) {
  auto u = bp::site_update(lat::build_xyz_chain(8), 8);
  auto op = bp::exact_bp<double>(u.H, u.Hp, 0.5, 8);
  std::vector<double> x, raw, ren;
  for (int ell = 1; ell <= 6; ++ell) {
    auto e = bp::bp_truncation_error(op, ell);
    x.push_back(ell);
    raw.push_back(e.raw);
    ren.push_back(e.renormalized);
  }
  EXPECT_TRUE(num::strictly_decreasing(raw));
  auto f = num::log_linear_fit(x, raw);
  EXPECT_LT(f.slope, 0.0);
  EXPECT_GE(std::fabs(f.r), 0.95);
  // bound shape: err(l) <= K e^{-kappa l} with kappa from the fit and K the smallest admissible prefactor
  const double kappa = -f.slope;
  double K = 0;
  for (std::size_t k = 0; k < x.size(); ++k) K = std::max(K, raw[k] * std::exp(kappa * x[k]));
  EXPECT_GT(kappa, 0.0);
  EXPECT_LT(K, 10.0);
  for (std::size_t k = 0; k < ren.size(); ++k) EXPECT_LE(ren[k], 2 * raw[k] + 1e-14);
}

TEST(LocalIndist, Trivial) {
  auto H = lat::build_xyz_chain(4);
  EXPECT_LT(bp::local_indistinguishability<double>(H, H, 0.5, 4, 1), 1e-14);
  auto u = bp::site_update(H, 4);
  EXPECT_LT(bp::local_indistinguishability<double>(u.H, u.Hp, 0.0, 4, 1), 1e-14);
  EXPECT_EQ(bp::local_indistinguishability<double>(u.H, u.Hp, 0.5, 4, 3), 0.0);
  EXPECT_GT(bp::local_indistinguishability<double>(u.H, u.Hp, 0.5, 4, 0), 1e-4);
}

TEST(LocalIndist, DecayOnXyz8) {
  auto u = bp::site_update(lat::build_xyz_chain(8), 8);
  std::vector<double> x, y;
  for (int ell = 0; ell <= 5; ++ell) {
    x.push_back(ell);
    y.push_back(bp::local_indistinguishability<double>(u.H, u.Hp, 0.5, 8, ell));
  }
  EXPECT_TRUE(num::strictly_decreasing(y));
  auto f = num::log_linear_fit(x, y);
  EXPECT_LT(f.slope, 0.0);
  EXPECT_GE(std::fabs(f.r), 0.9);
}

TEST(NormRatio, Cases) {
  auto H = lat::build_xyz_chain(4);
  auto same = bp::norm_ratio_audit<double>(H, H, 0.6);
  EXPECT_NEAR(same.ratio, 1.0, 1e-14);
  MatD cI = MatD::identity(2);
  cI *= 0.8;
  auto shifted = bp::norm_ratio_audit<double>(H, add_term(H, {3}, cI, "c"), 0.6);
  EXPECT_NEAR(shifted.ratio, std::exp(-0.6 * 0.8), 1e-14);
  EXPECT_TRUE(shifted.holds);
  auto u = bp::site_update(lat::build_xyz_chain(6), 3);
  for (double beta : {0.25, 0.5, 1.0}) {
    auto a = bp::norm_ratio_audit<double>(u.H, u.Hp, beta);
    EXPECT_TRUE(a.holds) << beta;
    EXPECT_LE(a.ratio, a.bound);
  }
  // reversed direction also obeys e^{beta ||v||}
  EXPECT_TRUE(bp::norm_ratio_audit<double>(u.Hp, u.H, 1.0).holds);
}
