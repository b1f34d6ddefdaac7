#include "qbp/recovery/recovery.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <stdexcept>

namespace qbp::rec {

namespace {

bool same_terms(const lat::Hamiltonian& a, const lat::Hamiltonian& b) {
  if (a.terms.size() != b.terms.size()) return false;
  for (std::size_t k = 0; k < a.terms.size(); ++k) {
    bool found = false;
    for (std::size_t j = 0; j < b.terms.size() && !found; ++j)
      found = a.terms[k].label == b.terms[j].label && a.terms[k].sites == b.terms[j].sites && a.coef[k] == b.coef[j];
    if (!found) return false;
  }
  return true;
}

MatD rho_of(const lat::Hamiltonian& H, double beta) { return gibbs::gibbs_state<double>(H, beta).rho; }

double tdist(const MatD& a, const MatD& b) { return num::trace_norm(num::hermitian_part(MatD(a - b))); }

MatD maximally_mixed(std::size_t D) {
  MatD m = MatD::identity(D);
  m *= 1.0 / static_cast<double>(D);
  return m;
}

std::size_t dim_of(std::size_t sites, int d) {
  std::size_t D = 1;
  for (std::size_t k = 0; k < sites; ++k) D *= static_cast<std::size_t>(d);
  return D;
}

}  // namespace

std::vector<int> default_order(const gibbs::Partition& p) {
  std::vector<int> s1 = lat::set_minus(p.B1, p.B1c), s2 = lat::set_minus(p.B2, p.B2c);
  std::sort(s1.begin(), s1.end());
  std::sort(s2.rbegin(), s2.rend());
  s1.insert(s1.end(), s2.begin(), s2.end());
  return s1;
}

RecoveryPlan plan_recovery(const lat::Hamiltonian& H, const gibbs::Partition& p, double beta, double r, double t,
                           int M, std::vector<int> order, const ckg::QuadConfig& q) {
  if (!(p.R > 2 * p.lH + 2))
    throw std::invalid_argument("plan_recovery: need R > 2 l_H + 2, got R = " + std::to_string(p.R) +
                                ", l_H = " + std::to_string(p.lH));
  if (beta < 0 || r < 0 || t < 0) throw std::invalid_argument("plan_recovery: beta, r, t must be >= 0");
  RecoveryPlan plan;
  plan.H = H;
  plan.part = p;
  // cores by term scan: drop the B sites of every term crossing (A u B1) | (B2 u C)
  {
    const std::vector<int> lhs = lat::set_union(p.A, p.B1), rhs = lat::set_union(p.B2, p.C);
    std::vector<int> cut;
    for (std::size_t k = 0; k < H.terms.size(); ++k) {
      const auto& s = H.terms[k].sites;
      if (H.coef[k] == 0.0 || lat::subset_of(s, lhs) || lat::subset_of(s, rhs)) continue;
      cut = lat::set_union(cut, s);
    }
    plan.part.B1c = lat::set_minus(p.B1, cut);
    plan.part.B2c = lat::set_minus(p.B2, cut);
  }
  if (plan.part.B1c.empty() || plan.part.B2c.empty())
    throw std::invalid_argument("plan_recovery: trimmed core of B1 or B2 is empty (B too thin)");
  plan.beta = beta;
  plan.r = r;
  plan.t = t;
  plan.M = M;
  plan.quad = q;
  const gibbs::Partition& c = plan.part;
  std::vector<int> shell = lat::set_minus(c.B, lat::set_union(c.B1c, c.B2c));
  if (order.empty()) order = default_order(c);
  std::vector<int> sorted = order;
  std::sort(sorted.begin(), sorted.end());
  std::sort(shell.begin(), shell.end());
  if (sorted != shell) throw std::invalid_argument("plan_recovery: order must be a permutation of the shell sites");
  plan.order = order;
  plan.nbar = static_cast<int>(order.size());

  std::vector<int> base = lat::set_union(lat::set_union(p.A, c.B1c), lat::set_union(c.B2c, p.C));
  std::vector<int> L = base;
  plan.chain.push_back(lat::subset_hamiltonian(H, L));
  for (int s : order) {
    L = lat::set_union(L, {s});
    plan.chain.push_back(lat::subset_hamiltonian(H, L));
  }
  const std::vector<int> left = lat::set_union(p.A, c.B1c), right = lat::set_union(c.B2c, p.C);
  for (const auto& term : plan.chain.front().terms)
    if (!lat::subset_of(term.sites, left) && !lat::subset_of(term.sites, right))
      throw std::invalid_argument("plan_recovery: H_0 does not factorize across the B1|B2 cut (term " + term.label +
                                  ")");
  if (!same_terms(plan.chain.back(), H)) throw std::invalid_argument("plan_recovery: chain does not end at H");

  // sites of B1 next to B2, fattened by l_H
  std::vector<int> dB1;
  for (int b : p.B1)
    if (lat::distance({b}, p.B2) == 1) dB1.push_back(b);
  plan.nbar_refined = static_cast<int>(lat::ball(dB1, p.lH, H.lattice.n).size());
  auto boundary = [&](const std::vector<int>& X) {
    int c = 0;
    for (int x : X)
      if (lat::distance({x}, num::complement(X, H.lattice.n)) == 1) ++c;
    return c;
  };
  const double gamma = 3;
  plan.nbar_bound = gamma * gamma * p.lH * std::min(boundary(p.A), boundary(p.C));
  plan.support_ok = r <= p.R / 2.0 - p.lH / 2.0;
  return plan;
}

ChainResult chain_bp_channels(const RecoveryPlan& plan, Direction dir) {
  const int n = plan.H.lattice.n, d = plan.H.lattice.d;
  const std::vector<int> B12 = lat::set_union(plan.part.B1, plan.part.B2);
  ChainResult res;
  res.channel = ckg::identity_channel(n, d);
  std::vector<std::pair<int, int>> steps;  // (from, to) indices into the chain
  if (dir == Direction::Recouple)
    for (int k = 1; k <= plan.nbar; ++k) steps.push_back({k - 1, k});
  else
    for (int k = plan.nbar; k >= 1; --k) steps.push_back({k, k - 1});
  for (auto [from, to] : steps) {
    const auto& Hf = plan.chain[static_cast<std::size_t>(from)];
    const auto& Ht = plan.chain[static_cast<std::size_t>(to)];
    const int i0 = plan.order[static_cast<std::size_t>(std::max(from, to) - 1)];
    ckg::QuantumChannel step;
    if (plan.beta == 0 || same_terms(Hf, Ht)) {
      // nothing to update: identical Gibbs states
      step = ckg::identity_channel(n, d);
      step.epsilon = tdist(rho_of(Hf, plan.beta), rho_of(Ht, plan.beta));
    } else {
      step = ckg::bp_channel_lindblad(Hf, Ht, plan.beta, plan.r, plan.t, plan.M, i0, plan.quad);
    }
    if (!lat::subset_of(step.support, B12))
      throw std::runtime_error("chain_bp_channels: step support escapes B1 u B2 (plan violation at site " +
                               std::to_string(i0) + ")");
    res.step_errors.push_back(step.epsilon);
    res.channel = ckg::compose(res.channel, step);
  }
  const auto& Hs = plan.chain[dir == Direction::Recouple ? 0 : static_cast<std::size_t>(plan.nbar)];
  const auto& He = plan.chain[dir == Direction::Recouple ? static_cast<std::size_t>(plan.nbar) : 0];
  res.composite_error = tdist(res.channel.apply(rho_of(Hs, plan.beta)), rho_of(He, plan.beta));
  res.channel.epsilon = res.composite_error;
  return res;
}

ckg::QuantumChannel tau2_prepare(const lat::Hamiltonian& H, const gibbs::Partition& p, double beta) {
  const int n = H.lattice.n, d = H.lattice.d;
  std::vector<int> target = lat::set_union(p.B2, p.C);
  MatD full = rho_of(lat::subset_hamiltonian(H, lat::set_union(p.B2c, p.C)), beta);
  return ckg::prepare_channel(n, target, num::partial_trace(full, target, n, d), d);
}

RecoveryReport run_recovery(const RecoveryPlan& plan, ckg::QuantumChannel* assembled) {
  const auto& p = plan.part;
  const int n = plan.H.lattice.n, d = plan.H.lattice.d;
  RecoveryReport rep;
  ChainResult t1 = chain_bp_channels(plan, Direction::Decouple);
  ChainResult t3 = chain_bp_channels(plan, Direction::Recouple);
  ckg::QuantumChannel t2 = tau2_prepare(plan.H, p, plan.beta);
  ckg::QuantumChannel tau = ckg::compose(ckg::compose(t1.channel, t2), t3.channel);

  MatD rho = rho_of(plan.H, plan.beta);
  MatD input = ckg::prepare_channel(n, p.C, maximally_mixed(dim_of(p.C.size(), d)), d).apply(rho);
  rep.recovery_error = tdist(tau.apply(input), rho);
  tau.epsilon = rep.recovery_error;
  if (assembled) *assembled = tau;

  rep.per_step_errors = t1.step_errors;
  rep.per_step_errors.insert(rep.per_step_errors.end(), t3.step_errors.begin(), t3.step_errors.end());
  rep.tau1_error = t1.composite_error;
  rep.tau3_error = t3.composite_error;
  double s1 = 0, s3 = 0, worst = 0;
  for (double e : t1.step_errors) s1 += e, worst = std::max(worst, e);
  for (double e : t3.step_errors) s3 += e, worst = std::max(worst, e);
  rep.step_sum = s1 + s3;
  rep.chain_holds = t1.composite_error <= s1 + 1e-12 && t3.composite_error <= s3 + 1e-12;
  rep.cmi_bits = gibbs::cmi(rho, p.A, p.B, p.C, n, d).value;
  const double dmin = static_cast<double>(std::min(dim_of(p.A.size(), d), dim_of(p.C.size(), d)));
  rep.fr_rhs = 7 * std::log2(dmin) * std::sqrt(rep.recovery_error);
  rep.fr_holds = rep.recovery_error > 1 || rep.cmi_bits <= rep.fr_rhs;
  rep.budget = 2.0 * static_cast<double>(p.B.size()) * worst;
  rep.nbar = plan.nbar;
  rep.nbar_refined = plan.nbar_refined;
  rep.nbar_bound = plan.nbar_bound;
  rep.order = plan.order;
  return rep;
}

RecoveryReport full_recovery_audit(const lat::Hamiltonian& H, const gibbs::Partition& p, double beta, double r,
                                   double t, int M, std::vector<int> order, const ckg::QuadConfig& q) {
  return run_recovery(plan_recovery(H, p, beta, r, t, M, std::move(order), q));
}

std::string to_json(const RecoveryReport& r) {
  nlohmann::json j;
  j["recovery_error"] = r.recovery_error;
  j["per_step_errors"] = r.per_step_errors;
  j["cmi_bits"] = r.cmi_bits;
  j["fr_rhs"] = r.fr_rhs;
  j["nbar"] = r.nbar;
  j["nbar_refined"] = r.nbar_refined;
  j["nbar_bound"] = r.nbar_bound;
  j["tau1_error"] = r.tau1_error;
  j["tau3_error"] = r.tau3_error;
  j["step_sum"] = r.step_sum;
  j["chain_holds"] = r.chain_holds;
  j["fr_holds"] = r.fr_holds;
  j["budget"] = r.budget;
  j["order"] = r.order;
  return j.dump(2);
}

PurificationReport purification_counterexample() {
  PurificationReport rep;
  const std::size_t D = 8;
  MatD ghz(D, 1);
  ghz(0, 0) = num::cd(1 / std::sqrt(2.0));
  ghz(7, 0) = num::cd(1 / std::sqrt(2.0));
  // CNOT with control site 2, target site 3
  MatD U(D, D);
  for (std::size_t x = 0; x < D; ++x) {
    std::size_t y = (x & 2) ? (x ^ 1) : x;
    U(y, x) = num::cd(1.0);
  }
  rep.cnot_fixture = U(0, 0).re == 1.0 && U(6, 7).re == 1.0;
  MatD G = num::matmul(ghz, ghz.adjoint());
  MatD out = num::matmul(num::matmul(U, G), U.adjoint());
  MatD bell = num::partial_trace(out, {1, 2}, 3, 2);
  MatD mix = num::partial_trace(G, {1, 2}, 3, 2);
  rep.bell_pt_min = num::eig_hermitian(num::partial_transpose(bell, {2}, 2, 2)).values.front();
  rep.mixture_pt_min = num::eig_hermitian(num::partial_transpose(mix, {2}, 2, 2)).values.front();
  MatD phi(4, 1);
  phi(0, 0) = num::cd(1 / std::sqrt(2.0));
  phi(3, 0) = num::cd(1 / std::sqrt(2.0));
  rep.bell_fidelity = num::matmul(num::matmul(phi.adjoint(), bell), phi)(0, 0).re;
  rep.ghz_cmi_bits = gibbs::cmi(G, {1}, {2}, {3}, 3, 2).value;
  return rep;
}

}  // namespace qbp::rec
