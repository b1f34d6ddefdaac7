#pragma once

#include <string>
#include <vector>

#include "qbp/ckg/layered.hpp"
#include "qbp/gibbs/gibbs.hpp"

namespace qbp::rec {

using num::MatD;

// Update chain H_0 -> ... -> H_nbar = H over the shell sites (B1 B2) \ (B1c B2c).
// H_k = subset Hamiltonian on A u B1c u B2c u C u {order[0..k-1]}.
// part.B1c / part.B2c are recomputed by term scan: B sites of terms crossing (A B1)|(B2 C) are removed.
struct RecoveryPlan {
  lat::Hamiltonian H;
  gibbs::Partition part;
  double beta = 0, r = 0, t = 0;
  int M = 1;
  ckg::QuadConfig quad;
  std::vector<int> order;
  std::vector<lat::Hamiltonian> chain;
  int nbar = 0;
  int nbar_refined = 0;     // |dB1[l_H]| with dB1 the sites of B1 adjacent to B2
  double nbar_bound = 0;    // gamma^2 l_H (R/2)^0 min(|dA|, |dC|), gamma = 3 on a chain
  bool support_ok = false;  // r <= R/2 - l_H/2
};

// Default order: left to right over B1's shell, then right to left over B2's shell.
std::vector<int> default_order(const gibbs::Partition& p);

// Throws invalid_argument naming the violated condition (R > 2 l_H + 2, nonempty cores,
// order a permutation of the shell, H_0 factorization).
RecoveryPlan plan_recovery(const lat::Hamiltonian& H, const gibbs::Partition& p, double beta, double r, double t,
                           int M = 1, std::vector<int> order = {}, const ckg::QuadConfig& q = {});

enum class Direction { Decouple, Recouple };  // H -> H_0 (tau1), H_0 -> H (tau3)

struct ChainResult {
  ckg::QuantumChannel channel;
  std::vector<double> step_errors;  // ||tau_k rho(H_from) - rho(H_to)||_1 per step
  double composite_error = 0;       // ||prod tau_k rho(H_start) - rho(H_end)||_1
};
ChainResult chain_bp_channels(const RecoveryPlan& plan, Direction dir);

// Traces out B2 u C and prepares the B2 u C marginal of rho_beta(H_{B2c C})
// (maximally mixed on B2 \ B2c).
ckg::QuantumChannel tau2_prepare(const lat::Hamiltonian& H, const gibbs::Partition& p, double beta);

struct RecoveryReport {
  double recovery_error = 0;
  std::vector<double> per_step_errors;  // tau1 steps then tau3 steps
  double tau1_error = 0, tau3_error = 0;
  double step_sum = 0;
  bool chain_holds = false;       // composite errors <= sums of their step errors
  double cmi_bits = 0;
  double fr_rhs = 0;              // 7 log2(min(D_A, D_C)) sqrt(recovery_error)
  bool fr_holds = false;          // vacuous (true) when recovery_error > 1
  double budget = 0;              // 2 |B| max step error
  int nbar = 0, nbar_refined = 0;
  double nbar_bound = 0;
  std::vector<int> order;
};

// Input: tr_C(rho_beta) with C reset to maximally mixed, pushed through tau3 tau2 tau1.
RecoveryReport full_recovery_audit(const lat::Hamiltonian& H, const gibbs::Partition& p, double beta, double r,
                                   double t, int M = 1, std::vector<int> order = {}, const ckg::QuadConfig& q = {});
RecoveryReport run_recovery(const RecoveryPlan& plan, ckg::QuantumChannel* assembled = nullptr);

std::string to_json(const RecoveryReport& r);

struct PurificationReport {
  double bell_pt_min = 0;       // min eigenvalue of the partial transpose of tr_3(U GHZ U^dag)
  double mixture_pt_min = 0;    // same for tr_3(GHZ)
  double bell_fidelity = 0;     // <Phi+| tr_3(U GHZ U^dag) |Phi+>
  double ghz_cmi_bits = 0;      // I(1:3|2) of GHZ
  bool cnot_fixture = false;    // U|000> = |000>, U|111> = |110>
};
PurificationReport purification_counterexample();

}  // namespace qbp::rec
