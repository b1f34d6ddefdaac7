#pragma once

#include <limits>
#include <vector>

#include "qbp/ckg/ckg.hpp"

namespace qbp::ckg {

// One stage of a channel on an n-site chain.
//   Evolve:  rho -> e^{L dt} rho with L local to L.sites
//   Prepare: rho -> tr_{sites}(rho) (x) state, state placed on `sites`
struct ChannelStage {
  enum class Kind { Evolve, Prepare };
  Kind kind = Kind::Evolve;
  Superop L;
  double dt = 0;
  std::vector<int> sites;
  MatD state;
};

struct QuantumChannel {
  int n = 0, d = 2;
  std::vector<int> support;
  std::vector<ChannelStage> stages;  // applied first to last
  double epsilon = std::numeric_limits<double>::quiet_NaN();  // measured trace-norm error, NaN if unset

  MatD apply(const MatD& rho) const;
  MatD superop() const;  // dense D^2 x D^2, small chains only
};

QuantumChannel identity_channel(int n, int d = 2);
// second o first; epsilon is left unset.
QuantumChannel compose(const QuantumChannel& first, const QuantumChannel& second);
QuantumChannel prepare_channel(int n, const std::vector<int>& sites, const MatD& state, int d = 2);

// X_m = i0[m dr], Xt_m = i0[(m - 1/2) dr], dr = r/(M+1), dt = t/M, m = 1..M.
struct LayerGeometry {
  std::vector<std::vector<int>> X, Xt;
  double dr = 0, dt = 0;
};
LayerGeometry layer_geometry(int i0, double r, double t, int M, int n);

// e^{Lbar_{X_M} dt} ... e^{Lbar_{X_1} dt}, Lbar_X = subset Liouvillian of X with centers Xt.
QuantumChannel layered_channel(const Generator& G, int i0, double r, double t, int M);

struct LayeredResult {
  MatD state;
  double error = 0;  // ||state - e^{L t} rho0||_1
};
LayeredResult layered_local_evolution(const Generator& G, const MatD& rho0, int i0, double r, double t, int M);

// Site whose incident terms distinguish H_L and H_L' (the single site of L' \ L).
int updated_site(const lat::Hamiltonian& HL, const lat::Hamiltonian& HLp);

// Layered evolution of the H_L' generator around the updated site; epsilon is measured
// against the exact Gibbs target. i0 <= 0 infers the site.
QuantumChannel bp_channel_lindblad(const lat::Hamiltonian& HL, const lat::Hamiltonian& HLp, double beta, double r,
                                   double t, int M = 1, int i0 = 0, const QuadConfig& q = {});

}  // namespace qbp::ckg
