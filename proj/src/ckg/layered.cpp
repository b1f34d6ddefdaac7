#include "qbp/ckg/layered.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "qbp/numkit/kernels.hpp"

namespace qbp::ckg {

namespace {

MatD place(const MatD& rest, const std::vector<int>& sites, const MatD& state, int n, int d) {
  num::SplitIndex s = num::make_split(n, d, sites);
  if (state.rows() != s.dy || rest.rows() != s.dz) throw std::invalid_argument("prepare: dimension mismatch");
  const std::size_t D = s.dy * s.dz;
  MatD out(D, D);
  for (std::size_t y1 = 0; y1 < s.dy; ++y1)
    for (std::size_t y2 = 0; y2 < s.dy; ++y2) {
      const cd sv = state(y1, y2);
      if (sv.re == 0 && sv.im == 0) continue;
      for (std::size_t z1 = 0; z1 < s.dz; ++z1)
        for (std::size_t z2 = 0; z2 < s.dz; ++z2)
          out(s.full[y1 * s.dz + z1], s.full[y2 * s.dz + z2]) = sv * rest(z1, z2);
    }
  return out;
}

MatD apply_stage(const ChannelStage& st, const MatD& rho, int n, int d) {
  if (st.kind == ChannelStage::Kind::Prepare) {
    MatD rest = num::partial_trace(rho, num::complement(st.sites, n), n, d);
    return place(rest, st.sites, st.state, n, d);
  }
  if (st.dt == 0) return rho;
  auto L = [&](const MatD& X) { return num::apply_local(st.L, X, n, d); };
  return num::expv<double>(L, superop_norm_bound(st.L.S), st.dt, rho);
}

}  // namespace

MatD QuantumChannel::apply(const MatD& rho) const {
  MatD cur = rho;
  for (const auto& st : stages) cur = apply_stage(st, cur, n, d);
  return cur;
}

MatD QuantumChannel::superop() const {
  std::size_t D = 1;
  for (int k = 0; k < n; ++k) D *= static_cast<std::size_t>(d);
  num::check_superop_budget(D);
  MatD S(D * D, D * D), E(D, D);
  for (std::size_t b = 0; b < D * D; ++b) {
    E(b / D, b % D) = cd(1.0);
    MatD img = apply(E);
    E(b / D, b % D) = cd();
    for (std::size_t a = 0; a < D * D; ++a) S(a, b) = img.storage()[a];
  }
  return S;
}

QuantumChannel identity_channel(int n, int d) {
  QuantumChannel c;
  c.n = n;
  c.d = d;
  c.epsilon = 0;
  return c;
}

QuantumChannel compose(const QuantumChannel& first, const QuantumChannel& second) {
  if (first.n != second.n || first.d != second.d) throw std::invalid_argument("compose: chain mismatch");
  QuantumChannel c = first;
  c.stages.insert(c.stages.end(), second.stages.begin(), second.stages.end());
  c.support = lat::set_union(first.support, second.support);
  c.epsilon = std::numeric_limits<double>::quiet_NaN();
  return c;
}

QuantumChannel prepare_channel(int n, const std::vector<int>& sites, const MatD& state, int d) {
  QuantumChannel c;
  c.n = n;
  c.d = d;
  c.support = sites;
  std::sort(c.support.begin(), c.support.end());
  ChannelStage st;
  st.kind = ChannelStage::Kind::Prepare;
  st.sites = c.support;
  st.state = state;
  c.stages.push_back(std::move(st));
  c.epsilon = 0;
  return c;
}

LayerGeometry layer_geometry(int i0, double r, double t, int M, int n) {
  if (M < 1) throw std::invalid_argument("layered: M must be >= 1");
  if (r < 0 || t < 0) throw std::invalid_argument("layered: r and t must be >= 0");
  if (i0 < 1 || i0 > n) throw std::out_of_range("layered: i0 outside the chain");
  LayerGeometry g;
  g.dr = r / (M + 1);
  g.dt = t / M;
  for (int m = 1; m <= M; ++m) {
    g.X.push_back(lat::ball(i0, m * g.dr, n));
    g.Xt.push_back(lat::ball(i0, (m - 0.5) * g.dr, n));
  }
  return g;
}

QuantumChannel layered_channel(const Generator& G, int i0, double r, double t, int M) {
  LayerGeometry g = layer_geometry(i0, r, t, M, G.n);
  QuantumChannel c;
  c.n = G.n;
  c.d = G.d;
  c.support = g.X.back();
  if (t == 0) return c;
  for (int m = 0; m < M; ++m) {
    ChannelStage st;
    st.L = subset_liouvillian(G, g.X[static_cast<std::size_t>(m)], g.Xt[static_cast<std::size_t>(m)]);
    st.dt = g.dt;
    st.sites = st.L.sites;
    c.stages.push_back(std::move(st));
  }
  return c;
}

LayeredResult layered_local_evolution(const Generator& G, const MatD& rho0, int i0, double r, double t, int M) {
  if (G.n > 6) throw std::invalid_argument("layered_local_evolution: n must be <= 6");
  LayeredResult res;
  res.state = layered_channel(G, i0, r, t, M).apply(rho0);
  MatD full = evolve(G, rho0, t);
  res.error = num::trace_norm(num::hermitian_part(MatD(res.state - full)));
  return res;
}

int updated_site(const lat::Hamiltonian& HL, const lat::Hamiltonian& HLp) {
  auto covered = [](const lat::Hamiltonian& H) {
    std::set<int> s;
    for (std::size_t k = 0; k < H.terms.size(); ++k)
      if (H.coef[k] != 0.0) s.insert(H.terms[k].sites.begin(), H.terms[k].sites.end());
    return s;
  };
  std::set<int> a = covered(HL), b = covered(HLp);
  std::vector<int> fresh;
  for (int x : b)
    if (!a.count(x)) fresh.push_back(x);
  if (fresh.size() == 1) return fresh.front();
  // a removal, or an update on a site that already carries terms: intersect the changed terms
  std::vector<std::vector<int>> changed;
  auto diff = [&](const lat::Hamiltonian& X, const lat::Hamiltonian& Y) {
    for (std::size_t k = 0; k < X.terms.size(); ++k) {
      bool found = false;
      for (std::size_t j = 0; j < Y.terms.size() && !found; ++j)
        found = Y.terms[j].label == X.terms[k].label && Y.coef[j] == X.coef[k];
      if (!found) changed.push_back(X.terms[k].sites);
    }
  };
  diff(HL, HLp);
  diff(HLp, HL);
  if (changed.empty()) throw std::invalid_argument("updated_site: Hamiltonians are identical; pass i0");
  std::vector<int> common = changed.front();
  std::sort(common.begin(), common.end());
  for (auto s : changed) {
    std::sort(s.begin(), s.end());
    std::vector<int> keep;
    std::set_intersection(common.begin(), common.end(), s.begin(), s.end(), std::back_inserter(keep));
    common = keep;
  }
  if (common.size() != 1) throw std::invalid_argument("updated_site: update is not a single-site enlargement; pass i0");
  return common.front();
}

QuantumChannel bp_channel_lindblad(const lat::Hamiltonian& HL, const lat::Hamiltonian& HLp, double beta, double r,
                                   double t, int M, int i0, const QuadConfig& q) {
  if (i0 <= 0) i0 = updated_site(HL, HLp);
  Generator G = build_ckg(HLp, beta, q);
  QuantumChannel c = layered_channel(G, i0, r, t, M);
  auto from = gibbs::gibbs_state<double>(HL, beta);
  auto to = gibbs::gibbs_state<double>(HLp, beta);
  c.epsilon = num::trace_norm(num::hermitian_part(MatD(c.apply(from.rho) - to.rho)));
  return c;
}

}  // namespace qbp::ckg
