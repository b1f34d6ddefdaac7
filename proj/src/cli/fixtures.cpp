#include <cmath>
#include <functional>

#include "qbp/bch/bch.hpp"
#include "qbp/bp/bp.hpp"
#include "qbp/ckg/layered.hpp"
#include "qbp/cli/cli.hpp"
#include "qbp/cluster/cluster.hpp"
#include "qbp/recovery/recovery.hpp"

namespace qbp::cli {

using num::MatD;

namespace {

MatD P(char c) { return lat::pauli<double>(c); }
MatD I(std::size_t D) { return MatD::identity(D); }
MatD diag(std::initializer_list<double> v) {
  MatD M(v.size(), v.size());
  std::size_t k = 0;
  for (double x : v) M(k, k) = x, ++k;
  return M;
}
double diff(const MatD& a, const MatD& b) { return num::max_abs_diff(a, b); }

MatD bell() {
  MatD rho(4, 4);
  for (std::size_t i : {0u, 3u})
    for (std::size_t j : {0u, 3u}) rho(i, j) = 0.5;
  return rho;
}

MatD ghz3() {
  MatD rho(8, 8);
  for (std::size_t i : {0u, 7u})
    for (std::size_t j : {0u, 7u}) rho(i, j) = 0.5;
  return rho;
}

lat::Hamiltonian drop_bonds(const lat::Hamiltonian& H, const std::vector<std::vector<int>>& bonds) {
  std::vector<std::size_t> idx;
  for (std::size_t k = 0; k < H.terms.size(); ++k)
    for (const auto& b : bonds)
      if (H.terms[k].sites == b) idx.push_back(k);
  return lat::without_terms(H, idx);
}

lat::Hamiltonian z_fields(int n) {
  std::vector<lat::Term> t;
  for (int i = 1; i <= n; ++i) t.push_back({{i}, P('Z'), "z" + std::to_string(i), {}});
  return lat::make_hamiltonian({n, 2}, t);
}

class Suite {
 public:
  void check(const std::string& module, const std::string& name, const std::function<double()>& value,
             const std::function<bool(double)>& ok) {
    FixtureResult r{module, name, false, NAN};
    try {
      r.value = value();
      r.pass = ok(r.value);
    } catch (const std::exception&) {
      r.pass = false;
    }
    out.push_back(r);
  }
  // value is a residual that must stay below tol
  void small(const std::string& module, const std::string& name, double tol, const std::function<double()>& value) {
    check(module, name, value, [tol](double v) { return std::fabs(v) <= tol; });
  }
  // the body must throw
  void throws(const std::string& module, const std::string& name, const std::function<void()>& body) {
    bool thrown = false;
    try {
      body();
    } catch (const std::exception&) {
      thrown = true;
    }
    out.push_back({module, name, thrown, thrown ? 1.0 : 0.0});
  }
  std::vector<FixtureResult> out;
};

void numkit_fixtures(Suite& s) {
  s.small("numkit", "eig(Z) = (-1, 1)", 1e-15, [] {
    auto e = num::eig_hermitian(P('Z'));
    return std::fabs(e.values[0] + 1) + std::fabs(e.values[1] - 1);
  });
  s.small("numkit", "eig(I4) = (1, 1, 1, 1)", 1e-15, [] {
    double v = 0;
    for (double x : num::eig_hermitian(I(4)).values) v += std::fabs(x - 1);
    return v;
  });
  s.small("numkit", "exp(Z, 1) = diag(e, 1/e)", 1e-14,
          [] { return diff(num::mat_exp_hermitian(P('Z'), 1.0), diag({M_E, 1 / M_E})); });
  s.small("numkit", "exp(M, 0) = I", 1e-15, [] {
    num::Rng rng(1);
    return diff(num::mat_exp_hermitian(num::random_hermitian(4, rng), 0.0), I(4));
  });
  s.small("numkit", "log(I) = 0", 1e-15, [] { return num::frobenius_norm(num::mat_log_pd(I(3))); });
  s.small("numkit", "log diag(2, 1/2) = diag(ln 2, -ln 2)", 1e-15,
          [] { return diff(num::mat_log_pd(diag({2, 0.5})), diag({M_LN2, -M_LN2})); });
  s.small("numkit", "kron(Z, I2) acts as Z (x) I", 1e-15,
          [] { return diff(num::kron(P('Z'), I(2)), diag({1, 1, -1, -1})); });
  s.small("numkit", "embed(X, {2}, 3) = I (x) X (x) I", 1e-15, [] {
    return diff(num::embed_on_sites(P('X'), {2}, 3, 2), num::kron(num::kron(I(2), P('X')), I(2)));
  });
  s.small("numkit", "partial_trace(A (x) B, left) = tr(B) A", 1e-14, [] {
    num::Rng rng(2);
    MatD A = num::random_hermitian(2, rng), B = num::random_hermitian(2, rng);
    return diff(num::partial_trace(num::kron(A, B), {1}, 2, 2), MatD(A * B.trace()));
  });
  s.small("numkit", "Bell state, keep one qubit = I/2", 1e-15,
          [] { return diff(num::partial_trace(bell(), {2}, 2, 2), MatD(I(2) * 0.5)); });
  s.small("numkit", "norms of Z: 2, 1, sqrt 2", 1e-14, [] {
    return std::fabs(num::trace_norm(P('Z')) - 2) + std::fabs(num::op_norm(P('Z')) - 1) +
           std::fabs(num::frobenius_norm(P('Z')) - std::sqrt(2.0));
  });
  s.small("numkit", "||rho||_1 = 1", 1e-13, [] {
    num::Rng rng(3);
    return num::trace_norm(num::random_density(8, rng)) - 1;
  });
  s.small("numkit", "vec of [H, .] = H (x) I - I (x) H^T", 1e-13, [] {
    num::Rng rng(4);
    MatD H = num::random_hermitian(3, rng), rho = num::random_density(3, rng);
    std::vector<num::LRPair<double>> pairs = {{H, I(3), num::cd(1)}, {I(3), H, num::cd(-1)}};
    MatD S = num::vectorize_superop(pairs, 3);
    return diff(S, MatD(num::kron(H, I(3)) - num::kron(I(3), H.transpose()))) +
           diff(num::apply_superop(S, rho), num::commutator(H, rho));
  });
  s.small("numkit", "identity map vectorizes to I", 1e-15, [] {
    std::vector<num::LRPair<double>> pairs = {{I(3), I(3), num::cd(1)}};
    return diff(num::vectorize_superop(pairs, 3), I(9));
  });
}

void lattice_fixtures(Suite& s) {
  s.small("lattice", "n=2 dense dim 4, Hermitian", 1e-15, [] {
    MatD H = lat::assemble_dense<double>(lat::build_xyz_chain(2));
    return (H.rows() == 4 ? 0.0 : 1.0) + num::hermiticity_defect(H);
  });
  s.small("lattice", "L = whole chain: H_L = H, dh_L = 0", 1e-15, [] {
    auto H = lat::build_xyz_chain(4);
    auto L = lat::interval(1, 4);
    return diff(lat::assemble_dense<double>(lat::subset_hamiltonian(H, L)), lat::assemble_dense<double>(H)) +
           num::frobenius_norm(lat::boundary_term<double>(H, L));
  });
  s.small("lattice", "L = empty: H_L = 0", 1e-15, [] {
    return num::frobenius_norm(lat::assemble_dense<double>(lat::subset_hamiltonian(lat::build_xyz_chain(3), {})));
  });
  s.small("lattice", "Z field on n=1 is Z", 1e-15, [] { return diff(lat::assemble_dense<double>(z_fields(1)), P('Z')); });
  s.small("lattice", "commuting single-site terms sum their embeds", 1e-15, [] {
    return diff(lat::assemble_dense<double>(z_fields(2)), MatD(num::kron(P('Z'), I(2)) + num::kron(I(2), P('Z'))));
  });
  s.small("lattice", "all a = 1 reproduces H", 1e-15, [] {
    auto H = lat::build_xyz_chain(3);
    std::map<std::string, double> a;
    for (const auto& t : H.terms) a[t.label] = 1;
    return diff(lat::assemble_dense<double>(lat::parameterize(H, a)), lat::assemble_dense<double>(H));
  });
  s.small("lattice", "all a = 0 gives 0", 1e-15, [] {
    auto H = lat::build_xyz_chain(3);
    std::map<std::string, double> a;
    for (const auto& t : H.terms) a[t.label] = 0;
    return num::frobenius_norm(lat::assemble_dense<double>(lat::parameterize(H, a)));
  });
  s.small("lattice", "ball(3, 0) = {3}", 0, [] { return lat::ball(3, 0, 6) == std::vector<int>{3} ? 0.0 : 1.0; });
  s.small("lattice", "distance({1}, {4}) = 3", 0, [] { return lat::distance({1}, {4}) - 3.0; });
}

void gibbs_fixtures(Suite& s) {
  s.small("gibbs", "beta = 0: I/d^n and logZ = n ln d", 1e-14, [] {
    auto st = gibbs::gibbs_state<double>(lat::build_xyz_chain(3), 0.0);
    return diff(st.rho, MatD(I(8) * 0.125)) + std::fabs(st.logZ - 3 * M_LN2);
  });
  s.small("gibbs", "n=1, Z, beta=1: diag(e, 1/e)/Z", 1e-15, [] {
    const double Z = M_E + 1 / M_E;
    return diff(gibbs::gibbs_state<double>(z_fields(1), 1.0).rho, diag({M_E / Z, 1 / (M_E * Z)}));
  });
  s.small("gibbs", "reduced onto the chain is rho", 1e-15, [] {
    auto st = gibbs::gibbs_state<double>(lat::build_xyz_chain(3), 0.5);
    return diff(gibbs::reduced(st, {1, 2, 3}), st.rho);
  });
  s.small("gibbs", "beta = 0 reduced is maximally mixed", 1e-15, [] {
    auto st = gibbs::gibbs_state<double>(lat::build_xyz_chain(3), 0.0);
    return diff(gibbs::reduced(st, {2}), MatD(I(2) * 0.5));
  });
  s.small("gibbs", "pure state entropy 0", 1e-12, [] { return gibbs::entropy(bell()); });
  s.small("gibbs", "I/2 entropy 1 bit", 1e-14, [] { return gibbs::entropy(MatD(I(2) * 0.5)) - 1; });
  s.small("gibbs", "GHZ I(A:C|B) = 1 bit", 1e-12, [] { return gibbs::cmi(ghz3(), {1}, {2}, {3}, 3, 2).value - 1; });
  s.small("gibbs", "product state correlation 0", 1e-15, [] {
    MatD rho = num::kron(diag({0.7, 0.3}), diag({0.4, 0.6}));
    return num::cabs(gibbs::correlation(rho, P('Z'), {1}, P('Z'), {2}, 2, 2));
  });
  s.small("gibbs", "Bell state Cor(Z, Z) = 1", 1e-15, [] {
    return num::cabs(gibbs::correlation(bell(), P('Z'), {1}, P('Z'), {2}, 2, 2)) - 1;
  });
  s.small("gibbs", "[H, O] = 0 leaves O fixed", 1e-13, [] {
    MatD H = lat::assemble_dense<double>(z_fields(2)), O = num::embed_on_sites(P('Z'), {1}, 2, 2);
    return diff(gibbs::heisenberg_evolve(O, H, 1.7), O);
  });
  s.small("gibbs", "t = 0 leaves O fixed", 1e-14, [] {
    MatD H = lat::assemble_dense<double>(lat::build_xyz_chain(3)), O = num::embed_on_sites(P('X'), {2}, 3, 2);
    return diff(gibbs::heisenberg_evolve(O, H, 0.0), O);
  });
}

void bp_fixtures(Suite& s) {
  s.small("bp", "H' = H gives Phi = I", 1e-13, [] {
    auto H = lat::build_xyz_chain(3);
    return diff(bp::exact_bp<double>(H, H, 0.5, 2).phi, I(8));
  });
  s.small("bp", "[H, v] = 0 gives Phi = e^{beta v / 2}", 1e-13, [] {
    auto H = z_fields(3);
    auto Hp = H;
    Hp.terms.push_back({{2}, P('Z'), "v", {}});
    Hp.coef.push_back(0.8);
    MatD v = num::embed_on_sites(MatD(P('Z') * 0.8), {2}, 3, 2);
    return diff(bp::exact_bp<double>(H, Hp, 0.6, 2).phi, num::mat_exp_hermitian(v, 0.3));
  });
  s.small("bp", "ell covering the chain: error <= 1e-10", 1e-10, [] {
    auto u = bp::site_update(lat::build_xyz_chain(4), 2);
    return bp::bp_truncation_error<double>(u.H, u.Hp, 0.5, 2, 3).raw;
  });
  s.small("bp", "H' = H: truncation error 0", 1e-13, [] {
    auto H = lat::build_xyz_chain(4);
    double v = 0;
    for (int ell = 0; ell <= 3; ++ell) v = std::max(v, bp::bp_truncation_error<double>(H, H, 0.5, 2, ell).raw);
    return v;
  });
  s.small("bp", "H' = H: indistinguishability 0", 1e-14, [] {
    auto H = lat::build_xyz_chain(4);
    return bp::local_indistinguishability<double>(H, H, 0.5, 2, 1);
  });
  s.small("bp", "beta = 0: indistinguishability 0", 1e-14, [] {
    auto u = bp::site_update(lat::build_xyz_chain(4), 2);
    return bp::local_indistinguishability<double>(u.H, u.Hp, 0.0, 2, 0);
  });
  s.small("bp", "H' = H: norm ratio 1", 1e-14, [] {
    auto H = lat::build_xyz_chain(3);
    return bp::norm_ratio_audit<double>(H, H, 0.5).ratio - 1;
  });
  s.small("bp", "v = c I: ratio e^{-beta c}", 1e-13, [] {
    auto H = lat::build_xyz_chain(3);
    auto Hp = H;
    Hp.terms.push_back({{1}, I(2), "c", {}});
    Hp.coef.push_back(0.7);
    return bp::norm_ratio_audit<double>(H, Hp, 0.5).ratio - std::exp(-0.35);
  });
}

void ckg_fixtures(Suite& s) {
  s.small("ckg", "H = 0: A(w) = c(beta) e^{-beta^2 w^2 / 4} A", 1e-14, [] {
    MatD A = num::embed_on_sites(P('Y'), {1}, 2, 2);
    MatD want = A;
    want *= ckg::jump_prefactor(0.7) * std::exp(-0.49 * 0.16 / 4);
    return diff(ckg::jump_operator(MatD(4, 4), A, 0.4, 0.7), want);
  });
  s.check(
      "ckg", "H = 0, small beta: B Hermitian and below the bound",
      [] {
        MatD B = ckg::coherent_term(MatD(4, 4), num::embed_on_sites(P('X'), {1}, 2, 2), 0.1, {});
        return num::hermiticity_defect(B) + num::op_norm(B);
      },
      [](double v) { return v <= ckg::coherent_norm_bound(); });

  const ckg::Generator G = ckg::build_ckg(lat::build_xyz_chain(3), 0.25);
  s.small("ckg", "tr(L rho) = 0", 1e-10, [&] {
    num::Rng rng(5);
    return num::cabs(ckg::apply_generator(G, num::random_density(8, rng)).trace());
  });
  s.small("ckg", "evolve for t = 0 is the identity", 1e-15, [&] {
    num::Rng rng(6);
    MatD rho = num::random_density(8, rng);
    return diff(ckg::evolve(G, rho, 0.0), rho);
  });
  s.small("ckg", "chi2(rho, rho) = 0", 1e-14, [] {
    num::Rng rng(7);
    MatD rho = num::random_density(4, rng);
    return ckg::chi2(rho, rho);
  });
  s.small("ckg", "diagonal chi2 = sum (p' - p)^2 / p", 1e-14,
          [] { return ckg::chi2(diag({0.6, 0.4}), diag({0.3, 0.7})) - (0.09 / 0.3 + 0.09 / 0.7); });
  s.small("ckg", "ell covering the chain: L~ = L", 1e-10, [&] {
    double v = 0;
    for (int i = 1; i <= 3; ++i) v = std::max(v, diff(ckg::truncated_generator(G, i, 2).S, ckg::site_superop(G, i).S));
    return v;
  });
  s.small("ckg", "delta blocks telescope to the site block", 1e-10, [&] {
    auto ds = ckg::delta_blocks(G, 1, 2);
    ckg::Superop acc = ds.front();
    for (std::size_t k = 1; k < ds.size(); ++k) acc = num::add(acc, ds[k], 2);
    return diff(num::widen(acc, {1, 2, 3}, 2).S, ckg::site_superop(G, 1).S);
  });
  const MatD rho0 = gibbs::gibbs_state<double>(lat::build_xyz_chain(3), 0.25).rho;
  s.small("ckg", "layered M=1, X_1 = chain: error at the floor", 1e-9,
          [&] { return ckg::layered_local_evolution(G, rho0, 2, 12.0, 1.5, 1).error; });
  s.small("ckg", "layered t = 0: error 0", 1e-15,
          [&] { return ckg::layered_local_evolution(G, rho0, 2, 2.0, 0.0, 2).error; });
  s.small("ckg", "H_L' = H_L: epsilon at the floor", 1e-9, [] {
    auto H = lat::build_xyz_chain(3);
    return ckg::bp_channel_lindblad(H, H, 0.25, 6.0, 4.0, 1, 2).epsilon;
  });
}

void recovery_fixtures(Suite& s) {
  s.throws("recovery", "B too thin for cores is refused", [] {
    auto thin = lat::build_xyz_chain(4);
    rec::plan_recovery(thin, gibbs::make_partition(thin, {1}, {4}), 0.25, 1.0, 1.0);
  });
  auto H = lat::build_xyz_chain(6);
  auto p = gibbs::make_partition(H, {1}, {6});
  s.small("recovery", "H_0 splits into commuting halves", 1e-12, [&] {
    auto plan = rec::plan_recovery(H, p, 0.25, 1.0, 1.0);
    MatD L = lat::assemble_dense<double>(lat::subset_hamiltonian(H, lat::set_union(p.A, p.B1c)));
    MatD R = lat::assemble_dense<double>(lat::subset_hamiltonian(H, lat::set_union(p.B2c, p.C)));
    return diff(lat::assemble_dense<double>(plan.chain.front()), MatD(L + R)) +
           num::frobenius_norm(num::commutator(L, R));
  });
  const auto t2 = rec::tau2_prepare(H, p, 0.25);
  s.small("recovery", "tau2 applied twice = once", 1e-14, [&] {
    num::Rng rng(9);
    MatD out = t2.apply(num::random_density(64, rng));
    return diff(t2.apply(out), out);
  });
  s.small("recovery", "tau2 preserves trace", 1e-13, [&] {
    num::Rng rng(10);
    return t2.apply(num::random_density(64, rng)).trace().re - 1;
  });
  s.small("recovery", "empty shell: identity channel, error 0", 0, [] {
    auto Hd = drop_bonds(lat::build_xyz_chain(6), {{3, 4}});
    auto plan = rec::plan_recovery(Hd, gibbs::make_partition(Hd, {1}, {6}), 0.25, 1.0, 1.0);
    auto c = rec::chain_bp_channels(plan, rec::Direction::Recouple);
    return plan.nbar + c.composite_error + static_cast<double>(c.channel.stages.size());
  });
  s.small("recovery", "single-step chain: composite = step error", 1e-14, [&] {
    auto plan = rec::plan_recovery(H, p, 0.25, 2.0, 1.0);
    plan.chain.resize(2);
    plan.order.resize(1);
    plan.nbar = 1;
    auto c = rec::chain_bp_channels(plan, rec::Direction::Recouple);
    return c.composite_error - c.step_errors.at(0);
  });
  s.small("recovery", "beta = 0: error and cmi vanish", 1e-10, [&] {
    auto r = rec::full_recovery_audit(H, p, 0.0, 1.0, 1.0);
    return std::max(r.recovery_error, r.cmi_bits);
  });
  s.small("recovery", "decoupled Hamiltonian: error 0", 1e-10, [] {
    auto Hd = drop_bonds(lat::build_xyz_chain(6), {{2, 3}, {3, 4}, {4, 5}});
    auto r = rec::full_recovery_audit(Hd, gibbs::make_partition(Hd, {1}, {6}), 0.25, 1.0, 1.0);
    double v = std::max(r.recovery_error, r.cmi_bits);
    for (double e : r.per_step_errors) v = std::max(v, e);
    return v;
  });
  const auto pc = rec::purification_counterexample();
  s.small("recovery", "Bell partial transpose eigenvalue -1/2", 1e-14, [&] { return pc.bell_pt_min + 0.5; });
  s.check(
      "recovery", "classical mixture partial transpose >= 0", [&] { return pc.mixture_pt_min; },
      [](double v) { return v >= -1e-15; });
  s.check(
      "recovery", "CNOT: U|000> = |000>, U|111> = |110>", [&] { return pc.cnot_fixture ? 1.0 : 0.0; },
      [](double v) { return v == 1.0; });
  s.small("recovery", "GHZ cmi = 1 bit", 1e-12, [&] { return pc.ghz_cmi_bits - 1; });
}

void cluster_fixtures(Suite& s) {
  s.small("cluster", "W fixture, H = I", 1e-12, [] { return cluster::w_ops_m3_fixture(I(8), 3, {2}).residual; });
  s.small("cluster", "W fixture, H on L only", 1e-10, [] {
    num::Rng rng(4);
    return cluster::w_ops_m3_fixture(num::embed_on_sites(num::random_hermitian(2, rng), {1}, 3, 2), 3, {1}).residual;
  });
  s.small("cluster", "m = 1: -tr_{L^c}(H) / d_{L^c}", 1e-14, [] {
    num::Rng rng(2);
    MatD H = cluster::random_chain_hamiltonian(3, rng);
    return diff(cluster::log_derivatives(H, 3, {2}, 1)[0], MatD(num::partial_trace(H, {2}, 3, 2) * (-0.25)));
  });
  s.small("cluster", "m = 2, diagonal H: classical variance", 1e-13, [] {
    MatD H = diag({0.3, -1.1, 0.4, 2.0});
    auto D = cluster::log_derivatives(H, 2, {1}, 2);
    double v = 0;
    for (int l = 0; l < 2; ++l) {
      const double a = H(2 * l, 2 * l).re, b = H(2 * l + 1, 2 * l + 1).re;
      v = std::max(v, std::fabs(D[1](l, l).re - (a - b) * (a - b) / 4));
    }
    return v;
  });
}

void bch_fixtures(Suite& s) {
  s.small("bch", "B_2 = 1/6", 0, [] { return bch::Rational(bch::bernoulli_table(2)[2] - bch::Rational(1, 6)).get_d(); });
  s.small("bch", "B_3 = 0", 0, [] { return bch::bernoulli_table(3)[3].get_d(); });
  s.small("bch", "zero bond gives zero dh~", 1e-15, [] {
    auto H = lat::build_xyz_chain(3);
    H.coef[lat::find_term(H, "h2,3")] = 0;
    return num::frobenius_norm(bch::boundary_effective_term<double>(H, 0.5).matrix);
  });
  s.small("bch", "odd m >= 3: Q = 0", 0, [] {
    auto q = bch::q_sequence(lat::build_xyz_chain(3), 0.5, 7, 40);
    double v = 0;
    for (int m = 3; m <= 7; m += 2) v += q.q[m] == "0" ? 0.0 : 1.0;
    return v;
  });
  s.small("bch", "first-order audit, a = 0", 1e-13, [] {
    num::Rng rng(8);
    MatD A = num::random_hermitian(4, rng);
    A *= 1.0 / num::op_norm(A);
    return bch::bch_first_order_audit<double>(A, num::random_ginibre(4, rng), 0.3, {0.0}).residual[0];
  });
  s.small("bch", "commuting A, B collapse", 1e-13, [] {
    MatD A = diag({0.1, -0.2, 0.3}), B = diag({0.5, 0.1, -0.4});
    auto r = bch::bch_first_order_audit<double>(A, B, 1.0, {0.01, 0.1});
    return std::max(r.residual[0], r.residual[1]);
  });
  s.small("bch", "reduced Gibbs audit, a = 0", 1e-12, [] {
    return bch::reduced_gibbs_first_order_audit<double>(lat::build_xyz_chain(3), 0.5, {0.0}).residual[0];
  });
}

}  // namespace

std::vector<FixtureResult> run_fixtures() {
  Suite s;
  numkit_fixtures(s);
  lattice_fixtures(s);
  gibbs_fixtures(s);
  bp_fixtures(s);
  ckg_fixtures(s);
  recovery_fixtures(s);
  cluster_fixtures(s);
  bch_fixtures(s);
  return s.out;
}

}  // namespace qbp::cli
