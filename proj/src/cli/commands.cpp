#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "qbp/bch/bch.hpp"
#include "qbp/bp/bp.hpp"
#include "qbp/ckg/layered.hpp"
#include "qbp/cli/cli.hpp"
#include "qbp/cluster/cluster.hpp"
#include "qbp/numkit/fit.hpp"
#include "qbp/recovery/recovery.hpp"

namespace qbp::cli {

using json = nlohmann::json;
using num::MatD;

namespace {

constexpr const char* kGibbsSign = "rho = e^{+beta H} / Z";
constexpr const char* kClusterSign = "cluster coefficients for e^{-beta H}";

// Exit codes: 0 ok, 1 audit failure, 2 usage or configuration error.
constexpr int kAuditFailed = 1;
constexpr int kUsage = 2;

struct ModelOpts {
  std::string model = "xyz";
  int n = 4;
  double beta = 0.5;
};

void add_model(CLI::App* c, ModelOpts& m, int n_lo, int n_hi, double beta_hi = 10) {
  c->add_option("--model", m.model, "xyz or a path to a Hamiltonian JSON file")->capture_default_str();
  c->add_option("--n", m.n, "chain length for --model xyz")->check(CLI::Range(n_lo, n_hi))->capture_default_str();
  c->add_option("--beta", m.beta, "inverse temperature")->check(CLI::Range(0.0, beta_hi))->capture_default_str();
}

lat::Hamiltonian load_model(const ModelOpts& m, int n_lo, int n_hi) {
  if (m.model == "xyz") return lat::build_xyz_chain(m.n);
  std::ifstream f(m.model);
  if (!f) throw CLI::ValidationError("--model", "cannot read " + m.model);
  std::stringstream ss;
  ss << f.rdbuf();
  lat::Hamiltonian H = lat::from_json(ss.str());
  if (H.lattice.n < n_lo || H.lattice.n > n_hi)
    throw CLI::ValidationError("--model", "n = " + std::to_string(H.lattice.n) + " outside [" + std::to_string(n_lo) +
                                              ", " + std::to_string(n_hi) + "] for this command");
  return H;
}

// Writes to --out or stdout, starting with the resolved configuration as # comments.
class Sink {
 public:
  Sink(const CLI::App* c, const std::string& path, const std::vector<std::string>& extra) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw std::runtime_error("cannot open " + path);
    }
    os_ = path.empty() ? &std::cout : &file_;
    *os_ << "# qbp " << c->get_name() << "\n";
    std::istringstream cfg(c->config_to_str(true, false));
    for (std::string line; std::getline(cfg, line);)
      if (!line.empty() && line.rfind("out", 0) != 0) *os_ << "# " << line << "\n";
    for (const auto& e : extra) *os_ << "# " << e << "\n";
    os_->precision(12);
  }
  std::ostream& operator*() { return *os_; }

 private:
  std::ofstream file_;
  std::ostream* os_;
};

// JSON reports carry the configuration under "config".
json config_json(const CLI::App* c) {
  json j;
  for (const CLI::Option* o : c->get_options()) {
    if (o->get_name() == "--help" || o->get_name() == "--out") continue;
    auto r = o->results();
    const std::string key = o->get_name().substr(2);
    if (r.empty()) {
      j[key] = o->get_default_str();
    } else if (r.size() == 1) {
      j[key] = r[0];
    } else {
      j[key] = r;
    }
  }
  j["command"] = c->get_name();
  return j;
}

void write_json(const std::string& path, const json& j) {
  if (path.empty()) {
    std::cout << j.dump(2) << "\n";
    return;
  }
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  f << j.dump(2) << "\n";
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

std::vector<int> check_sites(const std::vector<int>& s, int n, const std::string& flag) {
  for (int i : s)
    if (i < 1 || i > n) throw CLI::ValidationError(flag, "site " + std::to_string(i) + " outside 1.." + std::to_string(n));
  return s;
}

}  // namespace

int default_digits(int fallback) {
  if (const char* e = std::getenv("QBP_DIGITS")) {
    char* end = nullptr;
    const long v = std::strtol(e, &end, 10);
    if (end != e && *end == '\0' && v >= 15 && v <= 5000) return static_cast<int>(v);
  }
  return fallback;
}

int run(int argc, char** argv) {
  CLI::App app{"Belief-propagation and Gibbs-state toolkit for spin chains"};
  app.require_subcommand(1);
  std::string out;
  std::function<int()> action;

  auto sub = [&](const std::string& name, const std::string& help) {
    CLI::App* c = app.add_subcommand(name, help);
    c->add_option("--out", out, "output path (default stdout)");
    return c;
  };

  // ---- model --------------------------------------------------------------------------
  ModelOpts mo;
  {
    CLI::App* c = sub("model", "emit a Hamiltonian in the JSON schema");
    add_model(c, mo, 1, 14);
    c->callback([&] {
      action = [&] {
        write_json(out, json::parse(lat::to_json(load_model(mo, 1, 14))));
        return 0;
      };
    });
  }

  // ---- gibbs ----------------------------------------------------------------------------
  ModelOpts gm;
  std::vector<int> region;
  {
    CLI::App* c = sub("gibbs", "Gibbs state summary: logZ, energy, region entropy");
    add_model(c, gm, 1, 12);
    c->add_option("--region", region, "sites of the reduced state")->delimiter(',');
    c->callback([&, c] {
      action = [&, c] {
        auto H = load_model(gm, 1, 12);
        auto st = gibbs::gibbs_state<double>(H, gm.beta);
        const MatD Hd = lat::assemble_dense<double>(H);
        json j;
        j["config"] = config_json(c);
        j["convention"] = kGibbsSign;
        j["logZ"] = st.logZ;
        j["energy"] = num::trace_product(st.rho, Hd).re;
        j["entropy_bits"] = gibbs::entropy(st.rho);
        if (!region.empty()) {
          const MatD r = gibbs::reduced(st, check_sites(region, H.lattice.n, "--region"));
          j["region"] = region;
          j["region_entropy_bits"] = gibbs::entropy(r);
          j["region_spectrum"] = num::eig_hermitian(r).values;
        }
        write_json(out, j);
        return 0;
      };
    });
  }

  // ---- cmi-scan -------------------------------------------------------------------------
  ModelOpts cm;
  {
    CLI::App* c = sub("cmi-scan", "I(A:C|B) with A = {1}, B = {2..R}, C = {R+1..n}");
    add_model(c, cm, 3, 12);
    c->callback([&, c] {
      action = [&, c] {
        auto H = load_model(cm, 3, 12);
        const int n = H.lattice.n;
        auto st = gibbs::gibbs_state<double>(H, cm.beta);
        Sink s(c, out, {kGibbsSign, "A = {1}, B = {2..R}, C = {R+1..n}"});
        *s << "R,|A|,|B|,|C|,cmi_bits\n";
        for (int R = 2; R <= n - 1; ++R) {
          auto v = gibbs::cmi(st.rho, {1}, lat::interval(2, R), lat::interval(R + 1, n), n, 2);
          *s << R << ",1," << R - 1 << "," << n - R << "," << fmt(v.value) << "\n";
        }
        return 0;
      };
    });
  }

  // ---- corr-scan ------------------------------------------------------------------------
  ModelOpts co;
  std::string corr_op = "Z";
  {
    CLI::App* c = sub("corr-scan", "Cor(O_1, O_j) for j = 2..n");
    add_model(c, co, 2, 12);
    c->add_option("--op", corr_op, "Pauli observable on both ends")->check(CLI::IsMember({"X", "Y", "Z"}))->capture_default_str();
    c->callback([&, c] {
      action = [&, c] {
        auto H = load_model(co, 2, 12);
        const int n = H.lattice.n;
        auto st = gibbs::gibbs_state<double>(H, co.beta);
        const MatD O = lat::pauli<double>(corr_op[0]);
        Sink s(c, out, {kGibbsSign});
        *s << "distance,re,im,abs\n";
        for (int j = 2; j <= n; ++j) {
          auto z = gibbs::correlation(st.rho, O, {1}, O, {j}, n, 2);
          *s << j - 1 << "," << fmt(z.re) << "," << fmt(z.im) << "," << fmt(num::cabs(z)) << "\n";
        }
        return 0;
      };
    });
  }

  // ---- bp-error / indist ------------------------------------------------------------------
  ModelOpts bm;
  int bp_site = 2, ell_max = -1;
  for (const char* name : {"bp-error", "indist"}) {
    const bool err = std::string(name) == "bp-error";
    CLI::App* c = sub(name, err ? "truncated belief-propagation operator error versus ell"
                                : "local indistinguishability of rho(H) and rho(H') versus ell");
    add_model(c, bm, 2, 10);
    c->add_option("--site", bp_site, "update site i0")->check(CLI::Range(1, 10))->capture_default_str();
    c->add_option("--ellmax", ell_max, "largest ell (-1: n - 1)")->check(CLI::Range(-1, 10))->capture_default_str();
    c->callback([&, c, err] {
      action = [&, c, err] {
        auto full = load_model(bm, 2, 10);
        const int n = full.lattice.n;
        check_sites({bp_site}, n, "--site");
        auto u = bp::site_update(full, bp_site);
        const int L = ell_max < 0 ? n - 1 : std::min(ell_max, n - 1);
        Sink s(c, out, {kGibbsSign, "H = full model without the terms at --site, H' = full model"});
        if (err) {
          auto exact = bp::exact_bp<double>(u.H, u.Hp, bm.beta, bp_site);
          *s << "ell,raw_error,renormalized_error\n";
          for (int ell = 0; ell <= L; ++ell) {
            auto e = bp::bp_truncation_error(exact, ell);
            *s << ell << "," << fmt(e.raw) << "," << fmt(e.renormalized) << "\n";
          }
        } else {
          *s << "ell,trace_distance\n";
          for (int ell = 0; ell <= L; ++ell)
            *s << ell << "," << fmt(bp::local_indistinguishability<double>(u.H, u.Hp, bm.beta, bp_site, ell)) << "\n";
        }
        return 0;
      };
    });
  }

  // ---- ckg-check ---------------------------------------------------------------------------
  ModelOpts km;
  std::string ckg_config;
  int omega_nodes = 65, samples = 200;
  double t_trunc = 6, stat_tol = 1e-6;
  std::uint64_t seed = 1;
  {
    CLI::App* c = sub("ckg-check", "stationarity, coherent-term and 1->1 norm audits of the CKG generator");
    add_model(c, km, 1, 4, 5);
    c->add_option("--config", ckg_config, "JSON {beta, quad: {omega_nodes, t_trunc}, model}");
    c->add_option("--omega-nodes", omega_nodes, "2K+1 omega nodes")->check(CLI::Range(3, 1025))->capture_default_str();
    c->add_option("--t-trunc", t_trunc, "|t| cut of the b1 integral")->check(CLI::Range(1.0, 50.0))->capture_default_str();
    c->add_option("--samples", samples, "random inputs per norm estimate")->check(CLI::Range(1, 100000))->capture_default_str();
    c->add_option("--tol", stat_tol, "stationarity tolerance")->check(CLI::Range(0.0, 1.0))->capture_default_str();
    c->add_option("--seed", seed, "SplitMix64 seed")->capture_default_str();
    c->callback([&, c] {
      if (!ckg_config.empty()) {
        std::ifstream f(ckg_config);
        if (!f) throw CLI::ValidationError("--config", "cannot read " + ckg_config);
        json j = json::parse(f);
        if (j.contains("beta")) km.beta = j["beta"].get<double>();
        if (j.contains("model")) km.model = j["model"].get<std::string>();
        if (j.contains("quad")) {
          omega_nodes = j["quad"].value("omega_nodes", omega_nodes);
          t_trunc = j["quad"].value("t_trunc", t_trunc);
        }
        if (!(km.beta >= 0 && km.beta <= 5)) throw CLI::ValidationError("config beta", "outside [0, 5]");
        if (omega_nodes < 3 || omega_nodes > 1025) throw CLI::ValidationError("config omega_nodes", "outside [3, 1025]");
        if (!(t_trunc >= 1 && t_trunc <= 50)) throw CLI::ValidationError("config t_trunc", "outside [1, 50]");
      }
      action = [&, c] {
        auto H = load_model(km, 1, 4);
        ckg::QuadConfig q;
        q.K = (omega_nodes - 1) / 2;
        q.t_trunc = t_trunc;
        auto G = ckg::build_ckg(H, km.beta, q);
        const auto st = ckg::stationarity(G);
        num::Rng rng(seed);
        json blocks = json::array();
        double smax = 0, bmax = 0, lmax = 0;
        for (std::size_t k = 0; k < G.blocks.size(); ++k) {
          const auto& b = G.blocks[k];
          const double bn = num::op_norm(b.B);
          const double l11 = ckg::sampled_one_to_one(ckg::block_superop(b).S, std::size_t(1) << b.sites.size(), samples, rng);
          blocks.push_back({{"site", b.site}, {"a", b.a}, {"stationarity", st[k]}, {"coherent_norm", bn}, {"one_to_one_lower", l11}});
          smax = std::max(smax, st[k]);
          bmax = std::max(bmax, bn);
          lmax = std::max(lmax, l11);
        }
        const double bound = ckg::coherent_norm_bound();
        json j;
        j["config"] = config_json(c);
        j["convention"] = kGibbsSign;
        j["blocks"] = blocks;
        j["max_stationarity"] = smax;
        j["max_coherent_norm"] = bmax;
        j["coherent_bound"] = bound;
        j["max_one_to_one_lower"] = lmax;
        const bool ok = smax <= stat_tol && bmax <= bound + 1e-6 && lmax <= 3;
        j["holds"] = ok;
        write_json(out, j);
        return ok ? 0 : kAuditFailed;
      };
    });
  }

  // ---- gap ----------------------------------------------------------------------------------
  ModelOpts gp;
  {
    CLI::App* c = sub("gap", "spectral gap of the vectorized CKG generator");
    add_model(c, gp, 1, 4, 5);
    c->callback([&, c] {
      action = [&, c] {
        auto G = ckg::build_ckg(load_model(gp, 1, 4), gp.beta);
        auto g = ckg::spectral_gap(G);
        auto ev = ckg::kms_spectrum(G);
        Sink s(c, out, {kGibbsSign});
        *s << "gap,iterations,residual,kms_gap\n";
        *s << fmt(g.gap) << "," << g.iterations << "," << fmt(g.residual) << "," << fmt(-ev[ev.size() - 2]) << "\n";
        return 0;
      };
    });
  }

  // ---- mix ----------------------------------------------------------------------------------
  ModelOpts mx;
  std::vector<double> times = {1, 2, 4, 8};
  int mix_site = 2;
  double mix_strength = 1;
  std::string mix_op = "Z";
  {
    CLI::App* c = sub("mix", "||e^{L' t} rho_beta - rho'_beta||_1 against 4 e^{3 beta g0 - t/4}, H' = H + v");
    add_model(c, mx, 1, 4, 5);
    c->add_option("--times", times, "evolution times")->delimiter(',')->check(CLI::Range(0.0, 1e4))->capture_default_str();
    c->add_option("--site", mix_site, "site of v")->check(CLI::Range(1, 4))->capture_default_str();
    c->add_option("--strength", mix_strength, "coefficient of v")->check(CLI::Range(-10.0, 10.0))->capture_default_str();
    c->add_option("--op", mix_op, "Pauli of v")->check(CLI::IsMember({"X", "Y", "Z"}))->capture_default_str();
    c->callback([&, c] {
      action = [&, c] {
        auto H = load_model(mx, 1, 4);
        check_sites({mix_site}, H.lattice.n, "--site");
        lat::Hamiltonian v = lat::make_hamiltonian(
            {H.lattice.n, 2}, {{{mix_site}, MatD(lat::pauli<double>(mix_op[0]) * mix_strength), "v", {}}});
        auto curve = ckg::mixing_curve(H, v, mx.beta, times);
        Sink s(c, out, {kGibbsSign});
        *s << "t,trace_distance,bound\n";
        bool ok = true;
        for (const auto& p : curve) {
          *s << fmt(p.t) << "," << fmt(p.distance) << "," << fmt(p.bound) << "\n";
          ok = ok && p.distance <= p.bound;
        }
        return ok ? 0 : kAuditFailed;
      };
    });
  }

  // ---- bp-channel ----------------------------------------------------------------------------
  ModelOpts bc;
  std::vector<double> radii = {1, 2, 3};
  double bc_t = 4;
  int bc_site = 2, bc_M = 1;
  {
    CLI::App* c = sub("bp-channel", "Lindbladian belief-propagation channel error versus r");
    add_model(c, bc, 2, 6, 5);
    c->add_option("--r", radii, "ball radii")->delimiter(',')->check(CLI::Range(0.0, 50.0))->capture_default_str();
    c->add_option("--t", bc_t, "evolution time")->check(CLI::Range(0.0, 1e4))->capture_default_str();
    c->add_option("--site", bc_site, "updated site")->check(CLI::Range(1, 6))->capture_default_str();
    c->add_option("--layers", bc_M, "number of layers M")->check(CLI::Range(1, 64))->capture_default_str();
    c->callback([&, c] {
      action = [&, c] {
        auto full = load_model(bc, 2, 6);
        check_sites({bc_site}, full.lattice.n, "--site");
        auto u = bp::site_update(full, bc_site);
        Sink s(c, out, {kGibbsSign, "H_L = full model without the terms at --site, H_L' = full model"});
        *s << "r,epsilon\n";
        for (double r : radii)
          *s << fmt(r) << "," << fmt(ckg::bp_channel_lindblad(u.H, u.Hp, bc.beta, r, bc_t, bc_M, bc_site).epsilon) << "\n";
        return 0;
      };
    });
  }

  // ---- recover --------------------------------------------------------------------------------
  ModelOpts rm;
  std::vector<int> A = {1}, C = {6}, order;
  double rr = 1, rt = 1;
  int rM = 1;
  {
    CLI::App* c = sub("recover", "recovery map audit for A | B | C");
    add_model(c, rm, 6, 8, 5);
    rm.n = 6;
    rm.beta = 0.25;
    c->add_option("--A", A, "sites of A")->delimiter(',')->capture_default_str();
    c->add_option("--C", C, "sites of C")->delimiter(',')->capture_default_str();
    c->add_option("--r", rr, "ball radius")->check(CLI::Range(0.0, 20.0))->capture_default_str();
    c->add_option("--t", rt, "evolution time")->check(CLI::Range(0.0, 1e4))->capture_default_str();
    c->add_option("--layers", rM, "number of layers M")->check(CLI::Range(1, 64))->capture_default_str();
    c->add_option("--order", order, "update order over the shell sites")->delimiter(',');
    c->callback([&, c] {
      action = [&, c] {
        auto H = load_model(rm, 6, 8);
        const int n = H.lattice.n;
        auto p = gibbs::make_partition(H, check_sites(A, n, "--A"), check_sites(C, n, "--C"));
        auto rep = rec::full_recovery_audit(H, p, rm.beta, rr, rt, rM, order);
        json j = json::parse(rec::to_json(rep));
        j["config"] = config_json(c);
        j["convention"] = kGibbsSign;
        write_json(out, j);
        return rep.chain_holds && rep.fr_holds ? 0 : kAuditFailed;
      };
    });
  }

  // ---- cluster-table ---------------------------------------------------------------------------
  int table_m = 5;
  {
    CLI::App* c = sub("cluster-table", "cluster-expansion coefficients of one order as TSV");
    c->add_option("--m", table_m, "order")->check(CLI::Range(1, 9))->capture_default_str();
    c->callback([&, c] {
      action = [&, c] {
        auto rows = cluster::coefficient_table(table_m);
        Sink s(c, out, {kClusterSign, "coefficient with d_{L^c}^q multiplied out; closed form and enumeration agree"});
        *s << "parts\tcoefficient\n";
        bool ok = true;
        for (const auto& r : rows) {
          std::string parts;
          for (std::size_t k = 0; k < r.arrangements.size(); ++k) {
            if (k) parts += " ";
            parts += "{";
            for (std::size_t i = 0; i < r.arrangements[k].size(); ++i)
              parts += (i ? "," : "") + std::to_string(r.arrangements[k][i]);
            parts += "}";
          }
          *s << parts << "\t" << r.closed.get_str() << "\n";
          ok = ok && r.closed == r.combinatorial;
        }
        return ok ? 0 : kAuditFailed;
      };
    });
  }

  // ---- cluster-audit ---------------------------------------------------------------------------
  int ca_instances = 10, ca_mmax = 4, ca_digits = 0, ca_K = 4;
  double ca_h = 1e-2, ca_tol = 1e-7;
  std::uint64_t ca_seed = 2024;
  {
    CLI::App* c = sub("cluster-audit", "Taylor-derivative identity on random 3-site chains");
    c->add_option("--instances", ca_instances, "random chains")->check(CLI::Range(1, 1000))->capture_default_str();
    c->add_option("--mmax", ca_mmax, "highest derivative")->check(CLI::Range(1, 8))->capture_default_str();
    c->add_option("--digits", ca_digits, "0: double, else big-float digits")->check(CLI::Range(0, 2000))->capture_default_str();
    c->add_option("--spacing", ca_h, "fit spacing h")->check(CLI::Range(1e-12, 0.5))->capture_default_str();
    c->add_option("--nodes", ca_K, "fit nodes per side K")->check(CLI::Range(1, 20))->capture_default_str();
    c->add_option("--tol", ca_tol, "residual and roundoff tolerance")->check(CLI::Range(0.0, 1.0))->capture_default_str();
    c->add_option("--seed", ca_seed, "SplitMix64 seed")->capture_default_str();
    c->callback([&, c] {
      action = [&, c] {
        Sink s(c, out, {kClusterSign, "f(beta) = log[tr_{L^c} e^{-beta H} / d_{L^c}], L = {1 + k mod 3}"});
        *s << "instance,L,m,residual,noise\n";
        num::Rng rng(ca_seed);
        bool ok = true;
        for (int k = 0; k < ca_instances; ++k) {
          MatD H = cluster::random_chain_hamiltonian(3, rng);
          const std::vector<int> L = {1 + k % 3};
          cluster::DerivativeAudit a;
          if (ca_digits == 0) {
            a = cluster::derivative_identity_audit<double>(H, 3, L, ca_mmax, ca_h, ca_K, ca_tol);
          } else {
            num::PrecisionScope ps(ca_digits);
            a = cluster::derivative_identity_audit<num::BigFloat>(num::convert<num::BigFloat>(H), 3, L, ca_mmax, ca_h,
                                                                  ca_K, ca_tol);
          }
          for (int m = 0; m < ca_mmax; ++m) {
            *s << k << "," << L[0] << "," << m + 1 << "," << fmt(a.residual[m]) << "," << fmt(a.noise[m]) << "\n";
            ok = ok && a.residual[m] < ca_tol;
          }
        }
        return ok ? 0 : kAuditFailed;
      };
    });
  }

  // ---- bch-run -----------------------------------------------------------------------------------
  ModelOpts qm;
  int q_digits = default_digits(200), q_mmax = 50, q_min = -1;
  std::string q_duhamel = "beta";
  bool q_all = false;
  {
    CLI::App* c = sub("bch-run", "Q(m) of the boundary BCH series at high precision");
    add_model(c, qm, 2, 12);
    qm.n = 8;
    c->add_option("--digits", q_digits, "decimal digits (default $QBP_DIGITS or 200)")->check(CLI::Range(15, 5000))->capture_default_str();
    c->add_option("--mmax", q_mmax, "highest order")->check(CLI::Range(0, 80))->capture_default_str();
    c->add_option("--min-digits", q_min, "refusal threshold (-1: 15 + ceil(mmax log10(2||H0|| + 1)))")
        ->check(CLI::Range(-1, 5000))
        ->capture_default_str();
    c->add_option("--duhamel", q_duhamel, "x-integral variable: beta (e^{-x beta H0}) or unit (e^{-x H0})")
        ->check(CLI::IsMember({"beta", "unit"}))
        ->capture_default_str();
    c->add_flag("--all-m", q_all, "also emit odd m (m = 1 and the zeros at odd m >= 3)");
    c->callback([&, c] {
      if (qm.beta <= 0) throw CLI::ValidationError("--beta", "must be positive");
      action = [&, c] {
        auto H = load_model(qm, 2, 12);
        bch::QOptions opt;
        opt.mode = q_duhamel == "beta" ? bch::Duhamel::Beta : bch::Duhamel::Unit;
        opt.min_digits = q_min;
        bch::QSequence q;
        try {
          q = bch::q_sequence(H, qm.beta, q_mmax, q_digits, opt);
        } catch (const bch::PrecisionError& e) {
          std::cerr << "qbp bch-run: " << e.what() << "; pass --digits " << e.required_digits << " or set --min-digits\n";
          return kUsage;
        }
        auto d = bch::analyze_shape(q);
        Sink s(c, out,
               {kGibbsSign, "Q(m) = || beta^{m+1} B_m / m! [ad^m(dh~) + h.c.] ||_F, ad_A(X) = [X, A], B_1 = -1/2",
                "p_min = " + std::to_string(q.p_min) + ", ||H0|| = " + fmt(q.h0_norm),
                "argmin(even m >= 2) = " + std::to_string(d.argmin) + ", non_monotone = " + (d.non_monotone ? "1" : "0") +
                    ", growing_tail = " + (d.growing_tail ? "1" : "0") + ", tail_run = " + std::to_string(d.tail_run)});
        *s << "m,Q_num,log10Q\n";
        for (std::size_t k = 0; k < q.m.size(); ++k) {
          if (!q_all && q.m[k] % 2 == 1) continue;
          *s << q.m[k] << "," << q.q[k] << "," << (std::isfinite(q.log10q[k]) ? fmt(q.log10q[k]) : "-inf") << "\n";
        }
        return 0;
      };
    });
  }

  // ---- bch-audit ---------------------------------------------------------------------------------
  double ba_beta = 0.3;
  std::vector<double> ba_a = {1e-3, 1e-4, 1e-5};
  int ba_dim = 8, ba_n = 3;
  std::uint64_t ba_seed = 31;
  {
    CLI::App* c = sub("bch-audit", "first-order BCH and reduced-Gibbs residual slopes");
    c->add_option("--beta", ba_beta, "inverse temperature")->check(CLI::Range(1e-6, 10.0))->capture_default_str();
    c->add_option("--a", ba_a, "perturbation strengths")->delimiter(',')->check(CLI::Range(0.0, 1.0))->capture_default_str();
    c->add_option("--dim", ba_dim, "matrix dimension of the random pair")->check(CLI::Range(2, 64))->capture_default_str();
    c->add_option("--n", ba_n, "XYZ chain length for the reduced-Gibbs audit")->check(CLI::Range(2, 8))->capture_default_str();
    c->add_option("--seed", ba_seed, "SplitMix64 seed")->capture_default_str();
    c->callback([&, c] {
      action = [&, c] {
        num::Rng rng(ba_seed);
        MatD Am = num::random_hermitian(ba_dim, rng);
        Am *= 0.5 / (ba_beta * num::op_norm(Am));  // ||beta A|| = 0.5
        MatD Bm = num::random_ginibre(ba_dim, rng);
        auto good = bch::bch_first_order_audit<double>(Am, Bm, ba_beta, ba_a);
        auto ctrl = bch::bch_first_order_audit<double>(Am, Bm, ba_beta, ba_a, 30, true);
        auto red = bch::reduced_gibbs_first_order_audit<double>(lat::build_xyz_chain(ba_n), ba_beta, ba_a);
        Sink s(c, out,
               {kGibbsSign, "ad_A(X) = [X, A]; A random Hermitian with ||beta A|| = 0.5, B Ginibre",
                "slope bch = " + fmt(good.slope) + ", control (B_1 = +1/2) = " + fmt(ctrl.slope) +
                    ", reduced_gibbs = " + fmt(red.slope) + ", C = " + fmt(red.C)});
        *s << "audit,a,residual\n";
        for (std::size_t k = 0; k < ba_a.size(); ++k) {
          *s << "bch," << fmt(ba_a[k]) << "," << fmt(good.residual[k]) << "\n";
          *s << "bch_plus_half," << fmt(ba_a[k]) << "," << fmt(ctrl.residual[k]) << "\n";
          *s << "reduced_gibbs," << fmt(ba_a[k]) << "," << fmt(red.residual[k]) << "\n";
        }
        const bool ok = std::fabs(good.slope - 2) <= 0.1 && std::fabs(red.slope - 2) <= 0.1 && ctrl.slope < 1.5;
        return ok ? 0 : kAuditFailed;
      };
    });
  }

  // ---- fixtures ----------------------------------------------------------------------------------
  {
    CLI::App* c = sub("fixtures", "closed-form fixtures of every module and the purification counterexample");
    c->callback([&, c] {
      action = [&, c] {
        auto res = run_fixtures();
        Sink s(c, out, {kGibbsSign});
        *s << "module,fixture,value,status\n";
        int failed = 0;
        for (const auto& r : res) {
          *s << r.module << ",\"" << r.name << "\"," << fmt(r.value) << "," << (r.pass ? "PASS" : "FAIL") << "\n";
          failed += r.pass ? 0 : 1;
        }
        *s << "# " << res.size() - failed << " of " << res.size() << " passed\n";
        return failed == 0 ? 0 : kAuditFailed;
      };
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kUsage;
  }
  try {
    return action ? action() : kUsage;
  } catch (const CLI::ValidationError& e) {
    std::cerr << "qbp: " << e.what() << "\n";
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "qbp: invalid configuration: " << e.what() << "\n";
    return kUsage;
  } catch (const num::SizeError& e) {
    std::cerr << "qbp: budget exceeded: " << e.what() << "\n";
    return kUsage;
  } catch (const cluster::BudgetError& e) {
    std::cerr << "qbp: budget exceeded: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "qbp: " << e.what() << "\n";
    return kAuditFailed;
  }
}

}  // namespace qbp::cli
