#include "qbp/ckg/ckg.hpp"

#include <gsl/gsl_integration.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

namespace qbp::ckg {

namespace {

constexpr double kPi = M_PI;
// The coherent term needs twice the b1/b2 double integral for e^{-beta Hs} to be
// stationary; the tanh closed form pins the factor.
constexpr double kCoherentScale = 2.0;

struct B1Table {
  std::vector<double> t, w, val;
};

using B1Key = std::tuple<double, int, double, int>;

const B1Table& b1_table(const QuadConfig& q) {
  static std::mutex mu;
  static std::map<B1Key, B1Table> cache;
  std::lock_guard<std::mutex> lock(mu);
  B1Key key{q.t_trunc, q.t_nodes, q.s_trunc, q.s_nodes};
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  if (q.t_nodes < 3 || q.s_nodes < 3) throw std::invalid_argument("ckg: quadrature needs at least 3 nodes");
  B1Table tab;
  const double h = 2 * q.t_trunc / (q.t_nodes - 1);
  for (int k = 0; k < q.t_nodes; ++k) {
    double t = -q.t_trunc + k * h;
    tab.t.push_back(t);
    tab.w.push_back((k == 0 || k == q.t_nodes - 1) ? h / 2 : h);
    tab.val.push_back(b1(t, q));
  }
  return cache.emplace(key, std::move(tab)).first->second;
}

QuadConfig refined(const QuadConfig& q) {
  QuadConfig r = q;
  r.t_nodes = 2 * q.t_nodes - 1;
  r.s_nodes = 2 * q.s_nodes;
  return r;
}

MatD hadamard(const MatD& A, const MatD& B) {
  MatD C(A.rows(), A.cols());
  for (std::size_t k = 0; k < A.storage().size(); ++k) C.storage()[k] = A.storage()[k] * B.storage()[k];
  return C;
}

MatD to_eig(const Spectrum& sp, const MatD& X) { return num::matmul_adj(sp.U, num::matmul(X, sp.U)); }
MatD from_eig(const Spectrum& sp, const MatD& X) { return num::matmul(num::matmul(sp.U, X), sp.U.adjoint()); }

// Restriction of tr~_{sites^c}(X) to the listed sites.
MatD restrict_to(const MatD& X, const std::vector<int>& sites, int n, int d) {
  if (static_cast<int>(sites.size()) == n) return X;
  MatD r = num::partial_trace(X, sites, n, d);
  r *= 1.0 / std::pow(static_cast<double>(d), n - static_cast<int>(sites.size()));
  return r;
}

MatD pauli_basis(int a) {
  static const char names[3] = {'X', 'Y', 'Z'};
  if (a < 1 || a > 3) throw std::invalid_argument("ckg: basis index must be 1..3");
  return lat::pauli<double>(names[a - 1]);
}

// Gaussian filter in the Hs eigenbasis for transition frequency omega.
MatD filter(const Spectrum& sp, double omega) {
  const std::size_t D = sp.E.size();
  const double c = jump_prefactor(sp.beta), b2 = sp.beta * sp.beta;
  MatD G(D, D);
  for (std::size_t j = 0; j < D; ++j)
    for (std::size_t l = 0; l < D; ++l) {
      double x = sp.E[j] - sp.E[l] - omega;
      G(j, l) = cd(c * std::exp(-b2 * x * x / 4));
    }
  return G;
}

// F_jl = int b1(t) e^{-i beta nu_jl t} dt for every Bohr frequency of the spectrum.
MatD coherent_kernel(const Spectrum& sp, const QuadConfig& q) {
  const std::size_t D = sp.E.size();
  MatD F(D, D);
  for (std::size_t j = 0; j < D; ++j)
    for (std::size_t l = j + 1; l < D; ++l) {
      cd v = b1_hat(-sp.beta * (sp.E[j] - sp.E[l]), q);
      F(j, l) = v;
      F(l, j) = -v;  // b1 is odd
    }
  return F;
}

MatD checked_kernel(const Spectrum& sp, const QuadConfig& q) {
  MatD F = coherent_kernel(sp, q);
  MatD F2 = coherent_kernel(sp, refined(q));
  double worst = 0, a = 0, b = 0;
  for (std::size_t k = 0; k < F.storage().size(); ++k) {
    double dlt = num::cabs(F.storage()[k] - F2.storage()[k]);
    if (dlt > worst) {
      worst = dlt;
      a = F.storage()[k].im;
      b = F2.storage()[k].im;
    }
  }
  if (worst > q.ladder_tol)
    throw QuadratureError("coherent_term: b1 transform changed by " + std::to_string(worst) + " under refinement", a,
                          b);
  return F;
}

// B = U (s F o Y') U^dag with Y'_jl = sum_k A'_jk A'_kl b2^(beta (nu_jk - nu_kl)).
MatD coherent_from_kernel(const Spectrum& sp, const MatD& Ae, const MatD& F) {
  const std::size_t D = sp.E.size();
  MatD Y(D, D);
  for (std::size_t j = 0; j < D; ++j)
    for (std::size_t l = 0; l < D; ++l) {
      cd acc;
      for (std::size_t k = 0; k < D; ++k) {
        double x = sp.beta * (sp.E[j] - 2 * sp.E[k] + sp.E[l]);
        acc += Ae(j, k) * Ae(k, l) * b2_hat(x).re;
      }
      Y(j, l) = acc;
    }
  MatD B = hadamard(F, Y);
  B *= kCoherentScale;
  return num::hermitian_part(from_eig(sp, B));
}

// int gamma(w) G_k(nu1, w) G_k(nu2, w) dw in closed form (with G = c e^{-beta^2 (nu - w)^2/4}).
double rate_kernel(double beta, double nu1, double nu2) {
  const double a = beta * nu1, b = beta * nu2;
  const double p = (a + b) / 2 - 1;
  const double c2 = beta / std::sqrt(2 * kPi);
  return c2 * std::sqrt(kPi) / beta * std::exp(p * p / 4 - 0.5 - (a * a + b * b) / 4);
}

Block make_block(const Spectrum& sp, const OmegaRule& rule, const MatD& F, int i, int a, const QuadConfig& q) {
  Block blk;
  blk.site = i;
  blk.a = a;
  blk.sites = lat::interval(1, sp.n);
  MatD A = num::embed_on_sites(pauli_basis(a), {i}, sp.n, sp.d);
  MatD Ae = to_eig(sp, A);
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
    double r = gamma_weight(sp.beta, rule.nodes[k]) * rule.weights[k];
    MatD Je = hadamard(Ae, filter(sp, rule.nodes[k]));
    double f = num::frobenius_norm(Je);
    if (r * f * f < q.jump_floor) continue;
    blk.jumps.push_back({from_eig(sp, Je), r});
  }
  blk.B = coherent_from_kernel(sp, Ae, F);
  return blk;
}

Superop combine(const std::vector<int>& sites, const std::vector<const Block*>& blocks) {
  MatD H = blocks.front()->B;
  std::vector<num::Jump<double>> jumps;
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    if (k) H += blocks[k]->B;
    jumps.insert(jumps.end(), blocks[k]->jumps.begin(), blocks[k]->jumps.end());
  }
  return {sites, num::lindblad_superop(H, jumps)};
}

MatD negate(MatD S) {
  S *= -1.0;
  return S;
}

}  // namespace

double superop_norm_bound(const MatD& S) {
  double rmax = 0, cmax = 0;
  std::vector<double> cs(S.cols(), 0.0);
  for (std::size_t r = 0; r < S.rows(); ++r) {
    double rs = 0;
    for (std::size_t c = 0; c < S.cols(); ++c) {
      double v = num::cabs(S(r, c));
      rs += v;
      cs[c] += v;
    }
    rmax = std::max(rmax, rs);
  }
  for (double v : cs) cmax = std::max(cmax, v);
  return std::sqrt(rmax * cmax);
}

// ---- kernels -----------------------------------------------------------------

double jump_prefactor(double beta) { return std::sqrt(beta) / std::pow(2 * kPi, 0.25); }

double gamma_weight(double beta, double omega) {
  double x = beta * omega + 1;
  return std::exp(-x * x / 2);
}

double b1(double t, const QuadConfig& q) {
  const double h = 2 * q.s_trunc / (q.s_nodes - 1);
  double acc = 0;
  for (int j = 0; j < q.s_nodes; ++j) {
    double s = -q.s_trunc + j * h;
    double u = t - s;
    double w = (j == 0 || j == q.s_nodes - 1) ? h / 2 : h;
    acc += w * std::sin(-u) * std::exp(-2 * u * u) / std::cosh(2 * kPi * s);
  }
  return 2 * std::sqrt(kPi) * std::exp(0.125) * acc;
}

cd b2(double t) {
  const double m = std::exp(-4 * t * t) / (2 * std::pow(kPi, 1.5));
  return cd(m * std::cos(-2 * t), m * std::sin(-2 * t));
}

cd b1_hat(double x, const QuadConfig& q) {
  const B1Table& tab = b1_table(q);
  double re = 0, im = 0;
  for (std::size_t k = 0; k < tab.t.size(); ++k) {
    double f = tab.w[k] * tab.val[k];
    re += f * std::cos(x * tab.t[k]);
    im += f * std::sin(x * tab.t[k]);
  }
  return cd(re, im);
}

cd b1_hat_closed(double x) {
  // 2 sqrt(pi) e^{1/8} * f^(x) * g^(x) with f(u) = -sin(u) e^{-2u^2}, g(s) = sech(2 pi s)
  double fh = 0.5 * std::sqrt(kPi / 2) * (std::exp(-(x + 1) * (x + 1) / 8) - std::exp(-(x - 1) * (x - 1) / 8));
  double gh = 0.5 / std::cosh(x / 4);
  return cd(0.0, 2 * std::sqrt(kPi) * std::exp(0.125) * fh * gh);
}

cd b2_hat(double x) { return cd(std::exp(-(x - 2) * (x - 2) / 16) / (4 * kPi)); }

double b1_abs_integral(const QuadConfig& q) {
  const B1Table& tab = b1_table(q);
  double acc = 0;
  for (std::size_t k = 0; k < tab.t.size(); ++k) acc += tab.w[k] * std::fabs(tab.val[k]);
  return acc;
}

double b2_abs_integral() { return 1.0 / (4 * kPi); }

double coherent_norm_bound() { return std::exp(0.125) / (4 * std::sqrt(2.0)); }

// ---- spectral data ---------------------------------------------------------------

Spectrum spectrum(const MatD& H, double beta, int n, int d) {
  if (!(beta > 0) || !std::isfinite(beta)) throw std::invalid_argument("ckg: beta must be finite and > 0");
  Spectrum sp;
  MatD Hs = H;
  Hs *= -1.0;
  auto e = num::eig_hermitian(Hs);
  sp.E = e.values;
  sp.U = e.vectors;
  sp.beta = beta;
  sp.n = n;
  sp.d = d;
  return sp;
}

OmegaRule omega_rule(const Spectrum& sp, const QuadConfig& q) {
  if (q.K < 1) throw std::invalid_argument("ckg: K must be >= 1");
  const double span = sp.E.back() - sp.E.front();
  const double lo = -span - q.omega_pad / sp.beta, hi = span + q.omega_pad / sp.beta;
  const std::size_t m = static_cast<std::size_t>(2 * q.K + 1);
  gsl_integration_glfixed_table* tab = gsl_integration_glfixed_table_alloc(m);
  OmegaRule r;
  for (std::size_t k = 0; k < m; ++k) {
    double x, w;
    gsl_integration_glfixed_point(lo, hi, k, &x, &w, tab);
    r.nodes.push_back(x);
    r.weights.push_back(w);
  }
  gsl_integration_glfixed_table_free(tab);
  return r;
}

MatD jump_operator(const Spectrum& sp, const MatD& A, double omega) {
  return from_eig(sp, hadamard(to_eig(sp, A), filter(sp, omega)));
}

MatD jump_operator(const MatD& H, const MatD& A, double omega, double beta) {
  int n = 0;
  for (std::size_t D = H.rows(); D > 1; D /= 2) ++n;
  return jump_operator(spectrum(H, beta, n, 2), A, omega);
}

MatD jump_operator_quadrature(const MatD& H, const MatD& A, double omega, double beta, double t_cut, int nodes) {
  MatD Hs = H;
  Hs *= -1.0;
  auto eig = num::eig_hermitian(Hs);
  const double h = 2 * t_cut / (nodes - 1);
  const double pref = 1.0 / std::sqrt(2 * kPi) / std::sqrt(beta * std::sqrt(kPi / 2));
  MatD out(A.rows(), A.cols());
  for (int k = 0; k < nodes; ++k) {
    double t = -t_cut + k * h;
    double w = ((k == 0 || k == nodes - 1) ? h / 2 : h) * pref * std::exp(-t * t / (beta * beta));
    MatD At = gibbs::heisenberg_evolve(A, eig, t);
    At *= cd(w * std::cos(omega * t), -w * std::sin(omega * t));
    out += At;
  }
  return out;
}

MatD coherent_term(const Spectrum& sp, const MatD& A, const QuadConfig& q) {
  return coherent_from_kernel(sp, to_eig(sp, A), checked_kernel(sp, q));
}

MatD coherent_term(const MatD& H, const MatD& A, double beta, const QuadConfig& q) {
  int n = 0;
  for (std::size_t D = H.rows(); D > 1; D /= 2) ++n;
  return coherent_term(spectrum(H, beta, n, 2), A, q);
}

MatD coherent_term_tanh(const Spectrum& sp, const MatD& A) {
  const std::size_t D = sp.E.size();
  MatD Ae = to_eig(sp, A);
  MatD B(D, D);
  for (std::size_t j = 0; j < D; ++j)
    for (std::size_t l = 0; l < D; ++l) {
      cd R;
      for (std::size_t m = 0; m < D; ++m)
        R += num::conj(Ae(m, j)) * Ae(m, l) * rate_kernel(sp.beta, sp.E[m] - sp.E[j], sp.E[m] - sp.E[l]);
      double th = std::tanh(sp.beta * (sp.E[j] - sp.E[l]) / 4);
      B(j, l) = cd(0.0, 0.5 * th) * R;
    }
  return num::hermitian_part(from_eig(sp, B));
}

// ---- generator -------------------------------------------------------------------

Generator build_ckg_dense(const MatD& H, int n, double beta, const QuadConfig& q) {
  Generator G;
  G.beta = beta;
  G.quad = q;
  G.n = n;
  G.d = 2;
  G.sp = spectrum(H, beta, n, 2);
  OmegaRule rule = omega_rule(G.sp, q);
  MatD F = checked_kernel(G.sp, q);
  const int nb = 3 * n;
  G.blocks.resize(static_cast<std::size_t>(nb));
#pragma omp parallel for schedule(dynamic)
  for (int b = 0; b < nb; ++b) G.blocks[static_cast<std::size_t>(b)] = make_block(G.sp, rule, F, b / 3 + 1, b % 3 + 1, q);
  return G;
}

Generator build_ckg(const lat::Hamiltonian& H, double beta, const QuadConfig& q) {
  if (H.lattice.d != 2) throw std::invalid_argument("ckg: only qubit chains (d = 2) are supported");
  const std::size_t D = std::size_t(1) << H.lattice.n;
  num::check_superop_budget(D);
  Generator G = build_ckg_dense(lat::assemble_dense<double>(H), H.lattice.n, beta, q);
  G.H = H;
  return G;
}

Superop block_superop(const Block& b) { return {b.sites, num::lindblad_superop(b.B, b.jumps)}; }

Superop site_superop(const Generator& G, int i) {
  std::vector<const Block*> bs;
  for (const auto& b : G.blocks)
    if (b.site == i) bs.push_back(&b);
  if (bs.empty()) throw std::out_of_range("site_superop: no blocks for site");
  return combine(bs.front()->sites, bs);
}

MatD full_superop(const Generator& G) {
  std::vector<const Block*> bs;
  for (const auto& b : G.blocks) bs.push_back(&b);
  return combine(lat::interval(1, G.n), bs).S;
}

MatD apply_block(const Block& b, const MatD& rho, int n, int d) {
  if (static_cast<int>(b.sites.size()) == n) return num::lindblad_apply(b.B, b.jumps, rho);
  return num::apply_local(block_superop(b), rho, n, d);
}

MatD apply_generator(const Generator& G, const MatD& rho) {
  MatD out(rho.rows(), rho.cols());
  for (const auto& b : G.blocks) out += apply_block(b, rho, G.n, G.d);
  return out;
}

std::vector<double> stationarity(const Generator& G) {
  auto st = gibbs::gibbs_from_dense<double>(lat::assemble_dense<double>(G.H), G.beta);
  std::vector<double> out;
  for (const auto& b : G.blocks) out.push_back(num::trace_norm(apply_block(b, st.rho, G.n, G.d)));
  return out;
}

MatD evolve_superop(const MatD& S, const MatD& rho, double t) {
  if (t < 0) throw std::invalid_argument("evolve: t must be >= 0");
  if (t == 0) return rho;
  const std::size_t D = rho.rows();
  if (D <= 16) return num::apply_superop(num::superop_exp(S, t), rho);
  auto L = [&](const MatD& v) { return num::matmul(S, v); };
  MatD v = num::expv<double>(L, superop_norm_bound(S), t, num::vec(rho));
  return num::unvec(v, D);
}

MatD evolve(const Generator& G, const MatD& rho, double t) { return evolve_superop(full_superop(G), rho, t); }

GapResult spectral_gap(const Generator& G, int max_iter, double tol) {
  MatD S = full_superop(G);
  const std::size_t D = G.sp.E.size();
  double sigma = 0;
  for (std::size_t r = 0; r < S.rows(); ++r) {
    double rs = 0;
    for (std::size_t c = 0; c < S.cols(); ++c) rs += num::cabs(S(r, c));
    sigma = std::max(sigma, rs);
  }
  sigma *= 2;
  auto st = gibbs::gibbs_from_dense<double>(lat::assemble_dense<double>(G.H), G.beta);
  auto deflate = [&](MatD& X) {
    cd tr = X.trace();
    MatD p = st.rho;
    p *= tr;
    X -= p;
  };
  num::Rng rng(20240611);
  MatD X = num::random_hermitian(D, rng);
  deflate(X);
  X *= 1.0 / num::frobenius_norm(X);
  GapResult res;
  double mu_prev = 0;
  int stable = 0;
  for (int it = 1; it <= max_iter; ++it) {
    MatD Y = num::apply_superop(S, X);
    MatD sX = X;
    sX *= sigma;
    Y += sX;
    deflate(Y);
    double mu = num::trace_product(X.adjoint(), Y).re;  // <X, (S + sigma) X>, ||X|| = 1
    double nrm = num::frobenius_norm(Y);
    X = Y;
    X *= 1.0 / nrm;
    res.iterations = it;
    if (std::fabs(mu - mu_prev) < tol * sigma) {
      if (++stable >= 20) {
        mu_prev = mu;
        break;
      }
    } else {
      stable = 0;
    }
    mu_prev = mu;
  }
  MatD R = num::apply_superop(S, X);
  MatD lx = X;
  lx *= mu_prev - sigma;
  res.residual = num::frobenius_norm(MatD(R - lx));
  res.gap = sigma - mu_prev;
  return res;
}

std::vector<double> kms_spectrum(const Generator& G) {
  MatD S = full_superop(G);
  const std::size_t D = G.sp.E.size();
  // superoperator in the eigenbasis: vec(U^dag X U) = (U^dag (x) U^T) vec(X)
  MatD W = num::kron(G.sp.U, G.sp.U.conjugate());
  MatD Se = num::matmul_adj(W, num::matmul(S, W));
  // rho_beta = e^{-beta Hs}/Z is diagonal here
  std::vector<double> g(D * D);
  const double top = G.sp.E.front();
  for (std::size_t j = 0; j < D; ++j)
    for (std::size_t m = 0; m < D; ++m)
      g[j * D + m] = std::exp(-G.beta * (G.sp.E[j] - top + G.sp.E[m] - top) / 4);
  for (std::size_t r = 0; r < D * D; ++r)
    for (std::size_t c = 0; c < D * D; ++c) Se(r, c) *= g[c] / g[r];
  return num::eig_hermitian(num::hermitian_part(Se)).values;
}

// ---- norms -------------------------------------------------------------------------

double sampled_one_to_one(const MatD& S, std::size_t D, int samples, num::Rng& rng) {
  double best = 0;
  for (int k = 0; k < samples; ++k) {
    MatD X = num::random_ginibre(D, rng);
    X *= 1.0 / num::trace_norm(X);
    best = std::max(best, num::trace_norm(num::apply_superop(S, X)));
  }
  return best;
}

double choi_one_to_one_bound(const MatD& S, std::size_t D) {
  return num::trace_norm(num::hermitian_part(num::choi_matrix(S, D)));
}

// ---- chi^2 ----------------------------------------------------------------------------

double chi2(const MatD& rho_p, const MatD& rho) {
  auto e = num::eig_hermitian(num::hermitian_part(rho));
  if (!(e.values.front() > 0)) throw std::domain_error("chi2: reference state is singular");
  MatD K = num::spectral_apply<double>(e, [](const double& x) { return cd(1.0 / std::sqrt(x)); });
  MatD dlt = rho_p - rho;
  MatD Y = num::matmul(num::matmul(K, dlt), K);
  return num::trace_product(dlt, Y).re;
}

namespace {

lat::Hamiltonian merged(const lat::Hamiltonian& H, const lat::Hamiltonian& v) {
  lat::Hamiltonian out = H;
  for (std::size_t k = 0; k < v.terms.size(); ++k) {
    out.terms.push_back(v.terms[k]);
    out.coef.push_back(v.coef[k]);
  }
  return out;
}

double g0_of(const lat::Hamiltonian& v) {
  double g0 = 0;
  for (std::size_t k = 0; k < v.terms.size(); ++k) g0 += lat::term_norm(v, k);
  return g0;
}

}  // namespace

Chi2Audit chi2_bound_audit(const lat::Hamiltonian& H, const lat::Hamiltonian& v, double beta) {
  lat::Hamiltonian Hp = merged(H, v);
  auto st = gibbs::gibbs_state<double>(H, beta);
  auto stp = gibbs::gibbs_state<double>(Hp, beta);
  Chi2Audit a;
  a.chi2 = chi2(stp.rho, st.rho);
  a.g0 = g0_of(v);
  a.bound = 4 * std::exp(3 * beta * a.g0);
  std::size_t k = 1;
  for (const auto& t : Hp.terms) k = std::max(k, t.sites.size());
  a.beta_max = 1.0 / (4 * lat::local_strength(Hp) * static_cast<double>(k));
  a.applicable = beta <= a.beta_max;
  a.holds = a.chi2 <= a.bound;
  return a;
}

std::vector<MixingPoint> mixing_curve(const lat::Hamiltonian& H, const lat::Hamiltonian& v, double beta,
                                      const std::vector<double>& times, const QuadConfig& q) {
  lat::Hamiltonian Hp = merged(H, v);
  Generator Gp = build_ckg(Hp, beta, q);
  MatD S = full_superop(Gp);
  auto st = gibbs::gibbs_state<double>(H, beta);
  auto stp = gibbs::gibbs_state<double>(Hp, beta);
  const double g0 = g0_of(v);
  std::vector<double> ts = times;
  std::sort(ts.begin(), ts.end());
  std::vector<MixingPoint> out;
  MatD cur = st.rho;
  double tprev = 0;
  for (double t : ts) {
    cur = evolve_superop(S, cur, t - tprev);
    tprev = t;
    MixingPoint p;
    p.t = t;
    p.distance = num::trace_norm(num::hermitian_part(MatD(cur - stp.rho)));
    p.bound = 4 * std::exp(3 * beta * g0 - t / 4);
    out.push_back(p);
  }
  return out;
}

// ---- locality-truncated blocks -----------------------------------------------------

Block truncated_block(const Generator& G, int i, int a, int ell) {
  if (ell < 0) throw std::invalid_argument("truncated_block: ell must be >= 0");
  const int n = G.n, d = G.d;
  const Spectrum& sp = G.sp;
  Block blk;
  blk.site = i;
  blk.a = a;
  blk.ell = ell;
  blk.sites = lat::ball(i, ell, n);
  const std::vector<int> traced = num::complement(blk.sites, n);
  MatD A = num::embed_on_sites(pauli_basis(a), {i}, n, d);
  MatD Ae = to_eig(sp, A);
  OmegaRule rule = omega_rule(sp, G.quad);
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
    double r = gamma_weight(sp.beta, rule.nodes[k]) * rule.weights[k];
    MatD Je = hadamard(Ae, filter(sp, rule.nodes[k]));
    double f = num::frobenius_norm(Je);
    if (r * f * f < G.quad.jump_floor) continue;
    // A(w) is linear in the Heisenberg operators, so tr~ commutes with the time integral
    blk.jumps.push_back({restrict_to(from_eig(sp, Je), blk.sites, n, d), r});
  }
  // Y~ = int b2(t') A~(beta t') A~(-beta t') dt' with A~(s) = tr~ e^{i Hs s} A e^{-i Hs s}
  const std::size_t D = sp.E.size();
  auto heis = [&](double s) {
    MatD ph(D, D);
    for (std::size_t j = 0; j < D; ++j)
      for (std::size_t l = 0; l < D; ++l) ph(j, l) = num::expi((sp.E[j] - sp.E[l]) * s);
    MatD X = from_eig(sp, hadamard(Ae, ph));
    return traced.empty() ? X : num::normalized_partial_trace(X, traced, n, d);
  };
  const QuadConfig& q = G.quad;
  const double h = 2 * q.tprime_trunc / (q.tprime_nodes - 1);
  MatD Y(D, D);
  for (int k = 0; k < q.tprime_nodes; ++k) {
    double tp = -q.tprime_trunc + k * h;
    cd w = b2(tp);
    w *= ((k == 0 || k == q.tprime_nodes - 1) ? h / 2 : h);
    if (num::cabs(w) < 1e-22) continue;
    MatD P = num::matmul(heis(sp.beta * tp), heis(-sp.beta * tp));
    P *= w;
    Y += P;
  }
  // outer e^{-i beta Hs t} Y~ e^{i beta Hs t} is a Heisenberg operator as well: truncate after the t integral
  MatD Fk = coherent_kernel(sp, q);
  MatD B = hadamard(Fk, to_eig(sp, Y));
  B *= kCoherentScale;
  B = num::hermitian_part(from_eig(sp, B));
  blk.B = restrict_to(B, blk.sites, n, d);
  return blk;
}

Superop truncated_generator(const Generator& G, int i, int ell) {
  std::vector<Block> bs;
  for (int a = 1; a <= 3; ++a) bs.push_back(truncated_block(G, i, a, ell));
  std::vector<const Block*> ptr;
  for (const auto& b : bs) ptr.push_back(&b);
  return combine(bs.front().sites, ptr);
}

std::vector<Superop> delta_blocks(const Generator& G, int i, int ell_max) {
  std::vector<Superop> out;
  Superop prev;
  for (int ell = 0; ell <= ell_max; ++ell) {
    Superop cur = truncated_generator(G, i, ell);
    if (ell == 0) {
      out.push_back(cur);
    } else {
      Superop neg{prev.sites, negate(prev.S)};
      out.push_back(num::add(cur, neg, G.d));
    }
    prev = cur;
  }
  return out;
}

int inner_radius(int i, const std::vector<int>& X, int n) {
  if (std::find(X.begin(), X.end(), i) == X.end()) return -1;
  int best = 0;
  for (int ell = 1; ell <= n - 1; ++ell) {
    if (!lat::subset_of(lat::ball(i, ell, n), X)) break;
    best = ell;
  }
  return best;
}

Superop subset_liouvillian(const Generator& G, const std::vector<int>& X, const std::vector<int>& centers) {
  std::vector<int> Xs = X;
  std::sort(Xs.begin(), Xs.end());
  const std::size_t dX = static_cast<std::size_t>(std::pow(G.d, Xs.size()));
  Superop out{Xs, MatD(dX * dX, dX * dX)};
  for (int i : centers) {
    int ell = inner_radius(i, Xs, G.n);
    if (ell < 0) throw std::invalid_argument("subset_liouvillian: center outside X");
    Superop t = num::widen(truncated_generator(G, i, ell), Xs, G.d);
    out.S += t.S;
  }
  return out;
}

Superop subset_liouvillian(const Generator& G, const std::vector<int>& X) { return subset_liouvillian(G, X, X); }

}  // namespace qbp::ckg
