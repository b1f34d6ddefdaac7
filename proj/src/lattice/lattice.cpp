#include "qbp/lattice/lattice.hpp"

#include "qbp/numkit/superop.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <json.hpp>
#include <stdexcept>

namespace qbp::lat {

using num::BigFloat;
using num::Cx;

template <class R>
Mat<R> pauli(char c) {
  Mat<R> m(2, 2);
  switch (c) {
    case 'I':
      m = Mat<R>::identity(2);
      break;
    case 'X':
      m(0, 1) = Cx<R>(R(1));
      m(1, 0) = Cx<R>(R(1));
      break;
    case 'Y':
      m(0, 1) = Cx<R>(R(0), R(-1));
      m(1, 0) = Cx<R>(R(0), R(1));
      break;
    case 'Z':
      m(0, 0) = Cx<R>(R(1));
      m(1, 1) = Cx<R>(R(-1));
      break;
    default:
      throw std::invalid_argument(std::string("unknown Pauli '") + c + "'");
  }
  return m;
}

template <class R>
Mat<R> pauli_string(const std::string& s) {
  Mat<R> m = Mat<R>::identity(1);
  for (char c : s) m = num::kron(m, pauli<R>(c));
  return m;
}

namespace {

Term pauli_term(std::vector<int> sites, std::string label, std::vector<PauliComponent> comps) {
  Term t;
  t.sites = std::move(sites);
  t.label = std::move(label);
  t.exact = std::move(comps);
  t.op = term_matrix<double>(t);
  return t;
}

}  // namespace

Hamiltonian build_xyz_chain(int n) {
  if (n < 2) throw std::invalid_argument("build_xyz_chain: n must be at least 2");
  LatticeSpec lat{n, 2};
  std::vector<Term> terms;
  for (int i = 1; i < n; ++i)
    terms.push_back(pauli_term({i, i + 1}, "h" + std::to_string(i) + "," + std::to_string(i + 1),
                               {{"XX", 3, 6}, {"YY", 2, 6}, {"ZZ", 1, 6}}));
  for (int i = 1; i <= n; ++i)
    terms.push_back(pauli_term({i}, "h" + std::to_string(i), {{"X", 1, 3}, {"Y", 1, 3}, {"Z", 1, 3}}));
  return make_hamiltonian(lat, std::move(terms));
}

Hamiltonian make_hamiltonian(const LatticeSpec& lat, std::vector<Term> terms) {
  Hamiltonian H;
  H.lattice = lat;
  H.terms = std::move(terms);
  H.coef.assign(H.terms.size(), 1.0);
  validate(H);
  return H;
}

void validate(const Hamiltonian& H) {
  if (H.lattice.n < 1 || H.lattice.n > 12) throw std::invalid_argument("lattice size must be in 1..12");
  if (H.coef.size() != H.terms.size()) throw std::invalid_argument("coefficient count mismatch");
  for (const auto& t : H.terms) {
    if (t.sites.empty()) throw std::invalid_argument("term '" + t.label + "' has empty support");
    if (!std::is_sorted(t.sites.begin(), t.sites.end()) ||
        std::adjacent_find(t.sites.begin(), t.sites.end()) != t.sites.end())
      throw std::invalid_argument("term '" + t.label + "' support must be sorted and distinct");
    for (int s : t.sites)
      if (s < 1 || s > H.lattice.n) throw std::out_of_range("term '" + t.label + "' site out of range");
    std::size_t D = 1;
    for (std::size_t k = 0; k < t.sites.size(); ++k) D *= static_cast<std::size_t>(H.lattice.d);
    if (t.op.rows() != D || t.op.cols() != D)
      throw std::invalid_argument("term '" + t.label + "' matrix dimension does not match support");
    if (!num::is_hermitian(t.op, 1e-12)) throw std::invalid_argument("term '" + t.label + "' is not Hermitian");
  }
}

template <class R>
Mat<R> term_matrix(const Term& t) {
  if (t.exact.empty()) return num::convert<R>(t.op);
  Mat<R> m;
  for (const auto& c : t.exact) {
    Mat<R> p = pauli_string<R>(c.paulis);
    p *= R(c.num) / R(c.den);
    if (m.rows() == 0)
      m = p;
    else
      m += p;
  }
  return m;
}

template <class R>
Mat<R> term_local(const Hamiltonian& H, std::size_t k) {
  Mat<R> m = term_matrix<R>(H.terms[k]);
  if (H.coef[k] != 1.0) m *= R(H.coef[k]);
  return m;
}

template <class R>
Mat<R> assemble_dense(const Hamiltonian& H) {
  std::size_t D = 1;
  for (int k = 0; k < H.lattice.n; ++k) D *= static_cast<std::size_t>(H.lattice.d);
  if (D > 4096) throw num::SizeError("assemble_dense: dimension exceeds 4096");
  Mat<R> out(D, D);
  for (std::size_t k = 0; k < H.terms.size(); ++k) {
    if (H.coef[k] == 0.0) continue;
    out += num::embed_on_sites(term_local<R>(H, k), H.terms[k].sites, H.lattice.n, H.lattice.d);
  }
  return out;
}

bool subset_of(const std::vector<int>& a, const std::vector<int>& b) {
  for (int x : a)
    if (std::find(b.begin(), b.end(), x) == b.end()) return false;
  return true;
}

namespace {

Hamiltonian select(const Hamiltonian& H, const std::function<bool(const Term&)>& keep) {
  Hamiltonian out;
  out.lattice = H.lattice;
  for (std::size_t k = 0; k < H.terms.size(); ++k)
    if (keep(H.terms[k])) {
      out.terms.push_back(H.terms[k]);
      out.coef.push_back(H.coef[k]);
    }
  return out;
}

bool meets(const std::vector<int>& a, const std::vector<int>& b) {
  for (int x : a)
    if (std::find(b.begin(), b.end(), x) != b.end()) return true;
  return false;
}

}  // namespace

Hamiltonian subset_hamiltonian(const Hamiltonian& H, const std::vector<int>& L) {
  for (int s : L)
    if (s < 1 || s > H.lattice.n) throw std::out_of_range("subset_hamiltonian: site out of range");
  return select(H, [&](const Term& t) { return subset_of(t.sites, L); });
}

Hamiltonian boundary_hamiltonian(const Hamiltonian& H, const std::vector<int>& L) {
  return select(H, [&](const Term& t) { return meets(t.sites, L) && !subset_of(t.sites, L); });
}

template <class R>
Mat<R> boundary_term(const Hamiltonian& H, const std::vector<int>& L) {
  return assemble_dense<R>(boundary_hamiltonian(H, L));
}

Hamiltonian incident_hamiltonian(const Hamiltonian& H, int i) {
  return select(H, [&](const Term& t) { return std::find(t.sites.begin(), t.sites.end(), i) != t.sites.end(); });
}

Hamiltonian without_terms(const Hamiltonian& H, const std::vector<std::size_t>& idx) {
  Hamiltonian out;
  out.lattice = H.lattice;
  for (std::size_t k = 0; k < H.terms.size(); ++k)
    if (std::find(idx.begin(), idx.end(), k) == idx.end()) {
      out.terms.push_back(H.terms[k]);
      out.coef.push_back(H.coef[k]);
    }
  return out;
}

std::size_t find_term(const Hamiltonian& H, const std::string& label) {
  for (std::size_t k = 0; k < H.terms.size(); ++k)
    if (H.terms[k].label == label) return k;
  throw std::invalid_argument("unknown term label '" + label + "'");
}

Hamiltonian parameterize(const Hamiltonian& H, const std::map<std::string, double>& assignment) {
  Hamiltonian out = H;
  for (const auto& [label, a] : assignment) out.coef[find_term(H, label)] = a;
  return out;
}

Hamiltonian single_coupling_family(const Hamiltonian& H, const std::string& bond_label, double a) {
  return parameterize(H, {{bond_label, a}});
}

std::vector<int> interval(int a, int b) {
  std::vector<int> v;
  for (int i = a; i <= b; ++i) v.push_back(i);
  return v;
}

std::vector<int> ball(int i, double r, int n) {
  if (i < 1 || i > n) throw std::out_of_range("ball: site out of range");
  const int k = static_cast<int>(std::floor(r + 1e-12));
  if (k < 0) return {};
  return interval(std::max(1, i - k), std::min(n, i + k));
}

std::vector<int> ball(const std::vector<int>& X, double r, int n) {
  std::vector<int> out;
  for (int x : X) out = set_union(out, ball(x, r, n));
  return out;
}

int distance(const std::vector<int>& X, const std::vector<int>& Y) {
  if (X.empty() || Y.empty()) throw std::invalid_argument("distance: empty set");
  int best = 1 << 30;
  for (int x : X)
    for (int y : Y) best = std::min(best, std::abs(x - y));
  return best;
}

std::vector<int> set_union(std::vector<int> a, const std::vector<int>& b) {
  a.insert(a.end(), b.begin(), b.end());
  std::sort(a.begin(), a.end());
  a.erase(std::unique(a.begin(), a.end()), a.end());
  return a;
}

std::vector<int> set_minus(const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<int> out;
  for (int x : a)
    if (std::find(b.begin(), b.end(), x) == b.end()) out.push_back(x);
  return out;
}

std::vector<int> trim_region(const std::vector<int>& B, int lH, int n) {
  std::vector<int> outside = num::complement(B, n);
  if (outside.empty()) return B;
  std::vector<int> out;
  for (int b : B)
    if (distance({b}, outside) > lH) out.push_back(b);
  return out;
}

double term_norm(const Hamiltonian& H, std::size_t k) {
  return std::fabs(H.coef[k]) * num::op_norm(H.terms[k].op);
}

std::vector<double> site_strengths(const Hamiltonian& H) {
  std::vector<double> s(static_cast<std::size_t>(H.lattice.n) + 1, 0.0);
  for (std::size_t k = 0; k < H.terms.size(); ++k) {
    double v = term_norm(H, k);
    for (int x : H.terms[k].sites) s[static_cast<std::size_t>(x)] += v;
  }
  return s;
}

double local_strength(const Hamiltonian& H) {
  auto s = site_strengths(H);
  return *std::max_element(s.begin(), s.end());
}

double total_strength(const Hamiltonian& H) {
  double s = 0;
  for (std::size_t k = 0; k < H.terms.size(); ++k) s += term_norm(H, k);
  return s;
}

int interaction_length(const Hamiltonian& H) {
  int l = 0;
  for (const auto& t : H.terms) l = std::max(l, t.sites.back() - t.sites.front());
  return l;
}

std::string to_json(const Hamiltonian& H) {
  nlohmann::json j;
  j["n"] = H.lattice.n;
  j["d"] = H.lattice.d;
  j["terms"] = nlohmann::json::array();
  for (std::size_t k = 0; k < H.terms.size(); ++k) {
    const Term& t = H.terms[k];
    nlohmann::json jt;
    jt["sites"] = t.sites;
    jt["label"] = t.label;
    nlohmann::json m = nlohmann::json::array();
    for (const auto& z : t.op.storage()) m.push_back({z.re, z.im});
    jt["matrix"] = m;
    if (H.coef[k] != 1.0) jt["coef"] = H.coef[k];
    if (!t.exact.empty()) {
      nlohmann::json p = nlohmann::json::array();
      for (const auto& c : t.exact) p.push_back({{"string", c.paulis}, {"num", c.num}, {"den", c.den}});
      jt["pauli"] = p;
    }
    j["terms"].push_back(jt);
  }
  return j.dump(1);
}

Hamiltonian from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("model JSON: ") + e.what());
  }
  try {
    LatticeSpec lat{j.at("n").get<int>(), j.value("d", 2)};
    std::vector<Term> terms;
    std::vector<double> coef;
    for (const auto& jt : j.at("terms")) {
      Term t;
      t.sites = jt.at("sites").get<std::vector<int>>();
      t.label = jt.value("label", "");
      std::size_t D = 1;
      for (std::size_t k = 0; k < t.sites.size(); ++k) D *= static_cast<std::size_t>(lat.d);
      t.op = MatD(D, D);
      std::vector<std::vector<double>> flat;
      const auto& jm = jt.at("matrix");
      for (const auto& e : jm) {
        if (e.size() == 2 && e[0].is_number()) {
          flat.push_back(e.get<std::vector<double>>());
        } else {
          for (const auto& f : e) flat.push_back(f.get<std::vector<double>>());
        }
      }
      if (flat.size() != D * D) throw std::invalid_argument("term '" + t.label + "' matrix has wrong entry count");
      for (std::size_t k = 0; k < D * D; ++k) t.op.storage()[k] = num::cd(flat[k][0], flat[k][1]);
      if (jt.contains("pauli"))
        for (const auto& p : jt["pauli"])
          t.exact.push_back({p.at("string").get<std::string>(), p.at("num").get<long>(), p.at("den").get<long>()});
      coef.push_back(jt.value("coef", 1.0));
      terms.push_back(std::move(t));
    }
    Hamiltonian H = make_hamiltonian(lat, std::move(terms));
    H.coef = coef;
    return H;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("model JSON: ") + e.what());
  }
}

#define QBP_INST(R)                                                             \
  template Mat<R> pauli<R>(char);                                               \
  template Mat<R> pauli_string<R>(const std::string&);                          \
  template Mat<R> term_matrix<R>(const Term&);                                  \
  template Mat<R> term_local<R>(const Hamiltonian&, std::size_t);               \
  template Mat<R> assemble_dense<R>(const Hamiltonian&);                        \
  template Mat<R> boundary_term<R>(const Hamiltonian&, const std::vector<int>&);

QBP_INST(double)
QBP_INST(BigFloat)
#undef QBP_INST

}  // namespace qbp::lat
