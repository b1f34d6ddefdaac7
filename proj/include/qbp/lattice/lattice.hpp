#pragma once

#include <map>
#include <string>
#include <vector>

#include "qbp/numkit/linalg.hpp"

namespace qbp::lat {

using num::Mat;
using num::MatD;

// Open chain, sites 1..n, distance |i - j|.
struct LatticeSpec {
  int n = 1;
  int d = 2;
  static constexpr int D = 1;
  static constexpr int gamma = 3;
};

// Optional exact form sum_k (num_k / den_k) P_k with P_k a Pauli string, so
// shipped models can be assembled at any precision without a double round trip.
struct PauliComponent {
  std::string paulis;  // one of IXYZ per site of the term
  long num = 1;
  long den = 1;
};

struct Term {
  std::vector<int> sites;  // sorted, 1-based
  MatD op;
  std::string label;
  std::vector<PauliComponent> exact;
};

struct Hamiltonian {
  LatticeSpec lattice;
  std::vector<Term> terms;
  std::vector<double> coef;  // a_Z, one per term (defaults to 1)
};

template <class R>
Mat<R> pauli(char c);
template <class R>
Mat<R> pauli_string(const std::string& s);

// h_{i,i+1} = (3XX + 2YY + ZZ)/6 and h_i = (X + Y + Z)/3.
Hamiltonian build_xyz_chain(int n);
Hamiltonian make_hamiltonian(const LatticeSpec& lat, std::vector<Term> terms);
void validate(const Hamiltonian& H);

template <class R>
Mat<R> term_matrix(const Term& t);
template <class R>
Mat<R> assemble_dense(const Hamiltonian& H);
// Terms as (site list, local matrix with coefficient folded in).
template <class R>
Mat<R> term_local(const Hamiltonian& H, std::size_t k);

// Terms with Z inside L.
Hamiltonian subset_hamiltonian(const Hamiltonian& H, const std::vector<int>& L);
// Terms that meet both L and its complement.
Hamiltonian boundary_hamiltonian(const Hamiltonian& H, const std::vector<int>& L);
template <class R>
Mat<R> boundary_term(const Hamiltonian& H, const std::vector<int>& L);
// Terms containing site i, summed: v_i.
Hamiltonian incident_hamiltonian(const Hamiltonian& H, int i);
// H with the given terms removed (by index).
Hamiltonian without_terms(const Hamiltonian& H, const std::vector<std::size_t>& idx);

Hamiltonian parameterize(const Hamiltonian& H, const std::map<std::string, double>& assignment);
// a h_{bond} + H_0, where H_0 is H with the bond deleted.
Hamiltonian single_coupling_family(const Hamiltonian& H, const std::string& bond_label, double a);
std::size_t find_term(const Hamiltonian& H, const std::string& label);

std::vector<int> ball(int i, double r, int n);
std::vector<int> ball(const std::vector<int>& X, double r, int n);
int distance(const std::vector<int>& X, const std::vector<int>& Y);
std::vector<int> trim_region(const std::vector<int>& B, int lH, int n);
std::vector<int> interval(int a, int b);
std::vector<int> set_union(std::vector<int> a, const std::vector<int>& b);
std::vector<int> set_minus(const std::vector<int>& a, const std::vector<int>& b);
bool subset_of(const std::vector<int>& a, const std::vector<int>& b);

double term_norm(const Hamiltonian& H, std::size_t k);  // |a_Z| ||h_Z||
// g = max_i sum_{Z ni i} ||h_Z||
double local_strength(const Hamiltonian& H);
std::vector<double> site_strengths(const Hamiltonian& H);
// Sum of all term norms.
double total_strength(const Hamiltonian& H);
int interaction_length(const Hamiltonian& H);

// {"n", "d", "terms": [{"sites", "matrix": [[re, im], ...] row-major, "label"}]}
std::string to_json(const Hamiltonian& H);
Hamiltonian from_json(const std::string& text);

}  // namespace qbp::lat
