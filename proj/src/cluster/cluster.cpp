#include "qbp/cluster/cluster.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>

#include "qbp/numkit/kernels.hpp"

namespace qbp::cluster {

using num::Cx;

int Composition::m() const { return std::accumulate(parts.begin(), parts.end(), 0); }

void validate_parts(const std::vector<int>& parts) {
  if (parts.empty()) throw std::invalid_argument("composition needs at least one part");
  for (int p : parts)
    if (p < 1) throw std::invalid_argument("composition parts must be >= 1");
}

namespace {

mpz_class factorial(int k) {
  mpz_class f = 1;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

void compositions_into(int rest, int q, std::vector<int>& cur, std::vector<Composition>& out) {
  if (q == 0) {
    if (rest == 0) out.push_back({cur});
    return;
  }
  for (int p = 1; p <= rest - (q - 1); ++p) {
    cur.push_back(p);
    compositions_into(rest - p, q - 1, cur, out);
    cur.pop_back();
  }
}

using OccupationTable = std::map<std::vector<int>, mpz_class>;

const OccupationTable& occupation_table(int m) {
  static std::mutex mu;
  static std::map<int, OccupationTable> cache;
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(m);
    if (it != cache.end()) return it->second;
  }
  // |Delta_m| = m!; flatten the mixed-radix counter and split it across threads.
  const long total = factorial(m).get_si();
  OccupationTable merged;
#pragma omp parallel
  {
    std::map<std::vector<int>, long> local;
    std::vector<int> iota(m), count(m + 1);
#pragma omp for schedule(static)
    for (long flat = 0; flat < total; ++flat) {
      long x = flat;
      long c = 1;
      for (int k = m - 1; k >= 0; --k) {
        iota[k] = static_cast<int>(x % (k + 1)) + 1;
        x /= (k + 1);
      }
      std::fill(count.begin(), count.end(), 0);
      for (int k = 0; k < m; ++k) {
        ++count[iota[k]];
        if (k >= 1 && iota[k] == k + 1) c *= -k;
      }
      std::vector<int> key;
      for (int s = 1; s <= m; ++s)
        if (count[s] > 0) key.push_back(count[s]);
      local[key] += c;
    }
#pragma omp critical
    for (const auto& [k, v] : local) merged[k] += v;
  }
  std::lock_guard<std::mutex> lock(mu);
  return cache.emplace(m, std::move(merged)).first->second;
}

template <class R>
R to_real(const Rational& q) {
  if constexpr (std::is_same_v<R, double>) {
    return q.get_d();
  } else {
    return num::from_rational_string(q.get_num().get_str(), q.get_den().get_str());
  }
}

template <class R>
double absd(const R& x) {
  return std::fabs(num::to_d(x));
}

template <class R>
Mat<R> identity(std::size_t D) {
  Mat<R> I(D, D);
  for (std::size_t i = 0; i < D; ++i) I(i, i) = Cx<R>(R(1));
  return I;
}

template <class R>
Mat<R> power(const Mat<R>& H, int k) {
  Mat<R> out = identity<R>(H.rows());
  for (int i = 0; i < k; ++i) out = num::matmul(out, H);
  return out;
}

// P_q prod_i A[m_i]: sum over all q! orderings of the factors.
template <class R>
Mat<R> symmetrized_product(const std::vector<Mat<R>>& A, const std::vector<int>& parts) {
  std::vector<int> idx(parts.size());
  std::iota(idx.begin(), idx.end(), 0);
  Mat<R> acc(A[1].rows(), A[1].cols());
  do {
    Mat<R> prod = A[parts[idx[0]]];
    for (std::size_t k = 1; k < idx.size(); ++k) prod = num::matmul(prod, A[parts[idx[k]]]);
    acc += prod;
  } while (std::next_permutation(idx.begin(), idx.end()));
  return acc;
}

template <class R>
double max_abs(const Mat<R>& M) {
  double v = 0;
  for (const auto& z : M.storage()) v = std::max(v, num::to_d(num::cabs(z)));
  return v;
}

}  // namespace

std::vector<Composition> compositions(int m) {
  if (m < 1) throw std::invalid_argument("compositions: m must be >= 1");
  std::vector<Composition> out;
  std::vector<int> cur;
  for (int q = 1; q <= m; ++q) compositions_into(m, q, cur, out);
  return out;
}

Rational coeff_closed(const std::vector<int>& parts) {
  validate_parts(parts);
  const int q = static_cast<int>(parts.size());
  const int m = std::accumulate(parts.begin(), parts.end(), 0);
  mpz_class den = factorial(q) * q;
  for (int p : parts) den *= factorial(p);
  Rational c(factorial(m), den);
  c.canonicalize();
  return ((m + q - 1) % 2 == 0) ? c : Rational(-c);
}

std::vector<std::pair<std::vector<int>, mpz_class>> occupation_sums(int m) {
  if (m < 1) throw std::invalid_argument("occupation_sums: m must be >= 1");
  if (m > 9) throw BudgetError("occupation_sums: m = " + std::to_string(m) + " exceeds the enumeration budget m <= 9");
  const auto& t = occupation_table(m);
  return {t.begin(), t.end()};
}

Rational coeff_combinatorial(const std::vector<int>& parts) {
  validate_parts(parts);
  const int q = static_cast<int>(parts.size());
  const int m = std::accumulate(parts.begin(), parts.end(), 0);
  if (m > 9) throw BudgetError("coeff_combinatorial: m = " + std::to_string(m) + " exceeds the enumeration budget m <= 9");
  const auto& table = occupation_table(m);
  std::vector<int> arr = parts;
  std::sort(arr.begin(), arr.end());
  mpz_class sum = 0;
  long distinct = 0;
  do {
    auto it = table.find(arr);
    if (it != table.end()) sum += it->second;
    ++distinct;
  } while (std::next_permutation(arr.begin(), arr.end()));
  Rational c(sum, factorial(q) * distinct);
  c.canonicalize();
  return (m % 2 == 0) ? c : Rational(-c);
}

std::vector<TableRow> coefficient_table(int m) {
  std::vector<TableRow> rows;
  std::map<std::vector<int>, std::size_t> seen;
  for (const auto& c : compositions(m)) {
    std::vector<int> key = c.parts;
    std::sort(key.begin(), key.end());
    auto it = seen.find(key);
    if (it == seen.end()) {
      seen.emplace(key, rows.size());
      rows.push_back({{c.parts}, coeff_closed(c.parts), coeff_combinatorial(c.parts)});
    } else {
      rows[it->second].arrangements.push_back(c.parts);
    }
  }
  std::stable_sort(rows.begin(), rows.end(), [](const TableRow& a, const TableRow& b) {
    std::vector<int> ka = a.arrangements[0], kb = b.arrangements[0];
    std::sort(ka.begin(), ka.end());
    std::sort(kb.begin(), kb.end());
    if (ka.size() != kb.size()) return ka.size() < kb.size();
    return ka < kb;
  });
  for (auto& r : rows) std::sort(r.arrangements.begin(), r.arrangements.end());
  return rows;
}

Rational scalar_collapse(int m, bool combinatorial) {
  Rational s = 0;
  for (const auto& c : compositions(m))
    s += Rational(factorial(c.q())) * (combinatorial ? coeff_combinatorial(c.parts) : coeff_closed(c.parts));
  return s;
}

WFixtureReport w_ops_m3_fixture(const MatD& H, int n, const std::vector<int>& L) {
  if (L.size() != 1) throw std::invalid_argument("w_ops_m3_fixture: L must be a single site");
  if (n < 2 || n > 3) throw BudgetError("w_ops_m3_fixture: n <= 3 (extended dimension <= 128)");
  const std::size_t D = std::size_t(1) << n;
  if (H.rows() != D || !H.square()) throw std::invalid_argument("w_ops_m3_fixture: H must be 2^n x 2^n");
  const std::size_t dL = 2, dC = D / 2;
  const std::size_t E = dL * dC * dC * dC;
  num::SplitIndex sp = num::make_split(n, 2, L);
  auto ext = [&](std::size_t l, const std::size_t c[3]) { return ((l * dC + c[0]) * dC + c[1]) * dC + c[2]; };

  // H on L and copy s
  std::vector<MatD> Hs(3, MatD(E, E));
  for (int s = 0; s < 3; ++s)
    for (std::size_t l = 0; l < dL; ++l)
      for (std::size_t lp = 0; lp < dL; ++lp)
        for (std::size_t a = 0; a < dC; ++a)
          for (std::size_t b = 0; b < dC; ++b) {
            const auto v = H(sp.full[l * dC + a], sp.full[lp * dC + b]);
            if (num::is_zero(v)) continue;
            for (std::size_t u = 0; u < dC; ++u)
              for (std::size_t w = 0; w < dC; ++w) {
                std::size_t c1[3], c2[3];
                c1[s] = a, c2[s] = b;
                c1[(s + 1) % 3] = c2[(s + 1) % 3] = u;
                c1[(s + 2) % 3] = c2[(s + 2) % 3] = w;
                Hs[s](ext(l, c1), ext(lp, c2)) = v;
              }
          }

  auto trace_copies = [&](const MatD& M) {
    MatD out(dL, dL);
    for (std::size_t l = 0; l < dL; ++l)
      for (std::size_t lp = 0; lp < dL; ++lp) {
        Cx<double> acc;
        for (std::size_t a = 0; a < dC; ++a)
          for (std::size_t b = 0; b < dC; ++b)
            for (std::size_t c = 0; c < dC; ++c) {
              const std::size_t cc[3] = {a, b, c};
              acc += M(ext(l, cc), ext(lp, cc));
            }
        out(l, lp) = acc;
      }
    return out;
  };

  // Delta_3 = {1} x {1,2} x {1,2,3}; H~(k) = sum_{i<=k} H_i - k H_{k+1}
  WFixtureReport rep;
  rep.ext_dim = E;
  MatD lhs_ext(E, E);
  const MatD I = identity<double>(E);
  for (int i1 = 1; i1 <= 2; ++i1)
    for (int i2 = 1; i2 <= 3; ++i2) {
      const int iota[3] = {1, i1, i2};
      double c = (i1 == 2 ? -1.0 : 1.0) * (i2 == 3 ? -2.0 : 1.0);
      // W_O: stable regrouping by copy index
      int N[3] = {0, 0, 0};
      for (int k = 0; k < 3; ++k) ++N[iota[k] - 1];
      std::vector<MatD> block(3, I);
      for (int s = 0; s < 3; ++s) block[s] = power(Hs[s], N[s]);
      // W_S: average over the 3! orderings of the copy blocks
      MatD avg(E, E);
      int perm[3] = {0, 1, 2};
      do {
        avg += num::matmul(num::matmul(block[perm[0]], block[perm[1]]), block[perm[2]]);
      } while (std::next_permutation(perm, perm + 3));
      lhs_ext += avg * (c / 6.0);
    }
  MatD t0 = Hs[0];
  MatD t1 = Hs[0] - Hs[1];
  MatD t2 = Hs[0] + Hs[1] - Hs[2] * 2.0;
  rep.lhs = trace_copies(lhs_ext);
  rep.raw = trace_copies(num::matmul(num::matmul(t0, t1), t2));

  std::vector<MatD> A(4);
  for (int k = 1; k <= 3; ++k) A[k] = num::partial_trace(power(H, k), L, n, 2);
  const double d = static_cast<double>(dC);
  rep.rhs = A[3] * (d * d) - (num::matmul(A[2], A[1]) + num::matmul(A[1], A[2])) * (1.5 * d) +
            num::matmul(num::matmul(A[1], A[1]), A[1]) * 2.0;
  rep.residual = num::max_abs_diff(rep.lhs, rep.rhs);
  rep.raw_gap = num::max_abs_diff(rep.raw, rep.rhs);

  MatD formula(dL, dL);
  for (const auto& c : compositions(3))
    formula += symmetrized_product(A, c.parts) * (coeff_closed(c.parts).get_d() / std::pow(d, c.q()));
  rep.formula_residual = num::max_abs_diff(MatD(rep.lhs * (-1.0 / (d * d * d))), formula);
  return rep;
}

MatD random_chain_hamiltonian(int n, num::Rng& rng) {
  if (n < 2 || n > 10) throw std::invalid_argument("random_chain_hamiltonian: 2 <= n <= 10");
  const std::size_t D = std::size_t(1) << n;
  MatD H(D, D);
  for (int i = 1; i < n; ++i) {
    MatD h = num::random_hermitian(4, rng);
    H += num::embed_on_sites(MatD(h * (1.0 / num::op_norm(h))), {i, i + 1}, n, 2);
  }
  for (int i = 1; i <= n; ++i) {
    MatD h = num::random_hermitian(2, rng);
    H += num::embed_on_sites(MatD(h * (1.0 / num::op_norm(h))), {i}, n, 2);
  }
  return H;
}

template <class R>
std::vector<Mat<R>> log_derivatives(const Mat<R>& H, int n, const std::vector<int>& L, int m_max) {
  if (m_max < 1 || m_max > 6) throw std::invalid_argument("log_derivatives: 1 <= m_max <= 6");
  if (n > 4) throw BudgetError("log_derivatives: n <= 4");
  const int nc = n - static_cast<int>(L.size());
  const R d = R(static_cast<double>(std::size_t(1) << nc));
  std::vector<Mat<R>> A(m_max + 1);
  Mat<R> Hk = identity<R>(H.rows());
  for (int k = 1; k <= m_max; ++k) {
    Hk = num::matmul(Hk, H);
    A[k] = num::partial_trace(Hk, L, n, 2);
  }
  std::vector<Mat<R>> out;
  for (int m = 1; m <= m_max; ++m) {
    Mat<R> Dm(A[1].rows(), A[1].cols());
    for (const auto& c : compositions(m)) {
      R w = to_real<R>(coeff_closed(c.parts));
      for (int i = 0; i < c.q(); ++i) w = w / d;
      Dm += symmetrized_product(A, c.parts) * w;
    }
    out.push_back(std::move(Dm));
  }
  return out;
}

template <class R>
std::vector<Mat<R>> taylor_log_reduced(const Mat<R>& H, int n, const std::vector<int>& L, const R& beta,
                                       int m_max) {
  auto D = log_derivatives(H, n, L, m_max);
  R scale = R(1);
  for (int m = 1; m <= m_max; ++m) {
    scale = scale * beta / R(m);
    D[m - 1] = D[m - 1] * scale;
  }
  return D;
}

template <class R>
DerivativeAudit derivative_identity_audit(const Mat<R>& H, int n, const std::vector<int>& L, int m_max, double h,
                                          int K, double tol) {
  if (K < 1 || 2 * K < m_max) throw std::invalid_argument("derivative_identity_audit: need 2K >= m_max");
  const auto D = log_derivatives(H, n, L, m_max);
  const int nc = n - static_cast<int>(L.size());
  const R dC = R(static_cast<double>(std::size_t(1) << nc));
  const int P = 2 * K;

  std::vector<R> nodes;
  for (int k = 1; k <= K; ++k) {
    nodes.push_back(R(h) * R(k));
    nodes.push_back(R(-h) * R(k));
  }
  // f = log1p(Y) with Y = tr_{L^c}(expm1(-beta H)) / d, so roundoff scales with |beta H|, not 1
  const auto eH = num::eig_hermitian(H);
  std::vector<Mat<R>> f;
  for (const R& b : nodes) {
    Mat<R> E = num::spectral_apply<R>(eH, [&](const R& x) {
      using std::expm1;
      return Cx<R>(expm1(R(-b) * x));
    });
    Mat<R> Y = num::partial_trace(E, L, n, 2) * (R(1) / dC);
    f.push_back(num::spectral_apply<R>(num::eig_hermitian(num::hermitian_part(Y)), [](const R& y) {
      using std::log1p;
      if (!(y > R(-1))) throw std::domain_error("derivative_identity_audit: reduced operator not positive");
      return Cx<R>(log1p(y));
    }));
  }

  // Gauss-Jordan inverse of V[j][p] = beta_j^{p+1}
  std::vector<std::vector<R>> V(P, std::vector<R>(2 * P, R(0)));
  for (int j = 0; j < P; ++j) {
    R x = nodes[j];
    for (int p = 0; p < P; ++p) {
      V[j][p] = x;
      x = x * nodes[j];
    }
    V[j][P + j] = R(1);
  }
  for (int col = 0; col < P; ++col) {
    int piv = col;
    for (int r = col + 1; r < P; ++r)
      if (absd(V[r][col]) > absd(V[piv][col])) piv = r;
    std::swap(V[col], V[piv]);
    const R inv = R(1) / V[col][col];
    for (auto& v : V[col]) v = v * inv;
    for (int r = 0; r < P; ++r) {
      if (r == col) continue;
      const R fac = V[r][col];
      for (int c = 0; c < 2 * P; ++c) V[r][c] = V[r][c] - fac * V[col][c];
    }
  }

  DerivativeAudit out;
  out.h = h;
  out.nodes = P;
  out.digits = num::Real<R>::digits();
  double eps = std::numeric_limits<double>::epsilon();
  if constexpr (num::Real<R>::is_big) eps = std::ldexp(1.0, 1 - static_cast<int>(num::working_bits()));
  double fmax = 0;
  for (const auto& fj : f) fmax = std::max(fmax, max_abs(fj));
  R mfact = R(1);
  for (int m = 1; m <= m_max; ++m) {
    mfact = mfact * R(m);
    Mat<R> fit(D[0].rows(), D[0].cols());
    double wsum = 0;
    for (int j = 0; j < P; ++j) {
      fit += f[j] * V[m - 1][P + j];
      wsum += absd(V[m - 1][P + j]);
    }
    fit = fit * mfact;
    out.noise.push_back(eps * wsum * fmax * num::to_d(mfact));
    out.residual.push_back(num::to_d(num::max_abs_diff(fit, D[m - 1])));
    if (out.noise.back() > tol) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "derivative fit ill-conditioned at m = %d (roundoff ~ %.2e > %.2e); rerun in big-float",
                    m, out.noise.back(), tol);
      throw FitConditionError(buf);
    }
  }
  return out;
}

#define QBP_CLUSTER_INST(R)                                                                                    \
  template std::vector<Mat<R>> log_derivatives<R>(const Mat<R>&, int, const std::vector<int>&, int);          \
  template std::vector<Mat<R>> taylor_log_reduced<R>(const Mat<R>&, int, const std::vector<int>&, const R&,   \
                                                     int);                                                     \
  template DerivativeAudit derivative_identity_audit<R>(const Mat<R>&, int, const std::vector<int>&, int,      \
                                                        double, int, double);

QBP_CLUSTER_INST(double)
QBP_CLUSTER_INST(num::BigFloat)

}  // namespace qbp::cluster
