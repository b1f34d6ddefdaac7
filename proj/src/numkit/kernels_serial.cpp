#include <atomic>
#include <cmath>
#include <stdexcept>

#include "kernels_impl.hpp"
#include "qbp/numkit/kernels.hpp"

namespace qbp::num {

SplitIndex make_split(int n, int d, const std::vector<int>& sites) {
  SplitIndex s;
  std::vector<bool> in(static_cast<std::size_t>(n) + 1, false);
  for (int x : sites) {
    if (x < 1 || x > n) throw std::out_of_range("site index out of range");
    if (in[static_cast<std::size_t>(x)]) throw std::invalid_argument("duplicate site");
    in[static_cast<std::size_t>(x)] = true;
  }
  std::size_t full_dim = 1;
  for (int i = 0; i < n; ++i) full_dim *= static_cast<std::size_t>(d);
  for (std::size_t k = 0; k < sites.size(); ++k) s.dy *= static_cast<std::size_t>(d);
  s.dz = full_dim / s.dy;
  s.full.assign(full_dim, 0);
  // site 1 is the most significant digit
  for (std::size_t x = 0; x < full_dim; ++x) {
    std::size_t rem = x, y = 0, z = 0;
    std::vector<int> digit(static_cast<std::size_t>(n) + 1);
    for (int site = n; site >= 1; --site) {
      digit[static_cast<std::size_t>(site)] = static_cast<int>(rem % static_cast<std::size_t>(d));
      rem /= static_cast<std::size_t>(d);
    }
    for (int site : sites) y = y * static_cast<std::size_t>(d) + static_cast<std::size_t>(digit[static_cast<std::size_t>(site)]);
    for (int site = 1; site <= n; ++site)
      if (!in[static_cast<std::size_t>(site)]) z = z * static_cast<std::size_t>(d) + static_cast<std::size_t>(digit[static_cast<std::size_t>(site)]);
    s.full[y * s.dz + z] = static_cast<std::uint32_t>(x);
  }
  return s;
}

namespace kernels {

namespace {
std::atomic<bool> g_force_serial{false};
}
void set_force_serial(bool on) { g_force_serial = on; }
bool force_serial() { return g_force_serial; }

template <class R>
Rotation<R> make_rotation(const Mat<R>& A, std::size_t p, std::size_t q, const R& skip) {
  using std::abs;
  using std::sqrt;
  Rotation<R> rot;
  rot.p = p;
  rot.q = q;
  const auto& apq = A(p, q);
  R g = cabs(apq);
  if (!(g > skip)) return rot;
  R theta = (A(q, q).re - A(p, p).re) / (R(2) * g);
  R t;
  if constexpr (std::is_same_v<R, double>) {
    if (std::fabs(theta) > 1e150) {
      t = 0.5 / theta;
    } else {
      t = (theta >= 0 ? 1.0 : -1.0) / (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
    }
  } else {
    R at = abs(theta);
    t = R(1) / (at + sqrt(theta * theta + R(1)));
    if (theta < R(0)) t = -t;
  }
  rot.c = R(1) / sqrt(t * t + R(1));
  rot.s = t * rot.c;
  rot.e = Cx<R>(apq.re / g, apq.im / g);
  rot.active = true;
  return rot;
}

namespace serial {

template <class R>
void gemm(const Mat<R>& A, const Mat<R>& B, Mat<R>& C, bool adjoint_a) {
  const std::size_t m = adjoint_a ? A.cols() : A.rows();
  const std::size_t kk = adjoint_a ? A.rows() : A.cols();
  if (kk != B.rows()) throw std::invalid_argument("gemm: inner dimension mismatch");
  C = Mat<R>(m, B.cols());
  if constexpr (Real<R>::is_big) {
    const Mat<R> Bt = B.transpose();
    detail::gemm_rows_big(A, Bt, C, adjoint_a, 0, m);
  } else {
    detail::gemm_rows<R>(A, B, C, adjoint_a, 0, m);
  }
}

template <class R>
void jacobi_sweep(Mat<R>& A, Mat<R>& U, const R& skip) {
  const std::size_t n = A.rows();
  for (std::size_t p = 0; p + 1 < n; ++p) {
    for (std::size_t q = p + 1; q < n; ++q) {
      Rotation<R> rot = make_rotation(A, p, q, skip);
      if (!rot.active) continue;
      detail::apply_rotation_hermitian(A, rot);
      detail::rotate_columns(U, rot, 0, U.rows());
    }
  }
}

template <class R>
void apply_local_superop(const Mat<R>& S, const SplitIndex& split, const Mat<R>& rho, Mat<R>& out) {
  out = Mat<R>(rho.rows(), rho.cols());
  detail::local_superop_block<R>(S, split, rho, out, 0, split.dz);
}

template void gemm<double>(const Mat<double>&, const Mat<double>&, Mat<double>&, bool);
template void gemm<BigFloat>(const Mat<BigFloat>&, const Mat<BigFloat>&, Mat<BigFloat>&, bool);
template void jacobi_sweep<double>(Mat<double>&, Mat<double>&, const double&);
template void jacobi_sweep<BigFloat>(Mat<BigFloat>&, Mat<BigFloat>&, const BigFloat&);
template void apply_local_superop<double>(const Mat<double>&, const SplitIndex&, const Mat<double>&, Mat<double>&);
template void apply_local_superop<BigFloat>(const Mat<BigFloat>&, const SplitIndex&, const Mat<BigFloat>&,
                                            Mat<BigFloat>&);

}  // namespace serial

template Rotation<double> make_rotation<double>(const Mat<double>&, std::size_t, std::size_t, const double&);
template Rotation<BigFloat> make_rotation<BigFloat>(const Mat<BigFloat>&, std::size_t, std::size_t,
                                                    const BigFloat&);

}  // namespace kernels
}  // namespace qbp::num
