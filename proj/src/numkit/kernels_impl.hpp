#pragma once

// Row-range building blocks shared by the serial and OpenMP kernels.

#include "qbp/numkit/kernels.hpp"

namespace qbp::num::kernels::detail {

template <class R>
inline void gemm_rows(const Mat<R>& A, const Mat<R>& B, Mat<R>& C, bool adjoint_a, std::size_t i0, std::size_t i1) {
  const std::size_t kk = B.rows(), n = B.cols();
  for (std::size_t i = i0; i < i1; ++i) {
    Cx<R>* crow = &C(i, 0);
    for (std::size_t k = 0; k < kk; ++k) {
      Cx<R> a = adjoint_a ? conj(A(k, i)) : A(i, k);
      if (is_zero(a)) continue;
      const Cx<R>* brow = &B(k, 0);
      for (std::size_t j = 0; j < n; ++j) {
        const Cx<R>& b = brow[j];
        crow[j].re += a.re * b.re - a.im * b.im;
        crow[j].im += a.re * b.im + a.im * b.re;
      }
    }
  }
}

// Big-float rows use raw mpfr calls with reused temporaries; B is given transposed.
inline void gemm_rows_big(const Mat<BigFloat>& A, const Mat<BigFloat>& Bt, Mat<BigFloat>& C, bool adjoint_a,
                          std::size_t i0, std::size_t i1) {
  const std::size_t kk = Bt.cols(), n = Bt.rows();
  BigFloat t1, accr, acci;
  for (std::size_t i = i0; i < i1; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      mpfr_set_zero(accr.raw(), 1);
      mpfr_set_zero(acci.raw(), 1);
      const Cx<BigFloat>* brow = &Bt(j, 0);
      for (std::size_t k = 0; k < kk; ++k) {
        const Cx<BigFloat>& a = adjoint_a ? A(k, i) : A(i, k);
        const Cx<BigFloat>& b = brow[k];
        const int sa = adjoint_a ? -1 : 1;  // conj flips imaginary sign of a
        // re += a.re b.re - sa a.im b.im ; im += a.re b.im + sa a.im b.re
        mpfr_mul(t1.raw(), a.re.raw(), b.re.raw(), MPFR_RNDN);
        mpfr_add(accr.raw(), accr.raw(), t1.raw(), MPFR_RNDN);
        mpfr_mul(t1.raw(), a.im.raw(), b.im.raw(), MPFR_RNDN);
        if (sa > 0)
          mpfr_sub(accr.raw(), accr.raw(), t1.raw(), MPFR_RNDN);
        else
          mpfr_add(accr.raw(), accr.raw(), t1.raw(), MPFR_RNDN);
        mpfr_mul(t1.raw(), a.re.raw(), b.im.raw(), MPFR_RNDN);
        mpfr_add(acci.raw(), acci.raw(), t1.raw(), MPFR_RNDN);
        mpfr_mul(t1.raw(), a.im.raw(), b.re.raw(), MPFR_RNDN);
        if (sa > 0)
          mpfr_add(acci.raw(), acci.raw(), t1.raw(), MPFR_RNDN);
        else
          mpfr_sub(acci.raw(), acci.raw(), t1.raw(), MPFR_RNDN);
      }
      C(i, j).re = accr;
      C(i, j).im = acci;
    }
  }
}

// a' = c a - s conj(e) b ; b' = s e a + c b
template <class R>
inline void rot_pair(Cx<R>& a, Cx<R>& b, const R& c, const Cx<R>& se, const Cx<R>& sec) {
  Cx<R> na = c * a - sec * b;
  Cx<R> nb = se * a + c * b;
  a = std::move(na);
  b = std::move(nb);
}

template <class R>
inline void rotate_columns(Mat<R>& M, const Rotation<R>& rot, std::size_t r0, std::size_t r1) {
  const Cx<R> se = rot.s * rot.e;
  const Cx<R> sec = rot.s * conj(rot.e);
  for (std::size_t r = r0; r < r1; ++r) rot_pair(M(r, rot.p), M(r, rot.q), rot.c, se, sec);
}

// Rows: a_p' = c a_p - s e a_q ; a_q' = s conj(e) a_p + c a_q
template <class R>
inline void rotate_rows(Mat<R>& M, const Rotation<R>& rot, std::size_t c0, std::size_t c1) {
  const Cx<R> se = rot.s * rot.e;
  const Cx<R> sec = rot.s * conj(rot.e);
  for (std::size_t j = c0; j < c1; ++j) rot_pair(M(rot.p, j), M(rot.q, j), rot.c, sec, se);
}

// Two-sided update of a Hermitian matrix, mirroring rows from columns.
template <class R>
inline void apply_rotation_hermitian(Mat<R>& A, const Rotation<R>& rot) {
  const std::size_t n = A.rows(), p = rot.p, q = rot.q;
  const Cx<R> se = rot.s * rot.e;
  const Cx<R> sec = rot.s * conj(rot.e);
  for (std::size_t r = 0; r < n; ++r) {
    if (r == p || r == q) continue;
    rot_pair(A(r, p), A(r, q), rot.c, se, sec);
    A(p, r) = conj(A(r, p));
    A(q, r) = conj(A(r, q));
  }
  R g = cabs(A(p, q));
  R t = rot.s / rot.c;
  A(p, p) = Cx<R>(A(p, p).re - t * g);
  A(q, q) = Cx<R>(A(q, q).re + t * g);
  A(p, q) = Cx<R>();
  A(q, p) = Cx<R>();
}

template <class R>
inline void local_superop_block(const Mat<R>& S, const SplitIndex& split, const Mat<R>& rho, Mat<R>& out,
                                std::size_t z0, std::size_t z1) {
  const std::size_t dy = split.dy, dz = split.dz, dy2 = dy * dy;
  std::vector<Cx<R>> v(dy2);
  for (std::size_t z1i = z0; z1i < z1; ++z1i) {
    for (std::size_t z2 = 0; z2 < dz; ++z2) {
      for (std::size_t y1 = 0; y1 < dy; ++y1)
        for (std::size_t y2 = 0; y2 < dy; ++y2)
          v[y1 * dy + y2] = rho(split.full[y1 * dz + z1i], split.full[y2 * dz + z2]);
      for (std::size_t a = 0; a < dy2; ++a) {
        Cx<R> acc;
        const Cx<R>* srow = &S(a, 0);
        for (std::size_t b = 0; b < dy2; ++b) {
          if (is_zero(v[b])) continue;
          acc.re += srow[b].re * v[b].re - srow[b].im * v[b].im;
          acc.im += srow[b].re * v[b].im + srow[b].im * v[b].re;
        }
        out(split.full[(a / dy) * dz + z1i], split.full[(a % dy) * dz + z2]) = acc;
      }
    }
  }
}

}  // namespace qbp::num::kernels::detail
