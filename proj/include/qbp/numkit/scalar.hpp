#pragma once

#include <cmath>
#include <string>

#include "qbp/numkit/bigfloat.hpp"

namespace qbp::num {

template <class R>
struct Real;

template <>
struct Real<double> {
  static constexpr bool is_big = false;
  static int digits() { return 15; }
  static double from(double x) { return x; }
  static double to_double(double x) { return x; }
  static double pi() { return M_PI; }
  static std::string name() { return "double"; }
};

template <>
struct Real<BigFloat> {
  static constexpr bool is_big = true;
  static int digits() { return working_digits(); }
  static BigFloat from(double x) { return BigFloat(x); }
  static double to_double(const BigFloat& x) { return x.to_double(); }
  static BigFloat pi() { return pi_bf(); }
  static std::string name() { return "mpfr"; }
};

// 10^{-k} at the working precision of R.
template <class R>
R pow10neg(int k) {
  if constexpr (Real<R>::is_big) {
    return pow(BigFloat(10), -static_cast<long>(k));
  } else {
    return std::pow(10.0, -k);
  }
}

// Tolerance 10^{3-P} used by most invariants.
template <class R>
R tol3(int dim = 1) {
  return R(dim) * pow10neg<R>(Real<R>::digits() - 3);
}

inline double to_d(double x) { return x; }
inline double to_d(const BigFloat& x) { return x.to_double(); }

template <class R>
struct Cx {
  R re{};
  R im{};

  Cx() = default;
  Cx(const R& r) : re(r), im(0) {}
  Cx(const R& r, const R& i) : re(r), im(i) {}
  template <class S = R, class = std::enable_if_t<!std::is_same_v<S, double>>>
  Cx(double r) : re(r), im(0) {}
  template <class S = R, class = std::enable_if_t<!std::is_same_v<S, double>>>
  Cx(double r, double i) : re(r), im(i) {}

  Cx& operator+=(const Cx& o) {
    re += o.re;
    im += o.im;
    return *this;
  }
  Cx& operator-=(const Cx& o) {
    re -= o.re;
    im -= o.im;
    return *this;
  }
  Cx& operator*=(const Cx& o) {
    R r = re * o.re - im * o.im;
    im = re * o.im + im * o.re;
    re = std::move(r);
    return *this;
  }
  Cx& operator*=(const R& s) {
    re *= s;
    im *= s;
    return *this;
  }
  Cx& operator/=(const R& s) {
    re /= s;
    im /= s;
    return *this;
  }
  Cx operator-() const { return Cx(-re, -im); }
};

template <class R>
Cx<R> operator+(Cx<R> a, const Cx<R>& b) {
  return a += b;
}
template <class R>
Cx<R> operator-(Cx<R> a, const Cx<R>& b) {
  return a -= b;
}
template <class R>
Cx<R> operator*(const Cx<R>& a, const Cx<R>& b) {
  return Cx<R>(a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re);
}
template <class R>
Cx<R> operator*(Cx<R> a, const R& s) {
  return a *= s;
}
template <class R>
Cx<R> operator*(const R& s, Cx<R> a) {
  return a *= s;
}
template <class R>
Cx<R> operator/(Cx<R> a, const R& s) {
  return a /= s;
}
template <class R>
Cx<R> operator/(const Cx<R>& a, const Cx<R>& b) {
  R den = b.re * b.re + b.im * b.im;
  return Cx<R>((a.re * b.re + a.im * b.im) / den, (a.im * b.re - a.re * b.im) / den);
}
template <class R>
bool operator==(const Cx<R>& a, const Cx<R>& b) {
  return a.re == b.re && a.im == b.im;
}

template <class R>
Cx<R> conj(const Cx<R>& z) {
  return Cx<R>(z.re, -z.im);
}
template <class R>
R norm2(const Cx<R>& z) {
  return z.re * z.re + z.im * z.im;
}
template <class R>
R cabs(const Cx<R>& z) {
  using std::hypot;
  return hypot(z.re, z.im);
}
// e^{i phi}
template <class R>
Cx<R> expi(const R& phi) {
  using std::cos;
  using std::sin;
  return Cx<R>(cos(phi), sin(phi));
}
template <class R>
Cx<R> cexp(const Cx<R>& z) {
  using std::exp;
  R m = exp(z.re);
  Cx<R> e = expi(z.im);
  return Cx<R>(m * e.re, m * e.im);
}

inline bool is_zero(double x) { return x == 0.0; }
inline bool is_zero(const BigFloat& x) { return mpfr_zero_p(x.raw()) != 0; }
template <class R>
bool is_zero(const Cx<R>& z) {
  return is_zero(z.re) && is_zero(z.im);
}

using cd = Cx<double>;
using cb = Cx<BigFloat>;

}  // namespace qbp::num
