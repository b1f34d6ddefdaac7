#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "qbp/numkit/scalar.hpp"

namespace qbp::num {

// Dense row-major complex matrix.
template <class R>
class Mat {
 public:
  using C = Cx<R>;

  Mat() = default;
  Mat(std::size_t rows, std::size_t cols) : r_(rows), c_(cols), a_(rows * cols) {}
  explicit Mat(std::size_t n) : Mat(n, n) {}

  static Mat identity(std::size_t n) {
    Mat m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = C(R(1));
    return m;
  }
  static Mat diag(const std::vector<R>& d) {
    Mat m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = C(d[i]);
    return m;
  }
  static Mat from_rows(const std::vector<std::vector<C>>& rows) {
    Mat m(rows.size(), rows.empty() ? 0 : rows[0].size());
    for (std::size_t i = 0; i < m.r_; ++i) {
      if (rows[i].size() != m.c_) throw std::invalid_argument("ragged rows");
      for (std::size_t j = 0; j < m.c_; ++j) m(i, j) = rows[i][j];
    }
    return m;
  }

  std::size_t rows() const { return r_; }
  std::size_t cols() const { return c_; }
  std::size_t dim() const {
    if (r_ != c_) throw std::logic_error("dim() on non-square matrix");
    return r_;
  }
  bool square() const { return r_ == c_; }

  C& operator()(std::size_t i, std::size_t j) { return a_[i * c_ + j]; }
  const C& operator()(std::size_t i, std::size_t j) const { return a_[i * c_ + j]; }
  C* data() { return a_.data(); }
  const C* data() const { return a_.data(); }
  std::vector<C>& storage() { return a_; }
  const std::vector<C>& storage() const { return a_; }

  Mat& operator+=(const Mat& o) {
    check_same(o);
    for (std::size_t k = 0; k < a_.size(); ++k) a_[k] += o.a_[k];
    return *this;
  }
  Mat& operator-=(const Mat& o) {
    check_same(o);
    for (std::size_t k = 0; k < a_.size(); ++k) a_[k] -= o.a_[k];
    return *this;
  }
  Mat& operator*=(const C& s) {
    for (auto& x : a_) x *= s;
    return *this;
  }
  Mat& operator*=(const R& s) {
    for (auto& x : a_) x *= s;
    return *this;
  }

  Mat adjoint() const {
    Mat m(c_, r_);
    for (std::size_t i = 0; i < r_; ++i)
      for (std::size_t j = 0; j < c_; ++j) m(j, i) = conj((*this)(i, j));
    return m;
  }
  Mat transpose() const {
    Mat m(c_, r_);
    for (std::size_t i = 0; i < r_; ++i)
      for (std::size_t j = 0; j < c_; ++j) m(j, i) = (*this)(i, j);
    return m;
  }
  Mat conjugate() const {
    Mat m(r_, c_);
    for (std::size_t k = 0; k < a_.size(); ++k) m.a_[k] = conj(a_[k]);
    return m;
  }
  C trace() const {
    C t;
    for (std::size_t i = 0; i < std::min(r_, c_); ++i) t += (*this)(i, i);
    return t;
  }

 private:
  void check_same(const Mat& o) const {
    if (o.r_ != r_ || o.c_ != c_) throw std::invalid_argument("matrix shape mismatch");
  }
  std::size_t r_ = 0, c_ = 0;
  std::vector<C> a_;
};

template <class R>
Mat<R> operator+(Mat<R> a, const Mat<R>& b) {
  return a += b;
}
template <class R>
Mat<R> operator-(Mat<R> a, const Mat<R>& b) {
  return a -= b;
}
template <class R>
Mat<R> operator*(Mat<R> a, const Cx<R>& s) {
  return a *= s;
}
template <class R>
Mat<R> operator*(const Cx<R>& s, Mat<R> a) {
  return a *= s;
}
template <class R>
Mat<R> operator*(Mat<R> a, const R& s) {
  return a *= s;
}
template <class R>
Mat<R> operator*(const R& s, Mat<R> a) {
  return a *= s;
}

using MatD = Mat<double>;
using MatB = Mat<BigFloat>;

// Precision conversion.
template <class To, class From>
Mat<To> convert(const Mat<From>& m) {
  Mat<To> out(m.rows(), m.cols());
  for (std::size_t k = 0; k < m.storage().size(); ++k) {
    const auto& z = m.storage()[k];
    if constexpr (std::is_same_v<To, double>) {
      out.storage()[k] = Cx<double>(to_d(z.re), to_d(z.im));
    } else if constexpr (std::is_same_v<From, double>) {
      out.storage()[k] = Cx<To>(To(z.re), To(z.im));
    } else {
      // big -> big: reround at the current working precision
      To re, im;
      re += z.re;
      im += z.im;
      out.storage()[k] = Cx<To>(re, im);
    }
  }
  return out;
}

}  // namespace qbp::num
