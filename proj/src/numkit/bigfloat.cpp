#include "qbp/numkit/bigfloat.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace qbp::num {

namespace {
thread_local mpfr_prec_t t_bits = 0;
thread_local int t_digits = 50;

mpfr_prec_t current_bits() {
  if (t_bits == 0) t_bits = digits_to_bits(t_digits);
  return t_bits;
}
}  // namespace

mpfr_prec_t digits_to_bits(int digits) {
  if (digits < 15) throw std::invalid_argument("precision below 15 digits");
  return static_cast<mpfr_prec_t>(std::ceil(digits * std::log2(10.0))) + 16;
}

int bits_to_digits(mpfr_prec_t bits) {
  return static_cast<int>(std::floor((bits - 16) * std::log10(2.0)));
}

mpfr_prec_t working_bits() { return current_bits(); }
int working_digits() {
  current_bits();
  return t_digits;
}

void set_working_digits(int digits) {
  t_bits = digits_to_bits(digits);
  t_digits = digits;
}

void set_working_bits(mpfr_prec_t bits) {
  t_bits = bits;
  t_digits = bits_to_digits(bits);
}

PrecisionScope::PrecisionScope(int digits) : saved_(current_bits()), saved_digits_(t_digits) {
  set_working_digits(digits);
}

PrecisionScope::PrecisionScope(Bits b) : saved_(current_bits()), saved_digits_(t_digits) {
  set_working_bits(b.bits);
}

PrecisionScope::~PrecisionScope() {
  t_bits = saved_;
  t_digits = saved_digits_;
}

BigFloat::BigFloat() {
  mpfr_init2(v_, current_bits());
  mpfr_set_zero(v_, 1);
}

BigFloat::BigFloat(double x) {
  mpfr_init2(v_, current_bits());
  mpfr_set_d(v_, x, MPFR_RNDN);
}

BigFloat::BigFloat(int x) {
  mpfr_init2(v_, current_bits());
  mpfr_set_si(v_, x, MPFR_RNDN);
}

BigFloat::BigFloat(long x) {
  mpfr_init2(v_, current_bits());
  mpfr_set_si(v_, x, MPFR_RNDN);
}

BigFloat::BigFloat(long long x) {
  mpfr_init2(v_, current_bits());
  mpfr_set_si(v_, static_cast<long>(x), MPFR_RNDN);
}

BigFloat::BigFloat(unsigned long x) {
  mpfr_init2(v_, current_bits());
  mpfr_set_ui(v_, x, MPFR_RNDN);
}

BigFloat::BigFloat(const std::string& s) {
  mpfr_init2(v_, current_bits());
  if (mpfr_set_str(v_, s.c_str(), 10, MPFR_RNDN) != 0) {
    // mpfr returns nonzero only on parse failure for whole-string input
    mpfr_clear(v_);
    throw std::invalid_argument("BigFloat: cannot parse '" + s + "'");
  }
}

BigFloat::BigFloat(const BigFloat& o) {
  mpfr_init2(v_, mpfr_get_prec(o.v_));
  mpfr_set(v_, o.v_, MPFR_RNDN);
}

BigFloat::BigFloat(BigFloat&& o) noexcept {
  v_[0] = o.v_[0];
  o.v_->_mpfr_d = nullptr;
}

BigFloat::~BigFloat() {
  if (v_->_mpfr_d != nullptr) mpfr_clear(v_);
}

BigFloat& BigFloat::operator=(const BigFloat& o) {
  if (this == &o) return *this;
  if (v_->_mpfr_d == nullptr) {
    mpfr_init2(v_, mpfr_get_prec(o.v_));
  } else if (mpfr_get_prec(v_) != mpfr_get_prec(o.v_)) {
    mpfr_set_prec(v_, mpfr_get_prec(o.v_));
  }
  mpfr_set(v_, o.v_, MPFR_RNDN);
  return *this;
}

BigFloat& BigFloat::operator=(BigFloat&& o) noexcept {
  if (this == &o) return *this;
  if (v_->_mpfr_d == nullptr) {
    v_[0] = o.v_[0];
    o.v_->_mpfr_d = nullptr;
  } else {
    mpfr_swap(v_, o.v_);
  }
  return *this;
}

BigFloat& BigFloat::operator=(double x) {
  if (v_->_mpfr_d == nullptr) mpfr_init2(v_, current_bits());
  mpfr_set_d(v_, x, MPFR_RNDN);
  return *this;
}

std::string BigFloat::str(int digits) const {
  std::vector<char> buf(static_cast<size_t>(digits) + 64);
  mpfr_snprintf(buf.data(), buf.size(), "%.*Re", digits, v_);
  return std::string(buf.data());
}

double BigFloat::log10_abs() const {
  if (mpfr_zero_p(v_)) return -std::numeric_limits<double>::infinity();
  long e = 0;
  double m = mpfr_get_d_2exp(&e, v_, MPFR_RNDN);
  return std::log10(std::fabs(m)) + static_cast<double>(e) * std::log10(2.0);
}

BigFloat& BigFloat::operator+=(const BigFloat& o) {
  mpfr_add(v_, v_, o.v_, MPFR_RNDN);
  return *this;
}
BigFloat& BigFloat::operator-=(const BigFloat& o) {
  mpfr_sub(v_, v_, o.v_, MPFR_RNDN);
  return *this;
}
BigFloat& BigFloat::operator*=(const BigFloat& o) {
  mpfr_mul(v_, v_, o.v_, MPFR_RNDN);
  return *this;
}
BigFloat& BigFloat::operator/=(const BigFloat& o) {
  mpfr_div(v_, v_, o.v_, MPFR_RNDN);
  return *this;
}

BigFloat BigFloat::operator-() const {
  BigFloat r;
  mpfr_neg(r.v_, v_, MPFR_RNDN);
  return r;
}

#define QBP_BINOP(op, fn)                                   \
  BigFloat operator op(const BigFloat& a, const BigFloat& b) { \
    BigFloat r;                                             \
    fn(r.raw(), a.raw(), b.raw(), MPFR_RNDN);               \
    return r;                                               \
  }
QBP_BINOP(+, mpfr_add)
QBP_BINOP(-, mpfr_sub)
QBP_BINOP(*, mpfr_mul)
QBP_BINOP(/, mpfr_div)
#undef QBP_BINOP

bool operator<(const BigFloat& a, const BigFloat& b) { return mpfr_less_p(a.raw(), b.raw()) != 0; }
bool operator>(const BigFloat& a, const BigFloat& b) { return mpfr_greater_p(a.raw(), b.raw()) != 0; }
bool operator<=(const BigFloat& a, const BigFloat& b) { return mpfr_lessequal_p(a.raw(), b.raw()) != 0; }
bool operator>=(const BigFloat& a, const BigFloat& b) { return mpfr_greaterequal_p(a.raw(), b.raw()) != 0; }
bool operator==(const BigFloat& a, const BigFloat& b) { return mpfr_equal_p(a.raw(), b.raw()) != 0; }
bool operator!=(const BigFloat& a, const BigFloat& b) { return !(a == b); }

#define QBP_UNARY(name, fn)          \
  BigFloat name(const BigFloat& x) { \
    BigFloat r;                      \
    fn(r.raw(), x.raw(), MPFR_RNDN); \
    return r;                        \
  }
QBP_UNARY(abs, mpfr_abs)
QBP_UNARY(sqrt, mpfr_sqrt)
QBP_UNARY(exp, mpfr_exp)
QBP_UNARY(expm1, mpfr_expm1)
QBP_UNARY(log, mpfr_log)
QBP_UNARY(log1p, mpfr_log1p)
QBP_UNARY(log2, mpfr_log2)
QBP_UNARY(sin, mpfr_sin)
QBP_UNARY(cos, mpfr_cos)
QBP_UNARY(cosh, mpfr_cosh)
QBP_UNARY(tanh, mpfr_tanh)
#undef QBP_UNARY

BigFloat atan2(const BigFloat& y, const BigFloat& x) {
  BigFloat r;
  mpfr_atan2(r.raw(), y.raw(), x.raw(), MPFR_RNDN);
  return r;
}

BigFloat pow(const BigFloat& x, long k) {
  BigFloat r;
  mpfr_pow_si(r.raw(), x.raw(), k, MPFR_RNDN);
  return r;
}

BigFloat hypot(const BigFloat& a, const BigFloat& b) {
  BigFloat r;
  mpfr_hypot(r.raw(), a.raw(), b.raw(), MPFR_RNDN);
  return r;
}

BigFloat pi_bf() {
  BigFloat r;
  mpfr_const_pi(r.raw(), MPFR_RNDN);
  return r;
}

BigFloat from_rational_string(const std::string& num, const std::string& den) {
  return BigFloat(num) / BigFloat(den);
}

std::ostream& operator<<(std::ostream& os, const BigFloat& x) {
  return os << x.str(static_cast<int>(os.precision()));
}

}  // namespace qbp::num
