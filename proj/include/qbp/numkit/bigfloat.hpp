#pragma once

#include <mpfr.h>

#include <cstdint>
#include <ostream>
#include <string>

namespace qbp::num {

// Decimal digits -> mantissa bits, with 16 guard bits.
mpfr_prec_t digits_to_bits(int digits);
int bits_to_digits(mpfr_prec_t bits);

// Working precision for newly created BigFloat values on the calling thread.
mpfr_prec_t working_bits();
int working_digits();
void set_working_digits(int digits);
void set_working_bits(mpfr_prec_t bits);

class PrecisionScope {
 public:
  struct Bits {
    mpfr_prec_t bits;
  };
  explicit PrecisionScope(int digits);
  explicit PrecisionScope(Bits b);
  ~PrecisionScope();
  PrecisionScope(const PrecisionScope&) = delete;
  PrecisionScope& operator=(const PrecisionScope&) = delete;

 private:
  mpfr_prec_t saved_;
  int saved_digits_;
};

// Thin value-semantic wrapper over an mpfr_t.  New values take the calling
// thread's working precision; copies keep the source precision exactly.
class BigFloat {
 public:
  BigFloat();
  BigFloat(double x);
  BigFloat(int x);
  BigFloat(long x);
  BigFloat(long long x);
  BigFloat(unsigned long x);
  explicit BigFloat(const std::string& s);
  BigFloat(const BigFloat& o);
  BigFloat(BigFloat&& o) noexcept;
  ~BigFloat();

  BigFloat& operator=(const BigFloat& o);
  BigFloat& operator=(BigFloat&& o) noexcept;
  BigFloat& operator=(double x);

  mpfr_ptr raw() { return v_; }
  mpfr_srcptr raw() const { return v_; }
  mpfr_prec_t precision() const { return mpfr_get_prec(v_); }

  double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }
  long double to_long_double() const { return mpfr_get_ld(v_, MPFR_RNDN); }
  std::string str(int digits) const;
  // log10 of |x| without overflow; -inf for zero.
  double log10_abs() const;

  BigFloat& operator+=(const BigFloat& o);
  BigFloat& operator-=(const BigFloat& o);
  BigFloat& operator*=(const BigFloat& o);
  BigFloat& operator/=(const BigFloat& o);

  BigFloat operator-() const;

 private:
  mpfr_t v_;
};

BigFloat operator+(const BigFloat& a, const BigFloat& b);
BigFloat operator-(const BigFloat& a, const BigFloat& b);
BigFloat operator*(const BigFloat& a, const BigFloat& b);
BigFloat operator/(const BigFloat& a, const BigFloat& b);

bool operator<(const BigFloat& a, const BigFloat& b);
bool operator>(const BigFloat& a, const BigFloat& b);
bool operator<=(const BigFloat& a, const BigFloat& b);
bool operator>=(const BigFloat& a, const BigFloat& b);
bool operator==(const BigFloat& a, const BigFloat& b);
bool operator!=(const BigFloat& a, const BigFloat& b);

BigFloat abs(const BigFloat& x);
BigFloat sqrt(const BigFloat& x);
BigFloat exp(const BigFloat& x);
BigFloat expm1(const BigFloat& x);
BigFloat log(const BigFloat& x);
BigFloat log1p(const BigFloat& x);
BigFloat log2(const BigFloat& x);
BigFloat sin(const BigFloat& x);
BigFloat cos(const BigFloat& x);
BigFloat cosh(const BigFloat& x);
BigFloat tanh(const BigFloat& x);
BigFloat atan2(const BigFloat& y, const BigFloat& x);
BigFloat pow(const BigFloat& x, long k);
BigFloat hypot(const BigFloat& a, const BigFloat& b);
BigFloat pi_bf();
BigFloat from_rational_string(const std::string& num, const std::string& den);

std::ostream& operator<<(std::ostream& os, const BigFloat& x);

}  // namespace qbp::num
