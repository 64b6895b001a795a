#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

namespace thinband {

using BigInt = boost::multiprecision::cpp_int;

/// Error thrown when a requested enclosure width cannot be reached.
/// Carries the width that was actually achieved.
class accuracy_error : public std::runtime_error {
 public:
  accuracy_error(const std::string& what, double achieved)
      : std::runtime_error(what), achieved_(achieved) {}
  double achieved() const { return achieved_; }

 private:
  double achieved_;
};

/// Exact dyadic rational m * 2^e. The mantissa is kept odd (or zero),
/// so equality of values is equality of representations.
class Dyadic {
 public:
  Dyadic() = default;
  Dyadic(long v) : num_(v) { normalize(); }  // NOLINT: implicit on purpose
  Dyadic(BigInt num, long exp) : num_(std::move(num)), exp_(exp) { normalize(); }

  static Dyadic zero() { return Dyadic(); }
  static Dyadic one() { return Dyadic(1); }
  static Dyadic pow2(long e) { return Dyadic(BigInt(1), e); }

  const BigInt& mantissa() const { return num_; }
  long exponent() const { return exp_; }
  bool is_zero() const { return num_.is_zero(); }
  int sign() const { return num_.sign(); }

  /// Number of significant bits of the mantissa (0 for zero).
  long bits() const;

  Dyadic operator-() const { return Dyadic(-num_, exp_); }
  Dyadic operator+(const Dyadic& o) const;
  Dyadic operator-(const Dyadic& o) const { return *this + (-o); }
  Dyadic operator*(const Dyadic& o) const { return Dyadic(num_ * o.num_, exp_ + o.exp_); }

  bool operator==(const Dyadic& o) const { return num_ == o.num_ && exp_ == o.exp_; }
  bool operator!=(const Dyadic& o) const { return !(*this == o); }
  bool operator<(const Dyadic& o) const { return cmp(o) < 0; }
  bool operator<=(const Dyadic& o) const { return cmp(o) <= 0; }
  bool operator>(const Dyadic& o) const { return cmp(o) > 0; }
  bool operator>=(const Dyadic& o) const { return cmp(o) >= 0; }
  int cmp(const Dyadic& o) const;

  /// Round to at most p mantissa bits, toward -inf / +inf.
  Dyadic round_down(long p) const;
  Dyadic round_up(long p) const;

  /// floor(a / b * 2^scale_bits) as a dyadic with exponent -scale_bits (+ exponents).
  static Dyadic div_down(const Dyadic& a, const Dyadic& b, long p);
  static Dyadic div_up(const Dyadic& a, const Dyadic& b, long p);

  /// Directed square roots at p bits; requires *this >= 0.
  Dyadic sqrt_down(long p) const;
  Dyadic sqrt_up(long p) const;

  double to_double() const;
  /// Exact decimal representation (dyadics are finite decimals).
  std::string to_decimal() const;
  /// Decimal with at most `digits` significant digits, rounded down/up.
  std::string to_decimal(int digits, bool round_up_dir) const;

 private:
  void normalize();
  BigInt num_ = 0;
  long exp_ = 0;
};

/// Interval enclosure [lo, hi] with dyadic endpoints at working precision
/// `prec` (bits). All arithmetic is outward rounded, so the exact value of
/// any expression over exact inputs is contained in the result interval.
/// Exactness is preserved whenever the mantissas stay below the working
/// precision; only oversized results are rounded (outward).
class Scalar {
 public:
  static constexpr int kDefaultPrec = 128;

  Scalar() : lo_(0), hi_(0), prec_(kDefaultPrec) {}
  Scalar(long v, int prec = kDefaultPrec) : lo_(v), hi_(v), prec_(prec) {}
  Scalar(const Dyadic& v, int prec = kDefaultPrec) : lo_(v), hi_(v), prec_(prec) {}
  Scalar(Dyadic lo, Dyadic hi, int prec = kDefaultPrec);

  /// Parse a decimal literal ("1.25", "-3e-7"); non-dyadic decimals are
  /// rounded outward at `prec` bits.
  static Scalar from_decimal(const std::string& text, int prec = kDefaultPrec);

  const Dyadic& lo() const { return lo_; }
  const Dyadic& hi() const { return hi_; }
  int precision() const { return prec_; }
  Scalar with_precision(int prec) const;

  bool is_exact() const { return lo_ == hi_; }
  bool is_zero() const { return lo_.is_zero() && hi_.is_zero(); }
  Dyadic width() const { return hi_ - lo_; }
  Dyadic midpoint() const;
  bool contains_zero() const { return lo_.sign() <= 0 && hi_.sign() >= 0; }
  bool contains(const Dyadic& v) const { return lo_ <= v && v <= hi_; }
  bool contains(const Scalar& v) const { return lo_ <= v.lo_ && v.hi_ <= hi_; }
  bool overlaps(const Scalar& o) const { return !(hi_ < o.lo_ || o.hi_ < lo_); }

  /// Certain (interval-separated) comparisons.
  bool certainly_lt(const Scalar& o) const { return hi_ < o.lo_; }
  bool certainly_gt(const Scalar& o) const { return lo_ > o.hi_; }
  bool certainly_positive() const { return lo_.sign() > 0; }
  bool certainly_negative() const { return hi_.sign() < 0; }

  Scalar operator-() const { return Scalar(-hi_, -lo_, prec_); }
  Scalar operator+(const Scalar& o) const;
  Scalar operator-(const Scalar& o) const { return *this + (-o); }
  Scalar operator*(const Scalar& o) const;
  /// Requires the divisor to be separated from zero.
  Scalar operator/(const Scalar& o) const;

  Scalar& operator+=(const Scalar& o) { return *this = *this + o; }
  Scalar& operator-=(const Scalar& o) { return *this = *this - o; }
  Scalar& operator*=(const Scalar& o) { return *this = *this * o; }
  Scalar& operator/=(const Scalar& o) { return *this = *this / o; }

  Scalar abs() const;
  /// Enclosure of sqrt; requires lo >= 0.
  Scalar sqrt() const;
  /// Enclosure of the natural logarithm; requires lo > 0. The enclosure is
  /// computed through long-double evaluation of log on the normalized
  /// mantissa with a slop of 2^-60 relative, far below every tolerance this
  /// project certifies (>= 1e-12).
  Scalar log() const;

  double to_double() const { return midpoint().to_double(); }
  std::string to_string(int digits = 20) const;

  bool operator==(const Scalar& o) const { return lo_ == o.lo_ && hi_ == o.hi_; }

 private:
  Scalar round_out() const;
  Dyadic lo_, hi_;
  int prec_;
};

Scalar operator+(long a, const Scalar& b);
Scalar operator-(long a, const Scalar& b);
Scalar operator*(long a, const Scalar& b);

/// Narrow an enclosure below `target_width` by re-running `eval` at doubled
/// working precision. `eval` receives the precision to compute at. Throws
/// accuracy_error when `max_prec` is hit first.
Scalar refine(const std::function<Scalar(int)>& eval, const Scalar& target_width,
              int start_prec = Scalar::kDefaultPrec, int max_prec = 1 << 14);

/// Width check for values that carry no recomputation recipe: returns x when
/// already narrow enough, otherwise throws accuracy_error.
Scalar refine(const Scalar& x, const Scalar& target_width);

}  // namespace thinband
