#include "thinband/scalar.hpp"

#include <boost/multiprecision/detail/default_ops.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace thinband {

namespace {

long bit_length(const BigInt& v) {
  if (v.is_zero()) return 0;
  return static_cast<long>(boost::multiprecision::msb(BigInt(boost::multiprecision::abs(v)))) + 1;
}

// floor(a / b) for b > 0, exact floor semantics for negative a.
BigInt floor_div(const BigInt& a, const BigInt& b) {
  BigInt q = a / b;
  if ((a % b) != 0 && ((a < 0) != (b < 0))) --q;
  return q;
}

BigInt ceil_div(const BigInt& a, const BigInt& b) { return -floor_div(-a, b); }

BigInt shift_left(const BigInt& a, long s) { return a << static_cast<unsigned>(s); }

}  // namespace

void Dyadic::normalize() {
  if (num_.is_zero()) {
    exp_ = 0;
    return;
  }
  unsigned lz = boost::multiprecision::lsb(BigInt(boost::multiprecision::abs(num_)));
  if (lz > 0) {
    num_ >>= lz;
    exp_ += static_cast<long>(lz);
  }
}

long Dyadic::bits() const { return bit_length(num_); }

Dyadic Dyadic::operator+(const Dyadic& o) const {
  if (is_zero()) return o;
  if (o.is_zero()) return *this;
  long e = std::min(exp_, o.exp_);
  BigInt a = shift_left(num_, exp_ - e);
  BigInt b = shift_left(o.num_, o.exp_ - e);
  return Dyadic(a + b, e);
}

int Dyadic::cmp(const Dyadic& o) const {
  int sa = sign(), sb = o.sign();
  if (sa != sb) return sa < sb ? -1 : 1;
  if (sa == 0) return 0;
  Dyadic d = *this - o;
  return d.sign();
}

Dyadic Dyadic::round_down(long p) const {
  long b = bits();
  if (b <= p) return *this;
  long shift = b - p;
  return Dyadic(floor_div(num_, shift_left(BigInt(1), shift)), exp_ + shift);
}

Dyadic Dyadic::round_up(long p) const {
  long b = bits();
  if (b <= p) return *this;
  long shift = b - p;
  return Dyadic(ceil_div(num_, shift_left(BigInt(1), shift)), exp_ + shift);
}

Dyadic Dyadic::div_down(const Dyadic& a, const Dyadic& b, long p) {
  if (b.is_zero()) throw std::domain_error("Dyadic: division by zero");
  if (a.is_zero()) return Dyadic();
  // Scale the dividend so the quotient keeps ~p+2 significant bits.
  long scale = p + 2 + std::max<long>(0, b.bits() - a.bits() + 1);
  BigInt n = shift_left(a.num_, scale);
  BigInt q = b.num_ > 0 ? floor_div(n, b.num_) : floor_div(-n, -b.num_);
  return Dyadic(q, a.exp_ - b.exp_ - scale);
}

Dyadic Dyadic::div_up(const Dyadic& a, const Dyadic& b, long p) {
  return -div_down(-a, b, p);
}

Dyadic Dyadic::sqrt_down(long p) const {
  if (sign() < 0) throw std::domain_error("Dyadic: sqrt of negative");
  if (is_zero()) return Dyadic();
  // Shift to an even exponent with >= 2p+2 mantissa bits, take isqrt.
  long want = 2 * p + 2;
  long extra = std::max<long>(0, want - bits());
  if ((exp_ - extra) % 2 != 0) ++extra;
  BigInt m = shift_left(num_, extra);
  BigInt r = boost::multiprecision::sqrt(m);  // floor sqrt
  return Dyadic(r, (exp_ - extra) / 2);
}

Dyadic Dyadic::sqrt_up(long p) const {
  Dyadic d = sqrt_down(p);
  if ((d * d) == *this) return d;
  // bump by one ulp of the floor sqrt
  return Dyadic(d.mantissa() + 1, d.exponent());
}

double Dyadic::to_double() const {
  if (is_zero()) return 0.0;
  long b = bits();
  long keep = std::min<long>(b, 53);
  long shift = b - keep;
  BigInt top = BigInt(boost::multiprecision::abs(num_)) >> static_cast<unsigned>(shift);
  double m = top.convert_to<double>();
  double r = std::ldexp(m, static_cast<int>(exp_ + shift));
  return num_ < 0 ? -r : r;
}

std::string Dyadic::to_decimal() const {
  if (is_zero()) return "0";
  if (exp_ >= 0) {
    BigInt v = shift_left(num_, exp_);
    return v.str();
  }
  // m * 2^-k = m * 5^k / 10^k : exact finite decimal with k fractional digits.
  long k = -exp_;
  BigInt scaled = num_ * boost::multiprecision::pow(BigInt(5), static_cast<unsigned>(k));
  bool neg = scaled < 0;
  std::string digits = BigInt(boost::multiprecision::abs(scaled)).str();
  if (static_cast<long>(digits.size()) <= k)
    digits.insert(0, static_cast<size_t>(k + 1 - digits.size()), '0');
  digits.insert(digits.size() - static_cast<size_t>(k), ".");
  // trim trailing zeros of the fraction
  while (digits.back() == '0') digits.pop_back();
  if (digits.back() == '.') digits.pop_back();
  return (neg ? "-" : "") + digits;
}

std::string Dyadic::to_decimal(int digits, bool round_up_dir) const {
  if (is_zero()) return "0";
  bool neg = sign() < 0;
  // |value| = num * 2^exp ; find decimal exponent d10 so that
  // |value| / 10^(d10-digits) is in [10^(digits-1), 10^digits).
  double approx_log10 = (static_cast<double>(bits()) + static_cast<double>(exp_)) * 0.30102999566398;
  long d10 = static_cast<long>(std::floor(approx_log10)) + 1;
  for (int attempt = 0; attempt < 4; ++attempt) {
    long frac = digits - d10;  // digits after scaling by 10^frac
    BigInt scaled_num = boost::multiprecision::abs(num_);
    long e2 = exp_, e5 = 0;
    // value*10^frac = num * 2^(exp+frac) * 5^frac
    e2 += frac;
    e5 = frac;
    if (e5 >= 0)
      scaled_num *= boost::multiprecision::pow(BigInt(5), static_cast<unsigned>(e5));
    BigInt denom = 1;
    if (e5 < 0) denom = boost::multiprecision::pow(BigInt(5), static_cast<unsigned>(-e5));
    if (e2 >= 0)
      scaled_num = shift_left(scaled_num, e2);
    else
      denom = shift_left(denom, -e2);
    bool down = neg ? !round_up_dir : round_up_dir;  // direction on |value|
    BigInt q = down ? ceil_div(scaled_num, denom) : floor_div(scaled_num, denom);
    std::string s = q.str();
    if (static_cast<long>(s.size()) > digits) {
      ++d10;
      continue;
    }
    if (static_cast<long>(s.size()) < digits) {
      --d10;
      continue;
    }
    std::string out = neg ? "-" : "";
    out += s.substr(0, 1);
    if (digits > 1) out += "." + s.substr(1);
    out += "e" + std::to_string(d10 - 1);
    return out;
  }
  return to_decimal();  // fallback: exact
}

Scalar::Scalar(Dyadic lo, Dyadic hi, int prec) : lo_(std::move(lo)), hi_(std::move(hi)), prec_(prec) {
  if (hi_ < lo_) throw std::invalid_argument("Scalar: lo > hi");
}

Scalar Scalar::round_out() const {
  Scalar r = *this;
  r.lo_ = lo_.round_down(prec_);
  r.hi_ = hi_.round_up(prec_);
  return r;
}

Scalar Scalar::with_precision(int prec) const {
  Scalar r = *this;
  r.prec_ = prec;
  return r.round_out();
}

Dyadic Scalar::midpoint() const {
  Dyadic s = lo_ + hi_;
  return Dyadic(s.mantissa(), s.exponent() - 1);
}

Scalar Scalar::operator+(const Scalar& o) const {
  Scalar r(lo_ + o.lo_, hi_ + o.hi_, std::max(prec_, o.prec_));
  return r.round_out();
}

Scalar Scalar::operator*(const Scalar& o) const {
  const Dyadic p1 = lo_ * o.lo_, p2 = lo_ * o.hi_, p3 = hi_ * o.lo_, p4 = hi_ * o.hi_;
  Dyadic lo = std::min(std::min(p1, p2), std::min(p3, p4));
  Dyadic hi = std::max(std::max(p1, p2), std::max(p3, p4));
  Scalar r(lo, hi, std::max(prec_, o.prec_));
  return r.round_out();
}

Scalar Scalar::operator/(const Scalar& o) const {
  if (o.contains_zero()) throw std::domain_error("Scalar: division by an interval containing 0");
  int p = std::max(prec_, o.prec_);
  auto dd = [&](const Dyadic& a, const Dyadic& b) { return Dyadic::div_down(a, b, p); };
  auto du = [&](const Dyadic& a, const Dyadic& b) { return Dyadic::div_up(a, b, p); };
  Dyadic c1 = dd(lo_, o.lo_), c2 = dd(lo_, o.hi_), c3 = dd(hi_, o.lo_), c4 = dd(hi_, o.hi_);
  Dyadic d1 = du(lo_, o.lo_), d2 = du(lo_, o.hi_), d3 = du(hi_, o.lo_), d4 = du(hi_, o.hi_);
  Dyadic lo = std::min(std::min(c1, c2), std::min(c3, c4));
  Dyadic hi = std::max(std::max(d1, d2), std::max(d3, d4));
  return Scalar(lo, hi, p);
}

Scalar Scalar::abs() const {
  if (lo_.sign() >= 0) return *this;
  if (hi_.sign() <= 0) return -*this;
  return Scalar(Dyadic(0), std::max(-lo_, hi_), prec_);
}

Scalar Scalar::sqrt() const {
  if (lo_.sign() < 0) throw std::domain_error("Scalar: sqrt of interval with negative lower end");
  return Scalar(lo_.sqrt_down(prec_), hi_.sqrt_up(prec_), prec_);
}

namespace {

// Directed enclosure of log of a single positive dyadic.
// d = m * 2^e with m in [2^(b-1), 2^b), so log d = log(m/2^b) + (e+b) log 2.
void log_bounds(const Dyadic& d, long double& lo, long double& hi) {
  long b = d.bits();
  long keep = std::min<long>(b, 64);
  long shift = b - keep;
  BigInt top = d.mantissa() >> static_cast<unsigned>(shift);
  // top * 2^shift <= m < (top + 1) * 2^shift; exact when nothing is shifted out
  long double frac_lo = static_cast<long double>(top.convert_to<unsigned long long>()) /
                        std::pow(2.0L, static_cast<long double>(keep));
  long double frac_hi = (static_cast<long double>(top.convert_to<unsigned long long>()) +
                         (shift > 0 ? 1.0L : 0.0L)) /
                        std::pow(2.0L, static_cast<long double>(keep));
  const long double ln2 = 0.69314718055994530941723L;
  long double base = static_cast<long double>(d.exponent() + b) * ln2;
  long double slop = std::abs(base) * 1e-18L + 1e-18L;
  lo = std::log(frac_lo) + base - slop;
  hi = std::log(frac_hi) + base + slop;
}

Dyadic dyadic_from_long_double(long double v, bool up) {
  // 2^-63 relative padding keeps the direction sound after conversion.
  long double pad = std::abs(v) * 1.1e-19L + 1e-19L;
  v += up ? pad : -pad;
  int e = 0;
  long double m = std::frexp(v, &e);
  long long mi = static_cast<long long>(std::floor(m * 9223372036854775808.0L) + (up ? 1 : 0));
  return Dyadic(BigInt(mi), e - 63);
}

}  // namespace

Scalar Scalar::log() const {
  if (lo_.sign() <= 0) throw std::domain_error("Scalar: log of non-positive interval");
  long double a_lo, a_hi, b_lo, b_hi;
  log_bounds(lo_, a_lo, a_hi);
  log_bounds(hi_, b_lo, b_hi);
  return Scalar(dyadic_from_long_double(a_lo, false), dyadic_from_long_double(b_hi, true), prec_);
}

Scalar Scalar::from_decimal(const std::string& text, int prec) {
  std::string s = text;
  bool neg = false;
  size_t i = 0;
  if (i < s.size() && (s[i] == '+' || s[i] == '-')) {
    neg = s[i] == '-';
    ++i;
  }
  std::string digits;
  long frac = 0, exp10 = 0;
  bool seen_dot = false, any = false;
  for (; i < s.size(); ++i) {
    char c = s[i];
    if (c == '.') {
      if (seen_dot) throw std::invalid_argument("bad decimal: " + text);
      seen_dot = true;
    } else if (c >= '0' && c <= '9') {
      digits += c;
      if (seen_dot) ++frac;
      any = true;
    } else if (c == 'e' || c == 'E') {
      exp10 = std::stol(s.substr(i + 1));
      break;
    } else {
      throw std::invalid_argument("bad decimal: " + text);
    }
  }
  if (!any) throw std::invalid_argument("bad decimal: " + text);
  BigInt m(digits.empty() ? "0" : digits);
  if (neg) m = -m;
  long p10 = exp10 - frac;  // value = m * 10^p10
  if (p10 >= 0) {
    BigInt v = m * boost::multiprecision::pow(BigInt(10), static_cast<unsigned>(p10));
    return Scalar(Dyadic(v, 0), prec);
  }
  // m / 10^k = (m / 5^k) * 2^-k, rounded outward.
  long k = -p10;
  BigInt den = boost::multiprecision::pow(BigInt(5), static_cast<unsigned>(k));
  long scale = prec + 2 + std::max<long>(0, bit_length(den) - bit_length(m));
  BigInt n = shift_left(m, scale);
  Dyadic lo(floor_div(n, den), -k - scale);
  Dyadic hi(ceil_div(n, den), -k - scale);
  return Scalar(lo, hi, prec);
}

std::string Scalar::to_string(int digits) const {
  if (is_exact()) return lo_.to_decimal(digits, false);
  return "[" + lo_.to_decimal(digits, false) + "," + hi_.to_decimal(digits, true) + "]";
}

Scalar operator+(long a, const Scalar& b) { return Scalar(a, b.precision()) + b; }
Scalar operator-(long a, const Scalar& b) { return Scalar(a, b.precision()) - b; }
Scalar operator*(long a, const Scalar& b) { return Scalar(a, b.precision()) * b; }

Scalar refine(const std::function<Scalar(int)>& eval, const Scalar& target_width, int start_prec,
              int max_prec) {
  if (!target_width.certainly_positive())
    throw std::domain_error("refine: target width must be positive");
  Scalar best = eval(start_prec);
  for (int p = start_prec; ; p *= 2) {
    if (Scalar(best.width(), best.precision()).certainly_lt(target_width)) return best;
    if (p > max_prec) break;
    best = eval(p);
  }
  throw accuracy_error("refine: precision cap exceeded", best.width().to_double());
}

Scalar refine(const Scalar& x, const Scalar& target_width) {
  if (!target_width.certainly_positive())
    throw std::domain_error("refine: target width must be positive");
  if (Scalar(x.width(), x.precision()).certainly_lt(target_width)) return x;
  throw accuracy_error("refine: value carries no recomputation recipe and is too wide",
                       x.width().to_double());
}

}  // namespace thinband
