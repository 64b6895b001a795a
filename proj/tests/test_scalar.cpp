#include "thinband/scalar.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <boost/multiprecision/cpp_int.hpp>

#include <random>

using namespace thinband;
using Rational = boost::multiprecision::cpp_rational;

namespace {

Rational to_rational(const Dyadic& d) {
  Rational r(d.mantissa());
  if (d.exponent() >= 0)
    r *= Rational(BigInt(1) << static_cast<unsigned>(d.exponent()));
  else
    r /= Rational(BigInt(1) << static_cast<unsigned>(-d.exponent()));
  return r;
}

bool encloses(const Scalar& s, const Rational& v) {
  return to_rational(s.lo()) <= v && v <= to_rational(s.hi());
}

}  // namespace

TEST_CASE("dyadic arithmetic is exact") {
  Dyadic a(3), b(BigInt(5), -3);  // 5/8
  CHECK((a + b).to_decimal() == "3.625");
  CHECK((a * b).to_decimal() == "1.875");
  CHECK((a - a).is_zero());
  CHECK(Dyadic(BigInt(12), 0).to_decimal() == "12");
  CHECK(Dyadic(BigInt(-12), -2).to_decimal() == "-3");
}

TEST_CASE("scalar ops on small values stay exact") {
  Scalar a(3), b(7);
  CHECK((a + b).is_exact());
  CHECK((a * b).lo().to_decimal() == "21");
  Scalar half = Scalar(1) / Scalar(2);
  CHECK(half.contains(Dyadic(BigInt(1), -1)));
  CHECK((Scalar(1) / Scalar(3)).width().to_double() < 1e-36);
}

TEST_CASE("decimal parsing rounds outward") {
  Scalar s = Scalar::from_decimal("0.1");
  CHECK(!s.is_exact());
  CHECK(encloses(s, Rational(1, 10)));
  Scalar t = Scalar::from_decimal("1.25");
  CHECK(t.is_exact());
  Scalar u = Scalar::from_decimal("-3e-7");
  CHECK(encloses(u, Rational(-3, 10000000)));
}

TEST_CASE("enclosure soundness on random rationals") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    long pa = static_cast<long>(rng() % 2000) - 1000;
    long qa = static_cast<long>(rng() % 999) + 1;
    long pb = static_cast<long>(rng() % 2000) - 1000;
    long qb = static_cast<long>(rng() % 999) + 1;
    Scalar a = Scalar(pa) / Scalar(qa);
    Scalar b = Scalar(pb) / Scalar(qb);
    Rational ra(pa, qa), rb(pb, qb);
    CHECK(encloses(a + b, ra + rb));
    CHECK(encloses(a * b, ra * rb));
    CHECK(encloses(a - b, ra - rb));
    if (pb != 0) CHECK(encloses(a / b, ra / rb));
  }
}

TEST_CASE("sqrt and log enclosures") {
  Scalar two(2);
  Scalar r = two.sqrt();
  CHECK(encloses(r * r, Rational(2)) );
  CHECK(r.width().to_double() < 1e-36);

  Scalar l = Scalar(1024).log();
  double expect = 10.0 * 0.6931471805599453;
  CHECK(l.to_double() == doctest::Approx(expect).epsilon(1e-14));
  CHECK(l.width().to_double() < 1e-15);
}

TEST_CASE("refine on exact values and via re-evaluation") {
  Scalar three(3);
  Scalar refined = refine(three, Scalar::from_decimal("1e-40"));
  CHECK(refined.is_exact());

  Scalar d = Scalar(Dyadic(1)) + Scalar(Dyadic(BigInt(1), -4));
  CHECK(refine(d, Scalar::from_decimal("0.5")).is_exact());

  // tribonacci root to width 1e-30 through precision doubling
  auto eval = [](int prec) { return oracles::tribonacci_lambda(prec); };
  Scalar lam = refine(eval, Scalar::from_decimal("1e-30"), 64);
  CHECK(lam.width().to_double() < 1e-30);
  // reference digits: 1.8392867552141611325518525646532866...
  CHECK(lam.to_double() == doctest::Approx(1.839286755214161).epsilon(1e-15));

  // a value with no recipe and too wide a box reports the achieved width
  Scalar wide(Dyadic(0), Dyadic(1));
  CHECK_THROWS_AS(refine(wide, Scalar::from_decimal("1e-3")), accuracy_error);
}

TEST_CASE("precision refinement never widens") {
  Scalar third = Scalar(1).with_precision(64) / Scalar(3).with_precision(64);
  Scalar finer = Scalar(1).with_precision(256) / Scalar(3).with_precision(256);
  CHECK(third.contains(finer));
}

TEST_CASE("exact decimal printing round-trips") {
  Dyadic d(BigInt(-777), -9);
  Scalar back = Scalar::from_decimal(d.to_decimal());
  CHECK(back.is_exact());
  CHECK(back.lo() == d);
}
