#include "thinband/numerics.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <random>

using namespace thinband;

namespace {

std::vector<Scalar> vec(std::initializer_list<double> xs) {
  std::vector<Scalar> out;
  for (double x : xs) out.push_back(Scalar::from_decimal(std::to_string(x)));
  return out;
}

}  // namespace

TEST_CASE("hilbert distance basics") {
  auto u = vec({1, 2, 3});
  CHECK(hilbert_distance(u, u).abs().to_double() < 1e-15);

  std::vector<Scalar> a{Scalar(1), Scalar(2)}, b{Scalar(2), Scalar(4)};
  CHECK(hilbert_distance(a, b).abs().to_double() < 1e-15);

  std::vector<Scalar> c{Scalar(1), Scalar(1)}, d{Scalar(1), Scalar(2)};
  CHECK(hilbert_distance(c, d).to_double() == doctest::Approx(std::log(2.0)).epsilon(1e-14));

  std::vector<Scalar> bad{Scalar(1), Scalar(0)};
  CHECK_THROWS_AS(hilbert_distance(bad, d), std::domain_error);
}

TEST_CASE("hilbert distance symmetry and triangle inequality") {
  std::mt19937_64 rng(11);
  auto rand_vec = [&] {
    std::vector<Scalar> v;
    for (int i = 0; i < 4; ++i) v.push_back(Scalar(static_cast<long>(rng() % 50 + 1)));
    return v;
  };
  for (int t = 0; t < 100; ++t) {
    auto u = rand_vec(), v = rand_vec(), w = rand_vec();
    Scalar duv = hilbert_distance(u, v);
    Scalar dvu = hilbert_distance(v, u);
    CHECK((duv - dvu).abs().to_double() < 1e-14);
    Scalar duw = hilbert_distance(u, w);
    Scalar dvw = hilbert_distance(v, w);
    CHECK(duw.to_double() <= duv.to_double() + dvw.to_double() + 1e-12);
  }
}

TEST_CASE("integer relation: explicit examples") {
  auto r = integer_relation({Scalar(1), Scalar(2)}, 2, Scalar::from_decimal("1e-9"));
  REQUIRE(r.has_value());
  CHECK(r->coeffs == std::vector<long>{-2, 1});

  // degree-3 algebraic number: no small relation among 1, lambda, lambda^2
  Scalar lam = oracles::tribonacci_lambda(192);
  auto none = integer_relation({Scalar(1), lam, lam * lam}, 10, Scalar::from_decimal("1e-9"));
  CHECK(!none.has_value());

  // but lambda^3 = lambda^2 + lambda + 1 is found immediately
  auto cubic = integer_relation({Scalar(1), lam, lam * lam, lam * lam * lam}, 2,
                                Scalar::from_decimal("1e-20"));
  REQUIRE(cubic.has_value());
  CHECK((cubic->coeffs == std::vector<long>{-1, -1, -1, 1} ||
         cubic->coeffs == std::vector<long>{1, 1, 1, -1}));
}

TEST_CASE("integer relation: forced linear dependence") {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 20; ++t) {
    Scalar w1(static_cast<long>(rng() % 900 + 100));
    Scalar w2(static_cast<long>(rng() % 900 + 100));
    Scalar w3(static_cast<long>(rng() % 900 + 100));
    auto r = integer_relation({w1, w2, w3, w1 + w2}, 3, Scalar::from_decimal("1e-9"));
    REQUIRE(r.has_value());
    // the found relation is a multiple of (1, 1, 0, -1) unless the random
    // values admit a smaller accidental one; verify it is a true relation
    Scalar s(0);
    std::vector<Scalar> vals{w1, w2, w3, w1 + w2};
    for (size_t i = 0; i < 4; ++i) s += Scalar(r->coeffs[i]) * vals[i];
    CHECK(s.abs().to_double() < 1e-9);
  }
  // generic dyadic widths admit exactly the forced relation
  Scalar a = Scalar(Dyadic(BigInt(7481), -13)), b = Scalar(Dyadic(BigInt(5923), -13)),
         c = Scalar(Dyadic(BigInt(6151), -13));
  auto r = integer_relation({a, b, c, a + b}, 10, Scalar::from_decimal("1e-9"));
  REQUIRE(r.has_value());
  CHECK((r->coeffs == std::vector<long>{-1, -1, 0, 1} ||
         r->coeffs == std::vector<long>{1, 1, 0, -1}));
}

TEST_CASE("integer relation never certifies a violation") {
  std::mt19937_64 rng(13);
  for (int t = 0; t < 50; ++t) {
    std::vector<Scalar> vals;
    for (int i = 0; i < 3; ++i)
      vals.push_back(Scalar(static_cast<long>(rng() % 1000 + 1)) / Scalar(static_cast<long>(rng() % 97 + 3)));
    Scalar tol = Scalar::from_decimal("1e-7");
    auto r = integer_relation(vals, 4, tol);
    if (r) {
      Scalar s(0);
      for (size_t i = 0; i < vals.size(); ++i) s += Scalar(r->coeffs[i]) * vals[i];
      CHECK(s.abs().certainly_lt(tol));
    }
  }
}

TEST_CASE("rank of span") {
  CHECK(rank_of_span({Scalar(3), Scalar(2), Scalar(1)}, 10, Scalar::from_decimal("1e-9")).rank == 1);

  Scalar lam = oracles::tribonacci_lambda(192);
  CHECK(rank_of_span({lam * lam, lam, Scalar(1)}, 10, Scalar::from_decimal("1e-9")).rank == 3);

  Scalar rt2 = Scalar(Scalar(2).sqrt().midpoint());  // exact dyadic surrogate
  auto est = rank_of_span({Scalar(1), rt2, Scalar(1) + rt2}, 10, Scalar::from_decimal("1e-6"));
  CHECK(est.rank == 2);
  CHECK(est.relations.size() == 1);
}
