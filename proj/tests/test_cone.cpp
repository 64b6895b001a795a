#include "thinband/cone.hpp"

#include "thinband/numerics.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <random>

using namespace thinband;

TEST_CASE("matrix families match their defining tables") {
  Mat3i b1 = mat_B(1);
  std::int64_t expect_b1[3][3] = {{1, 1, 1}, {1, 0, 0}, {0, 1, 0}};
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) CHECK(b1(r, c) == expect_b1[r][c]);

  Mat4i a1 = mat_A(1);
  std::int64_t expect_a1[4][4] = {{0, 0, 1, 1}, {1, 0, 0, 0}, {0, 1, 0, 0}, {0, 1, 1, 0}};
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) CHECK(a1(r, c) == expect_a1[r][c]);

  Vec3i ones{1, 1, 1};
  Vec3i img = mat_B(3) * ones;
  CHECK(img == Vec3i{7, 1, 1});

  CHECK_THROWS_AS(mat_B(0), std::domain_error);
  CHECK_THROWS_AS(mat_A(0), std::domain_error);
}

TEST_CASE("triple product identity B(k)B(l)B(m) = B'(k,l,m) B''") {
  Mat3i b111 = mat_B(1) * mat_B(1) * mat_B(1);
  std::int64_t expect[3][3] = {{4, 3, 2}, {2, 2, 1}, {1, 1, 1}};
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) CHECK(b111(r, c) == expect[r][c]);

  Mat3i bp111 = mat_Bprime(1, 1, 1);
  std::int64_t expect_bp[3][3] = {{1, 1, 1}, {0, 1, 1}, {0, 0, 1}};
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) CHECK(bp111(r, c) == expect_bp[r][c]);

  for (std::int64_t k = 1; k <= 10; ++k)
    for (std::int64_t l = 1; l <= 10; ++l)
      for (std::int64_t m = 1; m <= 10; ++m)
        CHECK(mat_B(k) * mat_B(l) * mat_B(m) == mat_Bprime(k, l, m) * mat_Bpp());
}

TEST_CASE("B'' maps the closed cone into the closure of K'") {
  // K' = {w3 < w1 + w2}; on the extreme rays the image satisfies w3 <= w1+w2
  Mat3i bpp = mat_Bpp();
  for (int i = 0; i < 3; ++i) {
    Vec3i e{};
    e[i] = 1;
    Vec3i y = bpp * e;
    CHECK(y[2] <= y[0] + y[1]);
  }
  std::mt19937_64 rng(3);
  for (int t = 0; t < 100; ++t) {
    Vec3i x{static_cast<std::int64_t>(rng() % 100), static_cast<std::int64_t>(rng() % 100),
            static_cast<std::int64_t>(rng() % 100)};
    Vec3i y = bpp * x;
    CHECK(y[2] <= y[0] + y[1]);
    // and the second application lands strictly inside when x != 0
    if (x[0] + x[1] + x[2] > 0) {
      Vec3i z = bpp * y;
      CHECK(z[2] < z[0] + z[1]);
    }
  }
}

TEST_CASE("KSequence JSON forms") {
  KSequence l = KSequence::from_json(R"({"list":[2,4,8,16]})");
  CHECK(l.at(2) == 8);
  CHECK(!l.summable());
  CHECK_THROWS_AS(l.at(4), config_error);

  KSequence c = KSequence::from_json(R"({"constant":3,"n":10})");
  CHECK(c.at(100) == 3);
  CHECK(!c.summable());

  KSequence g = KSequence::from_json(R"({"geometric":{"c":2,"r":3}})");
  CHECK(g.at(0) == 2);
  CHECK(g.at(3) == 54);
  CHECK(g.summable());

  KSequence d = KSequence::from_json(R"({"doubling":{"k0":2}})");
  CHECK(d.at(4) == 32);
  CHECK(d.summable());
  CHECK(d.doubling_hypothesis(20));

  CHECK_THROWS_AS(KSequence::from_json(R"({"bogus":1})"), config_error);
  CHECK_THROWS_AS(KSequence::geometric(2, 1), config_error);
}

TEST_CASE("width solver recovers the tribonacci ray for constant k = 1") {
  KSequence ks = KSequence::constant(1);
  WidthSolution sol = solve_widths(ks, 60, Scalar::from_decimal("1e-13"));

  auto oracle = oracles::perron_ray_b1();
  auto fmt = [](long double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.25Lf", v);
    return std::string(buf);
  };
  std::vector<Scalar> got{sol.normalized_w0[0], sol.normalized_w0[1], sol.normalized_w0[2]};
  std::vector<Scalar> want{Scalar::from_decimal(fmt(oracle[0] / oracle[2])),
                           Scalar::from_decimal(fmt(oracle[1] / oracle[2])), Scalar(1)};
  CHECK(hilbert_distance(got, want).to_double() < 1e-12);

  Scalar lam = oracles::tribonacci_lambda(128);
  CHECK((sol.normalized_w0[1] - lam).abs().to_double() < 1e-12);
  CHECK((sol.normalized_w0[0] - lam * lam).abs().to_double() < 1e-12);

  // certified box brackets the limit ray
  CHECK(sol.certified_w0_box[1].contains(lam));
}

TEST_CASE("width solver stage structure") {
  KSequence ks = KSequence::doubling(2);
  WidthSolution sol = solve_widths(ks, 24, Scalar::from_decimal("1e-6"), 512);

  // exact chain: w_i = B(k_i) w_{i+1}
  for (int i = 0; i < 24; ++i) {
    Mat3s b = to_scalar(mat_B(ks.at(i)), 512);
    Vec3s img = b * sol.stages[static_cast<size_t>(i) + 1];
    for (int c = 0; c < 3; ++c) CHECK(img[c].overlaps(sol.stages[static_cast<size_t>(i)][c]));
  }
  // stage inequalities hold where defined
  for (int i = 0; i <= 22; ++i) {
    const Vec3s& w = sol.stages[static_cast<size_t>(i)];
    CHECK(w[0].certainly_gt(w[1] + w[2]));
    CHECK(w[1].certainly_gt(w[2]));
  }
  // Hilbert diameters do not increase toward stage 0
  for (int i = 0; i + 1 <= 21; ++i)
    CHECK(sol.diameters[static_cast<size_t>(i)].lo().to_double() <=
          sol.diameters[static_cast<size_t>(i) + 1].hi().to_double() + 1e-12);

  CHECK_THROWS_AS(solve_widths(ks, 6, Scalar::from_decimal("1e-30")), accuracy_error);
  CHECK_THROWS_AS(solve_widths(ks, 4, Scalar::from_decimal("1e-3")), std::domain_error);
}

TEST_CASE("scale covariance of the solver") {
  KSequence ks = KSequence::constant(2);
  WidthSolution sol = solve_widths(ks, 30, Scalar::from_decimal("1e-8"));
  // normalized_w0 is the stage-0 vector divided by its third entry
  for (int c = 0; c < 3; ++c) {
    Scalar back = sol.normalized_w0[c] * sol.stages[0][2];
    CHECK(back.overlaps(sol.stages[0][c]));
  }
  CHECK(sol.normalized_w0[2].contains(Dyadic(1)));
}

TEST_CASE("length recursion") {
  Vec4s l0{Scalar(1), Scalar(1), Scalar(1), Scalar(1)};
  KSequence ones = KSequence::constant(1);
  Vec4s l1 = lengths_recursion(l0, ones, 1);
  CHECK(l1[0].lo() == Dyadic(1));
  CHECK(l1[1].lo() == Dyadic(2));
  CHECK(l1[2].lo() == Dyadic(2));
  CHECK(l1[3].lo() == Dyadic(1));

  Vec4s l_same = lengths_recursion(l0, ones, 0);
  for (int c = 0; c < 4; ++c) CHECK(l_same[c].lo() == Dyadic(1));

  // positive integer entries, unbounded growth
  KSequence d = KSequence::doubling(2);
  Vec4s l5 = lengths_recursion(l0, d, 5);
  Vec4s l10 = lengths_recursion(l0, d, 10);
  for (int c = 0; c < 4; ++c) {
    CHECK(l5[c].is_exact());
    CHECK(l5[c].lo().sign() > 0);
    CHECK(l10[c].certainly_gt(l5[c] * Scalar(10)));
  }
}

TEST_CASE("area sequence with the doubling hypothesis") {
  KSequence ks = KSequence::doubling(2);  // k_i = 2^(i+1)
  Vec4s l0{Scalar(1), Scalar(1), Scalar(1), Scalar(1)};
  AreaSequence seq = area_sequence(ks, 15, l0, true, 512);
  REQUIRE(seq.areas.size() == 16);
  for (bool c : seq.certificates) CHECK(c);
  CHECK(seq.all_certified);
  // areas strictly decrease and stay separated from zero
  for (size_t i = 0; i + 1 < seq.areas.size(); ++i)
    CHECK(seq.areas[i].certainly_gt(seq.areas[i + 1]));
  CHECK(seq.areas[15].lo().sign() > 0);

  // the inequality mechanism, exactly in integers:
  // (k_i A_i C - (k_i - 2) C B_i) B_{i+1} is entrywise >= 0 with positive
  // rows 1, 2, 4 and row 3 = (2, 0, 0), which forces
  // l (A C - (1 - 2/k) C B) B w > 0 for positive l, w.
  for (int i = 0; i <= 15; ++i) {
    std::int64_t k = ks.at(i);
    Mat<std::int64_t, 4, 3> C{};
    C(0, 0) = 1;
    C(1, 1) = 1;
    C(2, 2) = 1;
    C(3, 0) = 1;
    auto lhs = (mat_A(k) * C) * k - (C * mat_B(k)) * (k - 2);
    auto prod = lhs * mat_B(ks.at(i + 1));
    for (int r = 0; r < 4; ++r) {
      std::int64_t row_sum = 0;
      for (int c = 0; c < 3; ++c) {
        CHECK(prod(r, c) >= 0);
        row_sum += prod(r, c);
      }
      CHECK(row_sum > 0);
    }
  }

  CHECK_THROWS_AS(area_sequence(KSequence::constant(3), 5, l0, true), config_error);
}

TEST_CASE("area value for the tribonacci ray") {
  KSequence ks = KSequence::constant(1);
  WidthSolution sol = solve_widths(ks, 60, Scalar::from_decimal("1e-13"));
  // S_0 = l0 C w = 2 w1 + w2 + w3 with w = (lambda^2, lambda, 1)
  Scalar s0 = Scalar(2) * sol.normalized_w0[0] + sol.normalized_w0[1] + sol.normalized_w0[2];
  Scalar lam = oracles::tribonacci_lambda(128);
  Scalar want = Scalar(2) * lam * lam + lam + Scalar(1);
  CHECK((s0 - want).abs().to_double() < 1e-11);
  CHECK(s0.to_double() == doctest::Approx(9.6053).epsilon(1e-4));
}

TEST_CASE("H from w") {
  Vec3s ones{Scalar(1), Scalar(1), Scalar(1)};
  Vec3s h = H_from_w(ones);
  for (int c = 0; c < 3; ++c) CHECK(h[c].lo() == Dyadic(1));

  KSequence ks = KSequence::constant(1);
  WidthSolution sol = solve_widths(ks, 60, Scalar::from_decimal("1e-13"));
  Vec3s ht = H_from_w(sol.normalized_w0);
  CHECK(ht[0].to_double() == doctest::Approx(1.41965).epsilon(1e-4));
  CHECK(ht[1].to_double() == doctest::Approx(2.19150).epsilon(1e-4));
  CHECK(ht[2].to_double() == doctest::Approx(2.61115).epsilon(1e-4));

  // <H,(1,1,1)> = sigma and 2 H_i = sigma - w_i
  Scalar sigma = sol.normalized_w0[0] + sol.normalized_w0[1] + sol.normalized_w0[2];
  Scalar dot = ht[0] + ht[1] + ht[2];
  CHECK((dot - sigma).abs().to_double() < 1e-20);
  for (int c = 0; c < 3; ++c)
    CHECK((Scalar(2) * ht[c] - (sigma - sol.normalized_w0[c])).abs().to_double() < 1e-20);

  // triangle inequalities on H characterize positive w
  std::mt19937_64 rng(17);
  for (int t = 0; t < 50; ++t) {
    Vec3s H{Scalar(static_cast<long>(rng() % 20 + 1)), Scalar(static_cast<long>(rng() % 20 + 1)),
            Scalar(static_cast<long>(rng() % 20 + 1))};
    Scalar sH = H[0] + H[1] + H[2];
    bool triangle = true, positive = true;
    for (int c = 0; c < 3; ++c) {
      Scalar w_c = sH - Scalar(2) * H[c];  // w with 2H = (paired sums)
      positive = positive && w_c.certainly_positive();
      Scalar others = sH - H[c];
      triangle = triangle && H[c].certainly_lt(others);
    }
    CHECK(triangle == positive);
  }
}
