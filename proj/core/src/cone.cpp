#include "thinband/cone.hpp"

#include "thinband/numerics.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>

namespace thinband {

using nlohmann::json;

KSequence KSequence::list(std::vector<std::int64_t> terms) {
  for (auto t : terms)
    if (t < 1) throw config_error("KSequence: terms must be >= 1");
  KSequence s;
  s.kind_ = Kind::List;
  s.terms_ = std::move(terms);
  s.summable_ = false;
  return s;
}

KSequence KSequence::constant(std::int64_t c) {
  if (c < 1) throw config_error("KSequence: constant must be >= 1");
  KSequence s;
  s.kind_ = Kind::Constant;
  s.c_ = c;
  s.summable_ = false;
  return s;
}

KSequence KSequence::geometric(std::int64_t c, std::int64_t r) {
  if (c < 1 || r < 2) throw config_error("KSequence: geometric needs c >= 1, r >= 2");
  KSequence s;
  s.kind_ = Kind::Geometric;
  s.c_ = c;
  s.r_ = r;
  s.summable_ = true;
  return s;
}

KSequence KSequence::doubling(std::int64_t k0) {
  if (k0 < 1) throw config_error("KSequence: doubling needs k0 >= 1");
  KSequence s;
  s.kind_ = Kind::Doubling;
  s.c_ = k0;
  s.r_ = 2;
  s.summable_ = true;
  return s;
}

KSequence KSequence::from_json(const std::string& json_text) {
  json j = json::parse(json_text);
  if (j.contains("list")) return list(j["list"].get<std::vector<std::int64_t>>());
  if (j.contains("constant")) return constant(j["constant"].get<std::int64_t>());
  if (j.contains("geometric"))
    return geometric(j["geometric"]["c"].get<std::int64_t>(), j["geometric"]["r"].get<std::int64_t>());
  if (j.contains("doubling")) return doubling(j["doubling"]["k0"].get<std::int64_t>());
  throw config_error("KSequence: unrecognized JSON spec");
}

std::string KSequence::to_json() const {
  json j;
  switch (kind_) {
    case Kind::List:
      j["list"] = terms_;
      break;
    case Kind::Constant:
      j["constant"] = c_;
      break;
    case Kind::Geometric:
      j["geometric"] = {{"c", c_}, {"r", r_}};
      break;
    case Kind::Doubling:
      j["doubling"] = {{"k0", c_}};
      break;
  }
  return j.dump();
}

std::int64_t KSequence::at(int i) const {
  if (i < 0) throw config_error("KSequence: negative index");
  switch (kind_) {
    case Kind::List:
      if (i >= static_cast<int>(terms_.size()))
        throw config_error("KSequence: index past end of explicit list");
      return terms_[static_cast<size_t>(i)];
    case Kind::Constant:
      return c_;
    case Kind::Geometric: {
      std::int64_t k = c_;
      for (int j = 0; j < i; ++j) {
        if (k > (std::int64_t(1) << 56)) throw config_error("KSequence: term overflow");
        k *= r_;
      }
      return k;
    }
    case Kind::Doubling: {
      if (i > 56) throw config_error("KSequence: term overflow");
      return c_ << i;
    }
  }
  throw config_error("KSequence: bad kind");
}

bool KSequence::doubling_hypothesis(int depth) const {
  for (int i = 0; i + 1 <= depth; ++i)
    if (at(i + 1) < 2 * at(i)) return false;
  return true;
}

Mat4i mat_A(std::int64_t k) {
  if (k < 1) throw std::domain_error("mat_A: k must be >= 1");
  Mat4i a;
  std::int64_t rows[4][4] = {
      {0, 0, 1, k}, {1, 0, 0, 0}, {0, 1, 0, 0}, {0, 1, 1, k - 1}};
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) a(r, c) = rows[r][c];
  return a;
}

Mat3i mat_B(std::int64_t k) {
  if (k < 1) throw std::domain_error("mat_B: k must be >= 1");
  Mat3i b;
  std::int64_t rows[3][3] = {{k, k, 1}, {1, 0, 0}, {0, 1, 0}};
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) b(r, c) = rows[r][c];
  return b;
}

Mat3i mat_Bprime(std::int64_t k, std::int64_t l, std::int64_t m) {
  if (k < 1 || l < 1 || m < 1) throw std::domain_error("mat_Bprime: arguments must be >= 1");
  Mat3i b;
  std::int64_t rows[3][3] = {{k * (l - 1) + 1, k * (l * (m - 1) + m), 2 * k - 1},
                             {l - 1, l * (m - 1) + 1, 1},
                             {0, m - 1, 1}};
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) b(r, c) = rows[r][c];
  return b;
}

Mat3i mat_Bpp() {
  Mat3i b;
  std::int64_t rows[3][3] = {{2, 1, 1}, {1, 1, 0}, {1, 1, 1}};
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) b(r, c) = rows[r][c];
  return b;
}

namespace {

std::vector<Scalar> to_vector(const Vec3s& v) { return {v[0], v[1], v[2]}; }

Scalar cone_diameter(const std::array<Vec3s, 3>& gens) {
  // Hilbert diameter of the cone spanned by three positive generators equals
  // the max pairwise Hilbert distance of the generators.
  Scalar d = hilbert_distance(to_vector(gens[0]), to_vector(gens[1]));
  Scalar d2 = hilbert_distance(to_vector(gens[0]), to_vector(gens[2]));
  Scalar d3 = hilbert_distance(to_vector(gens[1]), to_vector(gens[2]));
  auto hi_max = std::max(std::max(d.hi(), d2.hi()), d3.hi());
  auto lo_max = std::max(std::max(d.lo(), d2.lo()), d3.lo());
  return Scalar(lo_max, hi_max, d.precision());
}

}  // namespace

WidthSolution solve_widths(const KSequence& ks, int depth, const Scalar& tol, int prec) {
  if (depth < 6) throw std::domain_error("solve_widths: depth must be >= 6");
  if (!tol.certainly_positive()) throw std::domain_error("solve_widths: tol must be positive");

  WidthSolution sol;
  sol.depth = depth;
  sol.precision = prec;

  // Push the three extreme rays of the positive cone through the suffix
  // products: gens[i] spans B(k_i)...B(k_{depth-1})(K) at stage i.
  std::vector<std::array<Vec3s, 3>> gens(static_cast<size_t>(depth) + 1);
  gens[static_cast<size_t>(depth)] = {Vec3s{Scalar(1, prec), Scalar(0, prec), Scalar(0, prec)},
                                      Vec3s{Scalar(0, prec), Scalar(1, prec), Scalar(0, prec)},
                                      Vec3s{Scalar(0, prec), Scalar(0, prec), Scalar(1, prec)}};
  for (int i = depth - 1; i >= 0; --i) {
    Mat3s b = to_scalar(mat_B(ks.at(i)), prec);
    for (int g = 0; g < 3; ++g)
      gens[static_cast<size_t>(i)][static_cast<size_t>(g)] =
          b * gens[static_cast<size_t>(i + 1)][static_cast<size_t>(g)];
  }

  // Consistent representative chain: w_depth = (1,1,1), w_i = B(k_i) w_{i+1}.
  sol.stages.assign(static_cast<size_t>(depth) + 1, Vec3s{});
  sol.stages[static_cast<size_t>(depth)] =
      Vec3s{Scalar(1, prec), Scalar(1, prec), Scalar(1, prec)};
  for (int i = depth - 1; i >= 0; --i) {
    Mat3s b = to_scalar(mat_B(ks.at(i)), prec);
    sol.stages[static_cast<size_t>(i)] = b * sol.stages[static_cast<size_t>(i + 1)];
  }

  // Image-cone generators acquire strictly positive entries only after three
  // applications of B; record an unbounded sentinel for the last stages.
  const Scalar unbounded = Scalar::from_decimal("1e12", prec);
  sol.diameters.assign(static_cast<size_t>(depth) + 1, unbounded);
  for (int i = 0; i <= depth - 3; ++i)
    sol.diameters[static_cast<size_t>(i)] = cone_diameter(gens[static_cast<size_t>(i)]);

  if (!Scalar(sol.diameters[0]).certainly_lt(tol))
    throw accuracy_error("solve_widths: stage-0 Hilbert diameter above tolerance",
                         sol.diameters[0].hi().to_double());

  // Stage inequalities w1 > w2 + w3, w2 > w3 hold from stage depth-2 down
  // (the seed (1,1,1) and its first image sit on the cone boundary). The
  // representative chain is exact integer arithmetic at this precision, so an
  // undecided comparison indicates precision exhaustion.
  for (int i = 0; i <= depth - 2; ++i) {
    const Vec3s& w = sol.stages[static_cast<size_t>(i)];
    if (!(w[0].certainly_gt(w[1] + w[2]) && w[1].certainly_gt(w[2])))
      throw accuracy_error("solve_widths: stage inequality undecided at this precision",
                           sol.diameters[static_cast<size_t>(i)].hi().to_double());
  }

  // Certified box for the normalized limit ray at stage 0: the true ray is a
  // positive combination of the three stage-0 generators, so each normalized
  // coordinate lies between the min and max of the generators' ratios.
  const auto& g0 = gens[0];
  for (int c = 0; c < 3; ++c) {
    Scalar lo = g0[0][c] / g0[0][2], hi = lo;
    for (int g = 1; g < 3; ++g) {
      Scalar r = g0[static_cast<size_t>(g)][c] / g0[static_cast<size_t>(g)][2];
      lo = Scalar(std::min(lo.lo(), r.lo()), std::min(lo.hi(), r.hi()), prec);
      hi = Scalar(std::max(hi.lo(), r.lo()), std::max(hi.hi(), r.hi()), prec);
    }
    sol.certified_w0_box[c] = Scalar(lo.lo(), hi.hi(), prec);
  }

  const Vec3s& w0 = sol.stages[0];
  for (int c = 0; c < 3; ++c) sol.normalized_w0[c] = w0[c] / w0[2];
  return sol;
}

Vec4s lengths_recursion(const Vec4s& l0, const KSequence& ks, int n) {
  for (int c = 0; c < 4; ++c)
    if (!l0[c].certainly_positive()) throw std::domain_error("lengths_recursion: l0 must be positive");
  Vec4s l = l0;
  for (int i = 0; i < n; ++i) l = rowmul(l, to_scalar(mat_A(ks.at(i)), l0[0].precision()));
  return l;
}

AreaSequence area_sequence(const KSequence& ks, int depth, const Vec4s& l0, bool certify, int prec) {
  if (certify && !ks.doubling_hypothesis(depth))
    throw config_error("area_sequence: certificate requires k_{i+1} >= 2 k_i");

  WidthSolution ws = solve_widths(ks, std::max(depth + 1, 6), Scalar::from_decimal("1e9", prec), prec);

  AreaSequence out;
  Vec4s l = l0;
  auto area_at = [&](int i, const Vec4s& li) {
    const Vec3s& w = ws.stages[static_cast<size_t>(i)];
    // C has rows (1,0,0),(0,1,0),(0,0,1),(1,0,0): S = l1 w1 + l2 w2 + l3 w3 + l4 w1.
    return li[0] * w[0] + li[1] * w[1] + li[2] * w[2] + li[3] * w[0];
  };
  out.areas.push_back(area_at(0, l));
  bool all_ok = true;
  for (int i = 0; i < depth; ++i) {
    std::int64_t k = ks.at(i);
    l = rowmul(l, to_scalar(mat_A(k), prec));
    Scalar s_next = area_at(i + 1, l);
    out.areas.push_back(s_next);
    // S_{i+1} > (1 - 2/k_i) S_i  <=>  k_i S_{i+1} > (k_i - 2) S_i, exactly.
    Scalar lhs = Scalar(static_cast<long>(k), prec) * s_next;
    Scalar rhs = Scalar(static_cast<long>(k - 2), prec) * out.areas[static_cast<size_t>(i)];
    bool ok = lhs.certainly_gt(rhs);
    out.certificates.push_back(ok);
    all_ok = all_ok && ok;
  }
  out.all_certified = all_ok && certify;
  return out;
}

Vec3s H_from_w(const Vec3s& w) {
  for (int c = 0; c < 3; ++c)
    if (!w[c].certainly_positive()) throw std::domain_error("H_from_w: w must be positive");
  Scalar half = Scalar(1, w[0].precision()) / Scalar(2, w[0].precision());
  return Vec3s{(w[1] + w[2]) * half, (w[0] + w[2]) * half, (w[0] + w[1]) * half};
}

}  // namespace thinband
