#include "thinband/iet.hpp"

#include <algorithm>
#include <cmath>

namespace thinband {

Mat9i mat_R(std::int64_t k) {
  if (k < 1) throw std::domain_error("mat_R: k must be >= 1");
  Mat9i r;
  auto row = [&](int i, std::initializer_list<std::int64_t> cs) {
    int j = 0;
    for (auto c : cs) r(i, j++) = c;
  };
  const std::int64_t q = k - 1;
  // y1 = (k-1)(x2+x3+x7+x8+x9) + x7
  row(0, {0, q, q, 0, 0, 0, q + 1, q, q});
  // y2 = x8
  row(1, {0, 0, 0, 0, 0, 0, 0, 1, 0});
  // y3 = x2 + x9
  row(2, {0, 1, 0, 0, 0, 0, 0, 0, 1});
  // y4 = x3 + x7
  row(3, {0, 0, 1, 0, 0, 0, 1, 0, 0});
  // y5 = x1 + x2 + x3 + x4
  row(4, {1, 1, 1, 1, 0, 0, 0, 0, 0});
  // y6 = (k-1)(x2+x3+x7+x8+x9) + x2 + x3 + x7
  row(5, {0, q + 1, q + 1, 0, 0, 0, q + 1, q, q});
  // y7 = x5
  row(6, {0, 0, 0, 0, 1, 0, 0, 0, 0});
  // y8 = x2 + x3 + x6
  row(7, {0, 1, 1, 0, 0, 1, 0, 0, 0});
  // y9 = (k-1)(x1+x2+x3+x4+x8) + x4
  row(8, {q, q, q, q + 1, 0, 0, 0, q, 0});
  return r;
}

RSplit split_R() {
  // R(k) = k R' + R'' with R' = R(2) - R(1), R'' = R(1) - R'.
  Mat9i r1 = mat_R(1), r2 = mat_R(2);
  RSplit s;
  s.Rp = r2 - r1;
  s.Rpp = r1 - s.Rp;
  return s;
}

std::vector<Vec9i> basis_of_V() {
  // Free coordinates y2..y6, y8, y9; then y1 = y6 - y4 + y5 - y8 and
  // y7 = y2 + y5 - y8 enforce y1+y4-y6 = y5-y8 = y7-y2.
  std::vector<Vec9i> basis;
  const int free_idx[7] = {1, 2, 3, 4, 5, 7, 8};  // 0-based indices of y2..y6,y8,y9
  for (int f = 0; f < 7; ++f) {
    Vec9i b{};
    b[free_idx[f]] = 1;
    b[0] = b[5] - b[3] + b[4] - b[7];
    b[6] = b[1] + b[4] - b[7];
    basis.push_back(b);
  }
  return basis;
}

VCheck check_V(const Vec9s& y) {
  VCheck c;
  c.e1 = y[0] + y[3] - y[5];
  c.e2 = y[4] - y[7];
  c.e3 = y[6] - y[1];
  c.ok = (c.e1 - c.e2).contains(Dyadic(0)) && (c.e2 - c.e3).contains(Dyadic(0));
  return c;
}

Vec9s x_from_w(const Vec3s& w) {
  if (!w[0].certainly_gt(w[1] + w[2]) || !w[1].certainly_gt(w[2]))
    throw std::domain_error("x_from_w: requires w1 > w2 + w3 and w2 > w3");
  return Vec9s{w[0] - w[1] - w[2], w[2], w[1] - w[2], w[2], w[1],
               w[0] - w[1], w[2], w[1], w[0] - w[1] - w[2]};
}

BlockPermutation canonical_permutation() {
  BlockPermutation p;
  p.top = {std::vector<int>{1, 2, 3, 4}, {5, 6}, {7, 8, 9}};
  p.bottom = {std::vector<int>{3, 7, 6}, {4, 8, 1}, {9, 2, 5}};
  return p;
}

IETStage stage_from_w(const Vec3s& w, int index) {
  IETStage s;
  s.index = index;
  s.w = w;
  s.x = x_from_w(w);
  return s;
}

namespace {

// Locate the label of `off` within the arrangement `row` (one transversal's
// label sequence) with sub-lengths x. Half-open convention [start, end);
// an enclosure that straddles a boundary cannot be placed.
std::pair<int, Scalar> locate(const std::vector<int>& row, const Vec9s& x, const Scalar& off) {
  Scalar start(0, off.precision());
  for (int label : row) {
    Scalar end = start + x[label - 1];
    bool ge_start = !(off.lo() < start.hi());  // off >= start, certainly
    bool lt_end = off.hi() < end.lo();         // off < end, certainly
    if (ge_start && lt_end) return {label, off - start};
    start = end;
  }
  throw discontinuity_error("iet_map: offset straddles a label boundary");
}

struct MapResult {
  IETPoint target;
  int label;
};

MapResult apply(const std::array<std::vector<int>, 3>& from,
                const std::array<std::vector<int>, 3>& to, const Vec9s& x, const IETPoint& p,
                const Scalar& w1) {
  if (p.transversal < 0 || p.transversal > 2) throw std::domain_error("iet_map: bad transversal");
  if (p.offset.lo().sign() < 0 || !p.offset.certainly_lt(w1))
    throw std::domain_error("iet_map: offset outside [0, w1)");
  auto [label, rel] = locate(from[static_cast<size_t>(p.transversal)], x, p.offset);
  for (int t = 0; t < 3; ++t) {
    Scalar start(0, p.offset.precision());
    for (int m : to[static_cast<size_t>(t)]) {
      if (m == label) return MapResult{IETPoint{t, start + rel}, label};
      start += x[m - 1];
    }
  }
  throw std::logic_error("iet_map: label missing from target arrangement");
}

}  // namespace

IETPoint iet_map(const IETStage& stage, const IETPoint& p) {
  BlockPermutation perm = canonical_permutation();
  return apply(perm.top, perm.bottom, stage.x, p, stage.w[0]).target;
}

IETPoint iet_map_inverse(const IETStage& stage, const IETPoint& p) {
  BlockPermutation perm = canonical_permutation();
  return apply(perm.bottom, perm.top, stage.x, p, stage.w[0]).target;
}

LabeledPoint iet_map_labeled(const IETStage& stage, const IETPoint& p) {
  BlockPermutation perm = canonical_permutation();
  MapResult r = apply(perm.top, perm.bottom, stage.x, p, stage.w[0]);
  return LabeledPoint{r.target, r.label};
}

bool renormalize_check(const Vec9s& x_cur, std::int64_t k, const Vec9s& x_next) {
  Mat9i r = mat_R(k);
  for (int i = 0; i < 9; ++i) {
    Scalar s(0, x_cur[i].precision());
    for (int j = 0; j < 9; ++j) s += Scalar(static_cast<long>(r(i, j))) * x_next[j];
    if (!s.overlaps(x_cur[i])) return false;
  }
  return true;
}

ErgodicCone ergodic_cone(const KSequence& ks, int depth, int prec) {
  if (!ks.summable()) throw config_error("ergodic_cone: k-sequence must be provably summable");
  if (depth < 12 || depth % 2 != 0)
    throw std::domain_error("ergodic_cone: depth must be even and >= 12");

  auto push = [&](Vec9s v) {
    for (int j = depth - 1; j >= 0; --j) {
      std::int64_t k = ks.at(j);
      Mat9i r = mat_R(k);
      Vec9s next;
      for (int i = 0; i < 9; ++i) {
        Scalar s(0, prec);
        for (int c = 0; c < 9; ++c) s += Scalar(static_cast<long>(r(i, c)), prec) * v[c];
        next[i] = s / Scalar(static_cast<long>(k), prec);
      }
      v = next;
    }
    return v;
  };
  Vec9s u0, v0;
  for (int i = 0; i < 9; ++i) {
    u0[i] = Scalar(static_cast<long>(u_infinity()[i]), prec);
    v0[i] = Scalar(static_cast<long>(v_infinity()[i]), prec);
  }

  ErgodicCone out;
  out.u = push(u0);
  out.v = push(v0);

  WidthSolution ws = solve_widths(ks, std::max(depth, 12), Scalar::from_decimal("1e9", prec), prec);
  // normalize the stage-0 widths to w2 = 1 so the fit runs at unit scale
  // (the raw chain grows like the product of the k_i)
  Vec3s w0{ws.stages[0][0].with_precision(prec) / ws.stages[0][1].with_precision(prec),
           Scalar(1, prec),
           ws.stages[0][2].with_precision(prec) / ws.stages[0][1].with_precision(prec)};
  Vec9s x0 = x_from_w(w0);

  auto dot9 = [&](const Vec9s& a, const Vec9s& b) {
    Scalar s(0, prec);
    for (int i = 0; i < 9; ++i) s += a[i] * b[i];
    return s;
  };
  Scalar uu = dot9(out.u, out.u), vv = dot9(out.v, out.v), uv = dot9(out.u, out.v);
  Scalar bu = dot9(out.u, x0), bv = dot9(out.v, x0);
  Scalar det = uu * vv - uv * uv;
  out.alpha = (vv * bu - uv * bv) / det;
  out.beta = (uu * bv - uv * bu) / det;

  // sin^2(angle) = 1 - <u,v>^2 / (|u|^2 |v|^2)
  Scalar cos2 = (uv * uv) / (uu * vv);
  Scalar sin2 = Scalar(1, prec) - cos2;
  if (sin2.lo().sign() < 0) sin2 = Scalar(Dyadic(0), sin2.hi(), prec);
  out.separation_sin = sin2.sqrt();

  Scalar res(0, prec);
  for (int i = 0; i < 9; ++i) {
    Scalar d = (x0[i] - out.alpha * out.u[i] - out.beta * out.v[i]).abs();
    res = Scalar(std::max(res.lo(), d.lo()), std::max(res.hi(), d.hi()), prec);
  }
  out.fit_residual = res;

  out.u_relation_gap = out.u[2] + out.u[5] - out.u[7] - out.u[8];
  out.u_in_V = check_V(out.u).ok;
  out.v_in_V = check_V(out.v).ok;
  return out;
}

Vec4s transversal_integrals(const Vec9s& y) {
  return Vec4s{y[1] + y[2] + y[3] + y[4] + y[5],
               y[1] + y[4] + y[6] + y[7] + y[8],
               y[1] + Scalar(2) * y[2] + y[3] + y[5] + y[6],
               y[1] + Scalar(2) * y[2] + y[5] + Scalar(2) * y[6]};
}

EquidistributionReport equidistribution_test(const IETStage& stage, long n, const Scalar& eps,
                                             const IETPoint& start) {
  if (n < 1) throw std::domain_error("equidistribution_test: N must be >= 1");
  if (!eps.certainly_positive()) throw std::domain_error("equidistribution_test: eps must be positive");

  EquidistributionReport rep;
  double w1 = stage.w[0].to_double();
  long buckets = std::max<long>(1, static_cast<long>(std::ceil(w1 / eps.to_double())));
  std::vector<std::vector<bool>> seen(3, std::vector<bool>(static_cast<size_t>(buckets), false));
  std::array<std::vector<double>, 3> visits;

  BlockPermutation perm = canonical_permutation();
  IETPoint p = start;
  IETPoint origin = start;
  for (long i = 0; i < n; ++i) {
    double off = p.offset.to_double();
    visits[static_cast<size_t>(p.transversal)].push_back(off);
    long b = std::min<long>(buckets - 1, std::max<long>(0, static_cast<long>(off / w1 * static_cast<double>(buckets))));
    seen[static_cast<size_t>(p.transversal)][static_cast<size_t>(b)] = true;
    IETPoint q;
    try {
      MapResult step = apply(perm.top, perm.bottom, stage.x, p, stage.w[0]);
      ++rep.label_visits[static_cast<size_t>(step.label - 1)];
      q = step.target;
    } catch (const discontinuity_error&) {
      ++rep.restarts;
      // perturb: shift by one quarter of eps, wrap into [0, w1)
      Scalar shifted = p.offset + eps * Scalar::from_decimal("0.25");
      if (!shifted.certainly_lt(stage.w[0])) shifted = shifted - stage.w[0];
      q = IETPoint{p.transversal, shifted};
    }
    p = q;
    ++rep.steps;
    if (p.transversal == origin.transversal && p.offset.is_exact() && origin.offset.is_exact() &&
        p.offset.lo() == origin.offset.lo()) {
      rep.periodic = true;
      rep.period = i + 1;
      break;
    }
  }

  long total = 0, hit = 0;
  for (const auto& t : seen)
    for (bool s : t) {
      ++total;
      hit += s ? 1 : 0;
    }
  rep.visited_fraction = total ? static_cast<double>(hit) / static_cast<double>(total) : 0.0;

  // dense = every subinterval of length eps contains a visit, i.e. no gap
  // between consecutive visits (or against the ends) reaches eps
  double max_gap = 0;
  for (auto& t : visits) {
    std::sort(t.begin(), t.end());
    double prev = 0;
    for (double v : t) {
      max_gap = std::max(max_gap, v - prev);
      prev = v;
    }
    max_gap = std::max(max_gap, w1 - prev);
    if (t.empty()) max_gap = w1;
  }
  rep.max_gap = max_gap;
  rep.dense = max_gap < eps.to_double();
  return rep;
}

namespace {

// --- the block-synchronized Rauzy-Veech engine -----------------------------
//
// Rows are kept as three blocks of labels; every elementary step acts on the
// last block. Winner arithmetic runs symbolically (each slot is an integer
// combination of the initial parameters) and is checked for positivity on a
// sample vector at every subtraction.

struct RVState {
  std::array<std::vector<int>, 3> top, bottom;
  std::array<Vec9i, 9> slot;     // slot[label-1] = integer row in the y basis
  std::array<double, 9> sample;  // numeric slot values for positivity checks

  int top_last() const { return top[2].back(); }
  int bottom_last() const { return bottom[2].back(); }

  double value(int label) const { return sample[static_cast<size_t>(label - 1)]; }

  void subtract(int winner, int loser) {
    if (!(value(winner) > value(loser)))
      throw std::logic_error("rauzy_composite: winner does not exceed loser");
    slot[static_cast<size_t>(winner - 1)] =
        slot[static_cast<size_t>(winner - 1)] - slot[static_cast<size_t>(loser - 1)];
    sample[static_cast<size_t>(winner - 1)] -= value(loser);
  }

  static void erase_label(std::array<std::vector<int>, 3>& rows, int label) {
    for (auto& blk : rows) {
      auto it = std::find(blk.begin(), blk.end(), label);
      if (it != blk.end()) {
        blk.erase(it);
        return;
      }
    }
    throw std::logic_error("rauzy_composite: label not found");
  }

  static void insert_after(std::array<std::vector<int>, 3>& rows, int anchor, int label) {
    for (auto& blk : rows) {
      auto it = std::find(blk.begin(), blk.end(), anchor);
      if (it != blk.end()) {
        blk.insert(it + 1, label);
        return;
      }
    }
    throw std::logic_error("rauzy_composite: anchor not found");
  }

  // top winner: last top label exceeds last bottom label
  void step_top() {
    int t = top_last(), b = bottom_last();
    subtract(t, b);
    bottom[2].pop_back();
    insert_after(bottom, t, b);
  }

  // bottom winner: last bottom label exceeds last top label
  void step_bottom() {
    int t = top_last(), b = bottom_last();
    subtract(b, t);
    top[2].pop_back();
    insert_after(top, b, t);
  }

  void rotate_right() {
    std::rotate(top.begin(), top.begin() + 2, top.end());
    std::rotate(bottom.begin(), bottom.begin() + 2, bottom.end());
  }
  void rotate_left() {
    std::rotate(top.begin(), top.begin() + 1, top.end());
    std::rotate(bottom.begin(), bottom.begin() + 1, bottom.end());
  }
};

}  // namespace

Mat9i rauzy_composite(std::int64_t k) {
  if (k < 1) throw std::domain_error("rauzy_composite: k must be >= 1");

  RVState st;
  BlockPermutation perm = canonical_permutation();
  st.top = perm.top;
  st.bottom = perm.bottom;
  for (int i = 0; i < 9; ++i) {
    Vec9i e{};
    e[i] = 1;
    st.slot[static_cast<size_t>(i)] = e;
  }
  // Drive the run with y = R(k) x for a sample x in the admissible cone.
  const double xs[9] = {3, 2, 1, 2, 3, 5, 2, 3, 3};  // x_from_w for w = (8, 3, 2)
  Mat9i r = mat_R(k);
  for (int i = 0; i < 9; ++i) {
    double s = 0;
    for (int j = 0; j < 9; ++j) s += static_cast<double>(r(i, j)) * xs[j];
    st.sample[static_cast<size_t>(i)] = s;
  }

  for (std::int64_t rep = 0; rep < k - 1; ++rep) {
    st.step_top();  // 9 over 5
    st.step_top();  // 9 over 2
  }
  st.step_bottom();  // 5 over 9 -> 9 joins the middle transversal
  st.rotate_right();
  st.step_top();     // 6 over 1
  st.step_bottom();  // 8 over 6
  st.rotate_right();
  for (std::int64_t rep = 0; rep < k - 1; ++rep) {
    st.step_bottom();  // 1 over 4
    st.step_bottom();  // 1 over 3
    st.step_bottom();  // 1 over 2
  }
  st.step_top();     // 4 over 1
  st.step_bottom();  // 6 over 4
  st.step_top();     // 3 over 6
  st.rotate_right();
  st.step_bottom();  // 5 over 4
  st.step_bottom();  // 5 over 6
  st.rotate_left();

  // Relabel by block position and verify the permutation returned to itself.
  std::array<int, 10> relabel{};
  const int canon_sizes[3] = {4, 2, 3};
  const int canon_first[3] = {1, 5, 7};
  for (int blk = 0; blk < 3; ++blk) {
    if (static_cast<int>(st.top[static_cast<size_t>(blk)].size()) != canon_sizes[blk])
      throw std::logic_error("rauzy_composite: block sizes did not return to canonical form");
    for (int pos = 0; pos < canon_sizes[blk]; ++pos)
      relabel[static_cast<size_t>(st.top[static_cast<size_t>(blk)][static_cast<size_t>(pos)])] =
          canon_first[blk] + pos;
  }
  for (int blk = 0; blk < 3; ++blk) {
    std::vector<int> bot;
    for (int lab : st.bottom[static_cast<size_t>(blk)]) bot.push_back(relabel[static_cast<size_t>(lab)]);
    if (bot != perm.bottom[static_cast<size_t>(blk)])
      throw std::logic_error("rauzy_composite: bottom rows did not return to the permutation");
  }

  // x_new[m] = slot of the old label that became m; rows of M give x = M y.
  Mat9i m;
  for (int old_label = 1; old_label <= 9; ++old_label) {
    int new_label = relabel[static_cast<size_t>(old_label)];
    for (int c = 0; c < 9; ++c)
      m(new_label - 1, c) = st.slot[static_cast<size_t>(old_label - 1)][c];
  }
  return m;
}

}  // namespace thinband
