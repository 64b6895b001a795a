#include "thinband/surface.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <random>
#include <sstream>

namespace thinband {

namespace {

Dyadic exactD(const Scalar& s, const char* what) {
  if (!s.is_exact()) throw structural_error(std::string(what) + ": value must be an exact dyadic");
  return s.lo();
}

Scalar level_offset(const SurfaceModel& m, const LatticePoint& n, const Scalar& a) {
  // a - <H, 2n>, exact when a is exact
  Scalar s = a;
  for (int i = 0; i < 3; ++i)
    s -= Scalar(static_cast<long>(2 * n[static_cast<size_t>(i)]), m.prec) * m.H[i];
  return s;
}

enum class OpenTest { Inside, Outside, Critical };

OpenTest open_interval_test(const Scalar& s, const Scalar& lo, const Scalar& hi) {
  if (s.certainly_gt(lo) && s.certainly_lt(hi)) return OpenTest::Inside;
  if (s.certainly_lt(lo) || s.certainly_gt(hi)) return OpenTest::Outside;
  return OpenTest::Critical;
}

}  // namespace

SurfaceModel make_surface(const Vec3s& w) {
  SurfaceModel m;
  m.prec = w[0].precision();
  for (int i = 0; i < 3; ++i) {
    Dyadic wi = exactD(w[i], "make_surface");
    if (wi.sign() <= 0) throw std::domain_error("make_surface: widths must be positive");
  }
  m.w = w;
  m.sigma = w[0] + w[1] + w[2];
  m.H = H_from_w(w);  // halves of dyadic sums stay exact
  for (int i = 0; i < 3; ++i)
    if (!m.H[i].is_exact()) throw structural_error("make_surface: H did not stay exact");
  return m;
}

std::array<int, 2> other_axes(int axis) {
  switch (axis) {
    case 0: return {1, 2};
    case 1: return {0, 2};
    case 2: return {0, 1};
    default: throw std::domain_error("other_axes: bad axis");
  }
}

bool face_membership(const FaceID& f) {
  if (f.axis < 0 || f.axis > 2) throw std::domain_error("face_membership: bad axis");
  return ((f.u0 + f.v0) % 2 + 2) % 2 == 1;
}

GenusReport genus_check() {
  GenusReport rep;
  // Faces mod 2Z^3: fixed coordinate in {0,1}, interval starts in {0,1} with
  // odd sum.
  struct Edge {
    int axis;
    std::array<int, 3> anchor;  // mod 2
    bool operator<(const Edge& o) const { return std::tie(axis, anchor) < std::tie(o.axis, o.anchor); }
  };
  std::map<Edge, int> edge_faces;
  std::map<std::array<int, 3>, std::set<std::array<std::int64_t, 4>>> vertex_faces;

  int faces = 0;
  for (int axis = 0; axis < 3; ++axis)
    for (std::int64_t fixed = 0; fixed < 2; ++fixed)
      for (std::int64_t u0 = 0; u0 < 2; ++u0)
        for (std::int64_t v0 = 0; v0 < 2; ++v0) {
          if (!face_membership(FaceID{axis, fixed, u0, v0})) continue;
          ++faces;
          auto [a1, a2] = other_axes(axis);
          // corners and edges of the unit square, reduced mod 2
          std::array<std::int64_t, 3> base{};
          base[static_cast<size_t>(axis)] = fixed;
          base[static_cast<size_t>(a1)] = u0;
          base[static_cast<size_t>(a2)] = v0;
          for (int du = 0; du < 2; ++du)
            for (int dv = 0; dv < 2; ++dv) {
              std::array<int, 3> c;
              for (int t = 0; t < 3; ++t) c[static_cast<size_t>(t)] = static_cast<int>(base[static_cast<size_t>(t)] % 2);
              c[static_cast<size_t>(a1)] = static_cast<int>((base[static_cast<size_t>(a1)] + du) % 2);
              c[static_cast<size_t>(a2)] = static_cast<int>((base[static_cast<size_t>(a2)] + dv) % 2);
              vertex_faces[c].insert({axis, fixed, u0, v0});
            }
          // two edges along a1 (dv in {0,1}), two along a2 (du in {0,1})
          for (int dv = 0; dv < 2; ++dv) {
            Edge e;
            e.axis = a1;
            e.anchor = {static_cast<int>(base[0] % 2), static_cast<int>(base[1] % 2),
                        static_cast<int>(base[2] % 2)};
            e.anchor[static_cast<size_t>(a2)] = static_cast<int>((base[static_cast<size_t>(a2)] + dv) % 2);
            ++edge_faces[e];
          }
          for (int du = 0; du < 2; ++du) {
            Edge e;
            e.axis = a2;
            e.anchor = {static_cast<int>(base[0] % 2), static_cast<int>(base[1] % 2),
                        static_cast<int>(base[2] % 2)};
            e.anchor[static_cast<size_t>(a1)] = static_cast<int>((base[static_cast<size_t>(a1)] + du) % 2);
            ++edge_faces[e];
          }
        }

  rep.faces = faces;
  rep.edges = static_cast<int>(edge_faces.size());
  rep.vertices = static_cast<int>(vertex_faces.size());
  rep.every_edge_two_faces = true;
  for (const auto& [e, cnt] : edge_faces) rep.every_edge_two_faces &= cnt == 2;
  rep.every_vertex_six_faces = true;
  for (const auto& [v, fs] : vertex_faces) rep.every_vertex_six_faces &= fs.size() == 6;
  int chi = rep.vertices - rep.edges + rep.faces;
  rep.genus = (2 - chi) / 2;
  return rep;
}

bool vertex_active(const SurfaceModel& m, const LatticePoint& n, const Scalar& a) {
  Scalar s = level_offset(m, n, a);
  switch (open_interval_test(s, Scalar(0, m.prec), m.sigma)) {
    case OpenTest::Inside: return true;
    case OpenTest::Outside: return false;
    default: throw critical_level_error("vertex_active: plane hits a diagonal endpoint");
  }
}

bool edge_active(const SurfaceModel& m, const LatticePoint& n, int i, const Scalar& a) {
  if (i < 0 || i > 2) throw std::domain_error("edge_active: bad direction");
  Scalar s = level_offset(m, n, a);
  switch (open_interval_test(s, m.sigma - m.w[i], m.sigma)) {
    case OpenTest::Inside: return true;
    case OpenTest::Outside: return false;
    default: throw critical_level_error("edge_active: plane hits a strip boundary");
  }
}

bool diagonal_hit_oracle(const SurfaceModel& m, const LatticePoint& n, const Scalar& a) {
  // levels of the two segment endpoints, computed from raw coordinates
  Scalar lo(0, m.prec), sH = m.H[0] + m.H[1] + m.H[2];
  for (int i = 0; i < 3; ++i)
    lo += Scalar(static_cast<long>(2 * n[static_cast<size_t>(i)]), m.prec) * m.H[i];
  Scalar hi = lo + sH;
  switch (open_interval_test(a, lo, hi)) {
    case OpenTest::Inside: return true;
    case OpenTest::Outside: return false;
    default: throw critical_level_error("diagonal_hit_oracle: plane through segment endpoint");
  }
}

bool strip_hit_oracle(const SurfaceModel& m, const LatticePoint& n, int i, const Scalar& a) {
  // Levels of the four listed parallelogram vertices, from raw coordinates.
  Scalar sH = m.H[0] + m.H[1] + m.H[2];
  Scalar base(0, m.prec);
  for (int c = 0; c < 3; ++c)
    base += Scalar(static_cast<long>(2 * n[static_cast<size_t>(c)]), m.prec) * m.H[c];
  Scalar t = m.w[i] / m.sigma;
  Scalar one(1, m.prec);
  Scalar lv1 = base + (one - t) * sH;
  Scalar lv2 = base + sH;
  Scalar lv3 = base + Scalar(2, m.prec) * m.H[i] + t * sH;
  Scalar lv4 = base + Scalar(2, m.prec) * m.H[i];
  auto min4 = [&](const Scalar& p, const Scalar& q) {
    return Scalar(std::min(p.lo(), q.lo()), std::min(p.hi(), q.hi()), m.prec);
  };
  auto max4 = [&](const Scalar& p, const Scalar& q) {
    return Scalar(std::max(p.lo(), q.lo()), std::max(p.hi(), q.hi()), m.prec);
  };
  Scalar lmin = min4(min4(lv1, lv2), min4(lv3, lv4));
  Scalar lmax = max4(max4(lv1, lv2), max4(lv3, lv4));
  switch (open_interval_test(a, lmin, lmax)) {
    case OpenTest::Inside: return true;
    case OpenTest::Outside: return false;
    default: throw critical_level_error("strip_hit_oracle: plane through a strip side");
  }
}

namespace {

std::array<Scalar, 3> embedded_vertex_scalar(const SurfaceModel& m, const LatticePoint& n,
                                             const Scalar& a) {
  Scalar t = level_offset(m, n, a) / m.sigma;
  std::array<Scalar, 3> p;
  for (int i = 0; i < 3; ++i)
    p[static_cast<size_t>(i)] = Scalar(static_cast<long>(2 * n[static_cast<size_t>(i)]), m.prec) + t;
  return p;
}

double dist3(const std::array<double, 3>& p, const std::array<double, 3>& q) {
  double s = 0;
  for (int i = 0; i < 3; ++i) s += (p[static_cast<size_t>(i)] - q[static_cast<size_t>(i)]) * (p[static_cast<size_t>(i)] - q[static_cast<size_t>(i)]);
  return std::sqrt(s);
}

struct UnionFind {
  std::vector<int> up;
  explicit UnionFind(size_t n) : up(n) { for (size_t i = 0; i < n; ++i) up[i] = static_cast<int>(i); }
  int find(int a) { return up[static_cast<size_t>(a)] == a ? a : up[static_cast<size_t>(a)] = find(up[static_cast<size_t>(a)]); }
  void unite(int a, int b) { up[static_cast<size_t>(find(a))] = find(b); }
};

}  // namespace

std::array<double, 3> embedded_vertex(const SurfaceModel& m, const LatticePoint& n, const Scalar& a) {
  auto p = embedded_vertex_scalar(m, n, a);
  return {p[0].to_double(), p[1].to_double(), p[2].to_double()};
}

ComponentSummary explore_component(const SurfaceModel& m, const LatticePoint& n0, const Scalar& a,
                                   int radius, std::set<LatticePoint>* visited_out) {
  if (radius < 1) throw std::domain_error("explore_component: radius must be >= 1");
  if (!vertex_active(m, n0, a))
    throw std::domain_error("explore_component: seed vertex is not active at this level");

  ComponentSummary sum;
  sum.seed = n0;
  sum.radius = radius;
  sum.direction_dot_H = Scalar(0, m.prec);

  std::map<LatticePoint, int> dist;
  std::map<LatticePoint, LatticePoint> parent;
  std::deque<LatticePoint> queue;
  dist[n0] = 0;
  parent[n0] = n0;
  queue.push_back(n0);
  const long cap = 1 << 21;

  auto neighbors = [&](const LatticePoint& n) {
    std::vector<LatticePoint> out;
    for (int i = 0; i < 3; ++i) {
      LatticePoint fwd = n;
      fwd[static_cast<size_t>(i)] += 1;
      if (edge_active(m, n, i, a)) out.push_back(fwd);
      LatticePoint bwd = n;
      bwd[static_cast<size_t>(i)] -= 1;
      if (edge_active(m, bwd, i, a)) out.push_back(bwd);
    }
    return out;
  };

  bool frontier_hit = false;
  while (!queue.empty()) {
    LatticePoint u = queue.front();
    queue.pop_front();
    int du = dist[u];
    if (du == radius) {
      frontier_hit = true;
      continue;  // do not expand past the radius
    }
    for (const auto& v : neighbors(u)) {
      auto it = dist.find(v);
      if (it == dist.end()) {
        dist[v] = du + 1;
        parent[v] = u;
        queue.push_back(v);
        if (static_cast<long>(dist.size()) > cap)
          throw structural_error("explore_component: component exceeds the exploration cap");
      } else if (!(parent[u] == v)) {
        sum.is_tree = false;
      }
    }
  }
  sum.size = static_cast<long>(dist.size());
  sum.exhausted = !frontier_hit;
  if (visited_out)
    for (const auto& [v, d] : dist) visited_out->insert(v);

  // end estimate: connected components of the outer half-shell that contain a
  // vertex at distance exactly `radius`
  if (sum.exhausted) {
    sum.end_estimate = 0;
  } else {
    std::vector<LatticePoint> shell;
    std::map<LatticePoint, int> shell_index;
    for (const auto& [v, d] : dist)
      if (2 * d > radius) {
        shell_index[v] = static_cast<int>(shell.size());
        shell.push_back(v);
      }
    UnionFind uf(shell.size());
    for (const auto& v : shell)
      for (int i = 0; i < 3; ++i) {
        LatticePoint w = v;
        w[static_cast<size_t>(i)] += 1;
        auto it = shell_index.find(w);
        if (it != shell_index.end() && edge_active(m, v, i, a))
          uf.unite(shell_index[v], it->second);
      }
    std::set<int> roots;
    for (const auto& [v, d] : dist)
      if (d == radius) roots.insert(uf.find(shell_index[v]));
    sum.end_estimate = static_cast<int>(roots.size());
  }

  // direction fit from the embedded positions
  std::vector<std::array<double, 3>> emb;
  std::vector<LatticePoint> verts;
  for (const auto& [v, d] : dist) {
    emb.push_back(embedded_vertex(m, v, a));
    verts.push_back(v);
  }
  auto emb_seed = embedded_vertex(m, n0, a);
  size_t ia = 0, ib = 0;
  double best = -1;
  for (size_t i = 0; i < emb.size(); ++i)
    if (dist3(emb[i], emb_seed) > best) {
      best = dist3(emb[i], emb_seed);
      ia = i;
    }
  best = -1;
  for (size_t i = 0; i < emb.size(); ++i)
    if (dist3(emb[i], emb[ia]) > best) {
      best = dist3(emb[i], emb[ia]);
      ib = i;
    }
  double norm = dist3(emb[ia], emb[ib]);
  if (norm > 0) {
    for (int c = 0; c < 3; ++c)
      sum.direction[static_cast<size_t>(c)] =
          (emb[ib][static_cast<size_t>(c)] - emb[ia][static_cast<size_t>(c)]) / norm;
    // certificate: <H, displacement> from exact embeddings
    auto pa = embedded_vertex_scalar(m, verts[ia], a);
    auto pb = embedded_vertex_scalar(m, verts[ib], a);
    Scalar dotH(0, m.prec);
    for (int c = 0; c < 3; ++c) dotH += m.H[c] * (pb[static_cast<size_t>(c)] - pa[static_cast<size_t>(c)]);
    sum.direction_dot_H = dotH;
    // residual: deviation from the chord line
    double res = 0;
    for (const auto& p : emb) {
      double t = 0;
      for (int c = 0; c < 3; ++c)
        t += (p[static_cast<size_t>(c)] - emb[ia][static_cast<size_t>(c)]) * sum.direction[static_cast<size_t>(c)];
      double d2 = 0;
      for (int c = 0; c < 3; ++c) {
        double diff = p[static_cast<size_t>(c)] - emb[ia][static_cast<size_t>(c)] - t * sum.direction[static_cast<size_t>(c)];
        d2 += diff * diff;
      }
      res = std::max(res, std::sqrt(d2));
    }
    sum.residual = res;
  }

  // quasi-isometry ratios between graph distance and Euclidean distance
  double rlo = 0, rhi = 0;
  bool any = false;
  for (size_t i = 0; i < verts.size(); ++i) {
    int d = dist[verts[i]];
    if (d < std::max(2, radius / 4)) continue;
    double r = dist3(emb[i], emb_seed) / static_cast<double>(d);
    if (!any) {
      rlo = rhi = r;
      any = true;
    } else {
      rlo = std::min(rlo, r);
      rhi = std::max(rhi, r);
    }
  }
  sum.ratio_lo = rlo;
  sum.ratio_hi = rhi;
  return sum;
}

namespace {

struct EdgeKey {
  int axis;
  std::array<std::int64_t, 3> anchor;
  auto operator<=>(const EdgeKey&) const = default;
};

struct Crossing {
  EdgeKey edge;
  Dyadic num;  // position parameter is num / H_axis, with 0 < num < H_axis
};

// All proper crossings of the level-a plane with the boundary of face f.
// Throws critical_level_error when the plane passes through a corner.
std::vector<Crossing> face_crossings(const SurfaceModel& m, const FaceID& f, const Dyadic& a) {
  auto [a1, a2] = other_axes(f.axis);
  std::array<std::int64_t, 3> base{};
  base[static_cast<size_t>(f.axis)] = f.fixed;
  base[static_cast<size_t>(a1)] = f.u0;
  base[static_cast<size_t>(a2)] = f.v0;

  Dyadic h[3];
  for (int c = 0; c < 3; ++c) h[static_cast<size_t>(c)] = exactD(m.H[c], "trace H");

  auto level_at = [&](const std::array<std::int64_t, 3>& g) {
    Dyadic s(0);
    for (int c = 0; c < 3; ++c) s = s + Dyadic(g[static_cast<size_t>(c)]) * h[static_cast<size_t>(c)];
    return s;
  };

  std::vector<Crossing> out;
  auto probe_edge = [&](int along, std::array<std::int64_t, 3> anchor) {
    Dyadic num = a - level_at(anchor);
    const Dyadic& den = h[static_cast<size_t>(along)];
    if (num.is_zero() || num == den)
      throw critical_level_error("trace_section_curve: section through a lattice vertex");
    if (num.sign() > 0 && num < den) out.push_back(Crossing{EdgeKey{along, anchor}, num});
  };
  // two edges along a1 (at v = v0, v0+1) and two along a2 (at u = u0, u0+1)
  for (int dv = 0; dv < 2; ++dv) {
    auto anchor = base;
    anchor[static_cast<size_t>(a2)] += dv;
    probe_edge(a1, anchor);
  }
  for (int du = 0; du < 2; ++du) {
    auto anchor = base;
    anchor[static_cast<size_t>(a1)] += du;
    probe_edge(a2, anchor);
  }
  return out;
}

FaceID next_face(const FaceID& cur, const EdgeKey& e) {
  std::vector<FaceID> candidates;
  for (int o : other_axes(e.axis)) {
    // faces with axis o fixed at the anchor's o-coordinate; the remaining
    // interval axis t can start at anchor[t]-1 or anchor[t]
    int t = 3 - o - e.axis;
    for (int dt = -1; dt <= 0; ++dt) {
      FaceID f;
      f.axis = o;
      f.fixed = e.anchor[static_cast<size_t>(o)];
      std::array<std::int64_t, 3> starts{};
      starts[static_cast<size_t>(e.axis)] = e.anchor[static_cast<size_t>(e.axis)];
      starts[static_cast<size_t>(t)] = e.anchor[static_cast<size_t>(t)] + dt;
      auto [x1, x2] = other_axes(o);
      f.u0 = starts[static_cast<size_t>(x1)];
      f.v0 = starts[static_cast<size_t>(x2)];
      if (face_membership(f)) candidates.push_back(f);
    }
  }
  if (candidates.size() != 2)
    throw structural_error("trace_section_curve: edge is not shared by exactly two faces");
  if (candidates[0] == cur) return candidates[1];
  if (candidates[1] == cur) return candidates[0];
  throw structural_error("trace_section_curve: current face does not contain the exit edge");
}

std::array<double, 3> crossing_point_double(const SurfaceModel& m, const Crossing& c) {
  double t = (Scalar(c.num, m.prec) / m.H[c.edge.axis]).to_double();
  std::array<double, 3> p;
  for (int i = 0; i < 3; ++i) p[static_cast<size_t>(i)] = static_cast<double>(c.edge.anchor[static_cast<size_t>(i)]);
  p[static_cast<size_t>(c.edge.axis)] += t;
  return p;
}

Scalar crossing_gap(const SurfaceModel& m, const Crossing& c, const Dyadic& a) {
  // <H, x> - a recomputed from the enclosure coordinates
  Scalar t = Scalar(c.num, m.prec) / m.H[c.edge.axis];
  Scalar s(0, m.prec);
  for (int i = 0; i < 3; ++i)
    s += m.H[i] * Scalar(Dyadic(c.edge.anchor[static_cast<size_t>(i)]), m.prec);
  s += m.H[c.edge.axis] * t;
  return (s - Scalar(a, m.prec)).abs();
}

}  // namespace

TraceResult trace_section_curve(const SurfaceModel& m, const FaceID& f0,
                                const std::array<Scalar, 3>& p0, long steps, bool forward) {
  Scalar s(0, m.prec);
  for (int i = 0; i < 3; ++i) s += m.H[i] * p0[static_cast<size_t>(i)];
  // exact inputs give the level exactly; otherwise trace the enclosure center
  Scalar level = s.is_exact() ? s : Scalar(s.midpoint(), m.prec);
  return trace_section_level(m, f0, level, steps, forward);
}

TraceResult trace_section_level(const SurfaceModel& m, const FaceID& f0, const Scalar& level,
                                long steps, bool forward) {
  if (!face_membership(f0)) throw std::domain_error("trace_section_curve: f0 is not a surface face");
  Dyadic a = exactD(level, "trace level");

  TraceResult res;
  res.confinement_gap = Scalar(0, m.prec);

  auto crossings = face_crossings(m, f0, a);
  if (crossings.size() != 2)
    throw structural_error("trace_section_curve: start face is not cut in a segment");
  std::sort(crossings.begin(), crossings.end(),
            [](const Crossing& x, const Crossing& y) { return x.edge < y.edge; });
  Crossing cur = forward ? crossings[1] : crossings[0];

  FaceID face = f0;
  const FaceID start_face = f0;
  const EdgeKey start_edge = cur.edge;

  auto emit = [&](const Crossing& c) {
    res.points.push_back(crossing_point_double(m, c));
    Scalar gap = crossing_gap(m, c, a);
    res.confinement_gap = Scalar(std::max(res.confinement_gap.lo(), gap.lo()),
                                 std::max(res.confinement_gap.hi(), gap.hi()), m.prec);
  };
  res.faces_visited.insert(face);
  emit(cur);
  res.start = res.points.front();

  for (long i = 0; i < steps; ++i) {
    FaceID nf = next_face(face, cur.edge);
    auto cands = face_crossings(m, nf, a);
    const Crossing* exit = nullptr;
    for (const auto& c : cands)
      if (!(c.edge == cur.edge)) exit = &c;
    if (cands.size() != 2 || exit == nullptr)
      throw structural_error("trace_section_curve: face crossing count is not 2");
    face = nf;
    cur = *exit;
    res.faces_visited.insert(face);
    emit(cur);
    ++res.steps_taken;
    if (face == start_face && cur.edge == start_edge) {
      res.closed = true;
      break;
    }
  }
  res.end = res.points.back();
  return res;
}

SectionStart find_section_start(const SurfaceModel& m, const Scalar& a, const LatticePoint& base) {
  Dyadic ad = exactD(a, "find_section_start");
  for (int r = 0; r <= 3; ++r)
    for (std::int64_t dx = -r; dx <= r; ++dx)
      for (std::int64_t dy = -r; dy <= r; ++dy)
        for (std::int64_t dz = -r; dz <= r; ++dz)
          for (int axis = 0; axis < 3; ++axis) {
            std::array<std::int64_t, 3> g{2 * base[0] + dx, 2 * base[1] + dy, 2 * base[2] + dz};
            auto [a1, a2] = other_axes(axis);
            FaceID f;
            f.axis = axis;
            f.fixed = g[static_cast<size_t>(axis)];
            f.u0 = g[static_cast<size_t>(a1)];
            f.v0 = g[static_cast<size_t>(a2)];
            if (!face_membership(f)) continue;
            std::vector<Crossing> cr;
            try {
              cr = face_crossings(m, f, ad);
            } catch (const critical_level_error&) {
              continue;
            }
            if (cr.size() != 2) continue;
            Scalar t = Scalar(cr[0].num, m.prec) / m.H[cr[0].edge.axis];
            std::array<Scalar, 3> p;
            for (int i = 0; i < 3; ++i)
              p[static_cast<size_t>(i)] = Scalar(Dyadic(cr[0].edge.anchor[static_cast<size_t>(i)]), m.prec);
            p[static_cast<size_t>(cr[0].edge.axis)] += t;
            return SectionStart{f, p};
          }
  throw structural_error("find_section_start: no cut face near the base point");
}

DirectionFit fit_direction(const std::vector<std::array<double, 3>>& polyline) {
  if (polyline.size() < 10) throw std::domain_error("fit_direction: need at least 10 points");
  DirectionFit fit;
  std::array<double, 3> d{};
  for (int c = 0; c < 3; ++c)
    d[static_cast<size_t>(c)] = polyline.back()[static_cast<size_t>(c)] - polyline.front()[static_cast<size_t>(c)];
  double norm = std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
  if (norm == 0) throw std::domain_error("fit_direction: zero displacement");
  for (int c = 0; c < 3; ++c) fit.direction[static_cast<size_t>(c)] = d[static_cast<size_t>(c)] / norm;

  double perp_max = 0, perp_var = 0, total_var = 0;
  for (const auto& p : polyline) {
    double t = 0;
    for (int c = 0; c < 3; ++c)
      t += (p[static_cast<size_t>(c)] - polyline.front()[static_cast<size_t>(c)]) * fit.direction[static_cast<size_t>(c)];
    double d2 = 0, tot = 0;
    for (int c = 0; c < 3; ++c) {
      double rel = p[static_cast<size_t>(c)] - polyline.front()[static_cast<size_t>(c)];
      double diff = rel - t * fit.direction[static_cast<size_t>(c)];
      d2 += diff * diff;
      tot += rel * rel;
    }
    perp_max = std::max(perp_max, std::sqrt(d2));
    perp_var += d2;
    total_var += tot;
  }
  fit.residual = perp_max;
  fit.score = total_var > 0 ? 1.0 - perp_var / total_var : 0.0;
  return fit;
}

ClusterReport cluster_directions(const std::vector<std::array<double, 3>>& dirs,
                                 double threshold_deg) {
  ClusterReport rep;
  rep.directions = dirs;
  struct Cluster {
    std::array<double, 3> mean{};
    std::vector<size_t> members;
  };
  std::vector<Cluster> clusters;
  auto angle_deg = [](const std::array<double, 3>& a, const std::array<double, 3>& b) {
    double dot = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    dot = std::clamp(dot, -1.0, 1.0);
    return std::acos(dot) * 180.0 / M_PI;
  };
  for (size_t i = 0; i < dirs.size(); ++i) {
    bool placed = false;
    for (auto& c : clusters)
      if (angle_deg(c.mean, dirs[i]) < threshold_deg) {
        c.members.push_back(i);
        std::array<double, 3> s{};
        for (size_t j : c.members)
          for (int t = 0; t < 3; ++t) s[static_cast<size_t>(t)] += dirs[j][static_cast<size_t>(t)];
        double n = std::sqrt(s[0] * s[0] + s[1] * s[1] + s[2] * s[2]);
        if (n > 0)
          for (int t = 0; t < 3; ++t) c.mean[static_cast<size_t>(t)] = s[static_cast<size_t>(t)] / n;
        placed = true;
        break;
      }
    if (!placed) clusters.push_back(Cluster{dirs[i], {i}});
  }
  rep.clusters = static_cast<int>(clusters.size());
  double spread = 0;
  for (const auto& c : clusters)
    for (size_t j : c.members) spread = std::max(spread, angle_deg(c.mean, dirs[j]));
  rep.max_spread_deg = spread;
  if (clusters.size() == 2) {
    std::array<double, 3> neg{};
    for (int t = 0; t < 3; ++t) neg[static_cast<size_t>(t)] = -clusters[1].mean[static_cast<size_t>(t)];
    rep.antipodal = angle_deg(clusters[0].mean, neg) < threshold_deg;
  }
  return rep;
}

SampleReport sample_components(const KSequence& ks, int depth, int a_count, int radius,
                               std::uint64_t seed, int per_level, int prec) {
  SampleReport rep;
  if (a_count == 0) return rep;
  WidthSolution ws = solve_widths(ks, std::max(depth, 8), Scalar::from_decimal("1e9", prec), prec);
  SurfaceModel m = make_surface(ws.stages[0]);

  std::mt19937_64 rng(seed);
  auto uniform_dyadic = [&] {
    return Dyadic(BigInt(rng() >> 11), -53);  // 53 fresh bits in [0,1)
  };

  std::vector<std::array<double, 3>> dirs;
  int levels_done = 0, attempts = 0;
  while (levels_done < a_count && attempts < 8 * a_count) {
    ++attempts;
    Dyadic u = uniform_dyadic();
    if (u.is_zero()) continue;
    Scalar a = Scalar(u, prec) * m.sigma;
    try {
      std::set<LatticePoint> claimed;
      int found = 0;
      std::uniform_int_distribution<std::int64_t> box(-6, 6);
      // the origin vertex is active for every generic level in (0, sigma)
      for (int probe = 0; probe < 240 && found < per_level; ++probe) {
        LatticePoint n = probe == 0 ? LatticePoint{0, 0, 0}
                                    : LatticePoint{box(rng), box(rng), box(rng)};
        if (claimed.count(n)) continue;
        if (!vertex_active(m, n, a)) continue;
        ComponentSummary cs = explore_component(m, n, a, radius, &claimed);
        rep.components.push_back(cs);
        if (cs.end_estimate == 2 && cs.size >= 10) dirs.push_back(cs.direction);
        ++found;
      }
      ++levels_done;
    } catch (const critical_level_error&) {
      continue;  // rejected level, redraw
    }
  }
  rep.levels_used = levels_done;
  // fold signs: a component direction is defined up to sign
  if (!dirs.empty()) {
    for (auto& d : dirs) {
      double dot = d[0] * dirs[0][0] + d[1] * dirs[0][1] + d[2] * dirs[0][2];
      if (dot < 0)
        for (int t = 0; t < 3; ++t) d[static_cast<size_t>(t)] = -d[static_cast<size_t>(t)];
    }
  }
  rep.clusters = cluster_directions(dirs, 5.0);
  return rep;
}

std::string gamma_patch_svg(const SurfaceModel& m, const Scalar& a, const LatticePoint& seed,
                            int radius) {
  // collect the patch by BFS
  std::map<LatticePoint, std::array<double, 2>> pos2d;
  std::set<std::pair<LatticePoint, LatticePoint>> edges;

  double h[3] = {m.H[0].to_double(), m.H[1].to_double(), m.H[2].to_double()};
  double ones[3] = {1, 1, 1};
  double u[3] = {h[1] * ones[2] - h[2] * ones[1], h[2] * ones[0] - h[0] * ones[2],
                 h[0] * ones[1] - h[1] * ones[0]};
  double un = std::sqrt(u[0] * u[0] + u[1] * u[1] + u[2] * u[2]);
  if (un < 1e-12) {
    u[0] = h[1];
    u[1] = -h[0];
    u[2] = 0;
    un = std::sqrt(u[0] * u[0] + u[1] * u[1] + u[2] * u[2]);
  }
  for (double& c : u) c /= un;
  double v[3] = {h[1] * u[2] - h[2] * u[1], h[2] * u[0] - h[0] * u[2], h[0] * u[1] - h[1] * u[0]};
  double vn = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
  for (double& c : v) c /= vn;

  std::deque<std::pair<LatticePoint, int>> queue;
  std::set<LatticePoint> visited;
  queue.push_back({seed, 0});
  visited.insert(seed);
  while (!queue.empty()) {
    auto [n, d] = queue.front();
    queue.pop_front();
    auto e = embedded_vertex(m, n, a);
    pos2d[n] = {e[0] * u[0] + e[1] * u[1] + e[2] * u[2], e[0] * v[0] + e[1] * v[1] + e[2] * v[2]};
    if (d == radius) continue;
    for (int i = 0; i < 3; ++i) {
      LatticePoint f = n;
      f[static_cast<size_t>(i)] += 1;
      if (edge_active(m, n, i, a)) {
        edges.insert({n, f});
        if (!visited.count(f)) {
          visited.insert(f);
          queue.push_back({f, d + 1});
        }
      }
      LatticePoint b = n;
      b[static_cast<size_t>(i)] -= 1;
      if (edge_active(m, b, i, a)) {
        edges.insert({b, n});
        if (!visited.count(b)) {
          visited.insert(b);
          queue.push_back({b, d + 1});
        }
      }
    }
  }

  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& [n, p] : pos2d) {
    xmin = std::min(xmin, p[0]);
    xmax = std::max(xmax, p[0]);
    ymin = std::min(ymin, p[1]);
    ymax = std::max(ymax, p[1]);
  }
  double pad = 1.0, scale = 40.0;
  auto tx = [&](double x) { return (x - xmin + pad) * scale; };
  auto ty = [&](double y) { return (y - ymin + pad) * scale; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << tx(xmax + pad) << "\" height=\""
      << ty(ymax + pad) << "\">\n";
  for (const auto& [p, q] : edges) {
    if (!pos2d.count(p) || !pos2d.count(q)) continue;
    svg << "  <line x1=\"" << tx(pos2d[p][0]) << "\" y1=\"" << ty(pos2d[p][1]) << "\" x2=\""
        << tx(pos2d[q][0]) << "\" y2=\"" << ty(pos2d[q][1])
        << "\" stroke=\"#336\" stroke-width=\"1\"/>\n";
  }
  for (const auto& [n, p] : pos2d)
    svg << "  <circle cx=\"" << tx(p[0]) << "\" cy=\"" << ty(p[1])
        << "\" r=\"2\" fill=\"#c33\"/>\n";
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace thinband
