#pragma once

#include "thinband/cone.hpp"
#include "thinband/errors.hpp"
#include "thinband/linalg.hpp"
#include "thinband/scalar.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace thinband {

using LatticePoint = std::array<std::int64_t, 3>;

/// The {4,6|4} surface together with a width vector and the derived plane
/// direction H, 2H = (w2+w3, w1+w3, w1+w2). Lattice of periods is 2Z^3.
struct SurfaceModel {
  Vec3s w;       // exact positive dyadics
  Scalar sigma;  // w1 + w2 + w3
  Vec3s H;       // exact dyadics (halves of dyadic sums)
  int prec = Scalar::kDefaultPrec;
};
SurfaceModel make_surface(const Vec3s& w);

/// A unit square of the surface: coordinate `axis` is fixed at `fixed`; the
/// two interval coordinates (in increasing axis order) start at u0 and v0.
struct FaceID {
  int axis = 0;
  std::int64_t fixed = 0, u0 = 0, v0 = 0;
  auto operator<=>(const FaceID&) const = default;
};

/// Membership in the surface: the interval starts must have odd sum.
bool face_membership(const FaceID& f);

/// Axes other than `axis`, in increasing order.
std::array<int, 2> other_axes(int axis);

struct GenusReport {
  int vertices = 0, edges = 0, faces = 0, genus = 0;
  bool every_edge_two_faces = false;
  bool every_vertex_six_faces = false;
};
/// Enumerates the quotient complex mod 2Z^3.
GenusReport genus_check();

/// Vertex n of the section graph is the diagonal from 2n to 2n+(1,1,1);
/// active iff a - <H,2n> lies in (0, sigma). Edge (n, i) joins n and n+e_i;
/// active iff a - <H,2n> lies in (sigma - w_i, sigma). Level values that hit
/// a boundary raise critical_level_error.
bool vertex_active(const SurfaceModel& m, const LatticePoint& n, const Scalar& a);
bool edge_active(const SurfaceModel& m, const LatticePoint& n, int i, const Scalar& a);

/// Exact geometric test used as the oracle for edge_active: does the plane
/// of level a cut the open strip parallelogram S_i(n)? Computed from the four
/// listed vertices without the 2H_i = sigma - w_i shortcut.
bool strip_hit_oracle(const SurfaceModel& m, const LatticePoint& n, int i, const Scalar& a);
/// Same for vertex_active: does the plane cut the open diagonal D(2n)?
bool diagonal_hit_oracle(const SurfaceModel& m, const LatticePoint& n, const Scalar& a);

/// Embedded position of an active vertex: 2n + t(1,1,1), t = (a-<H,2n>)/sigma.
std::array<double, 3> embedded_vertex(const SurfaceModel& m, const LatticePoint& n, const Scalar& a);

struct ComponentSummary {
  LatticePoint seed{};
  long size = 0;
  int radius = 0;
  bool exhausted = false;  // component fully explored before the radius
  bool is_tree = true;
  int end_estimate = 0;
  std::array<double, 3> direction{};  // principal direction of the embedding
  double residual = 0;                // max deviation from the fitted line
  double ratio_lo = 0, ratio_hi = 0;  // Euclidean/graph distance ratios seen
  Scalar direction_dot_H;             // certificate: <H, displacement> enclosure
};

/// BFS over active edges out to graph distance `radius`. End estimate counts
/// connected components of the outer half-shell that reach the boundary.
/// `visited_out`, when given, receives the explored vertex set.
ComponentSummary explore_component(const SurfaceModel& m, const LatticePoint& n0, const Scalar& a,
                                   int radius, std::set<LatticePoint>* visited_out = nullptr);

struct TraceResult {
  std::vector<std::array<double, 3>> points;
  bool closed = false;
  long steps_taken = 0;
  Scalar confinement_gap;            // max width of <H,x> - a over emitted points
  std::set<FaceID> faces_visited;    // for disjointness checks
  std::array<double, 3> start{}, end{};
};

/// Follows the plane section across faces of the surface starting from the
/// point p0 on face f0 (p0 must satisfy <H,p0> = a up to enclosure; it may
/// lie on an edge or inside the face). `forward` selects which of the two
/// rays through p0 is traced. Crossing a lattice vertex raises
/// critical_level_error (monkey saddle).
TraceResult trace_section_curve(const SurfaceModel& m, const FaceID& f0,
                                const std::array<Scalar, 3>& p0, long steps, bool forward = true);
/// Same, starting from the exact plane level instead of a point.
TraceResult trace_section_level(const SurfaceModel& m, const FaceID& f0, const Scalar& level,
                                long steps, bool forward = true);

/// Locates a face and an on-plane point for the level a near lattice point
/// base; returns the face and the starting point.
struct SectionStart {
  FaceID face;
  std::array<Scalar, 3> point;
};
SectionStart find_section_start(const SurfaceModel& m, const Scalar& a, const LatticePoint& base);

struct DirectionFit {
  std::array<double, 3> direction{};
  double residual = 0;  // max perpendicular deviation
  double score = 0;     // 1 - perp variance / total variance
};
/// Endpoint-displacement direction of a polyline (>= 10 points).
DirectionFit fit_direction(const std::vector<std::array<double, 3>>& polyline);

struct ClusterReport {
  int clusters = 0;
  bool antipodal = false;     // the two cluster means are opposite
  double max_spread_deg = 0;  // intra-cluster angular spread
  std::vector<std::array<double, 3>> directions;
};
/// Greedy angular clustering at `threshold_deg`.
ClusterReport cluster_directions(const std::vector<std::array<double, 3>>& dirs,
                                 double threshold_deg);

struct SampleReport {
  std::vector<ComponentSummary> components;
  ClusterReport clusters;
  int levels_used = 0;
};
/// Samples `a_count` generic levels, explores components per level via BFS
/// and clusters the fitted directions. Seeded and deterministic.
SampleReport sample_components(const KSequence& ks, int depth, int a_count, int radius,
                               std::uint64_t seed, int per_level = 3,
                               int prec = Scalar::kDefaultPrec);

/// 2-D orthographic projection of a Gamma_a patch around the seed, as a
/// static SVG image.
std::string gamma_patch_svg(const SurfaceModel& m, const Scalar& a, const LatticePoint& seed,
                            int radius);

}  // namespace thinband
