#pragma once

#include "thinband/cone.hpp"
#include "thinband/errors.hpp"
#include "thinband/linalg.hpp"
#include "thinband/scalar.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

namespace thinband {

/// Thrown when an orbit point cannot be placed strictly inside one label.
class discontinuity_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The 9x9 matrix of the renormalization step of the 9-interval exchange.
Mat9i mat_R(std::int64_t k);

/// Unique split R(k) = k R' + R''; R'' may have negative entries.
struct RSplit {
  Mat9i Rp, Rpp;
};
RSplit split_R();

inline Vec9i u_infinity() { return Vec9i{1, 0, 0, 0, 0, 1, 0, 0, 0}; }
inline Vec9i v_infinity() { return Vec9i{0, 0, 0, 0, 0, 0, 0, 0, 1}; }

/// Integer basis of the invariant subspace V: y1+y4-y6 = y5-y8 = y7-y2.
std::vector<Vec9i> basis_of_V();

struct VCheck {
  bool ok = false;
  Scalar e1, e2, e3;  // the three defining expressions
};
VCheck check_V(const Vec9s& y);

/// Parameter vector of the exchange from the stage widths (requires
/// w1 > w2 + w3 and w2 > w3):
/// x = (w1-w2-w3, w3, w2-w3, w3, w2, w1-w2, w3, w2, w1-w2-w3).
Vec9s x_from_w(const Vec3s& w);

/// The fixed block permutation: three transversals, top blocks
/// [1 2 3 4][5 6][7 8 9], bottom blocks [3 7 6][4 8 1][9 2 5].
struct BlockPermutation {
  std::array<std::vector<int>, 3> top, bottom;  // labels 1..9
};
BlockPermutation canonical_permutation();

/// One stage of the interval exchange: three transversals of length w1 each,
/// labels arranged by the canonical permutation with sub-lengths x.
struct IETStage {
  int index = 0;
  Vec3s w;
  Vec9s x;
  Scalar transversal_length() const { return w[0]; }
};
IETStage stage_from_w(const Vec3s& w, int index = 0);

struct IETPoint {
  int transversal = 0;  // 0,1,2
  Scalar offset;        // in [0, w1)
};

/// First-return map: locate the label containing the point in the top
/// arrangement and translate to that label's slot in the bottom arrangement.
/// Exact boundary hits use the half-open convention; enclosures straddling a
/// boundary raise discontinuity_error.
IETPoint iet_map(const IETStage& stage, const IETPoint& p);
IETPoint iet_map_inverse(const IETStage& stage, const IETPoint& p);

/// iet_map together with the label that carried the point.
struct LabeledPoint {
  IETPoint target;
  int label = 0;
};
LabeledPoint iet_map_labeled(const IETStage& stage, const IETPoint& p);

/// Checks x_cur = R(k) x_next within enclosures.
bool renormalize_check(const Vec9s& x_cur, std::int64_t k, const Vec9s& x_next);

struct ErgodicCone {
  Vec9s u, v;             // forward-product images of u_inf, v_inf (unnormalized)
  Scalar alpha, beta;     // least-squares coefficients of x0 against (u, v)
  Scalar separation_sin;  // sin of the angle between u and v
  Scalar fit_residual;    // sup-norm residual of x0 - alpha u - beta v
  Scalar u_relation_gap;  // u3 + u6 - u8 - u9 (the asymptotic-cycle obstruction)
  bool u_in_V = false, v_in_V = false;
};

/// Approximates the extremal rays of the invariant-measure cone by the
/// product (R(k_0)/k_0) ... (R(k_{depth-1})/k_{depth-1}) applied to u_inf and
/// v_inf. Requires a summable k-sequence and even depth >= 12.
ErgodicCone ergodic_cone(const KSequence& ks, int depth, int prec = Scalar::kDefaultPrec);

/// (integral over xi_2, xi_3, xi_4, xi_5) of the transverse measure with
/// parameter vector y.
Vec4s transversal_integrals(const Vec9s& y);

struct EquidistributionReport {
  bool dense = false;           // every subinterval of length eps contains a visit
  bool periodic = false;        // exact return to the start within N steps
  long period = 0;
  long steps = 0;
  long restarts = 0;            // discontinuity hits that forced a perturbed restart
  double visited_fraction = 0;  // fraction of eps-sized buckets visited
  double max_gap = 0;           // largest gap between consecutive visits, in w1 units
  std::array<long, 9> label_visits{};
};

/// Iterates the exchange N times from `start` and reports bucket coverage at
/// resolution eps together with per-label visit counts.
EquidistributionReport equidistribution_test(const IETStage& stage, long n, const Scalar& eps,
                                             const IETPoint& start);

/// Executes the block-synchronized Rauzy-Veech induction schedule that
/// renormalizes the exchange, tracking parameters symbolically, and returns
/// the matrix M with x = M y for the composite run. The defining property is
/// M * R(k) = identity. Throws std::logic_error if a winner/loser comparison
/// fails on the sample parameter vector used to drive the run.
Mat9i rauzy_composite(std::int64_t k);

}  // namespace thinband
