#pragma once

#include "thinband/cone.hpp"
#include "thinband/errors.hpp"
#include "thinband/linalg.hpp"
#include "thinband/numerics.hpp"
#include "thinband/scalar.hpp"

#include <optional>
#include <string>
#include <vector>

namespace thinband {

/// Ordered list of pairwise disjoint closed intervals of R (degenerate
/// intervals allowed). All endpoints must be exact dyadics; the band engine
/// is exact combinatorics, not interval arithmetic.
struct MultiInterval {
  struct Interval {
    Dyadic lo, hi;  // lo <= hi
    Dyadic length() const { return hi - lo; }
    bool degenerate() const { return lo == hi; }
  };
  std::vector<Interval> intervals;

  void validate() const;  // sorted + disjoint
};

/// One base of a band glued to [left, left + width] on a support component.
/// The gluing isometry is the translation x -> left + x in band-local width
/// coordinates (orientation preserving by construction).
struct Attachment {
  int component = 0;
  Dyadic left;
};

struct Band {
  Dyadic width;                  // >= 0, degenerate bands allowed
  std::optional<Dyadic> length;  // enhanced complexes only, > 0
  Attachment base0, base1;
};

struct BandComplex {
  MultiInterval support;
  std::vector<Band> bands;

  bool enhanced() const;
  void validate() const;  // attachments inside support, widths match
};

/// Maximal open subinterval of the support covered by exactly one base.
struct FreeArc {
  int component = 0;
  Dyadic lo, hi;
  int band = 0;
  int base = 0;  // 0 or 1: which base of `band` covers the arc
};

std::vector<FreeArc> free_arcs(const BandComplex& x);

/// Collapse from a free arc: removes the arc from the support and the
/// corresponding open rectangle from the covering band, splitting it in two
/// (possibly degenerate) bands that inherit the parent's length. Applies the
/// isolated-point removal rule. Throws std::invalid_argument when `arc` is
/// not a free arc of `x`.
BandComplex collapse(const BandComplex& x, const FreeArc& arc);

/// Merge chains of bands glued end to end through a support component that
/// carries exactly the two merging bases and nothing else. The result is
/// isomorphic to the input and has the minimal number of bands our pipeline
/// needs. Lengths of merged bands add.
BandComplex normalize(const BandComplex& x);

/// dx-preserving isomorphism test: support components match up to independent
/// translations, bands match with identical widths, attachment offsets and
/// (when present on both sides) lengths. Bases of a band are unordered.
bool is_isomorphic(const BandComplex& x, const BandComplex& y);

/// Symmetry under the flip of the (single-interval) support.
bool is_symmetric(const BandComplex& x);

/// The 3-band symmetric complex on [0, w1+w2+w3] with band i glued to
/// [0, w_i] and [sigma - w_i, sigma].
BandComplex make_Z3(const Vec3s& w);

/// The 4-band enhanced complex whose collapse dynamics realize the
/// width/length recursion: support [0, sigma] plus a second component of
/// length w1, bands of widths (w1, w2, w3, w1) and lengths l. Collapsing the
/// fourth band lengthwise and forgetting lengths recovers make_Z3(w).
/// Requires positive w, l and w1 >= w2.
BandComplex make_Z4(const Vec3s& w, const Vec4s& l);

/// Collapse band `band_index` in the length direction (the quotient that
/// identifies its two base targets). Implemented for the case where one
/// target is an entire support component; that is the shape make_Z4 uses.
BandComplex collapse_band_lengthwise(const BandComplex& z, int band_index);

BandComplex forget_lengths(const BandComplex& z);

/// One renormalization round of the machine: given Z = make_Z4(B(k) w', l),
/// performs the collapse sequence and returns the normalized result, which is
/// isomorphic to make_Z4(w', l * A(k)). Throws structural_error when the
/// widths are not in B(k)(R+^3) or no collapse sequence reaches that shape.
BandComplex rips_step(const BandComplex& z, std::int64_t k);

/// Total area (sum of width * length); requires all lengths present.
Scalar complex_area(const BandComplex& z);

/// Q-span dimension estimate of the period generators (band widths and
/// support component lengths), via bounded integer-relation search.
RankEstimate rank_estimate(const BandComplex& x, long max_coeff, const Scalar& tol);

/// Canonical JSON document (exact decimal strings, precision tag).
std::string to_json(const BandComplex& x, int precision = Scalar::kDefaultPrec);
BandComplex band_complex_from_json(const std::string& text);

}  // namespace thinband
