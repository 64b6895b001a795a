#pragma once

#include "thinband/linalg.hpp"
#include "thinband/scalar.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace thinband {

/// Bad run configuration (e.g. a certificate requested under a hypothesis the
/// k-sequence does not satisfy).
class config_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Sequence k_0, k_1, ... of naturals driving the renormalization: an
/// explicit list or one of three rules.
class KSequence {
 public:
  enum class Kind { List, Constant, Geometric, Doubling };

  static KSequence list(std::vector<std::int64_t> terms);
  static KSequence constant(std::int64_t c);
  static KSequence geometric(std::int64_t c, std::int64_t r);  // k_i = c * r^i, r >= 2
  static KSequence doubling(std::int64_t k0);                  // k_{i+1} = 2 k_i

  /// Parse {"list":[...]} | {"constant":c,"n":N} | {"geometric":{"c":c,"r":r}}
  /// | {"doubling":{"k0":c}} from a JSON text.
  static KSequence from_json(const std::string& json_text);
  std::string to_json() const;

  std::int64_t at(int i) const;
  /// True when sum 1/k_i provably converges (geometric with r>=2, doubling).
  bool summable() const { return summable_; }
  /// True when k_{i+1} >= 2 k_i holds for all pairs up to `depth`.
  bool doubling_hypothesis(int depth) const;
  Kind kind() const { return kind_; }

 private:
  KSequence() = default;
  Kind kind_ = Kind::Constant;
  std::vector<std::int64_t> terms_;
  std::int64_t c_ = 1, r_ = 2;
  bool summable_ = false;
};

/// The 4x4 and 3x3 integer matrix families driving lengths and widths.
Mat4i mat_A(std::int64_t k);
Mat3i mat_B(std::int64_t k);
Mat3i mat_Bprime(std::int64_t k, std::int64_t l, std::int64_t m);
Mat3i mat_Bpp();

/// Certified solution of the infinite width recursion w_i = B(k_i) w_{i+1}:
/// stage vectors together with per-stage Hilbert diameters of the nested
/// cones that certify them.
struct WidthSolution {
  std::vector<Vec3s> stages;       // w_0 .. w_depth, a consistent exact chain
  std::vector<Scalar> diameters;   // certified Hilbert diameter at each stage
  Vec3s normalized_w0;             // w_0 scaled so that the third entry is 1
  int depth = 0;
  int precision = Scalar::kDefaultPrec;

  /// Enclosure of the (unique) normalized limit ray at stage 0; the true
  /// w_0 / w_{0,3} lies in this box.
  Vec3s certified_w0_box;
};

/// Computes the nested cone images B(k_0)...B(k_{depth-1})(K) from the three
/// extreme rays of K, certifies the stage-0 Hilbert diameter <= tol, and
/// returns the barycentric representative chain. Stage inequalities
/// w1 > w2 + w3 and w2 > w3 are verified at every stage where the enclosure
/// decides them; an undecidable stage raises accuracy_error.
WidthSolution solve_widths(const KSequence& ks, int depth, const Scalar& tol,
                           int prec = Scalar::kDefaultPrec);

/// l_n = l_0 * A(k_0) * ... * A(k_{n-1}) as a row vector (exact integers when
/// l_0 is integral).
Vec4s lengths_recursion(const Vec4s& l0, const KSequence& ks, int n);

struct AreaSequence {
  std::vector<Scalar> areas;            // S_0 .. S_depth
  std::vector<bool> certificates;       // S_{i+1} > (1 - 2/k_i) S_i, per step
  bool all_certified = false;
};

/// S_i = l_i * C * w_i with C = rows (1,0,0),(0,1,0),(0,0,1),(1,0,0).
/// When `certify` is set the hypothesis k_{i+1} >= 2 k_i is required and each
/// per-step inequality is checked with interval separation.
AreaSequence area_sequence(const KSequence& ks, int depth, const Vec4s& l0, bool certify,
                           int prec = Scalar::kDefaultPrec);

/// 2H = (w2+w3, w1+w3, w1+w2); the plane direction paired with the widths.
Vec3s H_from_w(const Vec3s& w);

}  // namespace thinband
