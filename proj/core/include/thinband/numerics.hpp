#pragma once

#include "thinband/scalar.hpp"

#include <optional>
#include <vector>

namespace thinband {

/// Hilbert projective distance between two strictly positive vectors:
/// log( max_i(u_i/v_i) / min_i(u_i/v_i) ). Zero iff u, v span the same ray.
/// Throws std::domain_error when a coordinate is not certainly positive.
Scalar hilbert_distance(const std::vector<Scalar>& u, const std::vector<Scalar>& v);

struct IntegerRelation {
  std::vector<long> coeffs;  // not all zero, lexicographically smallest
};

/// Bounded exhaustive search for integer coefficients c, |c_i| <= max_coeff,
/// not all zero, with |sum c_i values_i| certainly below tol. The first hit in
/// lexicographic order of (c_1,...,c_n) is returned; nullopt when the search
/// space is exhausted. Deterministic.
std::optional<IntegerRelation> integer_relation(const std::vector<Scalar>& values, long max_coeff,
                                                const Scalar& tol);

/// Dimension estimate of the Q-span of `values` using integer_relation as the
/// dependency test: greedily extends an independent subset. Also returns the
/// relations that witnessed each rejection.
struct RankEstimate {
  int rank = 0;
  std::vector<std::vector<long>> relations;  // one per dependent generator
};
RankEstimate rank_of_span(const std::vector<Scalar>& values, long max_coeff, const Scalar& tol);

}  // namespace thinband
