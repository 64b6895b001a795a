#include "thinband/numerics.hpp"

#include <stdexcept>

namespace thinband {

Scalar hilbert_distance(const std::vector<Scalar>& u, const std::vector<Scalar>& v) {
  if (u.size() != v.size() || u.empty())
    throw std::invalid_argument("hilbert_distance: size mismatch");
  for (const auto& x : u)
    if (!x.certainly_positive()) throw std::domain_error("hilbert_distance: non-positive coordinate");
  for (const auto& x : v)
    if (!x.certainly_positive()) throw std::domain_error("hilbert_distance: non-positive coordinate");
  Scalar max_r = u[0] / v[0];
  Scalar min_r = max_r;
  for (size_t i = 1; i < u.size(); ++i) {
    Scalar r = u[i] / v[i];
    // Interval max/min by endpoints: sound enclosure of the true extremes.
    max_r = Scalar(std::max(max_r.lo(), r.lo()), std::max(max_r.hi(), r.hi()), r.precision());
    min_r = Scalar(std::min(min_r.lo(), r.lo()), std::min(min_r.hi(), r.hi()), r.precision());
  }
  return (max_r / min_r).log();
}

std::optional<IntegerRelation> integer_relation(const std::vector<Scalar>& values, long max_coeff,
                                                const Scalar& tol) {
  if (values.empty()) throw std::invalid_argument("integer_relation: empty input");
  if (max_coeff < 1) throw std::invalid_argument("integer_relation: max_coeff must be >= 1");
  const int n = static_cast<int>(values.size());
  // Enumerate by growing coefficient bound, lexicographically inside each
  // shell, so the first hit has the smallest coefficients.
  std::vector<long> c(static_cast<size_t>(n));
  for (long shell = 1; shell <= max_coeff; ++shell) {
    std::fill(c.begin(), c.end(), -shell);
    while (true) {
      bool on_shell = false;
      for (long x : c) on_shell = on_shell || (x == shell || x == -shell);
      if (on_shell) {
        Scalar s(0, tol.precision());
        for (int i = 0; i < n; ++i)
          s += Scalar(c[static_cast<size_t>(i)]) * values[static_cast<size_t>(i)];
        if (s.abs().certainly_lt(tol)) return IntegerRelation{c};
      }
      int i = n - 1;
      while (i >= 0 && c[static_cast<size_t>(i)] == shell) {
        c[static_cast<size_t>(i)] = -shell;
        --i;
      }
      if (i < 0) break;
      ++c[static_cast<size_t>(i)];
    }
  }
  return std::nullopt;
}

RankEstimate rank_of_span(const std::vector<Scalar>& values, long max_coeff, const Scalar& tol) {
  RankEstimate out;
  std::vector<Scalar> independent;
  for (const auto& v : values) {
    std::vector<Scalar> probe = independent;
    probe.push_back(v);
    auto rel = integer_relation(probe, max_coeff, tol);
    if (rel && rel->coeffs.back() != 0) {
      out.relations.push_back(rel->coeffs);
    } else {
      // No relation involving v: treat as a new independent generator. A
      // relation among the previous generators alone cannot appear here
      // because they were accepted one by one.
      independent.push_back(v);
    }
  }
  out.rank = static_cast<int>(independent.size());
  return out;
}

}  // namespace thinband
