#include "thinband/band.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

namespace thinband {

namespace {

using nlohmann::json;

Dyadic exactD(const Scalar& s, const char* what) {
  if (!s.is_exact()) throw structural_error(std::string(what) + ": endpoint is not an exact dyadic");
  return s.lo();
}

struct BaseRef {
  Dyadic lo, hi;
  int band;
  int base;
};

std::vector<std::vector<BaseRef>> bases_by_component(const BandComplex& x) {
  std::vector<std::vector<BaseRef>> per(x.support.intervals.size());
  for (int b = 0; b < static_cast<int>(x.bands.size()); ++b) {
    const Band& band = x.bands[static_cast<size_t>(b)];
    for (int s = 0; s < 2; ++s) {
      const Attachment& at = s == 0 ? band.base0 : band.base1;
      per[static_cast<size_t>(at.component)].push_back(
          BaseRef{at.left, at.left + band.width, b, s});
    }
  }
  return per;
}

}  // namespace

void MultiInterval::validate() const {
  for (size_t i = 0; i < intervals.size(); ++i) {
    if (intervals[i].hi < intervals[i].lo)
      throw structural_error("MultiInterval: interval with hi < lo");
    if (i > 0 && !(intervals[i - 1].hi < intervals[i].lo))
      throw structural_error("MultiInterval: intervals not sorted/disjoint");
  }
}

bool BandComplex::enhanced() const {
  for (const auto& b : bands)
    if (!b.length) return false;
  return true;
}

void BandComplex::validate() const {
  support.validate();
  for (const auto& b : bands) {
    if (b.width.sign() < 0) throw structural_error("BandComplex: negative width");
    if (b.length && b.length->sign() <= 0)
      throw structural_error("BandComplex: non-positive length");
    for (const Attachment* at : {&b.base0, &b.base1}) {
      if (at->component < 0 || at->component >= static_cast<int>(support.intervals.size()))
        throw structural_error("BandComplex: attachment to missing component");
      const auto& iv = support.intervals[static_cast<size_t>(at->component)];
      if (at->left < iv.lo || iv.hi < at->left + b.width)
        throw structural_error("BandComplex: attachment target outside the support");
    }
  }
}

std::vector<FreeArc> free_arcs(const BandComplex& x) {
  std::vector<FreeArc> arcs;
  auto per = bases_by_component(x);
  for (int ci = 0; ci < static_cast<int>(x.support.intervals.size()); ++ci) {
    const auto& iv = x.support.intervals[static_cast<size_t>(ci)];
    if (iv.degenerate()) continue;
    const auto& bases = per[static_cast<size_t>(ci)];

    std::vector<Dyadic> cuts{iv.lo, iv.hi};
    for (const auto& b : bases) {
      cuts.push_back(b.lo);
      cuts.push_back(b.hi);
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    // contiguous run of single-covered pieces belonging to one base
    bool in_run = false;
    FreeArc run;
    auto flush = [&] {
      if (in_run) arcs.push_back(run);
      in_run = false;
    };
    for (size_t p = 0; p + 1 < cuts.size(); ++p) {
      const Dyadic& lo = cuts[p];
      const Dyadic& hi = cuts[p + 1];
      int cover = -1, covers = 0, cover_base = 0;
      for (size_t b = 0; b < bases.size(); ++b)
        if (bases[b].lo <= lo && hi <= bases[b].hi) {
          ++covers;
          cover = bases[b].band;
          cover_base = bases[b].base;
        }
      if (covers != 1) {
        flush();
        continue;
      }
      if (in_run && run.band == cover && run.base == cover_base) {
        // extend across the junction unless another base touches it
        bool blocked = false;
        for (const auto& b : bases)
          if (!(b.band == cover && b.base == cover_base) && b.lo <= lo && lo <= b.hi) {
            blocked = true;
            break;
          }
        if (!blocked) {
          run.hi = hi;
          continue;
        }
        flush();
      } else if (in_run) {
        flush();
      }
      in_run = true;
      run = FreeArc{ci, lo, hi, cover, cover_base};
    }
    flush();
  }
  return arcs;
}

namespace {

// Rebuild component indices after editing the support; attachments are
// reassigned by containment of their target interval.
BandComplex reindex(const MultiInterval& support, std::vector<Band> bands) {
  BandComplex out;
  out.support = support;
  std::sort(out.support.intervals.begin(), out.support.intervals.end(),
            [](const MultiInterval::Interval& a, const MultiInterval::Interval& b) {
              return a.lo < b.lo;
            });
  for (auto& band : bands) {
    for (Attachment* at : {&band.base0, &band.base1}) {
      int found = -1;
      for (int ci = 0; ci < static_cast<int>(out.support.intervals.size()); ++ci) {
        const auto& iv = out.support.intervals[static_cast<size_t>(ci)];
        if (iv.lo <= at->left && at->left + band.width <= iv.hi) {
          found = ci;
          break;
        }
      }
      if (found < 0) throw structural_error("collapse: attachment lost its target component");
      at->component = found;
    }
  }
  out.bands = std::move(bands);
  out.validate();
  return out;
}

// The isolated-point rule: a degenerate support component with exactly one
// attached band, that band degenerate, is removed together with the band.
BandComplex apply_isolated_point_rule(BandComplex x) {
  for (bool changed = true; changed;) {
    changed = false;
    for (int ci = 0; ci < static_cast<int>(x.support.intervals.size()) && !changed; ++ci) {
      if (!x.support.intervals[static_cast<size_t>(ci)].degenerate()) continue;
      int att_count = 0, att_band = -1;
      for (int b = 0; b < static_cast<int>(x.bands.size()); ++b)
        for (const Attachment* at : {&x.bands[static_cast<size_t>(b)].base0,
                                     &x.bands[static_cast<size_t>(b)].base1})
          if (at->component == ci) {
            ++att_count;
            att_band = b;
          }
      if (att_count == 1 && x.bands[static_cast<size_t>(att_band)].width.is_zero()) {
        MultiInterval support = x.support;
        support.intervals.erase(support.intervals.begin() + ci);
        std::vector<Band> bands = x.bands;
        bands.erase(bands.begin() + att_band);
        x = reindex(support, std::move(bands));
        changed = true;
      }
    }
  }
  return x;
}

}  // namespace

BandComplex collapse(const BandComplex& x, const FreeArc& arc) {
  // confirm the arc
  auto arcs = free_arcs(x);
  bool legit = false;
  for (const auto& a : arcs)
    legit = legit || (a.component == arc.component && a.lo == arc.lo && a.hi == arc.hi &&
                      a.band == arc.band && a.base == arc.base);
  if (!legit) throw std::invalid_argument("collapse: not a free arc of this complex");

  const Band& parent = x.bands[static_cast<size_t>(arc.band)];
  const Attachment& covering = arc.base == 0 ? parent.base0 : parent.base1;
  const Attachment& other = arc.base == 0 ? parent.base1 : parent.base0;

  Dyadic s = arc.lo - covering.left;  // strip in band-local width coordinates
  Dyadic e = arc.hi - covering.left;

  Band left_child, right_child;
  left_child.width = s;
  left_child.length = parent.length;
  right_child.width = parent.width - e;
  right_child.length = parent.length;

  Attachment lc_cov{covering.component, covering.left};
  Attachment lc_oth{other.component, other.left};
  Attachment rc_cov{covering.component, arc.hi};
  Attachment rc_oth{other.component, other.left + e};
  if (arc.base == 0) {
    left_child.base0 = lc_cov;
    left_child.base1 = lc_oth;
    right_child.base0 = rc_cov;
    right_child.base1 = rc_oth;
  } else {
    left_child.base1 = lc_cov;
    left_child.base0 = lc_oth;
    right_child.base1 = rc_cov;
    right_child.base0 = rc_oth;
  }

  // split the support component
  MultiInterval support = x.support;
  const auto comp = support.intervals[static_cast<size_t>(arc.component)];
  std::vector<MultiInterval::Interval> pieces;
  pieces.push_back({comp.lo, arc.lo});
  pieces.push_back({arc.hi, comp.hi});
  support.intervals.erase(support.intervals.begin() + arc.component);
  for (const auto& p : pieces) support.intervals.push_back(p);

  std::vector<Band> bands;
  for (int b = 0; b < static_cast<int>(x.bands.size()); ++b)
    if (b != arc.band) bands.push_back(x.bands[static_cast<size_t>(b)]);
  bands.push_back(left_child);
  bands.push_back(right_child);

  return apply_isolated_point_rule(reindex(support, std::move(bands)));
}

BandComplex normalize(const BandComplex& x) {
  BandComplex cur = x;
  for (bool changed = true; changed;) {
    changed = false;
    auto per = bases_by_component(cur);
    for (int ci = 0; ci < static_cast<int>(cur.support.intervals.size()) && !changed; ++ci) {
      const auto& iv = cur.support.intervals[static_cast<size_t>(ci)];
      const auto& atts = per[static_cast<size_t>(ci)];
      if (atts.size() != 2) continue;
      if (atts[0].band == atts[1].band) continue;  // would close an annulus
      bool full = atts[0].lo == iv.lo && atts[0].hi == iv.hi && atts[1].lo == iv.lo &&
                  atts[1].hi == iv.hi;
      if (!full) continue;

      const Band& p = cur.bands[static_cast<size_t>(atts[0].band)];
      const Band& q = cur.bands[static_cast<size_t>(atts[1].band)];
      Band merged;
      merged.width = p.width;
      if (p.length && q.length) merged.length = *p.length + *q.length;
      merged.base0 = atts[0].base == 0 ? p.base1 : p.base0;
      merged.base1 = atts[1].base == 0 ? q.base1 : q.base0;

      MultiInterval support = cur.support;
      support.intervals.erase(support.intervals.begin() + ci);
      std::vector<Band> bands;
      for (int b = 0; b < static_cast<int>(cur.bands.size()); ++b)
        if (b != atts[0].band && b != atts[1].band) bands.push_back(cur.bands[static_cast<size_t>(b)]);
      bands.push_back(merged);
      cur = reindex(support, std::move(bands));
      changed = true;
    }
  }
  return cur;
}

namespace {

std::string band_signature(const Band& b, const std::vector<int>& comp_map,
                           const std::vector<Dyadic>& comp_lo) {
  auto att_sig = [&](const Attachment& at) {
    Dyadic rel = at.left - comp_lo[static_cast<size_t>(at.component)];
    return std::to_string(comp_map[static_cast<size_t>(at.component)]) + "@" + rel.to_decimal();
  };
  std::string a = att_sig(b.base0), c = att_sig(b.base1);
  if (c < a) std::swap(a, c);
  std::string len = b.length ? b.length->to_decimal() : "-";
  return b.width.to_decimal() + "|" + len + "|" + a + "|" + c;
}

std::vector<std::string> sorted_signatures(const BandComplex& x, const std::vector<int>& comp_map) {
  std::vector<Dyadic> lo;
  for (const auto& iv : x.support.intervals) lo.push_back(iv.lo);
  std::vector<std::string> sigs;
  for (const auto& b : x.bands) sigs.push_back(band_signature(b, comp_map, lo));
  std::sort(sigs.begin(), sigs.end());
  return sigs;
}

}  // namespace

bool is_isomorphic(const BandComplex& x, const BandComplex& y) {
  const size_t nc = x.support.intervals.size();
  if (nc != y.support.intervals.size() || x.bands.size() != y.bands.size()) return false;

  std::vector<int> perm(nc);
  for (size_t i = 0; i < nc; ++i) perm[i] = static_cast<int>(i);
  std::vector<int> ident = perm;
  auto y_sigs = sorted_signatures(y, ident);
  do {
    bool lengths_ok = true;
    for (size_t i = 0; i < nc && lengths_ok; ++i)
      lengths_ok = x.support.intervals[i].length() ==
                   y.support.intervals[static_cast<size_t>(perm[i])].length();
    if (!lengths_ok) continue;
    if (sorted_signatures(x, perm) == y_sigs) return true;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return false;
}

bool is_symmetric(const BandComplex& x) {
  if (x.support.intervals.size() != 1)
    throw std::domain_error("is_symmetric: support must be a single interval");
  const auto& iv = x.support.intervals[0];
  Dyadic pivot = iv.lo + iv.hi;

  auto sig = [&](Dyadic a_left, Dyadic b_left, const Band& b) {
    std::string a = a_left.to_decimal(), c = b_left.to_decimal();
    if (c < a) std::swap(a, c);
    std::string len = b.length ? b.length->to_decimal() : "-";
    return b.width.to_decimal() + "|" + len + "|" + a + "|" + c;
  };
  std::vector<std::string> plain, flipped;
  for (const auto& b : x.bands) {
    plain.push_back(sig(b.base0.left, b.base1.left, b));
    // [l, l+w] flips to [pivot - l - w, pivot - l]
    flipped.push_back(sig(pivot - b.base0.left - b.width, pivot - b.base1.left - b.width, b));
  }
  std::sort(plain.begin(), plain.end());
  std::sort(flipped.begin(), flipped.end());
  return plain == flipped;
}

BandComplex make_Z3(const Vec3s& w) {
  Dyadic w1 = exactD(w[0], "make_Z3"), w2 = exactD(w[1], "make_Z3"), w3 = exactD(w[2], "make_Z3");
  if (w1.sign() <= 0 || w2.sign() <= 0 || w3.sign() <= 0)
    throw std::domain_error("make_Z3: widths must be positive");
  Dyadic sigma = w1 + w2 + w3;
  BandComplex z;
  z.support.intervals = {{Dyadic(0), sigma}};
  auto band = [&](const Dyadic& width) {
    Band b;
    b.width = width;
    b.base0 = {0, Dyadic(0)};
    b.base1 = {0, sigma - width};
    return b;
  };
  z.bands = {band(w1), band(w2), band(w3)};
  z.validate();
  return z;
}

BandComplex make_Z4(const Vec3s& w, const Vec4s& l) {
  Dyadic w1 = exactD(w[0], "make_Z4"), w2 = exactD(w[1], "make_Z4"), w3 = exactD(w[2], "make_Z4");
  Dyadic lv[4];
  for (int i = 0; i < 4; ++i) lv[i] = exactD(l[i], "make_Z4");
  if (w1.sign() <= 0 || w2.sign() <= 0 || w3.sign() <= 0)
    throw std::domain_error("make_Z4: widths must be positive");
  for (int i = 0; i < 4; ++i)
    if (lv[i].sign() <= 0) throw std::domain_error("make_Z4: lengths must be positive");
  if (w1 < w2) throw std::domain_error("make_Z4: layout requires w1 >= w2");

  Dyadic sigma = w1 + w2 + w3;
  Dyadic e_lo = sigma + Dyadic(1);  // second component, placed after a unit gap

  BandComplex z;
  z.support.intervals = {{Dyadic(0), sigma}, {e_lo, e_lo + w1}};

  Band b1{w1, lv[0], {0, Dyadic(0)}, {1, e_lo}};
  Band b2{w2, lv[1], {0, Dyadic(0)}, {1, e_lo + w1 - w2}};
  Band b3{w3, lv[2], {0, Dyadic(0)}, {0, w1 + w2}};
  Band b4{w1, lv[3], {0, w2 + w3}, {1, e_lo}};
  z.bands = {b1, b2, b3, b4};
  z.validate();
  return z;
}

BandComplex collapse_band_lengthwise(const BandComplex& z, int band_index) {
  if (band_index < 0 || band_index >= static_cast<int>(z.bands.size()))
    throw std::invalid_argument("collapse_band_lengthwise: bad band index");
  const Band& b = z.bands[static_cast<size_t>(band_index)];

  // Find the base whose target is an entire component not referenced as a
  // whole by the opposite base.
  for (int s = 0; s < 2; ++s) {
    const Attachment& full = s == 0 ? b.base0 : b.base1;
    const Attachment& kept = s == 0 ? b.base1 : b.base0;
    const auto& iv = z.support.intervals[static_cast<size_t>(full.component)];
    if (!(full.left == iv.lo && full.left + b.width == iv.hi)) continue;
    if (kept.component == full.component) continue;

    // identify component `full.component` with [kept.left, kept.left+width]
    MultiInterval support = z.support;
    support.intervals.erase(support.intervals.begin() + full.component);
    std::vector<Band> bands;
    for (int i = 0; i < static_cast<int>(z.bands.size()); ++i) {
      if (i == band_index) continue;
      Band nb = z.bands[static_cast<size_t>(i)];
      for (Attachment* at : {&nb.base0, &nb.base1})
        if (at->component == full.component) {
          at->left = kept.left + (at->left - iv.lo);
          at->component = kept.component;
        }
      bands.push_back(nb);
    }
    return reindex(support, std::move(bands));
  }
  throw std::invalid_argument(
      "collapse_band_lengthwise: no base of this band covers a whole separate component");
}

BandComplex forget_lengths(const BandComplex& z) {
  BandComplex out = z;
  for (auto& b : out.bands) b.length.reset();
  return out;
}

namespace {

// Exact dyadic row-vector times A(k); the band engine never rounds.
Vec4s row_times_A(const Vec4s& l, std::int64_t k) {
  Mat4i a = mat_A(k);
  Vec4s out;
  for (int c = 0; c < 4; ++c) {
    Dyadic s(0);
    for (int r = 0; r < 4; ++r)
      s = s + exactD(l[r], "rips_step lengths") * Dyadic(BigInt(a(r, c)), 0);
    out[c] = Scalar(s);
  }
  return out;
}

struct Z4Params {
  Vec3s w;
  Vec4s l;
};

Z4Params parse_Z4(const BandComplex& z) {
  if (z.support.intervals.size() != 2 || z.bands.size() != 4)
    throw structural_error("rips_step: input is not a 4-band two-component complex");
  // sigma > w1 for positive widths, so the long component is the main one.
  int d0 = z.support.intervals[0].length() < z.support.intervals[1].length() ? 1 : 0;
  int e = 1 - d0;
  if (!(z.support.intervals[static_cast<size_t>(e)].length() <
        z.support.intervals[static_cast<size_t>(d0)].length()))
    throw structural_error("rips_step: support components have unexpected lengths");

  const auto& ivd = z.support.intervals[static_cast<size_t>(d0)];
  const auto& ive = z.support.intervals[static_cast<size_t>(e)];
  Dyadic w1 = ive.length();

  int b1 = -1, b2 = -1, b3 = -1, b4 = -1;
  for (int i = 0; i < 4; ++i) {
    const Band& b = z.bands[static_cast<size_t>(i)];
    int on_d0 = (b.base0.component == d0) + (b.base1.component == d0);
    if (on_d0 == 2) {
      if (b3 >= 0) throw structural_error("rips_step: ambiguous band roles");
      b3 = i;
      continue;
    }
    if (on_d0 != 1) throw structural_error("rips_step: band not anchored on the main component");
    const Attachment& ad = b.base0.component == d0 ? b.base0 : b.base1;
    const Attachment& ae = b.base0.component == d0 ? b.base1 : b.base0;
    bool full_e = ae.left == ive.lo && ae.left + b.width == ive.hi;
    if (full_e && ad.left == ivd.lo)
      b1 = i;
    else if (full_e)
      b4 = i;
    else
      b2 = i;
  }
  if (b1 < 0 || b2 < 0 || b3 < 0 || b4 < 0)
    throw structural_error("rips_step: could not identify the four band roles");

  Z4Params p;
  p.w = Vec3s{Scalar(z.bands[static_cast<size_t>(b1)].width), Scalar(z.bands[static_cast<size_t>(b2)].width),
              Scalar(z.bands[static_cast<size_t>(b3)].width)};
  auto len = [&](int i) {
    const auto& b = z.bands[static_cast<size_t>(i)];
    if (!b.length) throw structural_error("rips_step: enhanced complex required");
    return Scalar(*b.length);
  };
  p.l = Vec4s{len(b1), len(b2), len(b3), len(b4)};
  return p;
}

}  // namespace

BandComplex rips_step(const BandComplex& z, std::int64_t k) {
  if (k < 1) throw std::domain_error("rips_step: k must be >= 1");
  Z4Params p = parse_Z4(z);
  if (!is_isomorphic(z, make_Z4(p.w, p.l)))
    throw structural_error("rips_step: input does not match the expected layout");

  // w' = B(k)^{-1} w = (w2, w3, w1 - k (w2 + w3)), required positive.
  Dyadic w1 = p.w[0].lo(), w2 = p.w[1].lo(), w3 = p.w[2].lo();
  Dyadic w3p = w1 - Dyadic(k) * (w2 + w3);
  if (w3p.sign() <= 0)
    throw structural_error("rips_step: widths are not in B(k)(R+^3)");
  Vec3s wp{Scalar(w2), Scalar(w3), Scalar(w3p)};
  BandComplex target = make_Z4(wp, row_times_A(p.l, k));

  // The main support component shrinks to sigma' = w1' + w2' + w3' exactly
  // when the round completes; cheap gate before the full isomorphism check.
  Dyadic sigma_target = w2 + w3 + w3p;

  BandComplex cur = z;
  const std::int64_t max_steps = 2 * k + 10;
  for (std::int64_t step = 0; step < max_steps; ++step) {
    auto arcs = free_arcs(cur);
    if (arcs.empty()) throw structural_error("rips_step: ran out of free arcs");
    // the machine's productive arc is the last one in (component, position)
    const FreeArc* pick = &arcs[0];
    for (const auto& a : arcs)
      if (a.component > pick->component || (a.component == pick->component && pick->lo < a.lo))
        pick = &a;
    cur = normalize(collapse(cur, *pick));
    if (cur.bands.size() != 4 || cur.support.intervals.size() != 2) continue;
    Dyadic main_len = std::max(cur.support.intervals[0].length(), cur.support.intervals[1].length());
    if (main_len == sigma_target && is_isomorphic(cur, target)) return cur;
  }
  throw structural_error("rips_step: collapse sequence did not reach the renormalized shape");
}

Scalar complex_area(const BandComplex& z) {
  Scalar area(0);
  for (const auto& b : z.bands) {
    if (!b.length) throw std::domain_error("complex_area: missing band length");
    area += Scalar(b.width) * Scalar(*b.length);
  }
  return area;
}

RankEstimate rank_estimate(const BandComplex& x, long max_coeff, const Scalar& tol) {
  std::vector<Scalar> gens;
  for (const auto& b : x.bands)
    if (!b.width.is_zero()) gens.push_back(Scalar(b.width));
  for (const auto& iv : x.support.intervals)
    if (!iv.degenerate()) gens.push_back(Scalar(iv.length()));
  return rank_of_span(gens, max_coeff, tol);
}

std::string to_json(const BandComplex& x, int precision) {
  json j;
  j["precision"] = precision;
  j["support"] = json::array();
  for (const auto& iv : x.support.intervals)
    j["support"].push_back({{"lo", iv.lo.to_decimal()}, {"hi", iv.hi.to_decimal()}});
  j["bands"] = json::array();
  for (const auto& b : x.bands) {
    json jb;
    jb["width"] = b.width.to_decimal();
    if (b.length) jb["length"] = b.length->to_decimal();
    jb["base0"] = {{"component", b.base0.component}, {"left", b.base0.left.to_decimal()}};
    jb["base1"] = {{"component", b.base1.component}, {"left", b.base1.left.to_decimal()}};
    j["bands"].push_back(jb);
  }
  return j.dump(2);
}

namespace {

Dyadic dyadic_from_decimal(const std::string& text, int prec) {
  Scalar s = Scalar::from_decimal(text, prec);
  if (!s.is_exact())
    throw structural_error("band complex JSON: non-dyadic decimal \"" + text + "\"");
  return s.lo();
}

}  // namespace

BandComplex band_complex_from_json(const std::string& text) {
  json j = json::parse(text);
  int prec = j.value("precision", Scalar::kDefaultPrec);
  BandComplex x;
  for (const auto& iv : j.at("support"))
    x.support.intervals.push_back({dyadic_from_decimal(iv.at("lo").get<std::string>(), prec),
                                   dyadic_from_decimal(iv.at("hi").get<std::string>(), prec)});
  for (const auto& jb : j.at("bands")) {
    Band b;
    b.width = dyadic_from_decimal(jb.at("width").get<std::string>(), prec);
    if (jb.contains("length"))
      b.length = dyadic_from_decimal(jb.at("length").get<std::string>(), prec);
    b.base0 = {jb.at("base0").at("component").get<int>(),
               dyadic_from_decimal(jb.at("base0").at("left").get<std::string>(), prec)};
    b.base1 = {jb.at("base1").at("component").get<int>(),
               dyadic_from_decimal(jb.at("base1").at("left").get<std::string>(), prec)};
    x.bands.push_back(b);
  }
  x.validate();
  return x;
}

}  // namespace thinband
