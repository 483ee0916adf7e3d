/** @file tilenorms.hpp
 *  Size and energy of tile coefficient sequences, the trilinear combinatorial
 *  bound, and the size estimate for characteristic-bounded functions.
 *  Slots and tree axes are 0-based (0, 1, 2).
 */
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <vector>

#include <boost/math/special_functions/beta.hpp>

#include "ttlab/intervals.hpp"
#include "ttlab/tiles.hpp"
#include "ttlab/wavepacket.hpp"

namespace ttlab {

enum class Provenance { Synthetic, Pairing };

/// Coefficients a_{P_slot} for every tri-tile of a collection, stored by tri-tile index.
struct CoefficientField {
  int slot = 0;
  std::vector<cplx> values;
  Provenance provenance = Provenance::Synthetic;

  /// Tri-tiles that share the slot tile must carry the same value.
  void validate(const Collection& c) const {
    if (slot < 0 || slot > 2) throw InvalidArgument("slot must be 0, 1 or 2");
    if (values.size() != c.size()) throw InvalidArgument("field size differs from the collection");
    for (std::size_t a = 0; a < c.size(); ++a)
      for (std::size_t b = a + 1; b < c.size(); ++b)
        if (c[a].tile(slot) == c[b].tile(slot) && values[a] != values[b])
          throw InvalidArgument("coefficients of a shared tile disagree");
  }

  CoefficientField scaled(cplx lambda) const {
    CoefficientField r = *this;
    for (auto& v : r.values) v *= lambda;
    return r;
  }
};

/// Builds a field from a function of the slot tile, so shared tiles agree by construction.
inline CoefficientField field_from_tiles(const Collection& c, int slot,
                                         const std::function<cplx(const Tile&)>& f,
                                         Provenance prov = Provenance::Synthetic) {
  CoefficientField F{slot, {}, prov};
  F.values.reserve(c.size());
  for (std::size_t a = 0; a < c.size(); ++a) {
    cplx v = 0;
    bool found = false;
    for (std::size_t b = 0; b < a; ++b)
      if (c[b].tile(slot) == c[a].tile(slot)) {
        v = F.values[b];
        found = true;
        break;
      }
    F.values.push_back(found ? v : f(c[a].tile(slot)));
  }
  return F;
}

/// a_{P_slot} = <f, Phi_{P_slot}>.
inline CoefficientField field_from_pairings(const Collection& c, int slot, const TestFunction& f) {
  return field_from_tiles(c, slot, [&](const Tile& t) { return pair(f, make_wave_packet(t)); },
                          Provenance::Pairing);
}

namespace detail {

inline double spatial_length(const TriTile& P) { return std::ldexp(1.0, static_cast<int>(P.I.j())); }

using Mask = std::uint64_t;

inline Mask tree_mask(const Collection& c, std::size_t top, int axis) {
  Mask m = 0;
  const Tile t = c[top].tile(axis);
  for (std::size_t p = 0; p < c.size(); ++p)
    if (tile_le(c[p].tile(axis), t)) m |= Mask(1) << p;
  return m;
}

inline std::vector<std::size_t> mask_members(Mask m) {
  std::vector<std::size_t> r;
  for (std::size_t p = 0; m; ++p, m >>= 1)
    if (m & 1) r.push_back(p);
  return r;
}

/// Precomputed maximal-tree masks for every (top, axis).
struct TreeTable {
  const Collection* c = nullptr;
  std::vector<std::array<Mask, 3>> masks;
  std::vector<double> len;
  std::vector<double> weight;  // |a|^2 per tri-tile

  TreeTable(const Collection& col, const CoefficientField& F) : c(&col) {
    if (col.size() > 64) throw TooLarge("tree tables hold at most 64 tri-tiles");
    F.validate(col);
    masks.resize(col.size());
    for (std::size_t t = 0; t < col.size(); ++t) {
      for (int a = 0; a < 3; ++a) masks[t][a] = tree_mask(col, t, a);
      len.push_back(spatial_length(col[t]));
      weight.push_back(std::norm(F.values[t]));
    }
  }

  double mass(Mask m) const {
    double s = 0;
    for (std::size_t p = 0; m; ++p, m >>= 1)
      if (m & 1) s += weight[p];
    return s;
  }

  /// Every sub-tree of m (a subset below some top of the collection) carries mass <= cap * |I_top'|.
  /// Returns the first violating sub-tree mask, or 0.
  Mask subtree_violation(Mask m, double cap) const {
    for (std::size_t t = 0; t < masks.size(); ++t)
      for (int a = 0; a < 3; ++a) {
        const Mask s = m & masks[t][a];
        if (s && mass(s) > cap * len[t] * (1 + 1e-12)) return s;
      }
    return 0;
  }
};

/// Strong disjointness in slot i of two member sets with tops of spatial intervals IT, ITp.
inline bool strongly_disjoint_masks(const Collection& c, Mask m, const Interval& IT, Mask mp,
                                    const Interval& ITp, int i) {
  for (auto p : mask_members(m))
    for (auto q : mask_members(mp)) {
      const Tile Pi = c[p].tile(i), Qi = c[q].tile(i);
      if (Pi == Qi) return false;
      if (Pi.omega.dilate(rat_two()).intersects(Qi.omega.dilate(rat_two()))) {
        if (c[q].I.interval().intersects(IT)) return false;
        if (c[p].I.interval().intersects(ITp)) return false;
      }
    }
  return true;
}

/// Candidate levels n: outside this window no tree meets both energy constraints.
inline std::pair<int, int> energy_level_window(const TreeTable& tt) {
  double total = 0, amin = std::numeric_limits<double>::infinity();
  double lmin = std::numeric_limits<double>::infinity(), lmax = 0;
  for (std::size_t p = 0; p < tt.weight.size(); ++p) {
    total += tt.weight[p];
    if (tt.weight[p] > 0) amin = std::min(amin, tt.weight[p]);
    lmin = std::min(lmin, tt.len[p]);
    lmax = std::max(lmax, tt.len[p]);
  }
  if (total == 0) return {1, 0};
  const int lo = static_cast<int>(std::floor(0.5 * std::log2(amin / lmax))) - 1;
  const int hi = static_cast<int>(std::ceil(0.5 * std::log2(total / lmin))) + 1;
  return {lo, hi};
}

}  // namespace detail

/// Exact size: maximal trees realize the supremum over j-trees, j != slot.
inline double size(const CoefficientField& F, const Collection& c) {
  if (c.empty()) return 0.0;
  detail::TreeTable tt(c, F);
  double best = 0;
  for (std::size_t t = 0; t < c.size(); ++t)
    for (int a = 0; a < 3; ++a) {
      if (a == F.slot) continue;
      best = std::max(best, tt.mass(tt.masks[t][a]) / tt.len[t]);
    }
  return std::sqrt(best);
}

/// sup_lambda lambda |{g > lambda}| for a nonnegative step function given as (value, measure) pieces.
inline double weak_l1_norm(std::vector<std::pair<double, double>> pieces) {
  std::sort(pieces.begin(), pieces.end(), [](auto& x, auto& y) { return x.first > y.first; });
  double meas = 0, best = 0;
  for (std::size_t k = 0; k < pieces.size(); ++k) {
    meas += pieces[k].second;
    // the level set {g >= v_k} is complete once all equal values are included
    if (k + 1 < pieces.size() && pieces[k + 1].first == pieces[k].first) continue;
    best = std::max(best, pieces[k].first * meas);
  }
  return best;
}

/// John-Nirenberg form of the size on maximal trees, with the weak-L1 quasinorm taken exactly.
inline double size_jn(const CoefficientField& F, const Collection& c) {
  if (c.empty()) return 0.0;
  detail::TreeTable tt(c, F);
  double best = 0;
  for (std::size_t t = 0; t < c.size(); ++t)
    for (int a = 0; a < 3; ++a) {
      if (a == F.slot) continue;
      const auto members = detail::mask_members(tt.masks[t][a]);
      const Interval IT = c[t].I.interval();
      std::vector<Rat> cuts{IT.lo, IT.hi};
      for (auto p : members) {
        const Interval Ip = c[p].I.interval();
        if (IT.lo < Ip.lo && Ip.lo < IT.hi) cuts.push_back(Ip.lo);
        if (IT.lo < Ip.hi && Ip.hi < IT.hi) cuts.push_back(Ip.hi);
      }
      std::sort(cuts.begin(), cuts.end());
      cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
      std::vector<std::pair<double, double>> pieces;
      for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        const Rat mid = (cuts[k] + cuts[k + 1]) / 2;
        double s = 0;
        for (auto p : members)
          if (c[p].I.interval().contains_point(mid)) s += tt.weight[p] / tt.len[p];
        pieces.push_back({std::sqrt(s), to_double(cuts[k + 1] - cuts[k])});
      }
      best = std::max(best, weak_l1_norm(pieces) / tt.len[t]);
    }
  return best;
}

/// A tree collection attaining a level n, with per-tree sums of |a|^2.
struct EnergySelection {
  int n = 0;
  std::vector<Tree> trees;
  std::vector<double> sums;
  double value = 0;
};

/// True iff sel satisfies both energy constraints at level sel.n and is strongly disjoint.
inline bool energy_selection_valid(const CoefficientField& F, const Collection& c, const EnergySelection& sel) {
  detail::TreeTable tt(c, F);
  const double lo = std::ldexp(1.0, 2 * sel.n), cap = std::ldexp(1.0, 2 * sel.n + 2);
  std::vector<detail::Mask> ms;
  for (auto& T : sel.trees) {
    if (!is_tree(c, T)) return false;
    detail::Mask m = 0;
    for (auto p : T.members) m |= detail::Mask(1) << p;
    if (tt.mass(m) < lo * tt.len[T.top] * (1 - 1e-12)) return false;
    if (tt.subtree_violation(m, cap)) return false;
    ms.push_back(m);
  }
  for (std::size_t a = 0; a < ms.size(); ++a)
    for (std::size_t b = a + 1; b < ms.size(); ++b)
      if (!detail::strongly_disjoint_masks(c, ms[a], c[sel.trees[a].top].I.interval(), ms[b],
                                           c[sel.trees[b].top].I.interval(), F.slot))
        return false;
  return true;
}

/// Greedy lower bound for the energy. For each level n (descending), tops are visited by
/// |I_T| descending then left endpoint; each takes the maximal available tree in every axis,
/// trims sub-trees above the 2^{n+1} cap, and is kept if it clears 2^n and stays strongly disjoint.
inline std::pair<double, EnergySelection> energy_greedy(const CoefficientField& F, const Collection& c) {
  EnergySelection best;
  if (c.empty()) return {0.0, best};
  detail::TreeTable tt(c, F);
  const auto [nlo, nhi] = detail::energy_level_window(tt);
  std::vector<std::size_t> order(c.size());
  for (std::size_t t = 0; t < c.size(); ++t) order[t] = t;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    if (tt.len[x] != tt.len[y]) return tt.len[x] > tt.len[y];
    return c[x].I.lo() < c[y].I.lo();
  });
  for (int n = nhi; n >= nlo; --n) {
    const double lo = std::ldexp(1.0, 2 * n), cap = std::ldexp(1.0, 2 * n + 2);
    EnergySelection sel;
    sel.n = n;
    std::vector<detail::Mask> chosen;
    detail::Mask used = 0;
    double total_len = 0;
    for (auto t : order)
      for (int a = 0; a < 3; ++a) {
        detail::Mask m = tt.masks[t][a] & ~used;
        // tiles sharing the slot tile with a selected member cannot join another tree
        for (auto p : detail::mask_members(m))
          for (auto q : detail::mask_members(used))
            if (c[p].tile(F.slot) == c[q].tile(F.slot)) m &= ~(detail::Mask(1) << p);
        while (m) {
          const detail::Mask bad = tt.subtree_violation(m, cap);
          if (!bad) break;
          m &= ~bad;
        }
        if (!m || tt.mass(m) < lo * tt.len[t]) continue;
        bool ok = true;
        for (std::size_t s = 0; s < chosen.size() && ok; ++s)
          ok = detail::strongly_disjoint_masks(c, m, c[t].I.interval(), chosen[s],
                                               c[sel.trees[s].top].I.interval(), F.slot);
        if (!ok) continue;
        chosen.push_back(m);
        used |= m;
        sel.trees.push_back(Tree{t, a, detail::mask_members(m)});
        sel.sums.push_back(tt.mass(m));
        total_len += tt.len[t];
      }
    sel.value = std::ldexp(std::sqrt(total_len), n);
    if (sel.value > best.value) best = sel;
  }
  return {best.value, best};
}

/// Exact energy by exhaustive search over levels, trees and strongly disjoint families.
inline std::pair<double, EnergySelection> energy_bruteforce(const CoefficientField& F, const Collection& c) {
  if (c.size() > 10) throw TooLarge("exhaustive energy is limited to 10 tri-tiles");
  EnergySelection best;
  if (c.empty()) return {0.0, best};
  detail::TreeTable tt(c, F);
  const auto [nlo, nhi] = detail::energy_level_window(tt);
  const std::size_t N = c.size();

  struct Node {
    std::size_t top;
    int axis;
    detail::Mask m;
  };
  // distinct (top interval, member set) pairs; axis and top identity do not affect validity
  std::vector<Node> all;
  for (std::size_t t = 0; t < N; ++t)
    for (int a = 0; a < 3; ++a) {
      const detail::Mask full = tt.masks[t][a];
      for (detail::Mask s = full; s; s = (s - 1) & full) {
        bool dup = false;
        for (auto& x : all)
          if (x.m == s && c[x.top].I == c[t].I) {
            dup = true;
            break;
          }
        if (!dup) all.push_back({t, a, s});
      }
    }

  for (int n = nhi; n >= nlo; --n) {
    const double lo = std::ldexp(1.0, 2 * n), cap = std::ldexp(1.0, 2 * n + 2);
    std::vector<Node> valid;
    for (auto& x : all)
      if (tt.mass(x.m) >= lo * tt.len[x.top] * (1 - 1e-12) && !tt.subtree_violation(x.m, cap))
        valid.push_back(x);
    if (valid.empty()) continue;
    // trees grouped by their lowest member
    std::vector<std::vector<std::size_t>> by_low(N);
    for (std::size_t v = 0; v < valid.size(); ++v)
      by_low[static_cast<std::size_t>(__builtin_ctzll(valid[v].m))].push_back(v);

    double best_len = 0;
    std::vector<std::size_t> cur, best_set;
    std::function<void(std::size_t, detail::Mask, double)> rec = [&](std::size_t u, detail::Mask decided,
                                                                     double acc) {
      while (u < N && (decided >> u & 1)) ++u;
      if (u >= N) {
        if (acc > best_len) {
          best_len = acc;
          best_set = cur;
        }
        return;
      }
      rec(u + 1, decided | (detail::Mask(1) << u), acc);
      for (auto v : by_low[u]) {
        const Node& x = valid[v];
        if (x.m & decided) continue;
        bool ok = true;
        for (auto w : cur) {
          if (!detail::strongly_disjoint_masks(c, x.m, c[x.top].I.interval(), valid[w].m,
                                               c[valid[w].top].I.interval(), F.slot)) {
            ok = false;
            break;
          }
        }
        if (!ok) continue;
        cur.push_back(v);
        rec(u + 1, decided | x.m, acc + tt.len[x.top]);
        cur.pop_back();
      }
    };
    rec(0, 0, 0.0);
    const double value = std::ldexp(std::sqrt(best_len), n);
    if (value > best.value) {
      best = EnergySelection{n, {}, {}, value};
      for (auto v : best_set) {
        best.trees.push_back(Tree{valid[v].top, valid[v].axis, detail::mask_members(valid[v].m)});
        best.sums.push_back(tt.mass(valid[v].m));
      }
    }
  }
  return {best.value, best};
}

/// Dual coefficients c = 2^{-n} (sum |I_T|)^{-1/2} a on a selection, with the two audited quantities.
/// With this scale the pairing is at least 2^n (sum |I_T|)^{1/2} and every sub-tree budget ratio is at most 4.
struct DualityAudit {
  double pairing = 0;        // |sum_T sum_P a conj(c)|
  double budget_ratio = 0;   // max over sub-trees of (sum |c|^2) / (|I_T'| / sum |I_T|)
};

inline DualityAudit energy_duality(const CoefficientField& F, const Collection& c, const EnergySelection& sel) {
  DualityAudit r;
  if (sel.trees.empty()) return r;
  detail::TreeTable tt(c, F);
  double L = 0;
  for (auto& T : sel.trees) L += tt.len[T.top];
  const double scale = std::ldexp(1.0, -sel.n) / std::sqrt(L);
  cplx acc = 0;
  for (auto& T : sel.trees) {
    detail::Mask m = 0;
    for (auto p : T.members) {
      acc += F.values[p] * std::conj(scale * F.values[p]);
      m |= detail::Mask(1) << p;
    }
    for (std::size_t t = 0; t < c.size(); ++t)
      for (int a = 0; a < 3; ++a) {
        const detail::Mask s = m & tt.masks[t][a];
        if (!s) continue;
        const double csum = scale * scale * tt.mass(s);
        r.budget_ratio = std::max(r.budget_ratio, csum / (tt.len[t] / L));
      }
  }
  r.pairing = std::abs(acc);
  return r;
}

struct CombinatorialBound {
  double lhs = 0, rhs = 0, ratio = 0;
  std::array<double, 3> sizes{}, energies{};
};

/// |sum_P |I_P|^{-1/2} a1 a2 a3| against prod size_i^theta_i energy_i^{1-theta_i} (greedy energy).
inline CombinatorialBound combinatorial_bound(const std::array<CoefficientField, 3>& fields,
                                              const Collection& c, const std::array<double, 3>& theta) {
  double tsum = 0;
  for (double t : theta) {
    if (!(t >= 0 && t < 1)) throw InvalidArgument("theta_i must lie in [0, 1)");
    tsum += t;
  }
  if (std::abs(tsum - 1) > 1e-12) throw InvalidArgument("theta must sum to 1");
  for (int i = 0; i < 3; ++i)
    if (fields[i].slot != i) throw InvalidArgument("fields must be given in slot order");
  CombinatorialBound r;
  cplx acc = 0;
  for (std::size_t p = 0; p < c.size(); ++p)
    acc += fields[0].values[p] * fields[1].values[p] * fields[2].values[p] /
           std::sqrt(detail::spatial_length(c[p]));
  r.lhs = std::abs(acc);
  r.rhs = 1;
  for (int i = 0; i < 3; ++i) {
    r.sizes[i] = size(fields[i], c);
    r.energies[i] = energy_greedy(fields[i], c).first;
    r.rhs *= std::pow(r.sizes[i], theta[i]) * std::pow(r.energies[i], 1 - theta[i]);
  }
  r.ratio = r.rhs > 0 ? r.lhs / r.rhs : (r.lhs > 0 ? std::numeric_limits<double>::infinity() : 0.0);
  return r;
}

/// int_0^U (1 + u^2)^{-M/2} du, M >= 2.
inline double cutoff_power_integral(double U, int M) {
  if (M < 2) throw InvalidArgument("cutoff power needs M >= 2");
  if (U == 0) return 0;
  const double sgn = U < 0 ? -1.0 : 1.0;
  const double a = std::abs(U);
  const double b = 0.5 * (M - 1);
  if (std::isinf(a)) return sgn * 0.5 * boost::math::beta(0.5, b);
  const double x = a * a / (1 + a * a);
  return sgn * 0.5 * boost::math::beta(0.5, b, x);  // non-normalized incomplete beta
}

/// sup over tri-tiles of |I|^{-1} int_E cutoff_I^M.
inline double size_estimate_rhs(const IntervalSet& E, const Collection& c, int M) {
  double best = 0;
  for (auto& P : c) {
    const Rat xc = P.I.center(), L = P.I.length();
    double s = 0;
    for (auto& piece : E.pieces()) {
      const double u0 = to_double((piece.lo - xc) / L), u1 = to_double((piece.hi - xc) / L);
      s += cutoff_power_integral(u1, M) - cutoff_power_integral(u0, M);
    }
    best = std::max(best, s);
  }
  return best;
}

}  // namespace ttlab
