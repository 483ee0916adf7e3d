/** @file tiles.hpp
 *  Tiles, tri-tiles, the tile order relations, rank-1 and sparseness checks,
 *  trees, strong disjointness, lacunarity, and a seeded generator of valid
 *  collections built from Whitney-positioned frequency cubes.
 *
 *  Slots are 0-based in code (slot 0 is the first function slot).
 */
#pragma once

#include <array>
#include <boost/random/mersenne_twister.hpp>
#include <boost/random/uniform_int_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ttlab/dyadic.hpp"

namespace ttlab {

using Rng = boost::random::mt19937_64;

inline const Rat& rat_three() {
  static const Rat v(3);
  return v;
}
inline const Rat& rat_two() {
  static const Rat v(2);
  return v;
}
inline const Rat& rat_1e7() {
  static const Rat v(10000000);
  return v;
}
inline const Rat& rat_1e9() {
  static const Rat v(1000000000);
  return v;
}

/// Spatial containment I' ⊆ I for unshifted dyadic intervals, decided on (j, k).
inline bool spatial_subset(const DyadicInterval& Ip, const DyadicInterval& I) {
  if (Ip.j() > I.j()) return false;
  BigInt q;
  mpz_fdiv_q_2exp(q.get_mpz_t(), Ip.k().get_mpz_t(), static_cast<mp_bitcnt_t>(I.j() - Ip.j()));
  return q == I.k();
}

/// Rectangle I x omega with |I||omega| = 1, I unshifted.
struct Tile {
  DyadicInterval I;
  DyadicInterval omega;

  Tile() = default;
  Tile(DyadicInterval I_, DyadicInterval w_) : I(std::move(I_)), omega(std::move(w_)) {
    if (I.s() != 0) throw InvalidArgument("spatial interval must be unshifted");
    if (omega.j() != -I.j()) throw InvalidArgument("tile must satisfy |I||omega| = 1");
  }
  bool operator==(const Tile& o) const { return I == o.I && omega == o.omega; }
  bool operator!=(const Tile& o) const { return !(*this == o); }
};

/// P' < P : I' strictly inside I and 3 omega_P inside 3 omega_P'.
inline bool tile_lt(const Tile& Pp, const Tile& P) {
  if (Pp.I == P.I || !spatial_subset(Pp.I, P.I)) return false;
  return Pp.omega.dilate(rat_three()).contains(P.omega.dilate(rat_three()));
}
inline bool tile_le(const Tile& Pp, const Tile& P) { return Pp == P || tile_lt(Pp, P); }
/// P' ≲ P : I' ⊆ I and 10^7 omega_P ⊆ 10^7 omega_P'.
inline bool tile_lesssim(const Tile& Pp, const Tile& P) {
  if (!spatial_subset(Pp.I, P.I)) return false;
  return Pp.omega.dilate(rat_1e7()).contains(P.omega.dilate(rat_1e7()));
}
/// P' ≲' P : ≲ holds and ≤ fails.
inline bool tile_lesssim_prime(const Tile& Pp, const Tile& P) {
  return tile_lesssim(Pp, P) && !tile_le(Pp, P);
}

enum class TileRelation { Less, LessEq, Lesssim, LesssimPrime, None };

inline const char* to_string(TileRelation r) {
  switch (r) {
    case TileRelation::Less: return "<";
    case TileRelation::LessEq: return "<=";
    case TileRelation::Lesssim: return "lesssim";
    case TileRelation::LesssimPrime: return "lesssim'";
    default: return "none";
  }
}

/// Strongest relation of P' to P. Since ≲' is ≲ without ≤, plain ≲ is never the strongest.
inline TileRelation tile_order(const Tile& Pp, const Tile& P) {
  if (tile_lt(Pp, P)) return TileRelation::Less;
  if (Pp == P) return TileRelation::LessEq;
  if (tile_lesssim(Pp, P)) return TileRelation::LesssimPrime;
  return TileRelation::None;
}

/// Spatial interval with three frequency intervals, one per slot.
struct TriTile {
  DyadicInterval I;
  std::array<DyadicInterval, 3> w;

  TriTile() = default;
  TriTile(DyadicInterval I_, std::array<DyadicInterval, 3> w_) : I(std::move(I_)), w(std::move(w_)) {
    if (I.s() != 0) throw InvalidArgument("spatial interval must be unshifted");
    for (auto& x : w)
      if (x.j() != -I.j()) throw InvalidArgument("tri-tile frequency scale must be -j_I");
  }
  Tile tile(int slot) const { return Tile(I, w.at(slot)); }
  std::array<int, 3> shift() const { return {w[0].s(), w[1].s(), w[2].s()}; }
  ShiftedDyadicCube cube() const { return ShiftedDyadicCube(std::vector<DyadicInterval>{w[0], w[1], w[2]}); }
  /// log2 of the frequency side length.
  long freq_scale() const { return w[0].j(); }
  bool operator==(const TriTile& o) const { return I == o.I && w == o.w; }
  bool operator!=(const TriTile& o) const { return !(*this == o); }
};

using Collection = std::vector<TriTile>;

inline void require_single_shift(const Collection& c) {
  for (std::size_t a = 1; a < c.size(); ++a)
    if (c[a].shift() != c[0].shift()) throw ShiftMismatch("tri-tiles carry different shifts");
}

struct Rank1Violation {
  std::size_t a = 0, b = 0;  // offending pair, b plays the role of P'
  int clause = 0;           // 1..3
  int slot = -1;
  std::string describe() const {
    std::ostringstream os;
    os << "pair (" << a << "," << b << ") violates clause " << clause << " at slot " << slot;
    return os.str();
  }
};

/// Checks the tri-tile rank-1 clauses for one ordered pair of distinct tri-tiles (P' = b).
inline std::optional<Rank1Violation> rank1_pair(const TriTile& P, const TriTile& Pp) {
  for (int i = 0; i < 3; ++i)
    if (P.tile(i) == Pp.tile(i)) return Rank1Violation{0, 0, 1, i};
  // The remaining clauses need some P'_i <= P_i, hence I' ⊆ I.
  if (!spatial_subset(Pp.I, P.I)) return std::nullopt;
  const bool scale_clause = pow2(Pp.I.j()) < rat_1e9() * pow2(P.I.j());
  for (int i = 0; i < 3; ++i) {
    if (!tile_le(Pp.tile(i), P.tile(i))) continue;
    for (int j = 0; j < 3; ++j)
      if (!tile_lesssim(Pp.tile(j), P.tile(j))) return Rank1Violation{0, 0, 2, j};
    if (scale_clause)
      for (int j = 0; j < 3; ++j)
        if (j != i && !tile_lesssim_prime(Pp.tile(j), P.tile(j))) return Rank1Violation{0, 0, 3, j};
  }
  return std::nullopt;
}

/// Verifies the tri-tile rank-1 clauses over all ordered pairs of distinct tri-tiles.
inline std::optional<Rank1Violation> check_rank1(const Collection& c) {
  require_single_shift(c);
  for (std::size_t a = 0; a < c.size(); ++a)
    for (std::size_t b = 0; b < c.size(); ++b) {
      if (a == b || c[a] == c[b]) continue;
      if (auto v = rank1_pair(c[a], c[b])) {
        v->a = a;
        v->b = b;
        return v;
      }
    }
  return std::nullopt;
}

/// Rank-1 clauses for frequency cubes, over ordered pairs of distinct cubes (Q' = b).
inline std::optional<Rank1Violation> check_rank1_cubes(const std::vector<ShiftedDyadicCube>& q) {
  for (std::size_t a = 1; a < q.size(); ++a)
    if (q[a].shift() != q[0].shift()) throw ShiftMismatch("cubes from different shifted grids");
  for (std::size_t a = 0; a < q.size(); ++a)
    for (std::size_t b = 0; b < q.size(); ++b) {
      if (a == b || q[a] == q[b]) continue;
      const auto& Q = q[a];
      const auto& Qp = q[b];
      if (Q.dilated_intersects(Rat(1), Qp, Rat(1))) return Rank1Violation{a, b, 1, -1};
      for (int i = 0; i < 3; ++i)
        if (Q.component(i) == Qp.component(i)) return Rank1Violation{a, b, 2, i};
      for (int i = 0; i < 3; ++i) {
        if (!Q.component(i).dilate(rat_three()).contains(Qp.component(i).dilate(rat_three()))) continue;
        for (int j = 0; j < 3; ++j)
          if (!Q.component(j).dilate(rat_1e7()).contains(Qp.component(j).dilate(rat_1e7())))
            return Rank1Violation{a, b, 3, j};
        if (Qp.side() < rat_1e9() * Q.side())
          for (int j = 0; j < 3; ++j)
            if (j != i &&
                Q.component(j).dilate(rat_three()).intersects(Qp.component(j).dilate(rat_three())))
              return Rank1Violation{a, b, 4, j};
      }
    }
  return std::nullopt;
}

/// Same shift and sparse set of frequency cubes.
inline bool is_sparse_tritiles(const Collection& c) {
  for (std::size_t a = 1; a < c.size(); ++a)
    if (c[a].shift() != c[0].shift()) return false;
  std::vector<ShiftedDyadicCube> cubes;
  for (auto& P : c) {
    auto q = P.cube();
    if (std::find(cubes.begin(), cubes.end(), q) == cubes.end()) cubes.push_back(std::move(q));
  }
  return is_sparse(cubes);
}

/// Pair test used by the incremental generator.
inline bool cubes_sparse_pair(const ShiftedDyadicCube& Q, const ShiftedDyadicCube& R) {
  if (Q == R) return true;
  if (Q.j() != R.j()) return std::abs(Q.j() - R.j()) >= kSparseScaleGap;
  return !Q.dilated_intersects(rat_1e9(), R, rat_1e9());
}

/// A tree: members of a collection below a top in one slot.
struct Tree {
  std::size_t top = 0;
  int slot = 0;
  std::vector<std::size_t> members;
};

inline bool is_tree(const Collection& c, const Tree& T) {
  if (T.top >= c.size()) return false;
  for (auto m : T.members)
    if (m >= c.size() || !tile_le(c[m].tile(T.slot), c[T.top].tile(T.slot))) return false;
  return true;
}

/// All members P with P_slot <= top_slot.
inline Tree maximal_tree(const Collection& c, std::size_t top, int slot) {
  if (top >= c.size()) throw NotInCollection("tree top must belong to the collection");
  Tree T{top, slot, {}};
  const Tile t = c[top].tile(slot);
  for (std::size_t m = 0; m < c.size(); ++m)
    if (tile_le(c[m].tile(slot), t)) T.members.push_back(m);
  return T;
}

inline Tree maximal_tree(const Collection& c, const TriTile& top, int slot) {
  auto it = std::find(c.begin(), c.end(), top);
  if (it == c.end()) throw NotInCollection("tree top must belong to the collection");
  return maximal_tree(c, static_cast<std::size_t>(it - c.begin()), slot);
}

/// Strong disjointness in slot i of two trees over one collection.
inline bool strongly_disjoint(const Collection& c, const Tree& T, const Tree& Tp, int i) {
  const Interval IT = c.at(T.top).I.interval();
  const Interval ITp = c.at(Tp.top).I.interval();
  for (auto p : T.members)
    for (auto q : Tp.members) {
      const Tile Pi = c[p].tile(i), Qi = c[q].tile(i);
      if (Pi == Qi) return false;
      if (Pi.omega.dilate(rat_two()).intersects(Qi.omega.dilate(rat_two()))) {
        if (c[q].I.interval().intersects(IT)) return false;
        if (c[p].I.interval().intersects(ITp)) return false;
      }
    }
  return true;
}

struct LacunaryResult {
  bool ok = true;
  bool vacuous = false;
  Rat min_ratio, max_ratio;  // extremes of dist(xi, omega)/|omega| over the family
};

/// c_lo|omega| <= dist(xi, omega) <= c_hi|omega| for every omega.
inline LacunaryResult check_lacunary(const std::vector<Interval>& omegas, const Rat& xi,
                                     const Rat& c_lo, const Rat& c_hi) {
  if (!(c_lo > 0 && c_lo <= c_hi)) throw InvalidArgument("lacunary band needs 0 < c_lo <= c_hi");
  LacunaryResult r;
  if (omegas.empty()) {
    r.vacuous = true;
    return r;
  }
  bool first = true;
  for (auto& w : omegas) {
    Rat ratio = dist(xi, w) / w.length();
    if (first || ratio < r.min_ratio) r.min_ratio = ratio;
    if (first || ratio > r.max_ratio) r.max_ratio = ratio;
    first = false;
    if (ratio < c_lo || ratio > c_hi) r.ok = false;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Generation.

/// Whitney slot directions: slot frequencies sit at base + dir[i] * g * 2^k with
/// g ≈ C0/sqrt(2), so the cube is at distance ≈ C0|Q| from the diagonal.
inline constexpr std::array<int, 3> kWhitneyDirections{0, 1, -1};

inline long whitney_offset_factor(long c0_log2) {
  return std::lround(std::ldexp(1.0, static_cast<int>(c0_log2)) / std::sqrt(2.0));
}

/// Tri-tile at frequency scale 2^k with spatial index m and slot frequencies
/// containing base + dir[i] * g * 2^k.
inline TriTile whitney_tritile(long k, const BigInt& m, const Rat& base, const std::array<int, 3>& shift,
                               long g) {
  std::array<DyadicInterval, 3> w;
  Rat L = pow2(k);
  for (int i = 0; i < 3; ++i)
    w[i] = containing_interval(k, shift[i], base + Rat(kWhitneyDirections[i] * g) * L);
  return TriTile(DyadicInterval(-k, m, 0), w);
}

inline BigInt random_bigint_below_pow2(Rng& rng, long bits) {
  BigInt r = 0;
  long left = bits;
  while (left > 0) {
    long take = std::min<long>(left, 32);
    boost::random::uniform_int_distribution<std::uint64_t> d(0, (std::uint64_t(1) << take) - 1);
    r <<= take;
    r += static_cast<unsigned long>(d(rng));
    left -= take;
  }
  return r;
}

struct GeneratorParams {
  std::array<int, 3> shift{0, 1, 2};
  std::vector<long> freq_scales{0, 30, 60};  // k with |omega| = 2^k
  long spatial_cells_log2 = 3;               // fresh tiles use 2^this cells of the coarsest scale
  std::size_t count = 20;
  bool sparse = true;
  double anchor_prob = 0.75;
  long c0_log2 = 10;
  long root_range = 4;          // fresh roots r in [-root_range, root_range]
  std::size_t max_attempts = 0;  // 0 -> 400 * count
};

struct GeneratorResult {
  Collection tiles;
  std::size_t attempts = 0;
  bool partial = false;
  std::string warning;
};

/// Seeded rejection sampler: every accepted proposal keeps the collection rank 1
/// (and sparse when requested). Anchored proposals create tree relations.
inline GeneratorResult generate_rank1_collection(std::uint64_t seed, const GeneratorParams& p) {
  if (p.freq_scales.empty() || p.count == 0) throw InvalidArgument("generator needs scales and a count");
  Rng rng(seed);
  GeneratorResult res;
  std::vector<long> scales = p.freq_scales;
  std::sort(scales.begin(), scales.end());
  const long kmin = scales.front(), kmax = scales.back();
  const long g = whitney_offset_factor(p.c0_log2);
  const std::size_t max_attempts = p.max_attempts ? p.max_attempts : 400 * p.count;
  boost::random::uniform_real_distribution<double> unif(0.0, 1.0);
  boost::random::uniform_int_distribution<std::size_t> pick_scale(0, scales.size() - 1);
  boost::random::uniform_int_distribution<long> pick_root(-p.root_range, p.root_range);
  boost::random::uniform_int_distribution<int> pick_slot(0, 2);
  std::vector<ShiftedDyadicCube> cubes;

  while (res.tiles.size() < p.count && res.attempts < max_attempts) {
    ++res.attempts;
    const long k = scales[pick_scale(rng)];
    BigInt m;
    Rat base;
    bool anchored = !res.tiles.empty() && unif(rng) < p.anchor_prob;
    if (anchored) {
      boost::random::uniform_int_distribution<std::size_t> pick(0, res.tiles.size() - 1);
      const TriTile& E = res.tiles[pick(rng)];
      const long kE = E.freq_scale();
      if (kE == k) continue;
      const int i = pick_slot(rng);
      if (k > kE) {
        BigInt off = random_bigint_below_pow2(rng, k - kE);
        m = (E.I.k() << static_cast<mp_bitcnt_t>(k - kE)) + off;
      } else {
        mpz_fdiv_q_2exp(m.get_mpz_t(), E.I.k().get_mpz_t(), static_cast<mp_bitcnt_t>(kE - k));
      }
      base = E.w[i].center() - Rat(kWhitneyDirections[i] * g) * pow2(k);
    } else {
      m = random_bigint_below_pow2(rng, p.spatial_cells_log2 + (k - kmin));
      Rat spacing = p.sparse ? pow2(kmax + kSparseScaleGap + 1) : pow2(kmax) * Rat(4 * g);
      base = Rat(pick_root(rng)) * spacing;
    }
    TriTile cand = whitney_tritile(k, m, base, p.shift, g);
    bool ok = true;
    for (auto& E : res.tiles) {
      if (E == cand) {
        ok = false;
        break;
      }
      if (rank1_pair(E, cand) || rank1_pair(cand, E)) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    auto q = cand.cube();
    if (p.sparse)
      for (auto& Q : cubes)
        if (!cubes_sparse_pair(Q, q)) {
          ok = false;
          break;
        }
    if (!ok) continue;
    if (std::find(cubes.begin(), cubes.end(), q) == cubes.end()) cubes.push_back(q);
    res.tiles.push_back(std::move(cand));
  }
  if (res.tiles.size() < p.count) {
    res.partial = true;
    res.warning = "generator stopped after " + std::to_string(res.attempts) + " attempts with " +
                  std::to_string(res.tiles.size()) + " of " + std::to_string(p.count) + " tiles";
  }
  return res;
}

/// True iff the observation after strong disjointness holds on tree T:
/// for members P, P' and slots j != slot, omega_j coincide or their doubles are disjoint.
inline bool tree_frequency_dichotomy(const Collection& c, const Tree& T) {
  for (auto a : T.members)
    for (auto b : T.members)
      for (int j = 0; j < 3; ++j) {
        if (j == T.slot) continue;
        const auto& wa = c[a].w[j];
        const auto& wb = c[b].w[j];
        if (wa == wb) continue;
        if (wa.dilate(rat_two()).intersects(wb.dilate(rat_two()))) return false;
      }
  return true;
}

}  // namespace ttlab
