#include <gtest/gtest.h>

#include <boost/rational.hpp>

#include "ttlab/tiles.hpp"

using namespace ttlab;

namespace {

DyadicInterval iv(long j, long k, int s = 0) { return DyadicInterval(j, BigInt(k), s); }

// Tile with spatial interval at scale j, index k and frequency index m (shift s).
Tile tile(long j, long k, long m, int s = 0) { return Tile(iv(j, k), iv(-j, m, s)); }

// Interval-based oracle for the order relations, written from endpoint arithmetic.
using Q = boost::rational<long long>;
struct QI {
  Q lo, hi;
};
QI qi(const DyadicInterval& I) {
  auto conv = [](const Rat& r) { return Q(r.get_num().get_si(), r.get_den().get_si()); };
  return {conv(I.lo()), conv(I.hi())};
}
QI scaled(const QI& a, long c) {
  const Q m = (a.lo + a.hi) / Q(2), h = Q(c) * (a.hi - a.lo) / Q(2);
  return {m - h, m + h};
}
bool inside(const QI& a, const QI& b) { return b.lo <= a.lo && a.hi <= b.hi; }

bool oracle_lt(const Tile& Pp, const Tile& P) {
  const QI Ip = qi(Pp.I), I = qi(P.I);
  const bool strict = inside(Ip, I) && !(Ip.lo == I.lo && Ip.hi == I.hi);
  return strict && inside(scaled(qi(P.omega), 3), scaled(qi(Pp.omega), 3));
}
bool oracle_lesssim(const Tile& Pp, const Tile& P) {
  return inside(qi(Pp.I), qi(P.I)) && inside(scaled(qi(P.omega), 10000000), scaled(qi(Pp.omega), 10000000));
}

GeneratorParams small_params(std::size_t count) {
  GeneratorParams p;
  p.count = count;
  p.freq_scales = {0, 30, 60};
  return p;
}

}  // namespace

TEST(TileOrder, ReflexiveIsLessEq) {
  const Tile P = tile(0, 0, 0);
  EXPECT_EQ(tile_order(P, P), TileRelation::LessEq);
  EXPECT_TRUE(tile_lesssim(P, P));
}

TEST(TileOrder, HalfIntervalWithDoubleFrequencyIsStrictlyBelow) {
  const Tile Pp = tile(-1, 0, 0), P = tile(0, 0, 0);
  EXPECT_EQ(Pp.omega.hi(), Rat(2));
  EXPECT_EQ(tile_order(Pp, P), TileRelation::Less);
}

TEST(TileOrder, DisjointSpatialIsNone) { EXPECT_EQ(tile_order(tile(0, 0, 0), tile(0, 2, 0)), TileRelation::None); }

TEST(TileOrder, RejectsWrongScaleOrShiftedSpace) {
  EXPECT_THROW(Tile(iv(0, 0), iv(1, 0)), InvalidArgument);
  EXPECT_THROW(Tile(iv(0, 0, 1), iv(0, 0)), InvalidArgument);
}

TEST(TileOrder, FuzzedAgainstIntervalOracleAndChainHolds) {
  Rng rng(5);
  boost::random::uniform_int_distribution<long> pj(-4, 0), pk(0, 15), pm(-40, 40);
  boost::random::uniform_int_distribution<int> ps(0, 2);
  std::size_t lt = 0;
  for (int t = 0; t < 200000; ++t) {
    const long j1 = pj(rng), j2 = pj(rng);
    const int s = ps(rng);
    const Tile Pp(iv(j1, pk(rng)), iv(-j1, pm(rng), s));
    const Tile P(iv(j2, pk(rng) >> (4 + j2)), iv(-j2, pm(rng) >> (4 + j2), s));
    const bool l = tile_lt(Pp, P), le = tile_le(Pp, P), ls = tile_lesssim(Pp, P), lp = tile_lesssim_prime(Pp, P);
    ASSERT_EQ(l, oracle_lt(Pp, P));
    ASSERT_EQ(ls, oracle_lesssim(Pp, P));
    ASSERT_TRUE(!l || le);
    ASSERT_TRUE(!le || ls);
    ASSERT_FALSE(lp && le);
    lt += l;
  }
  EXPECT_GT(lt, 100u);
}

TEST(Rank1, EmptyAndSingletonPass) {
  EXPECT_FALSE(check_rank1({}).has_value());
  auto c = generate_rank1_collection(1, small_params(1)).tiles;
  ASSERT_EQ(c.size(), 1u);
  EXPECT_FALSE(check_rank1(c).has_value());
}

TEST(Rank1, SharedFirstSlotViolatesDistinctness) {
  const TriTile A(iv(0, 0), {iv(0, 0, 0), iv(0, 5, 1), iv(0, 9, 2)});
  const TriTile B(iv(0, 0), {iv(0, 0, 0), iv(0, 6, 1), iv(0, 9 + 3, 2)});
  auto v = check_rank1({A, B});
  ASSERT_TRUE(v.has_value());
  EXPECT_EQ(v->clause, 1);
  EXPECT_EQ(v->slot, 0);
}

TEST(Rank1, MixedShiftsRejected) {
  const TriTile A(iv(0, 0), {iv(0, 0, 0), iv(0, 5, 1), iv(0, 9, 2)});
  const TriTile B(iv(0, 1), {iv(0, 0, 1), iv(0, 5, 1), iv(0, 9, 2)});
  EXPECT_THROW(check_rank1({A, B}), ShiftMismatch);
}

TEST(Generator, FiftyTilesAreRankOneAndSparse) {
  GeneratorParams p = small_params(50);
  auto res = generate_rank1_collection(42, p);
  EXPECT_EQ(res.tiles.size(), 50u);
  EXPECT_FALSE(res.partial);
  EXPECT_FALSE(check_rank1(res.tiles).has_value());
  EXPECT_TRUE(is_sparse_tritiles(res.tiles));
}

TEST(Generator, NonSparseModeStillRankOne) {
  GeneratorParams p = small_params(40);
  p.sparse = false;
  p.freq_scales = {-6, -5, -4, -3, -2, -1, 0};
  p.c0_log2 = 10;
  auto res = generate_rank1_collection(9, p);
  EXPECT_FALSE(check_rank1(res.tiles).has_value());
}

TEST(Generator, Deterministic) {
  auto a = generate_rank1_collection(17, small_params(30)).tiles;
  auto b = generate_rank1_collection(17, small_params(30)).tiles;
  EXPECT_EQ(a, b);
}

TEST(Generator, InfeasibleRequestIsPartial) {
  GeneratorParams p = small_params(500);
  p.freq_scales = {0};
  p.spatial_cells_log2 = 0;
  p.root_range = 0;
  p.max_attempts = 2000;
  auto res = generate_rank1_collection(3, p);
  EXPECT_TRUE(res.partial);
  EXPECT_FALSE(res.warning.empty());
  EXPECT_FALSE(check_rank1(res.tiles).has_value());
}

TEST(Generator, FrequencyCubesSplitIntoSparseClasses) {
  GeneratorParams p = small_params(40);
  p.sparse = false;
  p.freq_scales = {0, 1, 2, 3};
  auto c = generate_rank1_collection(4, p).tiles;
  std::vector<ShiftedDyadicCube> cubes;
  for (auto& P : c) cubes.push_back(P.cube());
  for (auto& cls : split_sparse(cubes)) EXPECT_TRUE(is_sparse(cls));
}

TEST(Trees, SingletonTree) {
  auto c = generate_rank1_collection(2, small_params(1)).tiles;
  auto T = maximal_tree(c, c[0], 0);
  EXPECT_EQ(T.members, std::vector<std::size_t>{0});
}

TEST(Trees, TopOutsideCollectionRejected) {
  auto c = generate_rank1_collection(2, small_params(3)).tiles;
  const TriTile stranger(iv(5, 1000), {iv(-5, 0, 0), iv(-5, 1, 1), iv(-5, 2, 2)});
  EXPECT_THROW(maximal_tree(c, stranger, 0), NotInCollection);
  EXPECT_THROW(maximal_tree(c, std::size_t{99}, 0), NotInCollection);
}

TEST(Trees, NestedTwoScalePair) {
  const long g = whitney_offset_factor(10);
  const std::array<int, 3> sh{0, 1, 2};
  const TriTile top = whitney_tritile(0, BigInt(0), Rat(0), sh, g);
  // One scale finer, base shifted so that slot 0 still sits inside the tripled top frequency.
  const TriTile low = whitney_tritile(1, BigInt(1), top.w[0].center(), sh, g);
  const Collection c{top, low};
  ASSERT_TRUE(tile_lt(low.tile(0), top.tile(0)));
  auto T = maximal_tree(c, 0, 0);
  EXPECT_EQ(T.members.size(), 2u);
  EXPECT_TRUE(is_tree(c, T));
}

TEST(Trees, MaximalTreeContainsEveryTreeWithThatTop) {
  GeneratorParams p = small_params(40);
  auto c = generate_rank1_collection(8, p).tiles;
  for (int slot = 0; slot < 3; ++slot)
    for (std::size_t top = 0; top < c.size(); ++top) {
      auto T = maximal_tree(c, top, slot);
      EXPECT_TRUE(is_tree(c, T));
      for (std::size_t m = 0; m < c.size(); ++m) {
        const bool in = std::find(T.members.begin(), T.members.end(), m) != T.members.end();
        EXPECT_EQ(in, is_tree(c, Tree{top, slot, {m}}));
      }
    }
}

TEST(Trees, FrequencyDichotomyOnGeneratedTrees) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto c = generate_rank1_collection(seed, small_params(40)).tiles;
    for (int slot = 0; slot < 3; ++slot)
      for (std::size_t top = 0; top < c.size(); ++top) EXPECT_TRUE(tree_frequency_dichotomy(c, maximal_tree(c, top, slot)));
  }
}

TEST(Trees, FirstSlotChainGivesLacunaryThirdSlot) {
  std::size_t checked = 0;
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    auto c = generate_rank1_collection(seed, small_params(40)).tiles;
    for (std::size_t top = 0; top < c.size(); ++top) {
      auto T = maximal_tree(c, top, 0);
      std::vector<Interval> omegas;
      const auto& wT = c[top].w[2];
      for (auto m : T.members) {
        if (!tile_lt(c[m].tile(0), c[top].tile(0))) continue;
        const auto& wQ = c[m].w[2];
        EXPECT_TRUE(wQ.dilate(rat_1e7()).contains(wT.dilate(rat_1e7())));
        EXPECT_FALSE(wQ.dilate(rat_three()).contains(wT.dilate(rat_three())));
        omegas.push_back(wQ.interval());
        ++checked;
      }
      auto lac = check_lacunary(omegas, c[top].w[0].center(), Rat(1, 1000), Rat(1000));
      EXPECT_TRUE(lac.ok);
    }
  }
  EXPECT_GT(checked, 20u);
}

TEST(StrongDisjointness, TreeWithItselfFails) {
  auto c = generate_rank1_collection(6, small_params(10)).tiles;
  auto T = maximal_tree(c, 0, 0);
  EXPECT_FALSE(strongly_disjoint(c, T, T, 0));
}

TEST(StrongDisjointness, FrequencySeparatedTreesPass) {
  const Collection c{TriTile(iv(0, 0), {iv(0, 0, 0), iv(0, 0, 0), iv(0, 0, 0)}),
                     TriTile(iv(0, 0), {iv(0, 10, 0), iv(0, 10, 0), iv(0, 10, 0)})};
  EXPECT_TRUE(strongly_disjoint(c, Tree{0, 1, {0}}, Tree{1, 1, {1}}, 1));
}

TEST(StrongDisjointness, OverlappingDoublesInsideTopFail) {
  // Frequencies [0,1) and [1,2): the doubled intervals overlap; both spatially in [0,1).
  const Collection c{TriTile(iv(0, 0), {iv(0, 0, 0), iv(0, 0, 0), iv(0, 0, 0)}),
                     TriTile(iv(0, 0), {iv(0, 1, 0), iv(0, 1, 0), iv(0, 1, 0)})};
  EXPECT_FALSE(strongly_disjoint(c, Tree{0, 1, {0}}, Tree{1, 1, {1}}, 1));
  // Same frequencies, spatially apart: allowed.
  const Collection d{TriTile(iv(0, 0), {iv(0, 0, 0), iv(0, 0, 0), iv(0, 0, 0)}),
                     TriTile(iv(0, 5), {iv(0, 1, 0), iv(0, 1, 0), iv(0, 1, 0)})};
  EXPECT_TRUE(strongly_disjoint(d, Tree{0, 1, {0}}, Tree{1, 1, {1}}, 1));
}

TEST(Lacunary, UnitDistance) {
  EXPECT_TRUE(check_lacunary({Interval{Rat(1), Rat(2)}}, Rat(0), Rat(1, 2), Rat(2)).ok);
}

TEST(Lacunary, PointInsideFails) {
  EXPECT_FALSE(check_lacunary({Interval{Rat(1), Rat(2)}, Interval{Rat(-1), Rat(1)}}, Rat(0), Rat(1, 2), Rat(2)).ok);
}

TEST(Lacunary, GeometricFamilyHasExactUnitBand) {
  std::vector<Interval> w;
  for (int k = -10; k <= 10; ++k) w.push_back({pow2(k), pow2(k + 1)});
  auto r = check_lacunary(w, Rat(0), Rat(1), Rat(1));
  EXPECT_TRUE(r.ok);
  EXPECT_EQ(r.min_ratio, Rat(1));
  EXPECT_EQ(r.max_ratio, Rat(1));
}

TEST(Lacunary, EmptyFamilyIsVacuous) {
  auto r = check_lacunary({}, Rat(0), Rat(1), Rat(2));
  EXPECT_TRUE(r.ok);
  EXPECT_TRUE(r.vacuous);
  EXPECT_THROW(check_lacunary({}, Rat(0), Rat(2), Rat(1)), InvalidArgument);
}
