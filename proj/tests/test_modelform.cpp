#include <gtest/gtest.h>

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/uniform_int_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>

#include "ttlab/modelform.hpp"

using namespace ttlab;

namespace {

DyadicInterval iv(long j, long k, int s = 0) { return DyadicInterval(j, BigInt(k), s); }

ExponentTuple tup(Rat a, Rat b, Rat c, Rat d) { return {a, b, c, d}; }

// --- Convex hull oracle: supporting planes through vertex triples, in coordinates (a1, a2, a3).
using P3 = std::array<Rat, 3>;

P3 sub(const P3& a, const P3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
P3 cross(const P3& a, const P3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
Rat dot(const P3& a, const P3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

struct Plane {
  P3 n;
  Rat off;  // inside iff dot(n, x) > off
};

std::vector<Plane> supporting_planes(const std::array<ExponentTuple, 12>& verts) {
  std::vector<P3> v;
  for (auto& t : verts) v.push_back({t[0], t[1], t[2]});
  std::vector<Plane> out;
  for (std::size_t a = 0; a < v.size(); ++a)
    for (std::size_t b = a + 1; b < v.size(); ++b)
      for (std::size_t c = b + 1; c < v.size(); ++c) {
        P3 n = cross(sub(v[b], v[a]), sub(v[c], v[a]));
        if (n[0] == 0 && n[1] == 0 && n[2] == 0) continue;
        int pos = 0, neg = 0;
        for (auto& p : v) {
          const Rat s = dot(n, sub(p, v[a]));
          pos += s > 0;
          neg += s < 0;
        }
        if (pos && neg) continue;
        if (neg) n = {-n[0], -n[1], -n[2]};
        out.push_back({n, dot(n, v[a])});
      }
  return out;
}

bool hull_interior_oracle(const std::vector<Plane>& planes, const ExponentTuple& a) {
  const P3 x{a[0], a[1], a[2]};
  for (auto& p : planes)
    if (!(dot(p.n, x) > p.off)) return false;
  return true;
}

// --- Instances with at least one related (Q, P) pair whose packets overlap in frequency.
struct RelatedPair {
  PQInstance inst;
  std::size_t q = 0, p = 0;
};

RelatedPair find_related_pair(std::uint64_t seed, int sharp) {
  PQParams prm;
  prm.sharp = sharp;
  for (std::uint64_t s = seed;; ++s) {
    RelatedPair r{generate_pq_instance(s, prm)};
    for (r.q = 0; r.q < r.inst.Q.size(); ++r.q)
      for (r.p = 0; r.p < r.inst.P.size(); ++r.p)
        if (sharp_related(r.inst.Q[r.q], r.inst.P[r.p], sharp) &&
            std::abs(pair_packets(make_wave_packet(r.inst.Q[r.q].tile(2)), make_wave_packet(r.inst.P[r.p].tile(0)))) > 1e-3)
          return r;
  }
}

PacketSum single(const Tile& t, cplx coef = 1.0) { return PacketSum{{make_wave_packet(t)}, {coef}}; }

bool related_oracle(const TriTile& Q, const TriTile& P, int sharp) {
  const Rat ratio = P.w[0].length() / Q.w[2].length();
  const bool gap_ok = ratio == pow2(sharp) || ratio == pow2(sharp + 1);
  return gap_ok && P.w[0].lo() <= Q.w[2].lo() && Q.w[2].hi() <= P.w[0].hi();
}

double l2_sampled(const std::vector<cplx>& v, const Rat& h) {
  double s = 0;
  for (auto& x : v) s += std::norm(x);
  return std::sqrt(s * to_double(h));
}

std::array<TestFunction, 4> random_indicators(std::uint64_t seed) {
  Rng rng(seed);
  std::array<TestFunction, 4> f;
  for (int i = 0; i < 4; ++i) {
    const auto E = random_set(rng, SetParams{});
    std::vector<int> signs;
    for (std::size_t m = 0; m < E.pieces().size(); ++m) signs.push_back((rng() & 1) ? 1 : -1);
    f[i] = signed_indicator(E, signs);
  }
  return f;
}

}  // namespace

// ---------------------------------------------------------------------------
// Exponent tuples and polytopes.

TEST(Admissible, Examples) {
  EXPECT_EQ(admissible(tup(Rat(1, 4), Rat(1, 4), Rat(1, 4), Rat(1, 4))).kind, TupleKind::Good);
  // A5 = (1, -1/2, 0, 1/2) has a coordinate equal to 1, so only points pulled slightly inside are admissible
  const auto& A5 = vertices_d_prime()[4];
  EXPECT_EQ(admissible(A5).kind, TupleKind::Inadmissible);
  ExponentTuple near;
  for (int c = 0; c < 4; ++c) near[c] = A5[c] + Rat(1, 100) * (Rat(1, 4) - A5[c]);
  const auto a5 = admissible(near);
  EXPECT_EQ(a5.kind, TupleKind::Bad);
  EXPECT_EQ(a5.bad_index, 1);
  EXPECT_EQ(admissible(tup(Rat(-1, 2), Rat(-1, 2), Rat(1), Rat(1))).kind, TupleKind::Inadmissible);
  EXPECT_EQ(admissible(tup(Rat(1, 2), Rat(1, 2), Rat(1, 2), Rat(0))).kind, TupleKind::Inadmissible);
  EXPECT_EQ(admissible(tup(Rat(1), Rat(0), Rat(0), Rat(0))).kind, TupleKind::Inadmissible);
}

TEST(Polytope, VerticesLieOnHyperplane) {
  for (auto& v : vertices_d_prime()) EXPECT_EQ(v[0] + v[1] + v[2] + v[3], Rat(1));
  for (auto& v : vertices_d_second()) EXPECT_EQ(v[0] + v[1] + v[2] + v[3], Rat(1));
}

TEST(Polytope, VerticesAreNotInterior) {
  for (auto& v : vertices_d_prime()) EXPECT_FALSE(in_polytope(v, Region4::DPrime));
  for (auto& v : vertices_d_second()) EXPECT_FALSE(in_polytope(v, Region4::DSecond));
}

TEST(Polytope, EqualWeightPointInBoth) {
  const auto a = tup(Rat(1, 6), Rat(1, 6), Rat(1, 6), Rat(1, 2));
  const auto pd = supporting_planes(vertices_d_prime()), ps = supporting_planes(vertices_d_second());
  EXPECT_TRUE(hull_interior_oracle(pd, a) && hull_interior_oracle(ps, a));
  EXPECT_TRUE(in_polytope(a, Region4::D));
}

TEST(Polytope, OffHyperplaneRejected) {
  EXPECT_THROW(in_polytope(tup(Rat(1, 4), Rat(1, 4), Rat(1, 4), Rat(1, 2)), Region4::D), InvalidArgument);
}

TEST(Polytope, AgreesWithFacetOracle) {
  const auto pd = supporting_planes(vertices_d_prime()), ps = supporting_planes(vertices_d_second());
  boost::random::mt19937_64 rng(5);
  boost::random::uniform_int_distribution<long> num(-30, 30);
  std::size_t inside = 0;
  for (int t = 0; t < 3000; ++t) {
    ExponentTuple a;
    if (t % 3 == 0) {
      // random strictly positive combination of the D' vertices
      std::array<long, 12> w;
      long tot = 0;
      for (auto& x : w) tot += (x = 1 + (rng() % 9));
      for (auto& x : a) x = 0;
      for (int i = 0; i < 12; ++i)
        for (int c = 0; c < 4; ++c) a[c] += Rat(w[i], tot) * vertices_d_prime()[i][c];
    } else {
      for (int c = 0; c < 3; ++c) a[c] = Rat(num(rng), 12);
      a[3] = 1 - a[0] - a[1] - a[2];
    }
    for (auto& x : a) x.canonicalize();
    const bool dp = hull_interior_oracle(pd, a), ds = hull_interior_oracle(ps, a);
    ASSERT_EQ(in_polytope(a, Region4::DPrime), dp) << t;
    ASSERT_EQ(in_polytope(a, Region4::DSecond), ds) << t;
    ASSERT_EQ(in_polytope(a, Region4::D), dp && ds) << t;
    ASSERT_EQ(in_polytope(swap13(a), Region4::DSecond), dp) << t;
    inside += dp;
  }
  EXPECT_GT(inside, 1000u);
}

// ---------------------------------------------------------------------------
// Coefficients a^{(3),#} and B^#.

TEST(A3Sharp, EmptyPCollectionIsZero) {
  const auto r = find_related_pair(1, 3);
  const PacketSum f = single(r.inst.P[r.p].tile(1));
  EXPECT_EQ(a3sharp(r.inst.Q[r.q], {}, f, f, 3), cplx(0.0));
}

TEST(A3Sharp, SingleTileWithOwnPackets) {
  const auto r = find_related_pair(1, 3);
  const TriTile& P = r.inst.P[r.p];
  const TriTile& Q = r.inst.Q[r.q];
  const cplx got = a3sharp(Q, {P}, single(P.tile(1)), single(P.tile(2)), 3);
  const cplx expect = inv_sqrt_len(P) * pair_packets(make_wave_packet(Q.tile(2)), make_wave_packet(P.tile(0)));
  EXPECT_LT(std::abs(got - expect), 1e-6 * std::abs(expect));
}

TEST(A3Sharp, TriangleInequalityAudit) {
  for (int sharp : {2, 3, 4}) {
    PQParams prm;
    prm.sharp = sharp;
    const auto inst = generate_pq_instance(10 + sharp, prm);
    const auto f = random_indicators(77 + sharp);
    for (auto& Q : inst.Q) {
      const double v = std::abs(a3sharp(Q, inst.P, f[2], f[3], sharp));
      EXPECT_LE(v, a3sharp_triangle_bound(Q, inst.P, f[2], f[3], sharp) * (1 + 1e-12) + 1e-300);
    }
  }
}

TEST(A3Sharp, BatchMatchesDirectSumOracle) {
  boost::random::mt19937_64 rng(9);
  boost::random::uniform_real_distribution<double> u(-1, 1);
  std::size_t related = 0;
  for (int sharp : {2, 3}) {
    PQParams prm;
    prm.sharp = sharp;
    const auto inst = generate_pq_instance(200 + sharp, prm);
    std::vector<cplx> a2(inst.P.size()), a3(inst.P.size());
    for (std::size_t p = 0; p < inst.P.size(); ++p) {
      a2[p] = cplx(u(rng), u(rng));
      a3[p] = cplx(u(rng), u(rng));
    }
    const auto got = a3sharp_all(inst.P, inst.Q, a2, a3, sharp);
    for (std::size_t q = 0; q < inst.Q.size(); ++q) {
      cplx expect = 0;
      for (std::size_t p = 0; p < inst.P.size(); ++p) {
        if (!related_oracle(inst.Q[q], inst.P[p], sharp)) continue;
        ++related;
        expect += a2[p] * a3[p] *
                  pair_packets(make_wave_packet(inst.Q[q].tile(2)), make_wave_packet(inst.P[p].tile(0))) /
                  std::sqrt(to_double(inst.P[p].I.length()));
      }
      EXPECT_LT(std::abs(got[q] - expect), 1e-12 * (1 + std::abs(expect)));
    }
  }
  EXPECT_GT(related, 10u);
}

TEST(SharpRelation, AgreesWithOracleAndScaleGap) {
  std::size_t related = 0;
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    PQParams prm;
    prm.sharp = 2 + static_cast<int>(seed % 3);
    const auto inst = generate_pq_instance(seed, prm);
    for (auto& Q : inst.Q)
      for (auto& P : inst.P) {
        const bool rel = sharp_related(Q, P, prm.sharp);
        ASSERT_EQ(rel, related_oracle(Q, P, prm.sharp));
        related += rel;
      }
  }
  EXPECT_GT(related, 0u);
}

TEST(BSharp, EmptyQCollectionIsZeroFunction) {
  const auto r = find_related_pair(3, 3);
  const auto B = bsharp_sampled(r.inst.P[r.p], {}, {}, {}, 3, packet_grid(r.inst.P[r.p]));
  for (auto& v : B.v) EXPECT_EQ(v, cplx(0.0));
}

TEST(BSharp, SingleTermNormEqualsCoefficient) {
  const auto r = find_related_pair(3, 3);
  const TriTile& Q = r.inst.Q[r.q];
  const cplx a1(0.3, -1.1), a2(-0.7, 0.2);
  const Rat L = Q.I.length();
  const SampleGrid grid{Q.I.center() - Rat(128) * L, L / 64, 16384};
  const auto B = bsharp_sampled(r.inst.P[r.p], {Q}, {a1}, {a2}, 3, grid);
  const double coef = std::abs(inv_sqrt_len(Q) * a1 * a2);
  EXPECT_NEAR(l2_sampled(B.v, grid.h) / coef, 1.0, 1e-6);
}

TEST(BSharp, OutputSpectrumInsidePFrequencyInterval) {
  std::size_t checked = 0;
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    PQParams prm;
    prm.sharp = 2 + static_cast<int>(seed % 2);
    const auto inst = generate_pq_instance(seed, prm);
    for (auto& P : inst.P)
      for (auto& Q : inst.Q) {
        if (!sharp_related(Q, P, prm.sharp)) continue;
        const auto q3 = make_wave_packet(Q.tile(2));
        EXPECT_GE(q3.freq_lo(), P.w[0].lo());
        EXPECT_LE(q3.freq_hi(), P.w[0].hi());
        ++checked;
      }
  }
  EXPECT_GT(checked, 0u);
}

// ---------------------------------------------------------------------------
// The model form in both summation orders.

TEST(LambdaSharp, EmptyCollectionsGiveZero) {
  const auto r = find_related_pair(1, 3);
  const auto f = random_indicators(5);
  EXPECT_EQ(lambda_sharp({}, r.inst.Q, f, 3).via_a3, cplx(0.0));
  EXPECT_EQ(lambda_sharp(r.inst.P, {}, f, 3).via_b, cplx(0.0));
}

TEST(LambdaSharp, RankOneViolationRejected) {
  const TriTile A(iv(0, 0), {iv(0, 0, 0), iv(0, 5, 1), iv(0, 9, 2)});
  const TriTile B(iv(0, 0), {iv(0, 0, 0), iv(0, 6, 1), iv(0, 12, 2)});
  EXPECT_THROW(lambda_sharp({A, B}, {}, random_indicators(1), 3), InvalidArgument);
  EXPECT_THROW(lambda_sharp({}, {A, B}, random_indicators(1), 3), InvalidArgument);
}

TEST(LambdaSharp, SummationOrdersAgree) {
  std::size_t nonzero = 0;
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    PQParams prm;
    prm.sharp = 2 + static_cast<int>(seed % 2);
    const auto inst = generate_pq_instance(1000 + seed, prm);
    const auto res = lambda_sharp(inst.P, inst.Q, random_indicators(2000 + seed), prm.sharp);
    EXPECT_FALSE(res.flagged);
    EXPECT_LE(res.rel_diff, 1e-8) << "seed " << seed;
    nonzero += std::abs(res.via_a3) > 1e-12;
  }
  EXPECT_GT(nonzero, 0u);
}

TEST(LambdaSharp, LinearInSecondFunction) {
  PQParams prm;
  const auto inst = generate_pq_instance(1001, prm);
  auto f = random_indicators(2001);
  const cplx base = lambda_sharp_reversed(inst.P, inst.Q, form_coefficients(inst.P, inst.Q, f), prm.sharp);
  const cplx lam(2, -3);
  auto& g = std::get<StepFunction>(f[1]);
  for (auto& v : g.values) v *= lam;
  const cplx scaled = lambda_sharp_reversed(inst.P, inst.Q, form_coefficients(inst.P, inst.Q, f), prm.sharp);
  EXPECT_LT(std::abs(scaled - lam * base), 1e-12 * (1 + std::abs(lam * base)));
}

TEST(LambdaSharp, ZeroFunctionsGiveZero) {
  PQParams prm;
  const auto inst = generate_pq_instance(1001, prm);
  std::array<TestFunction, 4> f{StepFunction{}, StepFunction{}, StepFunction{}, StepFunction{}};
  const auto res = lambda_sharp(inst.P, inst.Q, f, prm.sharp);
  EXPECT_EQ(res.via_a3, cplx(0.0));
  EXPECT_EQ(res.via_b, cplx(0.0));
}

// ---------------------------------------------------------------------------
// Weighted aggregate over ell and #.

TEST(Aggregate, ZeroFormsGiveZero) {
  const auto r = lambda_aggregate({{1, 0.0}, {2, 0.0}, {5, 0.0}}, 4);
  EXPECT_EQ(r.value, cplx(0.0));
  EXPECT_TRUE(r.chain_ok);
}

TEST(Aggregate, GrowthAtHalfPowerMatchesGeometricSums) {
  for (int M : {1, 3, 10}) {
    std::vector<std::pair<int, cplx>> in;
    double expect = 0;
    for (int s = 1; s <= 30; ++s) {
      in.push_back({s, cplx(std::pow(2.0, s / 2.0))});
      const double q = std::pow(2.0, -(s + 1));
      expect += std::pow(2.0, s / 2.0) * q * (1 - std::pow(q, M)) / (1 - q);
    }
    const auto r = lambda_aggregate(in, M);
    EXPECT_NEAR(r.value.real() / expect, 1.0, 1e-10);
    EXPECT_NEAR(r.weight_growth / expect, 1.0, 1e-10);
    EXPECT_TRUE(r.chain_ok);
  }
}

TEST(Aggregate, BoundUniformInM) {
  double limit = 0;
  for (int s = 1; s <= 40; ++s) {
    const double q = std::pow(2.0, -(s + 1));
    limit += std::pow(2.0, s / 2.0) * q / (1 - q);
  }
  double prev = 0;
  for (int M = 1; M <= 60; ++M) {
    std::vector<std::pair<int, cplx>> in;
    for (int s = 1; s <= 40; ++s) in.push_back({s, cplx(0, std::pow(2.0, s / 2.0))});
    const auto r = lambda_aggregate(in, M);
    EXPECT_GE(r.weight_growth, prev);
    EXPECT_LE(r.weight_growth, limit * (1 + 1e-12));
    prev = r.weight_growth;
  }
  EXPECT_THROW(lambda_aggregate({}, 0), InvalidArgument);
}

TEST(Aggregate, ChainHoldsForRandomForms) {
  boost::random::mt19937_64 rng(4);
  boost::random::uniform_real_distribution<double> u(-1, 1);
  for (int t = 0; t < 200; ++t) {
    std::vector<std::pair<int, cplx>> in;
    for (int s = 1; s <= 12; ++s) in.push_back({s, cplx(u(rng), u(rng)) * std::pow(2.0, 3 * u(rng))});
    const auto r = lambda_aggregate(in, 1 + t % 7);
    EXPECT_TRUE(r.chain_ok);
    EXPECT_LE(std::abs(r.value), r.abs_sum * (1 + 1e-12));
  }
}

// ---------------------------------------------------------------------------
// Continuous form by lattice quadrature.

namespace {

PacketSum packet_at(long k, long n, cplx coef) {
  return single(Tile(DyadicInterval(0, BigInt(k), 0), DyadicInterval(0, BigInt(n), 0)), coef);
}

// prod f_i(x) integrated by the rectangle rule on [-80, 80] with step 1/256.
cplx product_oracle(const std::array<PacketSum, 4>& f, const std::vector<int>& which) {
  const Rat h(1, 256), x0(-80);
  const std::size_t N = 160 * 256;
  std::vector<cplx> prod(N, 1.0);
  for (int i : which) {
    auto v = f[i].packets[0].sample(x0, h, N);
    for (std::size_t m = 0; m < N; ++m) prod[m] *= f[i].coeffs[0] * v[m];
  }
  cplx s = 0;
  for (auto& v : prod) s += v;
  return s * to_double(h);
}

}  // namespace

TEST(ContinuousForm, ConstantSymbolsGivePointwiseProduct) {
  const std::array<PacketSum, 4> f{packet_at(0, 1, {0.5, 1}), packet_at(1, -3, {1, -0.2}), packet_at(-1, 2, 1.0),
                                   packet_at(0, -2, {0, 1})};
  const auto res = continuous_form(symbol_one(), symbol_one(), f, Rat(1, 128));
  const cplx oracle = product_oracle(f, {0, 1, 2, 3});
  ASSERT_GT(std::abs(oracle), 1e-4);
  EXPECT_LT(std::abs(res.value - oracle) / std::abs(oracle), 1e-6);
  EXPECT_FALSE(res.flagged);
}

TEST(ContinuousForm, ZeroFourthFunctionGivesZero) {
  const std::array<PacketSum, 4> f{packet_at(0, 1, 1.0), packet_at(0, -1, 1.0), packet_at(0, 0, 1.0), PacketSum{}};
  EXPECT_EQ(continuous_form(symbol_chi(), symbol_sign(), f, Rat(1, 64)).value, cplx(0.0));
}

TEST(ContinuousForm, HalfPlaneSymbolMatchesSpatialProductPath) {
  // m1 = chi_{xi1 < xi2}, m2 = 1: pair the frequency-side sum over (xi1, xi2) with the transform of f3 f4
  // taken by spatial quadrature instead of a lattice convolution.
  const std::array<PacketSum, 4> f{packet_at(0, 0, 1.0), packet_at(1, 0, {0.3, 0.8}), packet_at(0, 1, {1, 1}),
                                   packet_at(-1, -2, 1.0)};
  const Rat dv(1, 64);
  const double d = to_double(dv);
  const auto res = continuous_form(symbol_chi(), symbol_one(), f, dv);

  const Rat h(1, 256), x0(-80);
  const std::size_t N = 160 * 256;
  auto v3 = f[2].packets[0].sample(x0, h, N), v4 = f[3].packets[0].sample(x0, h, N);
  std::vector<cplx> g(N);
  for (std::size_t m = 0; m < N; ++m) g[m] = f[2].coeffs[0] * v3[m] * f[3].coeffs[0] * v4[m];
  auto hhat = [&](double eta) {
    cplx s = 0;
    for (std::size_t m = 0; m < N; ++m) {
      const double x = to_double(x0) + static_cast<double>(m) * to_double(h);
      s += g[m] * std::exp(cplx(0, -2 * kPi * x * eta));
    }
    return s * to_double(h);
  };
  const auto lat = [&](const PacketSum& p) {
    return std::pair<long, long>{floor_rat(p.packets[0].freq_lo() / dv).get_si(), ceil_rat(p.packets[0].freq_hi() / dv).get_si()};
  };
  const auto [a1, b1] = lat(f[0]);
  const auto [a2, b2] = lat(f[1]);
  std::map<long, cplx> hcache;
  cplx sum = 0;
  for (long n1 = a1; n1 <= b1; ++n1)
    for (long n2 = a2; n2 <= b2; ++n2) {
      const cplx w = symbol_chi()(n1 * d, n2 * d) * f[0].fourier(Rat(n1) * dv) * f[1].fourier(Rat(n2) * dv);
      if (w == 0.0) continue;
      auto it = hcache.find(n1 + n2);
      if (it == hcache.end()) it = hcache.emplace(n1 + n2, hhat(-(n1 + n2) * d)).first;
      sum += w * it->second;
    }
  sum *= d * d;
  ASSERT_GT(std::abs(sum), 1e-4);
  EXPECT_LT(std::abs(res.value - sum) / std::abs(sum), 1e-6);
}

// ---------------------------------------------------------------------------
// Dyadic maximal function and exceptional sets.

namespace {

// Level set {M chi_E > lambda} on the 2^-4 cell grid of [0, 2^J), by averaging over every dyadic block.
std::vector<bool> level_set_oracle(const IntervalSet& E, const Rat& lambda, long J) {
  const std::size_t N = std::size_t(1) << (J + 4);
  std::vector<Rat> cell(N);
  for (std::size_t n = 0; n < N; ++n) {
    const Interval c{Rat(static_cast<long>(n), 16), Rat(static_cast<long>(n + 1), 16)};
    cell[n] = E.intersect(IntervalSet({c})).measure() * 16;
  }
  std::vector<bool> out(N, false);
  for (std::size_t w = 1; w <= N; w *= 2)
    for (std::size_t a = 0; a < N; a += w) {
      Rat avg = 0;
      for (std::size_t n = a; n < a + w; ++n) avg += cell[n];
      avg /= static_cast<long>(w);
      if (avg > lambda)
        for (std::size_t n = a; n < a + w; ++n) out[n] = true;
    }
  return out;
}

IntervalSet dilate2(const IntervalSet& E) {
  IntervalSet r;
  for (auto& p : E.pieces()) r.add({2 * p.lo, 2 * p.hi});
  return r;
}

}  // namespace

TEST(Maximal, LevelSetMatchesBlockAveragingOracle) {
  Rng rng(12);
  for (int t = 0; t < 60; ++t) {
    const auto E = random_set(rng, SetParams{});
    for (const Rat& lambda : {Rat(3, 4), Rat(1, 2), Rat(1, 3), Rat(1, 10)}) {
      const long J = 7;  // 2^7 > |E| / lambda for |E| <= 8 and lambda >= 1/10
      const auto oracle = level_set_oracle(E, lambda, J);
      const auto got = maximal_level_set(E, lambda);
      long count = 0;
      for (std::size_t n = 0; n < oracle.size(); ++n) {
        count += oracle[n];
        ASSERT_EQ(got.contains_point(Rat(2 * static_cast<long>(n) + 1, 32)), oracle[n]) << t << " cell " << n;
      }
      Rat expect(count, 16);
      expect.canonicalize();
      EXPECT_EQ(got.measure(), expect);
      EXPECT_LE(got.measure(), E.measure() / lambda);
    }
  }
}

TEST(Maximal, CommutesWithDilationByTwo) {
  Rng rng(13);
  for (int t = 0; t < 30; ++t) {
    const auto E = random_set(rng, SetParams{});
    EXPECT_EQ(maximal_level_set(dilate2(E), Rat(1, 3)), dilate2(maximal_level_set(E, Rat(1, 3))));
  }
}

TEST(ExceptionalSet, EqualUnitSetsGiveEmptyOmega) {
  const IntervalSet U({Interval{Rat(0), Rat(1)}});
  const auto r = exceptional_set({U, U, U, U}, Rat(2), 0);
  EXPECT_TRUE(r.omega.empty());
  EXPECT_EQ(r.major, U);
  EXPECT_TRUE(r.majority_ok);
}

TEST(ExceptionalSet, TinyConstantCoversEverySet) {
  Rng rng(3);
  SetTuple E;
  for (auto& e : E) e = random_set(rng, SetParams{});
  const auto r = exceptional_set(E, Rat(1, 1000), 2);
  for (auto& e : E) EXPECT_EQ(e.minus(r.omega).measure(), Rat(0));
  EXPECT_FALSE(r.majority_ok);
  EXPECT_THROW(exceptional_set(E, Rat(0), 0), InvalidArgument);
  EXPECT_THROW(exceptional_set(E, Rat(1), 4), InvalidArgument);
}

TEST(ExceptionalSet, MeasureWithinBudgetAndMajority) {
  Rng rng(21);
  for (int t = 0; t < 200; ++t) {
    SetTuple E;
    for (auto& e : E) e = random_set(rng, SetParams{});
    const int anchor = t % 4;
    for (const Rat& C : {Rat(1), Rat(8), Rat(20)}) {
      const auto r = exceptional_set(E, C, anchor);
      EXPECT_EQ(r.omega_measure, r.omega.measure());
      EXPECT_LE(r.omega_measure, Rat(4) * E[anchor].measure() / C);
      EXPECT_EQ(r.major, E[anchor].minus(r.omega));
      if (C >= 8) {
        EXPECT_TRUE(r.majority_ok);
      }
    }
  }
}

TEST(Decompose, EmptyOmegaPutsEverythingInClassZero) {
  GeneratorParams g;
  g.count = 20;
  const auto c = generate_rank1_collection(8, g).tiles;
  const auto parts = decompose_by_distance(c, IntervalSet{});
  ASSERT_EQ(parts.size(), 1u);
  EXPECT_EQ(parts.begin()->first, 0);
  EXPECT_EQ(parts.begin()->second.size(), c.size());
}

TEST(Decompose, SevenLengthsAwayIsClassThree) {
  const TriTile T(iv(0, 0), {iv(0, 0, 0), iv(0, 5, 1), iv(0, 9, 2)});
  const auto parts = decompose_by_distance({T}, IntervalSet({Interval{Rat(-7), Rat(8)}}));
  ASSERT_EQ(parts.count(3), 1u);
  EXPECT_EQ(parts.at(3).size(), 1u);
}

TEST(Decompose, PartitionWithExactDistanceClasses) {
  Rng rng(6);
  GeneratorParams g;
  g.count = 40;
  g.spatial_cells_log2 = 4;
  const auto c = generate_rank1_collection(31, g).tiles;
  for (int t = 0; t < 20; ++t) {
    SetParams sp;
    sp.span_log2 = 5;
    sp.origin = Rat(-8);
    sp.max_len_log2 = 4;
    const auto omega = random_set(rng, sp);
    const auto parts = decompose_by_distance(c, omega);
    std::vector<int> seen(c.size(), 0);
    for (auto& [k, idx] : parts)
      for (auto p : idx) {
        ++seen[p];
        const Interval I = c[p].I.interval();
        Rat dist = 0;
        for (auto& piece : omega.pieces())
          if (piece.lo <= I.lo && I.hi <= piece.hi) dist = std::min(I.lo - piece.lo, piece.hi - I.hi);
        const Rat v = 1 + dist / I.length();
        EXPECT_LE(pow2(k), v);
        EXPECT_LT(v, pow2(k + 1));
      }
    for (auto s : seen) EXPECT_EQ(s, 1);
  }
}

// ---------------------------------------------------------------------------
// Modified collections P'(T).

TEST(PPrime, EmptyTreeGivesEmptyCollection) {
  const TriTile A(iv(0, 0), {iv(0, 0, 0), iv(0, 5, 1), iv(0, 9, 2)});
  const auto r = pprime_collection({A}, Tree{0, 0, {}}, {A}, 3);
  EXPECT_TRUE(r.tiles.empty());
  EXPECT_EQ(r.pairs_checked, 0u);
}

TEST(PPrime, SingleTreeMemberReproducesRelatedTiles) {
  const auto rp = find_related_pair(4, 3);
  const Collection Q{rp.inst.Q[rp.q]};
  const auto r = pprime_collection(Q, maximal_tree(Q, 0, 0), rp.inst.P, 3);
  std::size_t related = 0;
  for (auto& P : rp.inst.P) related += related_oracle(Q[0], P, 3);
  EXPECT_EQ(r.tiles.size(), related);
  EXPECT_EQ(r.counterexamples, 0u);
  for (auto& mt : r.tiles) {
    EXPECT_EQ(mt.I_big.length(), pow2(3) * rp.inst.P[mt.p].I.length());
    EXPECT_TRUE(mt.I_big.interval().contains(rp.inst.P[mt.p].I.interval()));
    EXPECT_EQ(mt.omega, Q[0].w[2]);
  }
}

TEST(PPrime, EquivalenceHoldsOnSparseTrees) {
  std::size_t pairs = 0, related = 0;
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    PQParams prm;
    prm.sharp = 2 + static_cast<int>(seed % 3);
    prm.q.freq_scales = {0, 30};
    prm.q.sparse = true;
    prm.q.count = 6;
    const auto inst = generate_pq_instance(seed, prm);
    for (std::size_t top = 0; top < inst.Q.size(); ++top)
      for (int slot : {0, 1}) {
        const Tree T = maximal_tree(inst.Q, top, slot);
        const auto r = pprime_collection(inst.Q, T, inst.P, prm.sharp);
        EXPECT_EQ(r.counterexamples, 0u);
        pairs += r.pairs_checked;
        for (auto q : T.members)
          for (auto& P : inst.P) related += related_oracle(inst.Q[q], P, prm.sharp);
      }
  }
  EXPECT_GT(pairs, 0u);
  EXPECT_GT(related, 0u);
}

TEST(PPrime, NonSparseOrThirdSlotTreeRejected) {
  const TriTile A(iv(0, 0), {iv(0, 0, 0), iv(0, 5, 1), iv(0, 9, 2)});
  const TriTile B(iv(-1, 0), {iv(1, 0, 0), iv(1, 2, 1), iv(1, 4, 2)});
  const Collection Q{A, B};
  ASSERT_TRUE(tile_le(B.tile(0), A.tile(0)));
  EXPECT_THROW(pprime_collection(Q, Tree{0, 0, {0, 1}}, {}, 3), InvalidArgument);
  EXPECT_THROW(pprime_collection(Q, Tree{0, 2, {0}}, {}, 3), InvalidArgument);
}

// ---------------------------------------------------------------------------
// Restricted-type inputs.

TEST(RestrictedType, SignedIndicatorsStayInX) {
  Rng rng(2);
  for (int t = 0; t < 100; ++t) {
    const auto E = random_set(rng, SetParams{});
    std::vector<int> signs;
    for (std::size_t m = 0; m < E.pieces().size(); ++m) signs.push_back((rng() & 1) ? 1 : -1);
    const auto f = signed_indicator(E, signs);
    EXPECT_TRUE(in_x_of(f, E));
    EXPECT_LE(E.measure(), Rat(8));
    EXPECT_LE(E.pieces().size(), 8u);
    for (auto& p : E.pieces()) {
      EXPECT_GE(p.lo, Rat(0));
      EXPECT_LE(p.hi, Rat(8));
    }
  }
}

TEST(RestrictedType, MembershipFailures) {
  const IntervalSet E({Interval{Rat(0), Rat(1)}, Interval{Rat(2), Rat(3)}});
  EXPECT_FALSE(in_x_of(StepFunction{{Interval{Rat(0), Rat(1)}}, {cplx(2.0)}}, E));
  EXPECT_FALSE(in_x_of(StepFunction{{Interval{Rat(1, 2), Rat(5, 2)}}, {cplx(0, 1)}}, E));
  EXPECT_TRUE(in_x_of(StepFunction{{Interval{Rat(1, 2), Rat(5, 2)}}, {cplx(0.0)}}, E));
  EXPECT_TRUE(in_x_of(StepFunction{{Interval{Rat(2), Rat(5, 2)}}, {cplx(0.6, 0.8)}}, E));
}

TEST(RestrictedType, ModelConfigRegimeFlag) {
  ModelConfig m;
  EXPECT_FALSE(m.asymptotic_regime());
  m.sharp = 1000;
  EXPECT_TRUE(m.asymptotic_regime());
}
