/** @file modelform.hpp
 *  Discretized model forms Lambda^# and their aggregate, the inner sums B^# and a^{(3),#},
 *  exponent tuples and the vertex polytopes, exceptional sets built from the dyadic maximal
 *  function, the modified collections P'(T), and a frequency-lattice quadrature of the
 *  continuous quadrilinear form. Slots and set indices are 0-based.
 */
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <boost/random/uniform_int_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>

#include "ttlab/intervals.hpp"
#include "ttlab/symbol.hpp"
#include "ttlab/tilenorms.hpp"
#include "ttlab/tiles.hpp"
#include "ttlab/wavepacket.hpp"

namespace ttlab {

// ---------------------------------------------------------------------------
// Exponent tuples and polytopes.

using ExponentTuple = std::array<Rat, 4>;

enum class TupleKind { Good, Bad, Inadmissible };

struct TupleClass {
  TupleKind kind = TupleKind::Inadmissible;
  int bad_index = -1;  // 0-based, only for Bad
};

inline TupleClass admissible(const ExponentTuple& a) {
  Rat s = 0;
  int neg = 0, idx = -1;
  for (int i = 0; i < 4; ++i) {
    s += a[i];
    if (a[i] >= 1) return {};
    if (a[i] < 0) {
      ++neg;
      idx = i;
    }
  }
  if (s != 1 || neg > 1) return {};
  if (neg == 0) return {TupleKind::Good, -1};
  return {TupleKind::Bad, idx};
}

inline const std::array<ExponentTuple, 12>& vertices_d_prime() {
  static const std::array<ExponentTuple, 12> v = [] {
    auto R = [](long p, long q) { return Rat(p, q); };
    std::array<ExponentTuple, 12> a{{
        {R(1, 1), R(1, 2), R(1, 1), R(-3, 2)},
        {R(1, 2), R(1, 1), R(1, 1), R(-3, 2)},
        {R(1, 2), R(1, 1), R(-3, 2), R(1, 1)},
        {R(1, 1), R(1, 2), R(-3, 2), R(1, 1)},
        {R(1, 1), R(-1, 2), R(0, 1), R(1, 2)},
        {R(1, 1), R(-1, 2), R(1, 2), R(0, 1)},
        {R(1, 2), R(-1, 2), R(0, 1), R(1, 1)},
        {R(1, 2), R(-1, 2), R(1, 1), R(0, 1)},
        {R(-1, 2), R(1, 1), R(0, 1), R(1, 2)},
        {R(-1, 2), R(1, 1), R(1, 2), R(0, 1)},
        {R(-1, 2), R(1, 2), R(1, 1), R(0, 1)},
        {R(-1, 2), R(1, 2), R(0, 1), R(1, 1)},
    }};
    for (auto& t : a)
      for (auto& x : t) x.canonicalize();
    return a;
  }();
  return v;
}

inline ExponentTuple swap13(const ExponentTuple& a) { return {a[2], a[1], a[0], a[3]}; }

inline std::array<ExponentTuple, 12> vertices_d_second() {
  std::array<ExponentTuple, 12> r;
  for (int i = 0; i < 12; ++i) r[i] = swap13(vertices_d_prime()[i]);
  return r;
}

enum class Region4 { DPrime, DSecond, D };

namespace detail {

/// Dense exact simplex: maximize c.x subject to A x = b, x >= 0, with Bland's rule.
/// Returns nullopt when infeasible; unbounded problems are not expected here and throw.
inline std::optional<std::pair<Rat, std::vector<Rat>>> exact_lp(std::vector<std::vector<Rat>> A, std::vector<Rat> b,
                                                               const std::vector<Rat>& c) {
  const std::size_t m = A.size(), n = c.size();
  for (std::size_t i = 0; i < m; ++i)
    if (b[i] < 0) {
      for (auto& x : A[i]) x = -x;
      b[i] = -b[i];
    }
  // tableau columns: n originals, m artificials, rhs
  const std::size_t W = n + m + 1;
  std::vector<std::vector<Rat>> T(m, std::vector<Rat>(W, Rat(0)));
  std::vector<std::size_t> basis(m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) T[i][j] = A[i][j];
    T[i][n + i] = 1;
    T[i][W - 1] = b[i];
    basis[i] = n + i;
  }
  auto pivot = [&](std::size_t r, std::size_t col) {
    const Rat p = T[r][col];
    for (auto& x : T[r]) x /= p;
    for (std::size_t i = 0; i < m; ++i) {
      if (i == r || T[i][col] == 0) continue;
      const Rat f = T[i][col];
      for (std::size_t j = 0; j < W; ++j) T[i][j] -= f * T[r][j];
    }
    basis[r] = col;
  };
  auto run = [&](const std::vector<Rat>& cost, std::size_t ncols) {
    while (true) {
      // reduced costs r_j = cost_j - sum_i cost_{basis_i} T[i][j]; enter smallest j with r_j > 0
      std::optional<std::size_t> enter;
      for (std::size_t j = 0; j < ncols && !enter; ++j) {
        Rat rj = cost[j];
        for (std::size_t i = 0; i < m; ++i) rj -= cost[basis[i]] * T[i][j];
        if (rj > 0) enter = j;
      }
      if (!enter) return;
      std::optional<std::size_t> leave;
      Rat best;
      for (std::size_t i = 0; i < m; ++i) {
        if (T[i][*enter] <= 0) continue;
        Rat ratio = T[i][W - 1] / T[i][*enter];
        if (!leave || ratio < best || (ratio == best && basis[i] < basis[*leave])) {
          leave = i;
          best = ratio;
        }
      }
      if (!leave) throw Error("linear program is unbounded");
      pivot(*leave, *enter);
    }
  };
  std::vector<Rat> phase1(n + m, Rat(0));
  for (std::size_t i = 0; i < m; ++i) phase1[n + i] = -1;
  run(phase1, n + m);
  for (std::size_t i = 0; i < m; ++i)
    if (basis[i] >= n && T[i][W - 1] != 0) return std::nullopt;
  // drive zero-level artificials out of the basis where possible
  for (std::size_t i = 0; i < m; ++i) {
    if (basis[i] < n) continue;
    for (std::size_t j = 0; j < n; ++j)
      if (T[i][j] != 0) {
        pivot(i, j);
        break;
      }
  }
  std::vector<Rat> cost(n + m, Rat(0));
  for (std::size_t j = 0; j < n; ++j) cost[j] = c[j];
  for (std::size_t i = 0; i < m; ++i)
    if (basis[i] >= n) cost[basis[i]] = 0;  // redundant rows keep their artificial at zero
  run(cost, n);
  std::vector<Rat> x(n, Rat(0));
  Rat val = 0;
  for (std::size_t i = 0; i < m; ++i)
    if (basis[i] < n) {
      x[basis[i]] = T[i][W - 1];
      val += c[basis[i]] * x[basis[i]];
    }
  return std::make_pair(val, x);
}

/// Affine rank of a point set in R^4.
inline int affine_rank(const std::vector<ExponentTuple>& pts) {
  std::vector<std::array<Rat, 4>> rows;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    std::array<Rat, 4> r;
    for (int k = 0; k < 4; ++k) r[k] = pts[i][k] - pts[0][k];
    rows.push_back(r);
  }
  int rank = 0;
  for (int col = 0; col < 4 && rank < static_cast<int>(rows.size()); ++col) {
    std::size_t piv = rank;
    while (piv < rows.size() && rows[piv][col] == 0) ++piv;
    if (piv == rows.size()) continue;
    std::swap(rows[piv], rows[rank]);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (static_cast<int>(i) == rank || rows[i][col] == 0) continue;
      Rat f = rows[i][col] / rows[rank][col];
      for (int k = 0; k < 4; ++k) rows[i][k] -= f * rows[rank][k];
    }
    ++rank;
  }
  return rank;
}

}  // namespace detail

/// Largest t such that alpha = sum lambda_i v_i with sum lambda = 1 and every lambda_i >= t;
/// nullopt when alpha lies outside the hull.
inline std::optional<Rat> hull_min_weight(const ExponentTuple& alpha, const std::vector<ExponentTuple>& verts) {
  const std::size_t V = verts.size();
  // variables mu_1..mu_V >= 0 and t >= 0 with lambda_i = mu_i + t
  std::vector<std::vector<Rat>> A(4, std::vector<Rat>(V + 1, Rat(0)));
  std::vector<Rat> b(4);
  for (int k = 0; k < 3; ++k) {
    Rat tsum = 0;
    for (std::size_t i = 0; i < V; ++i) {
      A[k][i] = verts[i][k];
      tsum += verts[i][k];
    }
    A[k][V] = tsum;
    b[k] = alpha[k];
  }
  for (std::size_t i = 0; i < V; ++i) A[3][i] = 1;
  A[3][V] = Rat(static_cast<long>(V));
  b[3] = 1;
  std::vector<Rat> c(V + 1, Rat(0));
  c[V] = 1;
  auto r = detail::exact_lp(A, b, c);
  if (!r) return std::nullopt;
  return r->first;
}

/// Strict interior of the convex hull (a point is interior iff it is a combination with all weights positive;
/// the vertex sets span the 3-dimensional hyperplane, checked on first use).
inline bool in_polytope(const ExponentTuple& alpha, Region4 region) {
  Rat s = alpha[0] + alpha[1] + alpha[2] + alpha[3];
  if (s != 1) throw InvalidArgument("exponent tuple must lie on the hyperplane sum = 1");
  static const bool full = [] {
    std::vector<ExponentTuple> v(vertices_d_prime().begin(), vertices_d_prime().end());
    return detail::affine_rank(v) == 3;
  }();
  if (!full) throw Error("vertex set does not span the hyperplane");
  auto inside = [&](const std::array<ExponentTuple, 12>& verts) {
    auto t = hull_min_weight(alpha, std::vector<ExponentTuple>(verts.begin(), verts.end()));
    return t && *t > 0;
  };
  switch (region) {
    case Region4::DPrime:
      return inside(vertices_d_prime());
    case Region4::DSecond:
      return inside(vertices_d_second());
    case Region4::D:
      return inside(vertices_d_prime()) && inside(vertices_d_second());
  }
  return false;
}

// ---------------------------------------------------------------------------
// Set tuples, the dyadic maximal function and exceptional sets.

using SetTuple = std::array<IntervalSet, 4>;

/// f = chi_E times one sign per piece; |f| <= chi_E holds by construction.
inline StepFunction signed_indicator(const IntervalSet& E, const std::vector<int>& signs) {
  StepFunction f;
  for (std::size_t m = 0; m < E.pieces().size(); ++m) {
    f.pieces.push_back(E.pieces()[m]);
    f.values.push_back(m < signs.size() ? cplx(signs[m]) : cplx(1.0));
  }
  return f;
}

/// |f| <= chi_E at every breakpoint midpoint and on every piece of f.
inline bool in_x_of(const StepFunction& f, const IntervalSet& E) {
  for (std::size_t m = 0; m < f.pieces.size(); ++m) {
    if (std::abs(f.values[m]) > 1 + 1e-15) return false;
    if (f.values[m] == 0.0) continue;
    IntervalSet piece({f.pieces[m]});
    if (piece.minus(E).measure() != 0) return false;
  }
  return true;
}

struct SetParams {
  int max_pieces = 8;
  long span_log2 = 3;     // sets live in [origin, origin + 2^span_log2)
  Rat origin = Rat(0);
  long min_len_log2 = -4;  // piece lengths 2^u with u uniform in [min, max]
  long max_len_log2 = 1;
};

/// Union of at most max_pieces dyadic-rational intervals with log-uniform lengths.
inline IntervalSet random_set(Rng& rng, const SetParams& p) {
  boost::random::uniform_int_distribution<int> count(1, p.max_pieces);
  boost::random::uniform_int_distribution<long> ulen(p.min_len_log2, p.max_len_log2);
  IntervalSet E;
  const int n = count(rng);
  for (int i = 0; i < n; ++i) {
    const long u = ulen(rng);
    const long cells = p.span_log2 - u;  // positions on the 2^u lattice
    if (cells < 0) continue;
    BigInt pos = random_bigint_below_pow2(rng, cells);
    Rat lo = p.origin + Rat(pos) * pow2(u);
    E.add({lo, lo + pow2(u)});
  }
  return E;
}

/// {M chi_E > lambda} for the dyadic maximal function, as a union of maximal dyadic intervals.
inline IntervalSet maximal_level_set(const IntervalSet& E, const Rat& lambda) {
  if (lambda <= 0) throw InvalidArgument("level must be positive");
  IntervalSet out;
  if (E.empty() || lambda >= 1) return out;
  const Rat need = E.measure() / lambda;
  long J = 0;
  while (pow2(J) < need) ++J;
  while (pow2(J - 1) >= need) --J;
  std::set<BigInt> tops;
  const Rat L = pow2(J);
  for (auto& p : E.pieces()) {
    BigInt a = floor_rat(p.lo / L), b = ceil_rat(p.hi / L);
    for (BigInt k = a; k < b; ++k) tops.insert(k);
  }
  std::function<void(long, const BigInt&)> rec = [&](long j, const BigInt& k) {
    if (j < -400) throw ResolutionError("set endpoints are not resolved by dyadic intervals");
    const Rat len = pow2(j);
    const Interval I{Rat(k) * len, Rat(k + 1) * len};
    const Rat inside = E.intersect(IntervalSet({I})).measure();
    if (inside == 0) return;
    if (inside > lambda * len) {
      out.add(I);
      return;
    }
    rec(j - 1, 2 * k);
    rec(j - 1, 2 * k + 1);
  };
  for (auto& k : tops) rec(J, k);
  return out;
}

struct ExceptionalSet {
  IntervalSet omega;
  IntervalSet major;       // E_anchor minus omega
  bool majority_ok = false;  // 2|E'| >= |E|
  Rat omega_measure, budget;  // |omega| and the weak-(1,1) bound sum_k |E_anchor| / C
};

/// Omega = union_k {M chi_{E_k} > C |E_k| / |E_anchor|}.
inline ExceptionalSet exceptional_set(const SetTuple& sets, const Rat& C, int anchor) {
  if (C <= 0) throw InvalidArgument("exceptional-set constant must be positive");
  if (anchor < 0 || anchor > 3) throw InvalidArgument("anchor index must be 0..3");
  ExceptionalSet r;
  const Rat Ej = sets[anchor].measure();
  if (Ej == 0) throw InvalidArgument("anchor set has zero measure");
  for (int k = 0; k < 4; ++k) {
    if (sets[k].empty()) continue;
    r.omega = r.omega.unite(maximal_level_set(sets[k], C * sets[k].measure() / Ej));
  }
  r.major = sets[anchor].minus(r.omega);
  r.omega_measure = r.omega.measure();
  r.budget = Rat(4) * Ej / C;
  r.majority_ok = 2 * r.major.measure() >= Ej;
  return r;
}

/// The unique k >= 0 with 2^k <= 1 + dist(I, R \ Omega)/|I| < 2^{k+1}, per tri-tile.
inline std::map<long, std::vector<std::size_t>> decompose_by_distance(const Collection& c, const IntervalSet& omega) {
  std::map<long, std::vector<std::size_t>> out;
  for (std::size_t p = 0; p < c.size(); ++p) {
    const Interval I = c[p].I.interval();
    const Rat v = 1 + omega.dist_to_complement(I) / I.length();
    long k = 0;
    while (pow2(k + 1) <= v) ++k;
    out[k].push_back(p);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Model collections.

struct ModelConfig {
  int sharp = 3;
  int ell = 1;
  int M = 1;
  Rat t = 0, t_prime = 0;
  bool asymptotic_regime() const { return sharp >= 1000; }
};

/// omega_{Q_3} inside omega_{P_1} with scale gap # or # + 1.
inline bool sharp_related(const TriTile& Q, const TriTile& P, int sharp) {
  const long gap = P.freq_scale() - Q.freq_scale();
  if (gap != sharp && gap != sharp + 1) return false;
  return P.w[0].interval().contains(Q.w[2].interval());
}

inline std::vector<std::vector<std::size_t>> sharp_pairs_by_q(const Collection& P, const Collection& Q, int sharp) {
  std::vector<std::vector<std::size_t>> out(Q.size());
  for (std::size_t q = 0; q < Q.size(); ++q)
    for (std::size_t p = 0; p < P.size(); ++p)
      if (sharp_related(Q[q], P[p], sharp)) out[q].push_back(p);
  return out;
}

struct PQParams {
  int sharp = 3;
  GeneratorParams q = [] {
    GeneratorParams g;
    g.count = 6;
    g.freq_scales = {0, 1, 2};
    g.sparse = false;
    g.root_range = 0;
    g.c0_log2 = 2;
    return g;
  }();
  std::array<int, 3> p_shift{1, 2, 0};
  long positions_cap_log2 = 5;  // at most 2^this spatial positions of P per (Q, gap)
};

struct PQInstance {
  Collection P, Q;
  int sharp = 0;
};

/// Q from the rank-1 generator; P holds, for each Q and gap in {#, # + 1}, the P_1 grid interval
/// containing omega_{Q_3} with P_2, P_3 in Whitney position and I_P inside I_Q. Candidates that
/// would break rank 1 in P are dropped.
inline PQInstance generate_pq_instance(std::uint64_t seed, const PQParams& prm) {
  PQInstance inst;
  inst.sharp = prm.sharp;
  inst.Q = generate_rank1_collection(seed, prm.q).tiles;
  Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
  const long g = whitney_offset_factor(prm.q.c0_log2);
  std::vector<std::size_t> group_start;
  for (auto& Qt : inst.Q)
    for (int gap : {prm.sharp, prm.sharp + 1}) {
      const long kP = Qt.freq_scale() + gap;
      const DyadicInterval w1 = containing_interval(kP, prm.p_shift[0], Qt.w[2].center());
      if (!w1.interval().contains(Qt.w[2].interval())) continue;
      const long npos_log2 = std::min<long>(gap, prm.positions_cap_log2);
      std::vector<BigInt> offs;
      if (npos_log2 == gap) {
        for (long r = 0; r < (1L << gap); ++r) offs.emplace_back(r);
      } else {
        std::set<BigInt> pick;
        while (static_cast<long>(pick.size()) < (1L << npos_log2)) pick.insert(random_bigint_below_pow2(rng, gap));
        offs.assign(pick.begin(), pick.end());
      }
      Collection group;
      for (auto& r : offs) {
        BigInt m = (Qt.I.k() << static_cast<mp_bitcnt_t>(gap)) + r;
        group.push_back(whitney_tritile(kP, m, w1.center(), prm.p_shift, g));
      }
      // members of one group share frequencies and scale, so only cross-group pairs can clash
      bool ok = true;
      for (std::size_t a = 0; a < inst.P.size() && ok; ++a)
        for (auto& cand : group)
          if (inst.P[a] == cand || rank1_pair(inst.P[a], cand) || rank1_pair(cand, inst.P[a])) {
            ok = false;
            break;
          }
      if (ok) inst.P.insert(inst.P.end(), group.begin(), group.end());
    }
  return inst;
}

// ---------------------------------------------------------------------------
// Coefficients and forms.

struct PacketCache {
  std::vector<std::array<WavePacket, 3>> pk;
  explicit PacketCache(const Collection& c) {
    pk.reserve(c.size());
    for (auto& P : c) pk.push_back({make_wave_packet(P.tile(0)), make_wave_packet(P.tile(1)), make_wave_packet(P.tile(2))});
  }
};

inline double inv_sqrt_len(const TriTile& P) {
  return 1.0 / std::sqrt(std::ldexp(1.0, static_cast<int>(P.I.j())));
}

/// a^{(3),#}_{Q_3} = sum_{P related} |I_P|^{-1/2} a^{(2)}_{P_2} a^{(3)}_{P_3} <Phi_{Q_3}, Phi_{P_1}>, for every Q.
inline std::vector<cplx> a3sharp_all(const Collection& P, const Collection& Q, const std::vector<cplx>& aP2,
                                     const std::vector<cplx>& aP3, int sharp) {
  PacketCache cp(P), cq(Q);
  auto rel = sharp_pairs_by_q(P, Q, sharp);
  std::vector<cplx> out(Q.size(), 0.0);
  for (std::size_t q = 0; q < Q.size(); ++q)
    for (auto p : rel[q])
      out[q] += inv_sqrt_len(P[p]) * aP2[p] * aP3[p] * pair_packets(cq.pk[q][2], cp.pk[p][0]);
  return out;
}

/// a^{(3),#} for one tile Q_3 of a collection entry.
inline cplx a3sharp(const TriTile& Q, const Collection& P, const TestFunction& f3, const TestFunction& f4, int sharp) {
  const WavePacket q3 = make_wave_packet(Q.tile(2));
  cplx s = 0;
  for (auto& Pt : P) {
    if (!sharp_related(Q, Pt, sharp)) continue;
    s += inv_sqrt_len(Pt) * pair(f3, make_wave_packet(Pt.tile(1))) * pair(f4, make_wave_packet(Pt.tile(2))) *
         pair_packets(q3, make_wave_packet(Pt.tile(0)));
  }
  return s;
}

/// Upper bound sum over related P of |I_P|^{-1/2} |a2| |a3| |<Phi_Q3, Phi_P1>|.
inline double a3sharp_triangle_bound(const TriTile& Q, const Collection& P, const TestFunction& f3,
                                     const TestFunction& f4, int sharp) {
  const WavePacket q3 = make_wave_packet(Q.tile(2));
  double s = 0;
  for (auto& Pt : P) {
    if (!sharp_related(Q, Pt, sharp)) continue;
    s += inv_sqrt_len(Pt) * std::abs(pair(f3, make_wave_packet(Pt.tile(1)))) *
         std::abs(pair(f4, make_wave_packet(Pt.tile(2)))) * std::abs(pair_packets(q3, make_wave_packet(Pt.tile(0))));
  }
  return s;
}

/// Standard sampling grid for pairings against Phi_{P_1}: radius 128|I_P|, 64 samples per |I_P|.
struct SampleGrid {
  Rat x0, h;
  std::size_t count = 0;
};
inline SampleGrid packet_grid(const TriTile& P) {
  const Rat L = P.I.length();
  return {P.I.center() - Rat(128) * L, L / 64, 16384};
}

/// B^#_{P_1}(f_1, f_2) sampled on a grid, from precomputed Q coefficients.
inline SampledFunction bsharp_sampled(const TriTile& P, const Collection& Q, const std::vector<cplx>& aQ1,
                                      const std::vector<cplx>& aQ2, int sharp, const SampleGrid& grid) {
  SampledFunction B{grid.x0, grid.h, std::vector<cplx>(grid.count, 0.0)};
  for (std::size_t q = 0; q < Q.size(); ++q) {
    if (!sharp_related(Q[q], P, sharp)) continue;
    const cplx coef = inv_sqrt_len(Q[q]) * aQ1[q] * aQ2[q];
    if (coef == 0.0) continue;
    auto s = make_wave_packet(Q[q].tile(2)).sample(grid.x0, grid.h, grid.count);
    for (std::size_t n = 0; n < grid.count; ++n) B.v[n] += coef * s[n];
  }
  return B;
}

inline SampledFunction bsharp(const TriTile& P, const Collection& Q, const TestFunction& f1, const TestFunction& f2,
                              int sharp, const SampleGrid& grid) {
  std::vector<cplx> a1(Q.size(), 0.0), a2(Q.size(), 0.0);
  for (std::size_t q = 0; q < Q.size(); ++q) {
    if (!sharp_related(Q[q], P, sharp)) continue;
    a1[q] = pair(f1, make_wave_packet(Q[q].tile(0)));
    a2[q] = pair(f2, make_wave_packet(Q[q].tile(1)));
  }
  return bsharp_sampled(P, Q, a1, a2, sharp, grid);
}

struct LambdaSharpResult {
  cplx via_b = 0;       // sum over P with <B^#_{P_1}, Phi_{P_1}> paired in space
  cplx via_a3 = 0;      // sum over Q with a^{(3),#} from frequency-domain pairings
  double rel_diff = 0;
  bool flagged = false;  // some sampled pairing left its certified window
};

struct FormCoefficients {
  std::vector<cplx> aQ1, aQ2, aP2, aP3;
};

inline FormCoefficients form_coefficients(const Collection& P, const Collection& Q,
                                          const std::array<TestFunction, 4>& f) {
  FormCoefficients c;
  c.aQ1 = field_from_pairings(Q, 0, f[0]).values;
  c.aQ2 = field_from_pairings(Q, 1, f[1]).values;
  c.aP2 = field_from_pairings(P, 1, f[2]).values;
  c.aP3 = field_from_pairings(P, 2, f[3]).values;
  return c;
}

/// Reversed-order evaluation sum_Q |I_Q|^{-1/2} a1 a2 a^{(3),#}.
inline cplx lambda_sharp_reversed(const Collection& P, const Collection& Q, const FormCoefficients& c, int sharp) {
  auto a3 = a3sharp_all(P, Q, c.aP2, c.aP3, sharp);
  cplx s = 0;
  for (std::size_t q = 0; q < Q.size(); ++q) s += inv_sqrt_len(Q[q]) * c.aQ1[q] * c.aQ2[q] * a3[q];
  return s;
}

inline LambdaSharpResult lambda_sharp(const Collection& P, const Collection& Q, const std::array<TestFunction, 4>& f,
                                      int sharp) {
  if (auto v = check_rank1(P)) throw InvalidArgument("P collection is not rank 1: " + v->describe());
  if (auto v = check_rank1(Q)) throw InvalidArgument("Q collection is not rank 1: " + v->describe());
  LambdaSharpResult r;
  if (P.empty() || Q.empty()) return r;
  const FormCoefficients c = form_coefficients(P, Q, f);
  for (std::size_t p = 0; p < P.size(); ++p) {
    if (c.aP2[p] == 0.0 || c.aP3[p] == 0.0) continue;
    bool any = false;
    for (auto& Qt : Q) any = any || sharp_related(Qt, P[p], sharp);
    if (!any) continue;
    auto B = bsharp_sampled(P[p], Q, c.aQ1, c.aQ2, sharp, packet_grid(P[p]));
    auto pr = pair_sampled(B, make_wave_packet(P[p].tile(0)));
    r.flagged = r.flagged || pr.flagged;
    r.via_b += inv_sqrt_len(P[p]) * pr.value * c.aP2[p] * c.aP3[p];
  }
  r.via_a3 = lambda_sharp_reversed(P, Q, c, sharp);
  const double scale = std::max(std::abs(r.via_b), std::abs(r.via_a3));
  r.rel_diff = scale > 0 ? std::abs(r.via_b - r.via_a3) / scale : 0.0;
  return r;
}

/// sum_{ell=1}^{M} 2^{-(#+1) ell} in closed form.
inline double aggregate_weight(int sharp, int M) {
  const double r = std::ldexp(1.0, -(sharp + 1));
  return r * (1 - std::pow(r, M)) / (1 - r);
}

struct AggregateResult {
  cplx value = 0;
  double abs_sum = 0;      // sum w |Lambda^#|
  double chain_bound = 0;  // (sum w 2^{#/2}) max |Lambda^#| 2^{-#/2}
  double weight_growth = 0;  // sum w 2^{#/2}
  bool chain_ok = true;
};

/// Weighted double sum over ell = 1..M and the given # values, with the bound chain audited.
inline AggregateResult lambda_aggregate(const std::vector<std::pair<int, cplx>>& lambda_by_sharp, int M) {
  if (M < 1) throw InvalidArgument("M must be positive");
  AggregateResult r;
  double worst = 0;
  for (auto& [s, v] : lambda_by_sharp) {
    double w = 0;
    for (int ell = 1; ell <= M; ++ell) w += std::ldexp(1.0, -(s + 1) * ell);
    r.value += w * v;
    r.abs_sum += w * std::abs(v);
    r.weight_growth += w * std::pow(2.0, 0.5 * s);
    worst = std::max(worst, std::abs(v) * std::pow(2.0, -0.5 * s));
  }
  r.chain_bound = r.weight_growth * worst;
  const double tol = 1e-12 * (r.chain_bound + 1e-300);
  r.chain_ok = std::abs(r.value) <= r.abs_sum + tol && r.abs_sum <= r.chain_bound + tol;
  return r;
}

// ---------------------------------------------------------------------------
// Modified collections P'(T).

struct ModifiedTriTile {
  std::size_t p = 0;       // index into P
  std::size_t q_star = 0;  // index into Q of the tree member supplying omega_{Q*_3}
  DyadicInterval I_big;    // dyadic interval of length 2^# |I_P| containing I_P
  DyadicInterval omega;    // omega_{Q*_3}
};

struct PPrimeResult {
  std::vector<ModifiedTriTile> tiles;
  std::size_t pairs_checked = 0;
  std::size_t counterexamples = 0;
  std::size_t edge_vanishing = 0;  // related pairs with 0.9 omega_{Q_3} outside 0.9 omega_{P_1}
};

/// Builds P'(T) and checks, for every Q in T and P in P, that sharp_related(Q, P) holds iff some
/// modified tile built from P has frequency support meeting that of Phi_{Q_3}.
inline PPrimeResult pprime_collection(const Collection& Q, const Tree& T, const Collection& P, int sharp) {
  if (T.slot != 0 && T.slot != 1) throw InvalidArgument("P'(T) needs a tree in slot 0 or 1");
  if (!is_tree(Q, T)) throw InvalidArgument("T is not a tree of the collection");
  Collection members;
  for (auto m : T.members) members.push_back(Q[m]);
  if (!is_sparse_tritiles(members)) throw InvalidArgument("T is not sparse");
  PPrimeResult r;
  for (std::size_t p = 0; p < P.size(); ++p) {
    BigInt kb;
    mpz_fdiv_q_2exp(kb.get_mpz_t(), P[p].I.k().get_mpz_t(), static_cast<mp_bitcnt_t>(sharp));
    const DyadicInterval Ibig(P[p].I.j() + sharp, kb, 0);
    for (auto q : T.members)
      if (sharp_related(Q[q], P[p], sharp)) r.tiles.push_back({p, q, Ibig, Q[q].w[2]});
  }
  const Rat nine_tenths(9, 10);
  for (auto q : T.members) {
    const Interval supp_q = Q[q].w[2].dilate(nine_tenths);
    for (std::size_t p = 0; p < P.size(); ++p) {
      ++r.pairs_checked;
      const bool lhs = sharp_related(Q[q], P[p], sharp);
      bool rhs = false;
      for (auto& mt : r.tiles) {
        if (mt.p != p) continue;
        const Interval s = mt.omega.interval();
        if (s.lo < supp_q.hi && supp_q.lo < s.hi) {
          rhs = true;
          break;
        }
      }
      if (lhs != rhs) ++r.counterexamples;
      if (lhs && !P[p].w[0].dilate(nine_tenths).intersects(supp_q)) ++r.edge_vanishing;
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Continuous form by frequency-lattice quadrature.

struct ContinuousFormResult {
  cplx value = 0;
  cplx coarse = 0;  // same sum on the even sub-lattice
  double rel_diff = 0;
  bool flagged = false;
  std::size_t lattice_points = 0;
};

namespace detail {

struct LatticeFn {
  long n0 = 0;
  std::vector<cplx> v;
  cplx at(long n) const {
    const long i = n - n0;
    return (i < 0 || i >= static_cast<long>(v.size())) ? cplx(0.0) : v[static_cast<std::size_t>(i)];
  }
};

inline LatticeFn lattice_fourier(const PacketSum& f, const Rat& dv, const std::optional<Interval>& window) {
  LatticeFn F;
  if (f.packets.empty()) return F;
  Rat lo = f.packets[0].freq_lo(), hi = f.packets[0].freq_hi();
  for (auto& p : f.packets) {
    lo = std::min(lo, p.freq_lo());
    hi = std::max(hi, p.freq_hi());
  }
  if (window) {
    lo = std::max(lo, window->lo);
    hi = std::min(hi, window->hi);
    if (!(lo < hi)) return F;
  }
  const BigInt a = floor_rat(lo / dv), b = ceil_rat(hi / dv);
  F.n0 = a.get_si();
  for (BigInt n = a; n <= b; ++n) {
    const Rat xi = Rat(n) * dv;
    F.v.push_back(window && !window->contains_point(xi) ? cplx(0.0) : f.fourier(xi));
  }
  return F;
}

}  // namespace detail

/// int over xi_1 + xi_2 + xi_3 + xi_4 = 0 of m1(xi_1, xi_2) m2(xi_2, xi_3) prod hat f_i(xi_i), summed on the
/// lattice dv Z^3. The even sub-lattice sum is the resolution check. Test functions are band-limited;
/// an optional window projects each hat f_i onto it.
inline ContinuousFormResult continuous_form(const SingularSymbol& m1, const SingularSymbol& m2,
                                            const std::array<PacketSum, 4>& f, const Rat& dv, double tol = 1e-8,
                                            const std::optional<Interval>& window = std::nullopt) {
  if (dv <= 0) throw InvalidArgument("lattice spacing must be positive");
  std::array<detail::LatticeFn, 4> F;
  for (int i = 0; i < 4; ++i) F[i] = detail::lattice_fourier(f[i], dv, window);
  ContinuousFormResult r;
  for (auto& x : F) r.lattice_points += x.v.size();
  for (auto& x : F)
    if (x.v.empty()) return r;
  const double d = to_double(dv);
  auto xi = [&](long n) { return static_cast<double>(n) * d; };
  const long n1a = F[0].n0, n1b = F[0].n0 + static_cast<long>(F[0].v.size());
  const long n2a = F[1].n0, n2b = F[1].n0 + static_cast<long>(F[1].v.size());
  const long n3a = F[2].n0, n3b = F[2].n0 + static_cast<long>(F[2].v.size());
  cplx fine = 0, coarse = 0;
  auto even = [](long n) { return (n & 1) == 0; };
  if (m1.constant) {
    // S(s) = sum_{n1} F1(n1) F4(-n1 - s), s = n2 + n3
    const long sa = n2a + n3a, sb = n2b + n3b;
    std::vector<cplx> S(static_cast<std::size_t>(sb - sa), 0.0), Se(S.size(), 0.0);
    for (long s = sa; s < sb; ++s)
      for (long n1 = n1a; n1 < n1b; ++n1) {
        const cplx t = F[0].at(n1) * F[3].at(-n1 - s);
        S[static_cast<std::size_t>(s - sa)] += t;
        if (even(n1)) Se[static_cast<std::size_t>(s - sa)] += t;
      }
    const cplx c1 = m1(0.0, 0.0);
    for (long n2 = n2a; n2 < n2b; ++n2)
      for (long n3 = n3a; n3 < n3b; ++n3) {
        const cplx w = m2(xi(n2), xi(n3)) * F[1].at(n2) * F[2].at(n3);
        fine += w * S[static_cast<std::size_t>(n2 + n3 - sa)];
        if (even(n2) && even(n3)) coarse += w * Se[static_cast<std::size_t>(n2 + n3 - sa)];
      }
    fine *= c1;
    coarse *= c1;
  } else if (m2.constant) {
    const long sa = n1a + n2a, sb = n1b + n2b;
    std::vector<cplx> S(static_cast<std::size_t>(sb - sa), 0.0), Se(S.size(), 0.0);
    for (long s = sa; s < sb; ++s)
      for (long n3 = n3a; n3 < n3b; ++n3) {
        const cplx t = F[2].at(n3) * F[3].at(-n3 - s);
        S[static_cast<std::size_t>(s - sa)] += t;
        if (even(n3)) Se[static_cast<std::size_t>(s - sa)] += t;
      }
    const cplx c2 = m2(0.0, 0.0);
    for (long n1 = n1a; n1 < n1b; ++n1)
      for (long n2 = n2a; n2 < n2b; ++n2) {
        const cplx w = m1(xi(n1), xi(n2)) * F[0].at(n1) * F[1].at(n2);
        fine += w * S[static_cast<std::size_t>(n1 + n2 - sa)];
        if (even(n1) && even(n2)) coarse += w * Se[static_cast<std::size_t>(n1 + n2 - sa)];
      }
    fine *= c2;
    coarse *= c2;
  } else {
    for (long n2 = n2a; n2 < n2b; ++n2) {
      const cplx f2 = F[1].at(n2);
      if (f2 == 0.0) continue;
      for (long n1 = n1a; n1 < n1b; ++n1) {
        const cplx a = m1(xi(n1), xi(n2)) * F[0].at(n1) * f2;
        if (a == 0.0) continue;
        for (long n3 = n3a; n3 < n3b; ++n3) {
          const cplx t = a * m2(xi(n2), xi(n3)) * F[2].at(n3) * F[3].at(-n1 - n2 - n3);
          fine += t;
          if (even(n1) && even(n2) && even(n3)) coarse += t;
        }
      }
    }
  }
  r.value = fine * d * d * d;
  r.coarse = coarse * (8 * d * d * d);
  const double scale = std::max(std::abs(r.value), std::abs(r.coarse));
  r.rel_diff = scale > 0 ? std::abs(r.value - r.coarse) / scale : 0.0;
  r.flagged = r.rel_diff > tol;
  return r;
}

}  // namespace ttlab
