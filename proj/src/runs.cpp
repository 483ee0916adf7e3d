// The registered experiments. Every body draws its randomness from (seed, trial index) so the
// numbers do not depend on evaluation order.
#include "runs.hpp"

#include <algorithm>
#include <boost/random/normal_distribution.hpp>
#include <cmath>
#include <cstdio>
#include <limits>
#include <set>

#include "ttlab/modelform.hpp"
#include "ttlab/symbol.hpp"
#include "ttlab/tilenorms.hpp"

namespace ttlab::runs {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t k) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (k + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::vector<long> parse_list(const std::string& s) {
  std::vector<long> out;
  std::size_t pos = 0;
  while (pos < s.size()) {
    std::size_t end = s.find(',', pos);
    if (end == std::string::npos) end = s.size();
    try {
      out.push_back(std::stol(s.substr(pos, end - pos)));
    } catch (const std::exception&) {
      throw ConfigError("bad integer list: " + s);
    }
    pos = end + 1;
  }
  if (out.empty()) throw ConfigError("empty integer list");
  return out;
}

using Unif = boost::random::uniform_real_distribution<double>;
template <class T>
using UInt = boost::random::uniform_int_distribution<T>;

cplx normal_cplx(Rng& rng) {
  boost::random::normal_distribution<double> nd;
  const double re = nd(rng);
  return {re, nd(rng)};
}

StepFunction random_signed_indicator(Rng& rng, const IntervalSet& E) {
  std::vector<int> signs;
  for (std::size_t m = 0; m < E.pieces().size(); ++m) signs.push_back((rng() & 1) ? 1 : -1);
  return signed_indicator(E, signs);
}

// ---------------------------------------------------------------------------
// 1. Continuous form against the pointwise product.

void oracle_product(const Config& cfg, std::uint64_t seed, Report& r) {
  const int trials = cfg.get<int>("trials");
  const Rat dv = cfg.get_rat("dv");
  const double tol = cfg.get<double>("tol");
  const int nmax = cfg.get<int>("freq_range");
  const Rat h = cfg.get_rat("oracle.h");
  const long radius = cfg.get<long>("oracle.radius");
  const std::size_t N = static_cast<std::size_t>(to_double(Rat(2 * radius) / h));
  const Rat x0(-radius);

  CsvTable t{"oracle_product", {"trial", "form_re", "form_im", "oracle_re", "oracle_im", "rel_err", "lattice_rel"}, {}};
  double worst = 0, worst_lattice = 0;
  int flagged = 0;
  for (int k = 0; k < trials; ++k) {
    Rng rng(mix_seed(seed, k));
    UInt<int> un(-nmax, nmax), um(-2, 2), ud(-1, 1);
    Unif ur(-1, 1);
    int n[4];
    n[0] = un(rng);
    n[1] = un(rng);
    n[2] = un(rng);
    n[3] = -(n[0] + n[1] + n[2]) - 2;  // keeps the four supports able to sum to zero
    std::array<PacketSum, 4> f;
    for (int i = 0; i < 4; ++i)
      for (int m = 0; m < 2; ++m) {
        const int nn = n[i] + (m ? ud(rng) : 0);
        f[i].packets.push_back(
            make_wave_packet(Tile(DyadicInterval(0, BigInt(um(rng)), 0), DyadicInterval(0, BigInt(nn), 0))));
        const double re = ur(rng);
        f[i].coeffs.push_back(cplx(re, ur(rng)));
      }
    const auto res = continuous_form(symbol_one(), symbol_one(), f, dv);
    flagged += res.flagged;
    std::vector<cplx> prod(N, 1.0);
    for (int i = 0; i < 4; ++i) {
      std::vector<cplx> s(N, 0.0);
      for (std::size_t p = 0; p < f[i].packets.size(); ++p) {
        const auto v = f[i].packets[p].sample(x0, h, N);
        for (std::size_t m = 0; m < N; ++m) s[m] += f[i].coeffs[p] * v[m];
      }
      for (std::size_t m = 0; m < N; ++m) prod[m] *= s[m];
    }
    cplx oracle = 0;
    for (auto& v : prod) oracle += v;
    oracle *= to_double(h);
    const double rel = std::abs(res.value - oracle) / std::abs(oracle);
    worst = std::max(worst, rel);
    worst_lattice = std::max(worst_lattice, res.rel_diff);
    t.add({std::to_string(k), num(res.value.real()), num(res.value.imag()), num(oracle.real()), num(oracle.imag()),
           num(rel), num(res.rel_diff)});
  }
  r.constants["max_rel_err"] = worst;
  r.constants["max_lattice_rel_diff"] = worst_lattice;
  r.constants["flagged"] = flagged;
  r.tables.push_back(std::move(t));
  r.check("oracle_identity", worst <= tol,
          "max relative error " + num(worst) + " over " + std::to_string(trials) + " tuples, tolerance " + num(tol));
}

// ---------------------------------------------------------------------------
// 2. Whitney partition of unity.

void partition_of_unity(const Config& cfg, std::uint64_t seed, Report& r) {
  const int points = cfg.get<int>("points");
  const long c0_log2 = cfg.get<long>("c0_log2");
  const long j_lo = cfg.get<long>("j_lo"), j_hi = cfg.get<long>("j_hi");
  const double tol = cfg.get<double>("tol");
  const WhitneyCover cov(c0_log2, j_lo, j_hi);
  Rng rng(seed);
  Unif u(0, 1);
  UInt<long> uk(j_lo + 2, j_hi - 2);
  double worst = 0, min_sum = kInf, max_sum = 0;
  int done = 0, uncertified = 0;
  std::size_t squares = 0;
  while (done < points && uncertified < 20 * points) {
    const long k = uk(rng);
    const double side = std::ldexp(1.0, static_cast<int>(k));
    const double d = cov.c0() * side * (0.5 + 1.5 * u(rng));
    const double x1 = (u(rng) - 0.5) * 64 * side;
    const double diff = (u(rng) < 0.5 ? -1 : 1) * d * std::sqrt(2.0);
    const Rat X1 = from_double(x1), X2 = from_double(x1 + diff);
    if (!cov.certified(X1, X2)) {
      ++uncertified;
      continue;
    }
    double s = 0;
    const auto sq = cov.squares_at(X1, X2);
    squares += sq.size();
    for (auto& Q : sq) s += cov.phi(Q, X1, X2);
    worst = std::max(worst, std::abs(s - 1));
    min_sum = std::min(min_sum, s);
    max_sum = std::max(max_sum, s);
    ++done;
  }
  double on_line = 0;
  for (int k = 0; k < 20; ++k) {
    const Rat X = from_double((u(rng) - 0.5) * 1000);
    for (auto& Q : cov.squares_at(X, X)) on_line += cov.phi(Q, X, X);
  }
  r.constants["max_abs_err"] = worst;
  r.constants["min_sum"] = min_sum;
  r.constants["max_sum"] = max_sum;
  r.constants["points"] = done;
  r.constants["uncertified_skipped"] = uncertified;
  r.constants["mean_squares_per_point"] = done ? static_cast<double>(squares) / done : 0.0;
  r.constants["sum_on_singular_line"] = on_line;
  r.check("partition_of_unity", done == points && worst <= tol,
          std::to_string(done) + " certified points, max |sum phi - 1| = " + num(worst) + ", tolerance " + num(tol));
  r.check("vanishes_on_line", on_line == 0, "sum of phi on the singular line " + num(on_line));
}

// ---------------------------------------------------------------------------
// 3. Fourier coefficient decay on Whitney squares.

void decay_fit(const Config& cfg, std::uint64_t seed, Report& r) {
  const int N = cfg.get<int>("N");
  const int nsq = cfg.get<int>("squares");
  const int nscales = cfg.get<int>("scales");
  const long k_first = cfg.get<long>("first_scale");
  const double order = cfg.get<double>("order");
  const int G = cfg.get<int>("G");
  const int ell_max = cfg.get<int>("ell_max");
  const double factor = cfg.get<double>("factor");
  const WhitneyCover cov(cfg.get<long>("c0_log2"), -40, 40);

  CsvTable coeffs{"decay_coefficients", {"symbol", "square", "j", "n1", "n2", "abs", "re", "im"}, {}};
  CsvTable fits{"decay_fits", {"symbol", "square", "j", "ell", "C", "M_fit", "residual", "C_normalized", "quad_error"}, {}};
  for (const std::string name : {"chi", "power"}) {
    const SingularSymbol sym = builtin_symbol(name);
    Rng rng(mix_seed(seed, name == "chi" ? 1 : 2));
    Unif u(0, 1);
    double cmin = kInf, cmax = 0, ell_spread = 0, norm_spread = 0, mfit_min = kInf;
    for (int i = 0; i < nsq; ++i) {
      const long k = k_first + (i % nscales);
      const double side = std::ldexp(1.0, static_cast<int>(k));
      // chi is constant off the line on each side; use the side where it is 1
      const double sgn = (name == "chi" || u(rng) < 0.5) ? 1.0 : -1.0;
      const double d = cov.c0() * side * (1.0 + u(rng));
      const double x1 = (u(rng) - 0.5) * 64 * side;
      const Rat X1 = from_double(x1), X2 = from_double(x1 + sgn * d);
      const auto cand = cov.squares_at(X1, X2);
      if (cand.empty()) throw ResolutionError("no Whitney square at a sampled point");
      std::size_t best = 0;
      double bp = -1;
      for (std::size_t q = 0; q < cand.size(); ++q) {
        const double p = cov.phi(cand[q], X1, X2);
        if (p > bp) bp = p, best = q;
      }
      const auto& Q = cand[best];
      const SquareSamples S = sample_square(cov, Q, G);
      // sup over supp phi of |xi_b - xi_a| / |Q|, for the normalized Taylor diagnostic
      double span = 0;
      {
        const int G2 = 2 * G;
        const double s = to_double(Q.side());
        const double a1 = to_double(Q.component(0).lo()), a2 = to_double(Q.component(1).lo());
        for (int p = 0; p < G2; ++p)
          for (int q = 0; q < G2; ++q)
            if (S.fine[static_cast<std::size_t>(p) * G2 + q] != 0)
              span = std::max(span, std::abs((a2 + s * q / G2) - (a1 + s * p / G2)) / s);
      }
      const auto T = fourier_table(sym, S, N);
      const auto fit = fit_decay(T, order);
      cmin = std::min(cmin, fit.C);
      cmax = std::max(cmax, fit.C);
      mfit_min = std::min(mfit_min, fit.M_fit);
      fits.add({name, std::to_string(i), std::to_string(Q.j()), "-1", num(fit.C), num(fit.M_fit), num(fit.residual),
                num(fit.C), num(T.quad_error)});
      for (int a = -N; a <= N; ++a)
        for (int b = -N; b <= N; ++b) {
          const cplx v = T.at(a, b);
          coeffs.add({name, std::to_string(i), std::to_string(Q.j()), std::to_string(a), std::to_string(b),
                      num(std::abs(v)), num(v.real()), num(v.imag())});
        }
      double lmin = kInf, lmax = 0, nmin = kInf, nmax = 0;
      for (int ell = 0; ell <= ell_max; ++ell) {
        const auto Tl = fourier_table(sym, S, N, ell);
        const auto fl = fit_decay(Tl, order);
        const double w = std::pow(span, ell) / boost::math::factorial<double>(static_cast<unsigned>(ell));
        lmin = std::min(lmin, fl.C);
        lmax = std::max(lmax, fl.C);
        nmin = std::min(nmin, fl.C / w);
        nmax = std::max(nmax, fl.C / w);
        fits.add({name, std::to_string(i), std::to_string(Q.j()), std::to_string(ell), num(fl.C), num(fl.M_fit),
                  num(fl.residual), num(fl.C / w), num(Tl.quad_error)});
      }
      ell_spread = std::max(ell_spread, lmin > 0 ? lmax / lmin : kInf);
      norm_spread = std::max(norm_spread, nmin > 0 ? nmax / nmin : kInf);
    }
    const double spread = cmin > 0 ? cmax / cmin : kInf;
    r.constants["C_max_" + name] = cmax;
    r.constants["C_min_" + name] = cmin;
    r.constants["C_spread_" + name] = spread;
    r.constants["M_fit_min_" + name] = mfit_min;
    r.constants["taylor_C_spread_" + name] = ell_spread;
    r.constants["taylor_normalized_spread_" + name] = norm_spread;
    const bool ok_n = spread <= factor, ok_l = ell_spread <= factor;
    r.check("decay_uniform_" + name, ok_n,
            "C in [" + num(cmin) + ", " + num(cmax) + "] across " + std::to_string(nsq) + " squares, spread " +
                num(spread) + ", allowed " + num(factor));
    r.check("taylor_uniform_" + name, ok_l,
            "max over squares of C spread across ell <= " + std::to_string(ell_max) + ": " + num(ell_spread) +
                " (after dividing by sup|(xi_b - xi_a)/|Q||^ell/ell!: " + num(norm_spread) + ")");
  }
  r.tables.push_back(std::move(coeffs));
  r.tables.push_back(std::move(fits));
}

// ---------------------------------------------------------------------------
// 4. Fuzzed grid and tile predicates against direct rational oracles.

struct Tally {
  std::size_t checks = 0, failures = 0;
  std::map<std::string, std::size_t> by_kind, fail_by_kind;
  std::vector<std::string> samples;
  void operator()(const std::string& kind, bool ok) {
    ++checks;
    ++by_kind[kind];
    if (!ok) {
      ++failures;
      ++fail_by_kind[kind];
      if (samples.size() < 5) samples.push_back(kind);
    }
  }
};

bool oracle_contains_dilated(const DyadicInterval& outer, const Rat& c, const DyadicInterval& inner) {
  const Rat co = outer.center(), ho = c * outer.length() / 2;
  const Rat ci = inner.center(), hi = c * inner.length() / 2;
  return co - ho <= ci - hi && ci + hi <= co + ho;
}

bool oracle_spatial_subset(const DyadicInterval& a, const DyadicInterval& b) {
  return b.lo() <= a.lo() && a.hi() <= b.hi();
}

bool oracle_lt(const Tile& Pp, const Tile& P) {
  return oracle_spatial_subset(Pp.I, P.I) && !(Pp.I == P.I) && oracle_contains_dilated(Pp.omega, Rat(3), P.omega);
}
bool oracle_lesssim(const Tile& Pp, const Tile& P) {
  return oracle_spatial_subset(Pp.I, P.I) && oracle_contains_dilated(Pp.omega, Rat(10000000), P.omega);
}

/// Sparse pair by the definition: scales 10^9 apart, or the 10^9-dilations disjoint in some coordinate.
bool oracle_sparse_pair(const ShiftedDyadicCube& a, const ShiftedDyadicCube& b) {
  if (a == b) return true;
  const Rat ra = a.side(), rb = b.side();
  const Rat big(1000000000);
  if (ra >= big * rb || rb >= big * ra) return true;
  if (a.j() != b.j()) return false;
  for (std::size_t d = 0; d < a.dim(); ++d) {
    const Interval x = a.component(d).dilate(big), y = b.component(d).dilate(big);
    if (!(x.lo < y.hi && y.lo < x.hi)) return true;
  }
  return false;
}

void tile_invariants(const Config& cfg, std::uint64_t seed, Report& r) {
  const std::size_t target = cfg.get<std::size_t>("checks");
  const int pairs_per_round = cfg.get<int>("pairs_per_round");
  Tally tally;
  Rat lac_min(-1), lac_max(0);
  std::size_t round = 0, lac_families = 0, n_lt = 0, n_lsp = 0;
  while (tally.checks < target) {
    Rng rng(mix_seed(seed, round));
    UInt<long> uj(-2, 2), ud(0, 3), ur(-2, 2), us(0, 2);
    Unif u(0, 1);
    // Random tile pairs, the second one frequently nested in the first.
    for (int q = 0; q < pairs_per_round; ++q) {
      const long j = uj(rng);
      const int s = static_cast<int>(us(rng));
      const BigInt k = random_bigint_below_pow2(rng, 3);
      const BigInt kw = BigInt(ur(rng));
      const Tile P(DyadicInterval(j, k, 0), DyadicInterval(-j, kw, s));
      const long d = ud(rng);
      const long jp = j - d;
      BigInt kp = (u(rng) < 0.7) ? BigInt((k << static_cast<mp_bitcnt_t>(d)) + random_bigint_below_pow2(rng, d))
                                  : random_bigint_below_pow2(rng, 3 + d);
      const Rat target_freq = P.omega.center() + Rat(ur(rng)) * pow2(-jp) * Rat(u(rng) < 0.5 ? 0 : 1);
      const Tile Pp(DyadicInterval(jp, kp, 0), containing_interval(-jp, s, target_freq));
      const bool lt = tile_lt(Pp, P), le = tile_le(Pp, P), ls = tile_lesssim(Pp, P), lsp = tile_lesssim_prime(Pp, P);
      tally("order_lt_oracle", lt == oracle_lt(Pp, P));
      tally("order_lesssim_oracle", ls == oracle_lesssim(Pp, P));
      tally("order_chain", (!lt || le) && (!le || ls));
      tally("order_lesssim_prime", lsp == (ls && !le));
      tally("order_strongest", (tile_order(Pp, P) == TileRelation::Less) == lt);
      n_lt += lt;
      n_lsp += lsp;
    }
    // Generated collections: rank 1, sparseness, tree dichotomy, lacunarity, sparse splitting.
    GeneratorParams gp;
    gp.count = 4 + round % 9;
    if (round % 2) {
      gp.freq_scales = {0, 1, 2, 3};
      gp.sparse = false;
      gp.c0_log2 = 4;
    } else {
      gp.freq_scales = {0, 30, 60};
    }
    const auto g = generate_rank1_collection(mix_seed(seed, round) ^ 0x5bd1e995ULL, gp);
    const Collection& c = g.tiles;
    tally("rank1_collection", !check_rank1(c).has_value());
    for (std::size_t a = 0; a < c.size(); ++a)
      for (std::size_t b = 0; b < c.size(); ++b) {
        if (a == b) continue;
        bool share = false;
        for (int i = 0; i < 3; ++i) share = share || (c[a].I == c[b].I && c[a].w[i] == c[b].w[i]);
        tally("rank1_no_shared_tile", !share);
      }
    std::vector<ShiftedDyadicCube> cubes;
    for (auto& P : c) {
      auto qc = P.cube();
      if (std::find(cubes.begin(), cubes.end(), qc) == cubes.end()) cubes.push_back(qc);
    }
    bool pair_sparse = true;
    for (std::size_t a = 0; a < cubes.size(); ++a)
      for (std::size_t b = a + 1; b < cubes.size(); ++b) pair_sparse = pair_sparse && oracle_sparse_pair(cubes[a], cubes[b]);
    tally("sparse_oracle", is_sparse(cubes) == pair_sparse);
    if (gp.sparse) {
      tally("sparse_generated", is_sparse_tritiles(c));
      for (std::size_t t = 0; t < c.size(); ++t)
        for (int slot = 0; slot < 3; ++slot) {
          const Tree T = maximal_tree(c, t, slot);
          tally("tree_frequency_dichotomy", tree_frequency_dichotomy(c, T));
          if (slot != 0) continue;
          // 1-tree chain toward the third slot and lacunarity of the omega_{Q_3}
          std::vector<Interval> omegas;
          for (auto m : T.members) {
            if (!tile_lt(c[m].tile(0), c[t].tile(0))) continue;
            tally("lacunary_chain_1e7", oracle_contains_dilated(c[m].w[2], Rat(10000000), c[t].w[2]));
            tally("lacunary_chain_3", !oracle_contains_dilated(c[m].w[2], Rat(3), c[t].w[2]));
            omegas.push_back(c[m].w[2].interval());
          }
          if (omegas.empty()) continue;
          // Whitney placement puts omega_{Q_3} at about g|omega| from the first-slot frequency
          const Rat g(whitney_offset_factor(gp.c0_log2));
          const auto lr = check_lacunary(omegas, c[t].w[0].center(), g / 2, 2 * g);
          tally("lacunary_band", lr.ok);
          ++lac_families;
          if (lac_min < 0 || lr.min_ratio < lac_min) lac_min = lr.min_ratio;
          if (lr.max_ratio > lac_max) lac_max = lr.max_ratio;
        }
    } else {
      const auto classes = split_sparse(cubes);
      std::size_t total = 0;
      for (auto& cls : classes) {
        tally("split_sparse_class", is_sparse(cls));
        total += cls.size();
      }
      tally("split_sparse_partition", total == cubes.size());
      tally("split_sparse_bound", BigInt(static_cast<unsigned long>(classes.size())) <= split_sparse_class_bound(3));
    }
    ++round;
  }
  r.constants["checks"] = static_cast<double>(tally.checks);
  r.constants["failures"] = static_cast<double>(tally.failures);
  r.constants["rounds"] = static_cast<double>(round);
  r.constants["lacunary_families"] = static_cast<double>(lac_families);
  r.constants["pairs_strictly_below"] = static_cast<double>(n_lt);
  r.constants["pairs_lesssim_prime"] = static_cast<double>(n_lsp);
  r.constants["lacunary_ratio_min"] = lac_min < 0 ? 0.0 : to_double(lac_min);
  r.constants["lacunary_ratio_max"] = to_double(lac_max);
  CsvTable t{"tile_invariants", {"kind", "checks", "failures"}, {}};
  for (auto& [k, v] : tally.by_kind) t.add({k, std::to_string(v), std::to_string(tally.fail_by_kind[k])});
  r.tables.push_back(std::move(t));
  std::string first;
  for (auto& s : tally.samples) first += (first.empty() ? "" : ", ") + s;
  r.check("tile_invariants", tally.checks >= target && tally.failures == 0,
          std::to_string(tally.checks) + " checks, " + std::to_string(tally.failures) + " failures" +
              (first.empty() ? "" : " (" + first + ")"));
}

// ---------------------------------------------------------------------------
// Shared corpus of small rank-1 collections with genuine trees.

Collection small_collection(std::uint64_t s, std::size_t count) {
  GeneratorParams gp;
  gp.count = count;
  gp.freq_scales = {0, 1, 2, 3};
  gp.sparse = false;
  gp.c0_log2 = 4;
  return generate_rank1_collection(s, gp).tiles;
}

// ---------------------------------------------------------------------------
// 5. Size against exhaustive tree enumeration.

double size_oracle(const CoefficientField& F, const Collection& c) {
  double best = 0;
  for (std::size_t t = 0; t < c.size(); ++t)
    for (int a = 0; a < 3; ++a) {
      if (a == F.slot) continue;
      const Tile top = c[t].tile(a);
      std::vector<double> w;
      for (std::size_t p = 0; p < c.size(); ++p) {
        const Tile x = c[p].tile(a);
        if (x == top || oracle_lt(x, top)) w.push_back(std::norm(F.values[p]));
      }
      const std::size_t n = w.size();
      std::vector<double> mass(std::size_t(1) << n, 0.0);
      for (std::size_t m = 1; m < mass.size(); ++m) {
        const int low = __builtin_ctzll(m);
        mass[m] = mass[m & (m - 1)] + w[low];
        best = std::max(best, mass[m] / to_double(c[t].I.length()));
      }
    }
  return std::sqrt(best);
}

void size_oracle_run(const Config& cfg, std::uint64_t seed, Report& r) {
  const int instances = cfg.get<int>("collections");
  const int max_tiles = cfg.get<int>("max_tiles");
  const double tol = cfg.get<double>("tol");
  double worst = 0, band_lo = kInf, band_hi = 0;
  std::size_t tiles = 0;
  CsvTable t{"size_oracle", {"instance", "tiles", "slot", "size", "oracle", "size_jn", "ratio_jn"}, {}};
  for (int k = 0; k < instances; ++k) {
    Rng rng(mix_seed(seed, k));
    const Collection c = small_collection(mix_seed(seed, k) ^ 0xa5a5ULL, 1 + k % max_tiles);
    tiles += c.size();
    const int slot = static_cast<int>(k % 3);
    const auto F = field_from_tiles(c, slot, [&](const Tile&) { return normal_cplx(rng); });
    const double s = size(F, c), o = size_oracle(F, c), jn = size_jn(F, c);
    const double rel = std::abs(s - o) / std::max(o, 1e-300);
    worst = std::max(worst, rel);
    if (s > 0) {
      band_lo = std::min(band_lo, jn / s);
      band_hi = std::max(band_hi, jn / s);
    }
    t.add({std::to_string(k), std::to_string(c.size()), std::to_string(slot), num(s), num(o), num(jn),
           num(s > 0 ? jn / s : 0.0)});
  }
  r.constants["max_rel_diff"] = worst;
  r.constants["jn_band_lo"] = band_lo;
  r.constants["jn_band_hi"] = band_hi;
  r.constants["mean_tiles"] = static_cast<double>(tiles) / instances;
  r.tables.push_back(std::move(t));
  r.check("size_equals_enumeration", worst <= tol,
          "max relative difference " + num(worst) + " over " + std::to_string(instances) + " collections");
  r.check("jn_band", band_lo > 0 && std::isfinite(band_hi),
          "size_jn / size in [" + num(band_lo) + ", " + num(band_hi) + "]");
}

// ---------------------------------------------------------------------------
// 6. Greedy energy against the exhaustive one, and the L2 audit.

void energy_oracle(const Config& cfg, std::uint64_t seed, Report& r) {
  const int instances = cfg.get<int>("instances");
  const int max_tiles = cfg.get<int>("max_tiles");
  const double slack = cfg.get<double>("audit_slack");
  double worst_ratio = kInf, worst_audit = -kInf, dual_lo = kInf, budget_hi = 0;
  std::size_t violations = 0, invalid = 0, audits = 0;
  CsvTable t{"energy_oracle", {"instance", "tiles", "slot", "greedy", "bruteforce", "ratio", "audit_energy", "f_l2"}, {}};
  for (int k = 0; k < instances; ++k) {
    Rng rng(mix_seed(seed, k));
    const Collection c = small_collection(mix_seed(seed, k) ^ 0x3c3cULL, 1 + k % max_tiles);
    const int slot = static_cast<int>(k % 3);
    const auto F = field_from_tiles(c, slot, [&](const Tile&) { return normal_cplx(rng); });
    const auto g = energy_greedy(F, c);
    const auto b = energy_bruteforce(F, c);
    if (!energy_selection_valid(F, c, g.second) || !energy_selection_valid(F, c, b.second)) ++invalid;
    const double ratio = b.first > 0 ? g.first / b.first : 1.0;
    worst_ratio = std::min(worst_ratio, ratio);
    if (b.first > 0) {
      const auto du = energy_duality(F, c, b.second);
      dual_lo = std::min(dual_lo, du.pairing / b.first);
      budget_hi = std::max(budget_hi, du.budget_ratio);
    }
    SetParams sp;
    const IntervalSet E = random_set(rng, sp);
    const StepFunction f = random_signed_indicator(rng, E);
    const auto Fa = field_from_pairings(c, slot, f);
    const double ea = energy_greedy(Fa, c).first, l2 = f.l2_norm();
    ++audits;
    if (ea > l2 + slack) ++violations;
    worst_audit = std::max(worst_audit, ea - l2);
    t.add({std::to_string(k), std::to_string(c.size()), std::to_string(slot), num(g.first), num(b.first), num(ratio),
           num(ea), num(l2)});
  }
  r.constants["min_greedy_over_bruteforce"] = worst_ratio;
  r.constants["max_audit_excess"] = worst_audit;
  r.constants["duality_pairing_over_energy_min"] = dual_lo;
  r.constants["duality_budget_ratio_max"] = budget_hi;
  r.constants["invalid_selections"] = static_cast<double>(invalid);
  r.tables.push_back(std::move(t));
  r.check("greedy_half_bruteforce", worst_ratio >= 0.5 && invalid == 0,
          "min greedy/bruteforce " + num(worst_ratio) + " over " + std::to_string(instances) + " collections, " +
              std::to_string(invalid) + " invalid selections");
  r.check("energy_duality", dual_lo >= 1 - 1e-12 && budget_hi <= 4 + 1e-12,
          "dual pairing / energy >= " + num(dual_lo) + ", sub-tree budget ratio <= " + num(budget_hi));
  r.check("energy_l2_audit", violations == 0,
          std::to_string(violations) + " violations in " + std::to_string(audits) + " audits, max energy - ||f||_2 = " +
              num(worst_audit));
}

// ---------------------------------------------------------------------------
// 7. Combinatorial bound on sparse collections.

double combinatorial_corpus(std::uint64_t seed, int instances, int max_tiles, CsvTable* t, double& mean_tiles) {
  double cmax = 0;
  std::size_t tiles = 0;
  for (int k = 0; k < instances; ++k) {
    Rng rng(mix_seed(seed, k));
    GeneratorParams gp;
    gp.count = 1 + k % max_tiles;
    const Collection c = generate_rank1_collection(mix_seed(seed, k) ^ 0x77ULL, gp).tiles;
    tiles += c.size();
    std::array<CoefficientField, 3> F;
    for (int i = 0; i < 3; ++i) F[i] = field_from_tiles(c, i, [&](const Tile&) { return normal_cplx(rng); });
    const auto b = combinatorial_bound(F, c, {1.0 / 3, 1.0 / 3, 1.0 / 3});
    cmax = std::max(cmax, b.ratio);
    if (t) t->add({std::to_string(k), std::to_string(c.size()), num(b.lhs), num(b.rhs), num(b.ratio)});
  }
  mean_tiles = static_cast<double>(tiles) / instances;
  return cmax;
}

void combinatorial_run(const Config& cfg, std::uint64_t seed, Report& r) {
  const int instances = cfg.get<int>("collections");
  const int max_tiles = cfg.get<int>("max_tiles");
  const double stab = cfg.get<double>("stability");
  CsvTable t{"combinatorial_bound", {"instance", "tiles", "lhs", "rhs", "ratio"}, {}};
  double m1 = 0, m2 = 0;
  const double c1 = combinatorial_corpus(seed, instances, max_tiles, &t, m1);
  const double c2 = combinatorial_corpus(mix_seed(seed, 0xC0FFEE), instances, max_tiles, nullptr, m2);
  r.constants["C"] = c1;
  r.constants["C_regenerated"] = c2;
  r.constants["mean_tiles"] = m1;
  r.tables.push_back(std::move(t));
  const double rel = std::abs(c2 - c1) / c1;
  r.check("combinatorial_constant", std::isfinite(c1) && c1 > 0 && rel <= stab,
          "C = " + num(c1) + ", regenerated corpus C = " + num(c2) + ", relative change " + num(rel) + " (allowed " +
              num(stab) + ")");
}

// ---------------------------------------------------------------------------
// 8. Two summation orders of the model form, and frequency-disjoint pairings.

void lambda_consistency(const Config& cfg, std::uint64_t seed, Report& r) {
  const int instances = cfg.get<int>("instances");
  const auto sharps = parse_list(cfg.get<std::string>("sharps"));
  const double tol = cfg.get<double>("tol");
  const int zero_pairs = cfg.get<int>("zero_pairs");
  const double zero_tol = cfg.get<double>("zero_tol");
  double worst = 0, worst_zero = 0;
  std::size_t zeros = 0, flagged = 0, nonzero = 0;
  CsvTable t{"lambda_consistency", {"instance", "sharp", "P", "Q", "via_b_abs", "via_a3_abs", "rel_diff", "flagged"}, {}};
  for (int k = 0; k < instances; ++k) {
    PQParams prm;
    prm.sharp = static_cast<int>(sharps[k % sharps.size()]);
    const auto inst = generate_pq_instance(mix_seed(seed, k), prm);
    Rng rng(mix_seed(seed, k) ^ 0xf00dULL);
    std::array<TestFunction, 4> f;
    for (int i = 0; i < 4; ++i) f[i] = random_signed_indicator(rng, random_set(rng, SetParams{}));
    const auto res = lambda_sharp(inst.P, inst.Q, f, prm.sharp);
    worst = std::max(worst, res.rel_diff);
    flagged += res.flagged;
    nonzero += std::abs(res.via_a3) > 0;
    t.add({std::to_string(k), std::to_string(prm.sharp), std::to_string(inst.P.size()), std::to_string(inst.Q.size()),
           num(std::abs(res.via_b)), num(std::abs(res.via_a3)), num(res.rel_diff), std::to_string(res.flagged)});
    int done = 0;
    for (std::size_t q = 0; q < inst.Q.size() && done < zero_pairs; ++q)
      for (std::size_t p = 0; p < inst.P.size() && done < zero_pairs; ++p) {
        const WavePacket a = make_wave_packet(inst.Q[q].tile(2)), b = make_wave_packet(inst.P[p].tile(0));
        if (packet_supports_overlap(a, b)) continue;
        const auto grid = packet_grid(inst.P[p]);
        const SampledFunction s{grid.x0, grid.h, a.sample(grid.x0, grid.h, grid.count)};
        worst_zero = std::max(worst_zero, std::abs(pair_sampled(s, b).value));
        ++zeros;
        ++done;
      }
  }
  r.constants["max_rel_diff"] = worst;
  r.constants["max_zero_pairing"] = worst_zero;
  r.constants["zero_pairings_checked"] = static_cast<double>(zeros);
  r.constants["flagged"] = static_cast<double>(flagged);
  r.constants["nonzero_instances"] = static_cast<double>(nonzero);
  r.tables.push_back(std::move(t));
  r.check("summation_orders_agree", worst <= tol,
          "max relative difference " + num(worst) + " over " + std::to_string(instances) + " instances");
  r.check("zero_pairings", zeros > 0 && worst_zero <= zero_tol,
          std::to_string(zeros) + " frequency-disjoint pairings, max " + num(worst_zero));
}

// ---------------------------------------------------------------------------
// 9. The P'(T) equivalence.

void pprime_iff(const Config& cfg, std::uint64_t seed, Report& r) {
  const int instances = cfg.get<int>("instances");
  const auto sharps = parse_list(cfg.get<std::string>("sharps"));
  std::size_t pairs = 0, counter = 0, edge = 0, related = 0, modified = 0;
  CsvTable t{"pprime_iff", {"instance", "sharp", "tree_slot", "tree_size", "P", "pairs", "modified", "counterexamples", "edge_vanishing"}, {}};
  for (int k = 0; k < instances; ++k) {
    PQParams prm;
    prm.sharp = static_cast<int>(sharps[k % sharps.size()]);
    prm.q.freq_scales = {0, 30};
    prm.q.sparse = true;
    prm.q.count = cfg.get<std::size_t>("q_count");
    const auto inst = generate_pq_instance(mix_seed(seed, k), prm);
    Rng rng(mix_seed(seed, k) ^ 0xbeefULL);
    UInt<std::size_t> pick(0, inst.Q.size() - 1);
    const int slot = static_cast<int>(rng() & 1);
    const Tree T = maximal_tree(inst.Q, pick(rng), slot);
    const auto res = pprime_collection(inst.Q, T, inst.P, prm.sharp);
    pairs += res.pairs_checked;
    counter += res.counterexamples;
    edge += res.edge_vanishing;
    modified += res.tiles.size();
    for (auto q : T.members)
      for (auto& P : inst.P) related += sharp_related(inst.Q[q], P, prm.sharp);
    t.add({std::to_string(k), std::to_string(prm.sharp), std::to_string(slot), std::to_string(T.members.size()),
           std::to_string(inst.P.size()), std::to_string(res.pairs_checked), std::to_string(res.tiles.size()),
           std::to_string(res.counterexamples), std::to_string(res.edge_vanishing)});
  }
  r.constants["pairs_checked"] = static_cast<double>(pairs);
  r.constants["related_pairs"] = static_cast<double>(related);
  r.constants["modified_tiles"] = static_cast<double>(modified);
  r.constants["counterexamples"] = static_cast<double>(counter);
  r.constants["edge_vanishing"] = static_cast<double>(edge);
  r.tables.push_back(std::move(t));
  r.check("pprime_equivalence", counter == 0 && related > 0,
          std::to_string(counter) + " counterexamples in " + std::to_string(pairs) + " pairs (" +
              std::to_string(related) + " related) over " + std::to_string(instances) + " instances");
}

// ---------------------------------------------------------------------------
// 10. Size and energy of the a^{(3),#} field.

// <chi_E e^{2 pi i xi x}, Phi> equals the plain pairing against Phi shifted down by xi in frequency.
std::vector<cplx> modulated_pairings(const Collection& c, int slot, const StepFunction& f, const Rat& xi) {
  std::vector<cplx> out;
  out.reserve(c.size());
  for (auto& t : c) {
    WavePacket w = make_wave_packet(t.tile(slot));
    w.c -= xi;
    w.c_len = to_double(w.c * w.len);
    out.push_back(pair_step(f, w));
  }
  return out;
}

std::vector<Rat> modulation_candidates(const Collection& c, int slot) {
  std::set<Rat> xs{Rat(0)};
  for (auto& t : c) xs.insert(make_wave_packet(t.tile(slot)).c);
  return {xs.begin(), xs.end()};
}

void a3sharp_norms(const Config& cfg, std::uint64_t seed, Report& r) {
  const int instances = cfg.get<int>("instances");
  const auto sharps = parse_list(cfg.get<std::string>("sharps"));
  const int M = cfg.get<int>("M");
  const double theta = cfg.get<double>("theta");
  const double lo = cfg.get<double>("slope_lo"), hi = cfg.get<double>("slope_hi");
  CsvTable t{"a3sharp_norms", {"instance", "sharp", "P", "size3", "size_rhs", "size_ratio", "energy3", "energy_rhs", "energy_ratio"}, {}};
  std::vector<double> xs, ys;
  bool finite = true;
  for (auto sh : sharps) {
    double csize = 0, cenergy = 0;
    for (int k = 0; k < instances; ++k) {
      PQParams prm;
      prm.sharp = static_cast<int>(sh);
      const std::uint64_t s = mix_seed(seed, static_cast<std::uint64_t>(k));
      const auto inst = generate_pq_instance(s, prm);
      Rng rng(s ^ static_cast<std::uint64_t>(sh));
      const IntervalSet E3 = random_set(rng, SetParams{}), E4 = random_set(rng, SetParams{});
      const StepFunction f3 = random_signed_indicator(rng, E3), f4 = random_signed_indicator(rng, E4);
      // sup over X(E) is approached by modulating chi_E towards the P frequencies
      const auto mods2 = modulation_candidates(inst.P, 1), mods3 = modulation_candidates(inst.P, 2);
      std::vector<std::vector<cplx>> a2s, a3s;
      for (auto& xi : mods2) a2s.push_back(modulated_pairings(inst.P, 1, f3, xi));
      for (auto& xi : mods3) a3s.push_back(modulated_pairings(inst.P, 2, f4, xi));
      double s3 = 0, e3 = 0;
      for (auto& aP2 : a2s)
        for (auto& aP3 : a3s) {
          CoefficientField F{2, a3sharp_all(inst.P, inst.Q, aP2, aP3, prm.sharp), Provenance::Pairing};
          s3 = std::max(s3, size(F, inst.Q));
          e3 = std::max(e3, energy_greedy(F, inst.Q).first);
        }
      double rhs = 0;
      for (auto& Qt : inst.Q) {
        const Collection one{Qt};
        rhs = std::max(rhs, std::pow(size_estimate_rhs(E3, one, M), 1 - theta) *
                                std::pow(size_estimate_rhs(E4, one, M), theta));
      }
      const double erhs = std::pow(to_double(E4.measure()), (1 - theta) / 2) * std::pow(to_double(E3.measure()), theta / 2);
      const double sr = rhs > 0 ? s3 / rhs : (s3 > 0 ? kInf : 0.0);
      const double er = erhs > 0 ? e3 / erhs : (e3 > 0 ? kInf : 0.0);
      finite = finite && std::isfinite(sr) && std::isfinite(er);
      csize = std::max(csize, sr);
      cenergy = std::max(cenergy, er);
      t.add({std::to_string(k), std::to_string(sh), std::to_string(inst.P.size()), num(s3), num(rhs), num(sr), num(e3),
             num(erhs), num(er)});
    }
    r.constants["size_C_sharp" + std::to_string(sh)] = csize;
    r.constants["energy_C_sharp" + std::to_string(sh)] = cenergy;
    xs.push_back(static_cast<double>(sh));
    ys.push_back(std::log2(cenergy));
  }
  double slope = std::numeric_limits<double>::quiet_NaN();
  if (xs.size() >= 2) {
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) mx += xs[i], my += ys[i];
    mx /= xs.size();
    my /= ys.size();
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) sxy += (xs[i] - mx) * (ys[i] - my), sxx += (xs[i] - mx) * (xs[i] - mx);
    slope = sxy / sxx;
  }
  r.constants["energy_growth_exponent"] = slope;
  r.tables.push_back(std::move(t));
  r.check("a3sharp_bounds_finite", finite,
          "size and energy ratios finite on every instance (constants recorded per sharp)");
  r.check("energy_growth_exponent", slope >= lo && slope <= hi,
          "log2 C_sharp against sharp has slope " + num(slope) + ", expected [" + num(lo) + ", " + num(hi) + "]");
}

// ---------------------------------------------------------------------------
// 11. Restricted-type ratios near two vertices.

struct SweepResult {
  double max_ratio = 0;
  std::size_t majority_failures = 0, zero_forms = 0;
};

SweepResult restricted_sweep(std::uint64_t seed, int tuples, int sharp, const ExponentTuple& alpha, int bad,
                             const Rat& C, CsvTable* t, const std::string& label) {
  SweepResult out;
  std::array<double, 4> a;
  for (int i = 0; i < 4; ++i) a[i] = to_double(alpha[i]);
  for (int k = 0; k < tuples; ++k) {
    const std::uint64_t s = mix_seed(seed, k);
    PQParams prm;
    prm.sharp = sharp;
    const auto inst = generate_pq_instance(s, prm);
    Rng rng(s ^ 0x1234ULL);
    SetTuple E;
    for (auto& e : E) e = random_set(rng, SetParams{});
    const auto ex = exceptional_set(E, C, bad);
    if (!ex.majority_ok) ++out.majority_failures;
    std::array<TestFunction, 4> f;
    for (int i = 0; i < 4; ++i) f[i] = random_signed_indicator(rng, i == bad ? ex.major : E[i]);
    const auto coef = form_coefficients(inst.P, inst.Q, f);
    const double lam = std::abs(lambda_sharp_reversed(inst.P, inst.Q, coef, sharp));
    out.zero_forms += lam == 0;
    double denom = std::pow(2.0, sharp / 2.0);
    for (int i = 0; i < 4; ++i) denom *= std::pow(to_double(E[i].measure()), a[i]);
    const double ratio = lam / denom;
    out.max_ratio = std::max(out.max_ratio, ratio);
    if (t)
      t->add({label, std::to_string(k), num(lam), num(denom), num(ratio), num(to_double(ex.major.measure())),
              num(to_double(E[bad].measure())), std::to_string(ex.majority_ok)});
  }
  return out;
}

void restricted_type(const Config& cfg, std::uint64_t seed, Report& r) {
  const int tuples = cfg.get<int>("tuples");
  const int sharp = cfg.get<int>("sharp");
  const Rat eps = cfg.get_rat("eps");
  const Rat C = cfg.get_rat("C");
  const double factor = cfg.get<double>("stability_factor");
  CsvTable t{"restricted_type", {"vertex", "tuple", "lambda_abs", "denominator", "ratio", "major_measure", "anchor_measure", "majority_ok"}, {}};
  const std::array<std::pair<std::string, int>, 2> vertices{{{"A1", 0}, {"A5", 4}}};
  bool ok_major = true, ok_stable = true;
  std::string detail;
  for (auto& [label, idx] : vertices) {
    ExponentTuple alpha;
    for (int i = 0; i < 4; ++i) alpha[i] = (1 - eps) * vertices_d_prime()[idx][i] + eps * Rat(1, 4);
    const auto cls = admissible(alpha);
    if (cls.kind != TupleKind::Bad) throw InvalidArgument("perturbed vertex lost its bad index");
    const auto s1 = restricted_sweep(seed, tuples, sharp, alpha, cls.bad_index, C, &t, label);
    const auto s2 = restricted_sweep(mix_seed(seed, 0xD1CE), tuples, sharp, alpha, cls.bad_index, C, nullptr, label);
    const double q = s2.max_ratio > 0 ? s1.max_ratio / s2.max_ratio : kInf;
    r.constants["max_ratio_" + label] = s1.max_ratio;
    r.constants["max_ratio_reseeded_" + label] = s2.max_ratio;
    r.constants["majority_failures_" + label] = static_cast<double>(s1.majority_failures + s2.majority_failures);
    r.constants["zero_forms_" + label] = static_cast<double>(s1.zero_forms + s2.zero_forms);
    r.constants["bad_index_" + label] = cls.bad_index;
    ok_major = ok_major && s1.majority_failures == 0 && s2.majority_failures == 0;
    const bool stable = std::isfinite(s1.max_ratio) && s1.max_ratio > 0 && q <= factor && q >= 1 / factor;
    ok_stable = ok_stable && stable;
    detail += label + ": max " + num(s1.max_ratio) + " vs reseeded " + num(s2.max_ratio) + "; ";
  }
  r.tables.push_back(std::move(t));
  r.check("restricted_type_ratio", ok_stable, detail + "allowed factor " + num(factor));
  r.check("major_subset", ok_major, "2|E'| >= |E| on every instance at the bad index");
}

// ---------------------------------------------------------------------------
// 12. Remainder symbol derivative audit.

void remainder_bound(const Config& cfg, std::uint64_t seed, Report& r) {
  const int points = cfg.get<int>("points");
  const auto sharps = parse_list(cfg.get<std::string>("sharps"));
  const long c0_log2 = cfg.get<long>("c0_log2");
  const int M = cfg.get<int>("M");
  const double factor = cfg.get<double>("factor");
  const WhitneyCover cov(c0_log2, -40, 40);
  const double c0 = cov.c0();
  CsvTable t{"remainder_bound", {"sharp", "ratio_order0", "ratio_order1", "ratio_order2", "used", "excluded"}, {}};
  std::array<double, 3> lo{kInf, kInf, kInf}, hi{0, 0, 0};
  for (auto sh : sharps) {
    const RemainderSymbol m(cov, cov, sh, M);
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(sh)));
    Unif u(0, 1);
    std::vector<std::array<Rat, 3>> pts;
    for (int i = 0; i < points; ++i) {
      const int k1 = static_cast<int>(u(rng) * 5) - 2;
      const double a = std::ldexp(1.0, k1), b = std::ldexp(1.0, k1 + static_cast<int>(sh));
      const double x1 = (u(rng) - 0.5) * 100 * b;
      const double x2 = x1 + (u(rng) < 0.5 ? -1 : 1) * c0 * a * (0.9 + 1.1 * u(rng));
      const double x3 = x2 + (u(rng) < 0.5 ? -1 : 1) * c0 * b * (0.9 + 1.1 * u(rng));
      pts.push_back({from_double(x1), from_double(x2), from_double(x3)});
    }
    const auto rc = remainder_symbol_check(m, pts, c0);
    for (int o = 0; o < 3; ++o) {
      lo[o] = std::min(lo[o], rc.max_ratio[o]);
      hi[o] = std::max(hi[o], rc.max_ratio[o]);
      r.constants["ratio_order" + std::to_string(o) + "_sharp" + std::to_string(sh)] = rc.max_ratio[o];
    }
    t.add({std::to_string(sh), num(rc.max_ratio[0]), num(rc.max_ratio[1]), num(rc.max_ratio[2]), std::to_string(rc.used),
           std::to_string(rc.excluded)});
  }
  r.tables.push_back(std::move(t));
  for (int o = 0; o < 3; ++o) {
    const double spread = lo[o] > 0 ? hi[o] / lo[o] : kInf;
    r.constants["spread_order" + std::to_string(o)] = spread;
    r.check("remainder_order" + std::to_string(o), std::isfinite(hi[o]) && spread <= factor,
            "max ratio in [" + num(lo[o]) + ", " + num(hi[o]) + "] across sharp values, spread " + num(spread) +
                " (allowed " + num(factor) + ")");
  }
}

}  // namespace

std::vector<Experiment> all_experiments() {
  using M = std::map<std::string, std::string>;
  return {
      {"oracle-product", 1, "continuous form with constant symbols against the pointwise product integral",
       {"continuous form", "quadrature oracle"}, 60, 1,
       M{{"trials", "20"}, {"dv", "1/128"}, {"tol", "1e-6"}, {"freq_range", "8"}, {"oracle.h", "1/256"}, {"oracle.radius", "80"}},
       oracle_product},
      {"partition-of-unity", 2, "Whitney bumps sum to one at certified points", {"whitney cover", "partition of unity"}, 60, 1,
       M{{"points", "1000"}, {"c0_log2", "4"}, {"j_lo", "-20"}, {"j_hi", "20"}, {"tol", "1e-8"}}, partition_of_unity},
      {"decay-fit", 3, "double Fourier coefficients of symbol times bump: decay constant across squares and Taylor orders",
       {"fourier coefficients", "coefficient decay", "taylor orders"}, 600, 1,
       M{{"N", "20"}, {"squares", "10"}, {"scales", "6"}, {"first_scale", "-3"}, {"order", "6"}, {"G", "128"},
         {"ell_max", "8"}, {"factor", "2"}, {"c0_log2", "4"}},
       decay_fit},
      {"tile-invariants", 4, "fuzzed order, rank-1, sparseness, tree and lacunarity predicates",
       {"tile order", "rank 1", "sparse collections", "trees", "lacunarity"}, 300, 1,
       M{{"checks", "1000000"}, {"pairs_per_round", "100"}}, tile_invariants},
      {"size-oracle", 5, "exact size against exhaustive tree enumeration; John-Nirenberg band",
       {"size", "trees", "john-nirenberg"}, 300, 1, M{{"collections", "1000"}, {"max_tiles", "12"}, {"tol", "1e-12"}},
       size_oracle_run},
      {"energy-oracle", 6, "greedy energy against exhaustive energy; energy of pairings against the L2 norm",
       {"energy", "greedy selection", "energy duality"}, 600, 1,
       M{{"instances", "1000"}, {"max_tiles", "8"}, {"audit_slack", "1e-6"}}, energy_oracle},
      {"combinatorial-bound", 7, "trilinear tile sum against size and energy products on sparse collections",
       {"combinatorial bound", "size", "energy"}, 600, 1,
       M{{"collections", "1000"}, {"max_tiles", "60"}, {"stability", "0.5"}}, combinatorial_run},
      {"lambda-consistency", 8, "model form by both summation orders; frequency-disjoint pairings vanish",
       {"model form", "summation order", "wave packet pairing"}, 600, 1,
       M{{"instances", "100"}, {"sharps", "2,3,4"}, {"tol", "1e-8"}, {"zero_pairs", "20"}, {"zero_tol", "1e-10"}},
       lambda_consistency},
      {"pprime-iff", 9, "modified collection P'(T): frequency relation iff nonvanishing pairing",
       {"modified tiles", "trees", "frequency support"}, 120, 1,
       M{{"instances", "200"}, {"sharps", "3"}, {"q_count", "8"}}, pprime_iff},
      {"a3sharp-norms", 10, "size and energy of the a3 sharp coefficients against set-measure bounds",
       {"a3 sharp", "size estimate", "energy estimate"}, 900, 1,
       M{{"instances", "200"}, {"sharps", "2,4,6"}, {"M", "5"}, {"theta", "0.5"}, {"slope_lo", "0.3"}, {"slope_hi", "0.7"}},
       a3sharp_norms},
      {"restricted-type", 11, "restricted weak-type ratios near two vertices with exceptional-set major subsets",
       {"restricted type", "exceptional set", "exponent polytope"}, 900, 1,
       M{{"tuples", "200"}, {"sharp", "3"}, {"eps", "1/10"}, {"C", "8"}, {"stability_factor", "2"}}, restricted_type},
      {"remainder-bound", 12, "finite-difference derivative audit of the remainder symbol across scale gaps",
       {"remainder symbol", "derivative bounds"}, 300, 1,
       M{{"points", "400"}, {"sharps", "3,5,8"}, {"c0_log2", "2"}, {"M", "4"}, {"factor", "4"}}, remainder_bound},
  };
}

}  // namespace ttlab::runs
