/** @file symbol.hpp
 *  Singular symbols on the line xi_a = xi_b, the Whitney partition of unity along it,
 *  double Fourier coefficient tables, Taylor splitting of adapted bumps, and the
 *  remainder symbol built from Whitney squares at a fixed scale gap.
 */
#pragma once

#include <fftw3.h>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/special_functions/binomial.hpp>
#include <boost/math/special_functions/factorials.hpp>
#include <functional>
#include <string>
#include <vector>

#include "ttlab/dyadic.hpp"
#include "ttlab/jet.hpp"

namespace ttlab {

// ---------------------------------------------------------------------------
// Symbols.

struct SingularSymbol {
  std::string name;
  std::function<cplx(double, double)> eval;  // m(xi_a, xi_b)
  bool constant = false;
  cplx operator()(double a, double b) const { return eval(a, b); }
};

inline SingularSymbol symbol_one() {
  return {"one", [](double, double) { return cplx(1.0); }, true};
}
/// chi_{xi_a < xi_b}, 1/2 on the line.
inline SingularSymbol symbol_chi() {
  return {"chi", [](double a, double b) { return cplx(a < b ? 1.0 : (a == b ? 0.5 : 0.0)); }, false};
}
/// |xi_a - xi_b|^{i beta}; 0 on the line.
inline SingularSymbol symbol_power(double beta = 1.0) {
  return {"power",
          [beta](double a, double b) {
            const double t = std::abs(a - b);
            if (t == 0) return cplx(0.0);
            return std::exp(cplx(0.0, beta * std::log(t)));
          },
          false};
}
/// -i sgn(xi_a - xi_b): a 0-homogeneous function of the difference.
inline SingularSymbol symbol_sign() {
  return {"sign",
          [](double a, double b) { return cplx(0.0, a > b ? -1.0 : (a < b ? 1.0 : 0.0)); }, false};
}

inline SingularSymbol builtin_symbol(const std::string& name) {
  if (name == "one") return symbol_one();
  if (name == "chi") return symbol_chi();
  if (name == "power") return symbol_power(1.0);
  if (name == "sign") return symbol_sign();
  throw InvalidArgument("unknown symbol: " + name);
}

/// max over samples and |alpha| <= order of |d^alpha m| dist^{|alpha|}, by central
/// differences with step dist/64. Points are (a, b) pairs off the line.
inline double symbol_derivative_constant(const SingularSymbol& m, const std::vector<std::pair<double, double>>& pts,
                                         int order) {
  double C = 0;
  for (auto [a, b] : pts) {
    const double d = std::abs(a - b) / std::sqrt(2.0);
    if (d == 0) continue;
    const double h = d / 64;
    C = std::max(C, std::abs(m(a, b)));
    for (int oa = 0; oa <= order; ++oa)
      for (int ob = 0; oa + ob <= order; ++ob) {
        if (oa + ob == 0) continue;
        cplx s = 0;
        for (int i = 0; i <= oa; ++i)
          for (int j = 0; j <= ob; ++j) {
            const double w = boost::math::binomial_coefficient<double>(oa, i) *
                             boost::math::binomial_coefficient<double>(ob, j) * (((i + j) % 2) ? -1.0 : 1.0);
            s += w * m(a + (0.5 * oa - i) * h, b + (0.5 * ob - j) * h);
          }
        s /= std::pow(h, oa + ob);
        C = std::max(C, std::abs(s) * std::pow(d, oa + ob));
      }
  }
  return C;
}

// ---------------------------------------------------------------------------
// Bumps. One family: B(x) = exp(1 - 1/(1 - (2x-1)^2)) on (0,1).

inline double canonical_bump(double x) {
  if (x <= 0 || x >= 1) return 0.0;
  const double y = 2 * x - 1;
  return std::exp(1.0 - 1.0 / (1.0 - y * y));
}
inline Jet canonical_bump(const Jet& x) {
  const double v = x.value();
  if (v <= 0 || v >= 1) return Jet(x.order(), 0.0);
  Jet y = 2.0 * x - 1.0;
  return exp(1.0 - 1.0 / (1.0 - y * y));
}

/// Bump adapted to [0,1], supported in [0.05, 0.95].
inline double unit_bump(double x) { return canonical_bump((x - 0.05) / 0.9); }
inline Jet unit_bump(const Jet& x) { return canonical_bump((x - 0.05) * (1.0 / 0.9)); }

/// Whitney factor supported in [-0.4, 0.4] (the core 8/10 of a unit cell centered at 0).
inline double whitney_factor(double t) { return canonical_bump(t / 0.8 + 0.5); }

// ---------------------------------------------------------------------------
// Whitney cover of the plane around the diagonal.

inline int shift_thirds(long j, int s) { return (j % 2 == 0) ? s : -s; }  // 3 * grid offset

class WhitneyCover {
 public:
  WhitneyCover(long c0_log2, long j_lo, long j_hi) : c0_log2_(c0_log2), j_lo_(j_lo), j_hi_(j_hi) {
    if (c0_log2 < 2) throw InvalidArgument("Whitney constant must be at least 4");
    c0_ = std::ldexp(1.0, static_cast<int>(c0_log2));
    BigInt c0 = 1;
    mpz_mul_2exp(c0.get_mpz_t(), c0.get_mpz_t(), static_cast<mp_bitcnt_t>(c0_log2));
    lo3_ = 9 * c0 * c0;  // 2 g^2 >= 9 C0^2
    hi3_ = 72 * c0 * c0;  // g^2 <= 72 C0^2
  }

  long j_lo() const { return j_lo_; }
  long j_hi() const { return j_hi_; }
  double c0() const { return c0_; }
  long c0_log2() const { return c0_log2_; }

  /// C0|Q|/2 <= dist(Q, line) <= 2 C0|Q|, decided on g = 3 * gap / |Q| (an integer).
  bool accepted_g3(long diff3) const {
    long g = std::labs(diff3) - 3;
    if (g < 0) return false;
    BigInt g2 = BigInt(g) * g;
    return 2 * g2 >= lo3_ && g2 <= hi3_;
  }
  /// 3 (a1 - a2)/|Q| for the lower-left corner a of Q.
  static long corner_diff3(const ShiftedDyadicCube& Q) {
    BigInt d = 3 * (Q.component(0).k() - Q.component(1).k());
    long v = mpz_get_si(d.get_mpz_t());
    return v + shift_thirds(Q.j(), Q.component(0).s()) - shift_thirds(Q.j(), Q.component(1).s());
  }
  bool accepted(const ShiftedDyadicCube& Q) const {
    if (Q.dim() != 2) throw InvalidArgument("Whitney squares are two-dimensional");
    if (Q.j() < j_lo_ || Q.j() > j_hi_) return false;
    return accepted_g3(corner_diff3(Q));
  }

  /// eta_Q at a point (0 outside the 8/10 core).
  static double eta(const ShiftedDyadicCube& Q, const Rat& x1, const Rat& x2) {
    const Rat s = Q.side();
    const double t1 = to_double((x1 - Q.component(0).center()) / s);
    const double t2 = to_double((x2 - Q.component(1).center()) / s);
    return whitney_factor(t1) * whitney_factor(t2);
  }

  /// Scales whose squares can carry a point at distance d (|Q| in [d/(2C0+sqrt2), 2d/C0]).
  std::pair<long, long> candidate_scales(double d) const {
    long lo = static_cast<long>(std::floor(std::log2(d / (2 * c0_ + std::sqrt(2.0))))) ;
    long hi = static_cast<long>(std::ceil(std::log2(2 * d / c0_)));
    return {lo, hi};
  }

  /// Accepted squares whose core contains the point (within j range).
  std::vector<ShiftedDyadicCube> squares_at(const Rat& x1, const Rat& x2) const {
    std::vector<ShiftedDyadicCube> out;
    const double d = std::abs(to_double(x1 - x2)) / std::sqrt(2.0);
    if (d == 0) return out;
    auto [klo, khi] = candidate_scales(d);
    for (long k = std::max(klo, j_lo_); k <= std::min(khi, j_hi_); ++k)
      for (int s1 = 0; s1 < 3; ++s1)
        for (int s2 = 0; s2 < 3; ++s2) {
          ShiftedDyadicCube Q(std::vector<DyadicInterval>{containing_interval(k, s1, x1),
                                                          containing_interval(k, s2, x2)});
          if (accepted(Q) && eta(Q, x1, x2) > 0) out.push_back(std::move(Q));
        }
    return out;
  }

  double total_eta(const Rat& x1, const Rat& x2) const {
    double s = 0;
    for (auto& Q : squares_at(x1, x2)) s += eta(Q, x1, x2);
    return s;
  }

  /// phi_Q = eta_Q / sum_Q' eta_Q'.
  double phi(const ShiftedDyadicCube& Q, const Rat& x1, const Rat& x2) const {
    if (!accepted(Q)) return 0.0;
    const double e = eta(Q, x1, x2);
    if (e == 0) return 0.0;
    return e / total_eta(x1, x2);
  }

  /// Every scale able to carry the point lies in the j range.
  bool certified(const Rat& x1, const Rat& x2) const {
    const double d = std::abs(to_double(x1 - x2)) / std::sqrt(2.0);
    if (d == 0) return false;
    const double lo = d / (2 * c0_ + std::sqrt(2.0)), hi = 2 * d / c0_;
    for (long k = static_cast<long>(std::floor(std::log2(lo))) - 1; k <= static_cast<long>(std::ceil(std::log2(hi))) + 1; ++k) {
      const double s = std::ldexp(1.0, static_cast<int>(k));
      if (s >= lo && s <= hi && (k < j_lo_ || k > j_hi_)) return false;
    }
    return true;
  }

  /// Explicit list of accepted squares meeting a closed box; coverage gaps are reported
  /// through `certified` by callers.
  std::vector<ShiftedDyadicCube> enumerate(const Rat& lo1, const Rat& hi1, const Rat& lo2, const Rat& hi2,
                                           std::size_t limit = 2000000) const {
    std::vector<ShiftedDyadicCube> out;
    for (long k = j_lo_; k <= j_hi_; ++k)
      for (int s1 = 0; s1 < 3; ++s1)
        for (int s2 = 0; s2 < 3; ++s2) {
          auto rows = enumerate_grid_1d(s1, k, lo1, hi1);
          auto cols = enumerate_grid_1d(s2, k, lo2, hi2);
          if (rows.empty() || cols.empty()) continue;
          const BigInt& c0 = cols.front().k();
          const BigInt& c1 = cols.back().k();
          for (auto& r : rows) {
            // Accepted columns satisfy |3(kr - kc) + delta| - 3 in the band: scan the band only.
            const long delta = shift_thirds(k, s1) - shift_thirds(k, s2);
            const long band = static_cast<long>(std::ceil(std::sqrt(72.0) * c0_)) + 4;
            for (long sign = -1; sign <= 1; sign += 2)
              for (long t = 0; t <= band / 3 + 2; ++t) {
                BigInt kc = r.k() - sign * t;
                if (kc < c0 || kc > c1) continue;
                long diff3 = 3 * sign * t + delta;
                if (sign == 1 && t == 0) continue;  // counted once with sign -1
                if (!accepted_g3(diff3)) continue;
                out.emplace_back(std::vector<DyadicInterval>{r, DyadicInterval(k, kc, s2)});
                if (out.size() > limit) throw TooLarge("Whitney enumeration exceeds the limit");
              }
          }
        }
    std::sort(out.begin(), out.end(), [](const ShiftedDyadicCube& a, const ShiftedDyadicCube& b) {
      if (a.j() != b.j()) return a.j() < b.j();
      return a < b;
    });
    return out;
  }

  /// Samples of phi_Q on the (G x G) grid Q.lo + |Q|(p, q)/G, row-major in p.
  /// Neighbors are located in local coordinates with exact integer acceptance.
  std::vector<double> phi_grid(const ShiftedDyadicCube& Q, int G) const {
    const long k0 = Q.j();
    const Rat A1 = Q.component(0).lo(), A2 = Q.component(1).lo();
    struct Grid {
      double f1, f2;  // fractional base positions in cell units
      long dK;        // integer part difference K1 - K2
      double r;       // |Q| / cell side
      long delta3;
      bool ok;
      bool self;  // the grid of Q itself
    };
    std::vector<Grid> grids;
    for (long k = std::max(k0 - 3, j_lo_); k <= std::min(k0 + 3, j_hi_); ++k)
      for (int s1 = 0; s1 < 3; ++s1)
        for (int s2 = 0; s2 < 3; ++s2) {
          const Rat cell = pow2(k);
          Rat t1 = A1 / cell - grid_offset(k, s1);
          Rat t2 = A2 / cell - grid_offset(k, s2);
          BigInt K1 = floor_rat(t1), K2 = floor_rat(t2);
          Grid g;
          g.f1 = to_double(t1 - Rat(K1));
          g.f2 = to_double(t2 - Rat(K2));
          BigInt dk = K1 - K2;
          g.ok = mpz_fits_slong_p(dk.get_mpz_t());
          g.dK = g.ok ? mpz_get_si(dk.get_mpz_t()) : 0;
          g.r = std::ldexp(1.0, static_cast<int>(k0 - k));
          g.delta3 = shift_thirds(k, s1) - shift_thirds(k, s2);
          g.self = k == k0 && s1 == Q.component(0).s() && s2 == Q.component(1).s();
          grids.push_back(g);
        }
    std::vector<double> out(static_cast<std::size_t>(G) * G, 0.0);
    const double inv = 1.0 / G;
    for (int p = 0; p < G; ++p)
      for (int q = 0; q < G; ++q) {
        const double u1 = p * inv, u2 = q * inv;
        double total = 0, own = 0;
        for (std::size_t gi = 0; gi < grids.size(); ++gi) {
          const auto& g = grids[gi];
          if (!g.ok) continue;
          const double t1 = g.f1 + g.r * u1, t2 = g.f2 + g.r * u2;
          const double n1 = std::floor(t1), n2 = std::floor(t2);
          const double e = whitney_factor(t1 - n1 - 0.5) * whitney_factor(t2 - n2 - 0.5);
          if (e == 0) continue;
          const long diff3 = 3 * (g.dK + static_cast<long>(n1) - static_cast<long>(n2)) + g.delta3;
          if (!accepted_g3(diff3)) continue;
          total += e;
          // Q is cell (0,0) of its own grid: its corner is the local origin.
          if (g.self && n1 == 0 && n2 == 0) own = e;
        }
        out[static_cast<std::size_t>(p) * G + q] = total > 0 ? own / total : 0.0;
      }
    return out;
  }

 private:
  long c0_log2_;
  long j_lo_, j_hi_;
  double c0_;
  BigInt lo3_, hi3_;
};

/// Region of a pair of squares by scale gap: I if k2 - k1 >= t, III if k1 - k2 >= t, else II.
enum class Region { I, II, III };
inline Region region_split(long k1, long k2, long threshold = 1000) {
  if (k2 - k1 >= threshold) return Region::I;
  if (k1 - k2 >= threshold) return Region::III;
  return Region::II;
}
inline const char* to_string(Region r) { return r == Region::I ? "I" : (r == Region::II ? "II" : "III"); }

// ---------------------------------------------------------------------------
// Double Fourier coefficients.

struct CoefficientTable {
  int N = 0;                     // indices |n_i| <= N
  std::vector<cplx> values;      // (2N+1)^2, row-major in n1
  std::vector<double> errors;    // |coarse - fine| per entry
  double quad_error = 0;         // max entry error
  bool flagged = false;
  cplx at(int n1, int n2) const {
    return values[static_cast<std::size_t>(n1 + N) * (2 * N + 1) + (n2 + N)];
  }
};

namespace detail {
/// C_n = e^{-2 pi i n.A/|Q|} G^{-2} sum F(p,q) e^{-2 pi i n.(p,q)/G} for |n_i| <= N.
inline std::vector<cplx> table_from_samples(const std::vector<cplx>& F, int G, const ShiftedDyadicCube& Q, int N) {
  std::vector<cplx> buf(F);
  fftw_plan plan = fftw_plan_dft_2d(G, G, reinterpret_cast<fftw_complex*>(buf.data()),
                                    reinterpret_cast<fftw_complex*>(buf.data()), FFTW_FORWARD, FFTW_ESTIMATE);
  fftw_execute(plan);
  fftw_destroy_plan(plan);
  // A_i/|Q| = k_i + offset_i, so only the offset contributes to the phase.
  const int o1 = shift_thirds(Q.j(), Q.component(0).s());
  const int o2 = shift_thirds(Q.j(), Q.component(1).s());
  std::vector<cplx> out;
  const double norm = 1.0 / (static_cast<double>(G) * G);
  for (int n1 = -N; n1 <= N; ++n1)
    for (int n2 = -N; n2 <= N; ++n2) {
      const int i1 = (n1 % G + G) % G, i2 = (n2 % G + G) % G;
      long num = static_cast<long>(n1) * o1 + static_cast<long>(n2) * o2;  // phase = num/3
      const double ph = static_cast<double>(((num % 3) + 3) % 3) / 3.0;
      out.push_back(buf[static_cast<std::size_t>(i1) * G + i2] * norm * cis2pi(-ph));
    }
  return out;
}
}  // namespace detail

/// phi_Q sampled on the G^2 and (2G)^2 grids; reused across symbols and Taylor orders.
struct SquareSamples {
  ShiftedDyadicCube Q;
  int G = 256;
  std::vector<double> coarse, fine;
};

inline SquareSamples sample_square(const WhitneyCover& cover, const ShiftedDyadicCube& Q, int G = 256) {
  if (!cover.accepted(Q)) throw InvalidArgument("square is not part of the Whitney cover");
  return SquareSamples{Q, G, cover.phi_grid(Q, G), cover.phi_grid(Q, 2 * G)};
}

/// Samples of m * phi_Q * ((xi_b - xi_a)/|Q|)^ell / ell! (ell < 0 omits the factor).
inline std::vector<cplx> square_integrand(const SingularSymbol& m, const ShiftedDyadicCube& Q,
                                          const std::vector<double>& phi, int G, int ell) {
  const double s = to_double(Q.side());
  const double a1 = to_double(Q.component(0).lo()), a2 = to_double(Q.component(1).lo());
  const double fact = ell >= 0 ? boost::math::factorial<double>(static_cast<unsigned>(ell)) : 1.0;
  std::vector<cplx> F(phi.size());
  for (int p = 0; p < G; ++p)
    for (int q = 0; q < G; ++q) {
      const std::size_t idx = static_cast<std::size_t>(p) * G + q;
      if (phi[idx] == 0) continue;
      const double x1 = a1 + s * p / G, x2 = a2 + s * q / G;
      cplx v = m(x1, x2) * phi[idx];
      if (ell >= 0) v *= std::pow((x2 - x1) / s, ell) / fact;
      F[idx] = v;
    }
  return F;
}

/// Coefficients (1/|Q|^2) int m phi_Q [((xi_b - xi_a)/|Q|)^ell/ell!] e^{-2 pi i n.xi/|Q|},
/// trapezoid on G^2 points with the (2G)^2 sum as the reported value and their
/// difference as the error estimate.
inline CoefficientTable fourier_table(const SingularSymbol& m, const SquareSamples& sq, int N, int ell = -1,
                                      double tol = 1e-9) {
  CoefficientTable t;
  t.N = N;
  auto coarse = detail::table_from_samples(square_integrand(m, sq.Q, sq.coarse, sq.G, ell), sq.G, sq.Q, N);
  auto fine = detail::table_from_samples(square_integrand(m, sq.Q, sq.fine, 2 * sq.G, ell), 2 * sq.G, sq.Q, N);
  t.values = fine;
  double mx = 0;
  for (std::size_t i = 0; i < fine.size(); ++i) {
    const double e = std::abs(fine[i] - coarse[i]);
    t.errors.push_back(e);
    t.quad_error = std::max(t.quad_error, e);
    mx = std::max(mx, std::abs(fine[i]));
  }
  t.flagged = t.quad_error > tol * std::max(1.0, mx);
  return t;
}

inline CoefficientTable fourier_table(const SingularSymbol& m, const WhitneyCover& cover, const ShiftedDyadicCube& Q,
                                      int N, int ell = -1, int G = 256, double tol = 1e-9) {
  return fourier_table(m, sample_square(cover, Q, G), N, ell, tol);
}

inline cplx fourier_coeff(const SingularSymbol& m, const WhitneyCover& cover, const ShiftedDyadicCube& Q, int n1, int n2) {
  int N = std::max(std::abs(n1), std::abs(n2));
  return fourier_table(m, cover, Q, N).at(n1, n2);
}
inline cplx fourier_coeff_taylor(const SingularSymbol& m, const WhitneyCover& cover, const ShiftedDyadicCube& Q, int ell,
                                 int s1, int s2, int M_max = 8) {
  if (ell < 0 || ell > M_max) throw InvalidArgument("Taylor order outside [0, M_max]");
  int N = std::max(std::abs(s1), std::abs(s2));
  return fourier_table(m, cover, Q, N, ell).at(s1, s2);
}

struct DecayFit {
  double C = 0;         // max |C_n| (1 + |n1| + |n2|)^order
  double M_fit = 0;     // least-squares slope of the radial envelope
  double residual = 0;  // rms of the envelope fit in log space
};

inline DecayFit fit_decay(const CoefficientTable& t, double order = 6.0) {
  DecayFit f;
  std::vector<double> env(2 * t.N + 1, 0.0);
  for (int a = -t.N; a <= t.N; ++a)
    for (int b = -t.N; b <= t.N; ++b) {
      const int r = std::abs(a) + std::abs(b);
      const double v = std::abs(t.at(a, b));
      f.C = std::max(f.C, v * std::pow(1.0 + r, order));
      if (r < static_cast<int>(env.size())) env[r] = std::max(env[r], v);
    }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (int r = 1; r < static_cast<int>(env.size()); ++r) {
    if (env[r] <= 0) continue;
    const double x = std::log(1.0 + r), y = std::log(env[r]);
    sx += x, sy += y, sxx += x * x, sxy += x * y;
    ++n;
  }
  if (n >= 2) {
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const double icpt = (sy - slope * sx) / n;
    f.M_fit = -slope;
    double rr = 0;
    for (int r = 1; r < static_cast<int>(env.size()); ++r) {
      if (env[r] <= 0) continue;
      const double e = std::log(env[r]) - (icpt + slope * std::log(1.0 + r));
      rr += e * e;
    }
    f.residual = std::sqrt(rr / n);
  }
  return f;
}

// ---------------------------------------------------------------------------
// Taylor splitting.

struct TaylorSplit {
  double term0 = 0;
  std::vector<double> terms;       // ell = 1 .. M-1
  double remainder = 0;            // f(xi2) minus the partial sums
  double remainder_integral = 0;   // integral form of the remainder
  double bound = 0;                // sup|f^(M)| |h|^M / M!
};

/// sup over [lo, hi] of |f^(order)| on a uniform grid.
template <class F>
double sup_derivative(F&& f, int order, double lo, double hi, int samples = 4000) {
  double s = 0;
  for (int i = 0; i <= samples; ++i) {
    const double x = lo + (hi - lo) * i / samples;
    s = std::max(s, std::abs(f(Jet::variable(order, x)).derivative(order)));
  }
  return s;
}

/// Taylor expansion of f around (xi1 + xi2)/2 evaluated at xi2 with M terms.
template <class F>
TaylorSplit taylor_split(F&& f, int M, double xi1, double xi2, double sup_M) {
  if (M < 1) throw InvalidArgument("Taylor order must be positive");
  TaylorSplit t;
  const double mu = 0.5 * (xi1 + xi2), h = 0.5 * (xi2 - xi1);
  Jet j = f(Jet::variable(M, mu));
  t.term0 = j.coeff(0);
  double partial = t.term0;
  double hp = 1;
  for (int l = 1; l < M; ++l) {
    hp *= h;
    const double v = j.coeff(l) * hp;
    t.terms.push_back(v);
    partial += v;
  }
  t.remainder = f(Jet::variable(0, xi2)).value() - partial;
  // h^M/(M-1)! int_0^1 (1-s)^{M-1} f^(M)(mu + s h) ds
  auto integrand = [&](double s) {
    return std::pow(1.0 - s, M - 1) * f(Jet::variable(M, mu + s * h)).derivative(M);
  };
  const double I = h == 0 ? 0.0 : boost::math::quadrature::gauss<double, 30>::integrate(integrand, 0.0, 1.0);
  t.remainder_integral = std::pow(h, M) / boost::math::factorial<double>(static_cast<unsigned>(M - 1)) * I;
  t.bound = sup_M * std::pow(std::abs(h), M) / boost::math::factorial<double>(static_cast<unsigned>(M));
  return t;
}

// ---------------------------------------------------------------------------
// Rescaled derivative bumps.

/// phi_{n}(x) = unit_bump(x) e^{2 pi i n x} and its derivatives via Leibniz.
inline cplx modulated_bump_derivative(double x, int n, int ell) {
  Jet j = unit_bump(Jet::variable(ell, x));
  const cplx iw(0.0, 2 * kPi * n);
  cplx s = 0;
  for (int r = 0; r <= ell; ++r)
    s += boost::math::binomial_coefficient<double>(ell, r) * j.derivative(r) * std::pow(iw, ell - r);
  return s * cis2pi(n * x);
}

/// 2^{k2 ell} phi^{(ell)}_{Q'_1, n} for Q'_1 = 2^{k2}[m, m+1], i.e. phi_n^{(ell)}(xi/2^{k2} - m).
struct AdaptedBump {
  long k2 = 0;
  BigInt m = 0;
  int n1 = 0;
  int ell = 0;

  /// Normalized form, argument in cell units x = xi/2^{k2} - m.
  cplx normalized(double x) const { return modulated_bump_derivative(x, n1, ell); }

  /// Direct form: derivative in xi of phi(xi/2^{k2} - m) e^{2 pi i n1 xi/2^{k2}}, times 2^{k2 ell}.
  cplx direct(const Rat& xi) const {
    const Rat x = xi / pow2(k2) - Rat(m);
    const double xd = to_double(x);
    const double scale = std::ldexp(1.0, static_cast<int>(-k2));  // d x / d xi
    Jet j = unit_bump(Jet::variable(ell, xd));
    const cplx iw(0.0, 2 * kPi * n1 * scale);
    cplx s = 0;
    for (int r = 0; r <= ell; ++r)
      s += boost::math::binomial_coefficient<double>(ell, r) * j.derivative(r) * std::pow(scale, r) *
           std::pow(iw, ell - r);
    // e^{2 pi i n1 xi/2^{k2}} = e^{2 pi i n1 x} because n1 m is an integer.
    return s * cis2pi(n1 * xd) * std::ldexp(1.0, static_cast<int>(k2 * ell));
  }

  /// max_{r <= 2} sup_x |d^r/dx^r normalized(x)| on [0,1].
  double adapted_constant(int samples = 2000) const {
    double c = 0;
    for (int r = 0; r <= 2; ++r) {
      AdaptedBump b = *this;
      b.ell = ell + r;
      for (int i = 0; i <= samples; ++i) c = std::max(c, std::abs(b.normalized(static_cast<double>(i) / samples)));
    }
    return c;
  }
};

inline AdaptedBump rescaled_derivative_bump(long k2, const BigInt& m, int n1, int ell, int M_max = 8) {
  if (ell < 0 || ell > M_max + 2) throw InvalidArgument("derivative order beyond the certified range");
  return AdaptedBump{k2, m, n1, ell};
}

// ---------------------------------------------------------------------------
// Remainder symbol at scale gap #.

/// m~_#(xi) = sum over Whitney squares Q (plane xi1, xi2; side 2^k1) and Q' (plane xi2, xi3;
/// side 2^{k1+#}) of phi_{Q_1}(xi1) phi_{Q_2}(xi2) K_{Q'_1}(xi1, xi2) phi_{Q'_2}(xi3), where
/// phi_J is the unit bump adapted to J and K averages the M-th normalized derivative along
/// the Taylor segment: K = M int_0^1 (1-t)^{M-1} phi^{(M)}((mu + t h - a)/|J|) dt.
class RemainderSymbol {
 public:
  RemainderSymbol(WhitneyCover c1, WhitneyCover c2, long sharp, int M)
      : c1_(std::move(c1)), c2_(std::move(c2)), sharp_(sharp), M_(M) {}

  long sharp() const { return sharp_; }

  static double bump_on(const DyadicInterval& J, const Rat& x) {
    return unit_bump(to_double((x - J.lo()) / J.length()));
  }

  double kernel(const DyadicInterval& J, const Rat& x1, const Rat& x2) const {
    const double a = to_double((x1 + x2) / 2 - J.lo()) / to_double(J.length());
    const double b = to_double((x2 - x1) / 2) / to_double(J.length());
    auto f = [&](double t) {
      return std::pow(1.0 - t, M_ - 1) * unit_bump(Jet::variable(M_, a + t * b)).derivative(M_);
    };
    return M_ * boost::math::quadrature::gauss<double, 20>::integrate(f, 0.0, 1.0);
  }

  double operator()(const Rat& x1, const Rat& x2, const Rat& x3) const {
    double total = 0;
    const double d1 = std::abs(to_double(x1 - x2)) / std::sqrt(2.0);
    if (d1 == 0) return 0.0;
    auto [klo, khi] = c1_.candidate_scales(d1);
    for (long k1 = std::max(klo - 1, c1_.j_lo()); k1 <= std::min(khi + 1, c1_.j_hi()); ++k1) {
      const long k2 = k1 + sharp_;
      if (k2 < c2_.j_lo() || k2 > c2_.j_hi()) continue;
      for (int s1 = 0; s1 < 3; ++s1)
        for (int s2 = 0; s2 < 3; ++s2) {
          ShiftedDyadicCube Q(std::vector<DyadicInterval>{containing_interval(k1, s1, x1),
                                                          containing_interval(k1, s2, x2)});
          if (!c1_.accepted(Q)) continue;
          const double b1 = bump_on(Q.component(0), x1);
          if (b1 == 0) continue;
          const double b2 = bump_on(Q.component(1), x2);
          if (b2 == 0) continue;
          double inner = 0;
          for (int t1 = 0; t1 < 3; ++t1)
            for (int t2 = 0; t2 < 3; ++t2) {
              DyadicInterval J3 = containing_interval(k2, t2, x3);
              const double b3 = bump_on(J3, x3);
              if (b3 == 0) continue;
              // every J meeting the Taylor segment carries a nonzero kernel, not only those holding an endpoint
              const DyadicInterval Ja = containing_interval(k2, t1, std::min(x1, x2));
              const DyadicInterval Jb = containing_interval(k2, t1, std::max(x1, x2));
              for (BigInt kj = Ja.k(); kj <= Jb.k(); ++kj) {
                const DyadicInterval J(k2, kj, t1);
                ShiftedDyadicCube Qp(std::vector<DyadicInterval>{J, J3});
                if (!c2_.accepted(Qp)) continue;
                inner += kernel(J, x1, x2) * b3;
              }
            }
          total += b1 * b2 * inner;
        }
    }
    return total;
  }

 private:
  WhitneyCover c1_, c2_;
  long sharp_;
  int M_;
};

/// Distance from xi to the line xi1 = xi2 = xi3.
inline double dist_to_diagonal3(double a, double b, double c) {
  const double m = (a + b + c) / 3;
  return std::sqrt((a - m) * (a - m) + (b - m) * (b - m) + (c - m) * (c - m));
}

struct RemainderCheck {
  std::array<double, 3> max_ratio{0, 0, 0};  // per |alpha| = 0, 1, 2
  std::size_t used = 0, excluded = 0;
};

/// Central-difference audit of |d^alpha m~| dist^{|alpha|} / 2^{# |alpha|}. Points are
/// given in exact coordinates; the difference step is 2^{k1}/1024 with 2^{k1} estimated from
/// |xi1 - xi2|/C0. Points whose stencil reaches within 4 steps of the singular line are excluded.
inline RemainderCheck remainder_symbol_check(const RemainderSymbol& m, const std::vector<std::array<Rat, 3>>& pts,
                                             double c0) {
  RemainderCheck rc;
  for (auto& p : pts) {
    const double a = to_double(p[0]), b = to_double(p[1]), c = to_double(p[2]);
    const double d1 = std::abs(a - b);
    const double dist = dist_to_diagonal3(a, b, c);
    if (d1 == 0) {
      ++rc.excluded;
      continue;
    }
    const long e = static_cast<long>(std::floor(std::log2(d1 / c0))) - 10;
    const Rat h = pow2(e);
    const double hd = to_double(h);
    if (dist < 4 * hd * std::sqrt(3.0) || d1 < 8 * hd) {
      ++rc.excluded;
      continue;
    }
    ++rc.used;
    auto f = [&](int i, int j, int di, int dj) {
      std::array<Rat, 3> q = p;
      q[i] += Rat(di) * h;
      q[j] += Rat(dj) * h;
      return m(q[0], q[1], q[2]);
    };
    const double f0 = m(p[0], p[1], p[2]);
    const double s = std::ldexp(1.0, static_cast<int>(m.sharp()));
    rc.max_ratio[0] = std::max(rc.max_ratio[0], std::abs(f0));
    for (int i = 0; i < 3; ++i) {
      const double fp = f(i, i, 1, 0), fm = f(i, i, -1, 0);
      const double d = (fp - fm) / (2 * hd);
      rc.max_ratio[1] = std::max(rc.max_ratio[1], std::abs(d) * dist / s);
      const double dd = (fp - 2 * f0 + fm) / (hd * hd);
      rc.max_ratio[2] = std::max(rc.max_ratio[2], std::abs(dd) * dist * dist / (s * s));
      for (int j = i + 1; j < 3; ++j) {
        const double mix = (f(i, j, 1, 1) - f(i, j, 1, -1) - f(i, j, -1, 1) + f(i, j, -1, -1)) / (4 * hd * hd);
        rc.max_ratio[2] = std::max(rc.max_ratio[2], std::abs(mix) * dist * dist / (s * s));
      }
    }
  }
  return rc;
}

}  // namespace ttlab
