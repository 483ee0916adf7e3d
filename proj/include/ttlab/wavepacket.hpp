/** @file wavepacket.hpp
 *  L2-normalized wave packets adapted to tiles, with exact phases, frequency-domain
 *  pairings (packet/packet and packet/step function), sampled pairings with an
 *  error report, decay certificates and a discrete Fourier support audit.
 *
 *  Convention: hat(Phi_P)(xi) = |I|^{1/2} psihat((xi - c)|I|) e^{-2 pi i (xi - c) x_I},
 *  i.e. Phi_P(x) = |I|^{-1/2} e^{2 pi i c x} psi((x - x_I)/|I|), with c the center of
 *  omega_P and x_I the center of I_P. Inner products are <f,g> = int f conj(g).
 */
#pragma once

#include <fftw3.h>

#include <algorithm>
#include <memory>
#include <variant>
#include <vector>

#include "ttlab/intervals.hpp"
#include "ttlab/tiles.hpp"

namespace ttlab {

/// Real, even mother profile psihat with support [-0.45, 0.45] and plateau [-0.2, 0.2].
/// psihat(u) = A * S((0.45 - |u|)/0.25) with the smooth step
/// S(t) = e^{-b/t} / (e^{-b/t} + e^{-b/(1-t)}), b = 2.
class BumpProfile {
 public:
  static constexpr double kSupport = 0.45;
  static constexpr double kPlateau = 0.2;
  static constexpr double kBeta = 2.0;
  static constexpr double kTableRadius = 256.0;
  static constexpr int kCertifiedOrder = 10;

  static const BumpProfile& standard() {
    static const BumpProfile p;
    return p;
  }

  static double smooth_step(double t) {
    if (t <= 0) return 0.0;
    if (t >= 1) return 1.0;
    const double a = std::exp(-kBeta / t), b = std::exp(-kBeta / (1.0 - t));
    return a / (a + b);
  }

  double psi_hat(double u) const {
    const double au = std::abs(u);
    if (au >= kSupport) return 0.0;
    return amp_ * smooth_step((kSupport - au) / (kSupport - kPlateau));
  }

  /// psi(y) = int psihat(u) e^{2 pi i u y} du (real and even); zero beyond the table radius.
  double psi(double y) const {
    double ay = std::abs(y);
    if (ay >= kTableRadius) return 0.0;
    const double pos = ay / dy_;
    long i = static_cast<long>(std::floor(pos));
    const double t = pos - static_cast<double>(i);
    // 6-point Lagrange on nodes i-2..i+3.
    double s = 0;
    for (int a = -2; a <= 3; ++a) {
      double w = 1;
      for (int b = -2; b <= 3; ++b)
        if (b != a) w *= (t - b) / static_cast<double>(a - b);
      s += w * table_[static_cast<std::size_t>(std::labs(i + a))];
    }
    return s;
  }

  /// int_{|y| > r} |psi(y)| dy, from the table.
  double tail_l1(double r) const {
    r = std::abs(r);
    if (r >= kTableRadius) return 0.0;
    std::size_t i = static_cast<std::size_t>(r / dy_);
    return tail_[std::min(i, tail_.size() - 1)];
  }

  /// Largest value of psihat^2 (the frame-type constant of the system).
  double max_psi_hat_sq() const { return amp_ * amp_; }
  double grid_step() const { return dy_; }

 private:
  BumpProfile() {
    // Normalize int psihat^2 = 1 by a fine trapezoid sum (integrand vanishes at the ends).
    amp_ = 1.0;
    const int K = 1 << 16;
    const double du = 2 * kSupport / K;
    double s = 0;
    for (int k = 1; k < K; ++k) {
      double v = psi_hat(-kSupport + k * du);
      s += v * v;
    }
    amp_ = 1.0 / std::sqrt(s * du);

    const long N = 1L << 20;
    const double du_t = std::ldexp(1.0, -11);
    dy_ = 1.0 / (static_cast<double>(N) * du_t);
    fftw_complex* buf = fftw_alloc_complex(static_cast<std::size_t>(N));
    for (long k = 0; k < N; ++k) {
      long kk = k < N / 2 ? k : k - N;
      buf[k][0] = psi_hat(static_cast<double>(kk) * du_t);
      buf[k][1] = 0.0;
    }
    fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(N), buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
    fftw_execute(plan);
    const std::size_t M = static_cast<std::size_t>(kTableRadius / dy_) + 8;
    table_.resize(M);
    for (std::size_t m = 0; m < M; ++m) table_[m] = buf[m][0] * du_t;
    fftw_destroy_plan(plan);
    fftw_free(buf);

    tail_.assign(M, 0.0);
    double acc = 0;
    for (std::size_t m = M; m-- > 0;) {
      acc += std::abs(table_[m]) * dy_;
      tail_[m] = 2 * acc;
    }
  }

  double amp_ = 1.0;
  double dy_ = 0;
  std::vector<double> table_;
  std::vector<double> tail_;
};

/// (1 + ((x - x_I)/|I|)^2)^{-1/2}.
inline double approximate_cutoff(const Interval& I, double x) {
  const double u = (x - to_double(I.center())) / to_double(I.length());
  return 1.0 / std::sqrt(1.0 + u * u);
}
inline double approximate_cutoff(const Interval& I, const Rat& x) {
  const double u = to_double((x - I.center()) / I.length());
  return 1.0 / std::sqrt(1.0 + u * u);
}

/// Exact fractional parts of a + n*b for n = 0, 1, 2, ... (a, b rational).
class PhaseStepper {
 public:
  PhaseStepper(const Rat& a, const Rat& b) {
    mpz_lcm(den_.get_mpz_t(), a.get_den_mpz_t(), b.get_den_mpz_t());
    BigInt na = a.get_num() * (den_ / a.get_den());
    BigInt nb = b.get_num() * (den_ / b.get_den());
    mpz_fdiv_r(na.get_mpz_t(), na.get_mpz_t(), den_.get_mpz_t());
    mpz_fdiv_r(nb.get_mpz_t(), nb.get_mpz_t(), den_.get_mpz_t());
    small_ = mpz_sizeinbase(den_.get_mpz_t(), 2) <= 62;
    if (small_) {
      d64_ = mpz_get_ui(den_.get_mpz_t());
      c64_ = mpz_get_ui(na.get_mpz_t());
      s64_ = mpz_get_ui(nb.get_mpz_t());
      inv_ = 1.0 / static_cast<double>(d64_);
    } else {
      cur_ = na;
      step_ = nb;
    }
  }
  /// Current fraction in [0,1).
  double value() const {
    if (small_) return static_cast<double>(c64_) * inv_;
    Rat q(cur_, den_);
    return q.get_d();
  }
  void advance() {
    if (small_) {
      c64_ += s64_;
      if (c64_ >= d64_) c64_ -= d64_;
    } else {
      cur_ += step_;
      if (cur_ >= den_) cur_ -= den_;
    }
  }

 private:
  BigInt den_, cur_, step_;
  bool small_ = false;
  std::uint64_t d64_ = 1, c64_ = 0, s64_ = 0;
  double inv_ = 1.0;
};

inline double frac_d(const Rat& r) { return to_double(frac_rat(r)); }

/// Packet adapted to a tile.
struct WavePacket {
  Tile tile;
  Rat c;    // frequency center
  Rat x;    // spatial center
  Rat len;  // |I|
  double len_d = 1, c_len = 0;

  Rat freq_lo() const { return c - Rat(9, 20) / len; }
  Rat freq_hi() const { return c + Rat(9, 20) / len; }

  /// Phi_P at an exact point.
  cplx eval(const Rat& xx) const {
    const auto& prof = BumpProfile::standard();
    const double y = to_double((xx - x) / len);
    const double amp = prof.psi(y) / std::sqrt(len_d);
    return amp * cis2pi(frac_d(c * xx));
  }

  /// hat(Phi_P) at an exact frequency.
  cplx fourier(const Rat& xi) const {
    const auto& prof = BumpProfile::standard();
    const Rat d = xi - c;
    const double amp = std::sqrt(len_d) * prof.psi_hat(to_double(d * len));
    if (amp == 0.0) return 0.0;
    return amp * cis2pi(-frac_d(d * x));
  }

  /// Samples on x0 + n h, n < count.
  std::vector<cplx> sample(const Rat& x0, const Rat& h, std::size_t count) const {
    const auto& prof = BumpProfile::standard();
    std::vector<cplx> out(count);
    PhaseStepper ph(c * x0, c * h);
    const double y0 = to_double((x0 - x) / len), dy = to_double(h / len);
    const double s = 1.0 / std::sqrt(len_d);
    for (std::size_t n = 0; n < count; ++n) {
      out[n] = s * prof.psi(y0 + static_cast<double>(n) * dy) * cis2pi(ph.value());
      ph.advance();
    }
    return out;
  }
};

inline WavePacket make_wave_packet(const Tile& t) {
  if (std::labs(t.I.j()) > 400)
    throw ResolutionError("tile scale outside the representable range of the sampled profile");
  WavePacket w;
  w.tile = t;
  w.c = t.omega.center();
  w.x = t.I.center();
  w.len = t.I.length();
  w.len_d = to_double(w.len);
  w.c_len = to_double(w.c * w.len);
  return w;
}

/// Frequency supports (9/10 omega) overlap in an open set.
inline bool packet_supports_overlap(const WavePacket& A, const WavePacket& B) {
  return A.freq_lo() < B.freq_hi() && B.freq_lo() < A.freq_hi();
}

/// <Phi_A, Phi_B> computed on the exact support intersection in frequency.
inline cplx pair_packets(const WavePacket& A, const WavePacket& B) {
  if (!packet_supports_overlap(A, B)) return 0.0;
  const auto& prof = BumpProfile::standard();
  const double dx = to_double(A.x - B.x);
  const double big = std::max(A.len_d, B.len_d);
  if (std::abs(dx) > 600.0 * big) return 0.0;  // beyond the profile table in both factors
  const Rat dc = A.c - B.c;
  const Rat half(9, 20);
  const Rat vlo_r = std::max(Rat(dc - half / A.len), Rat(-half / B.len));
  const Rat vhi_r = std::min(Rat(dc + half / A.len), Rat(half / B.len));
  const double vlo = to_double(vlo_r), vhi = to_double(vhi_r);
  const double extent = std::abs(dx) + 192.0 * (A.len_d + B.len_d);
  const double width = vhi - vlo;
  const long K = std::max<long>(16, static_cast<long>(std::ceil(width * extent * 1.25)) + 8);
  const double dv = width / static_cast<double>(K);
  const double base_a = to_double((B.c - A.c) * A.len);  // (c_B - c_A)|I_A|
  const double ph0 = frac_d((B.c - A.c) * A.x);
  const double xd = to_double(A.x - B.x);
  cplx acc = 0;
  for (long k = 1; k < K; ++k) {
    const double v = vlo + static_cast<double>(k) * dv;
    const double ga = prof.psi_hat(base_a + v * A.len_d);
    if (ga == 0.0) continue;
    const double gb = prof.psi_hat(v * B.len_d);
    if (gb == 0.0) continue;
    acc += ga * gb * cis2pi(-(ph0 + v * xd));
  }
  return acc * dv * std::sqrt(A.len_d * B.len_d);
}

/// Step function sum_m v_m chi_[a_m, b_m).
struct StepFunction {
  std::vector<Interval> pieces;
  std::vector<cplx> values;

  cplx eval(const Rat& x) const {
    for (std::size_t m = 0; m < pieces.size(); ++m)
      if (pieces[m].contains_point(x)) return values[m];
    return 0.0;
  }
  double l2_norm() const {
    double s = 0;
    for (std::size_t m = 0; m < pieces.size(); ++m) s += std::norm(values[m]) * to_double(pieces[m].length());
    return std::sqrt(s);
  }
};

/// int_a^b conj(Phi_P), via Plancherel on the profile's support.
inline cplx pair_interval(const Rat& a0, const Rat& b0, const WavePacket& P) {
  const auto& prof = BumpProfile::standard();
  const Rat R = Rat(256) * P.len;
  const Rat a = std::max(a0, Rat(P.x - R)), b = std::min(b0, Rat(P.x + R));
  if (!(a < b)) return 0.0;
  const Rat ln = b - a, mid = (a + b) / 2;
  const double L = to_double(ln / P.len);
  const double D = to_double((P.x - mid) / P.len);
  const Rat z0 = ln * P.c;
  const double z0d = to_double(z0);
  const bool huge = std::abs(z0d) > 1e6;
  const double z0m2 = huge ? to_double(z0 - Rat(2) * Rat(floor_rat(z0 / 2))) : z0d;
  const double extent = std::abs(D) + 0.5 * L + 200.0;
  const double span = 2 * BumpProfile::kSupport;
  const long K = static_cast<long>(std::ceil(span * extent)) + 8;
  const double du = span / static_cast<double>(K);
  cplx acc = 0;
  for (long k = 1; k < K; ++k) {
    const double u = -BumpProfile::kSupport + static_cast<double>(k) * du;
    const double g = prof.psi_hat(u);
    if (g == 0.0) continue;
    double sn;
    if (!huge) {
      sn = sinc_pi(z0d + L * u);
    } else {
      sn = std::sin(kPi * (z0m2 + L * u)) / (kPi * (z0d + L * u));
    }
    acc += g * sn * cis2pi(u * D);
  }
  acc *= du;
  return to_double(ln) / std::sqrt(P.len_d) * cis2pi(-frac_d(P.c * mid)) * acc;
}

inline cplx pair_step(const StepFunction& f, const WavePacket& P) {
  cplx s = 0;
  for (std::size_t m = 0; m < f.pieces.size(); ++m)
    if (f.values[m] != 0.0) s += f.values[m] * pair_interval(f.pieces[m].lo, f.pieces[m].hi, P);
  return s;
}

/// Finite combination sum_k coeff_k Phi_{P_k}.
struct PacketSum {
  std::vector<WavePacket> packets;
  std::vector<cplx> coeffs;

  cplx eval(const Rat& x) const {
    cplx s = 0;
    for (std::size_t k = 0; k < packets.size(); ++k) s += coeffs[k] * packets[k].eval(x);
    return s;
  }
  cplx fourier(const Rat& xi) const {
    cplx s = 0;
    for (std::size_t k = 0; k < packets.size(); ++k) s += coeffs[k] * packets[k].fourier(xi);
    return s;
  }
};

using TestFunction = std::variant<PacketSum, StepFunction>;

inline cplx pair(const PacketSum& f, const WavePacket& P) {
  cplx s = 0;
  for (std::size_t k = 0; k < f.packets.size(); ++k) s += f.coeffs[k] * pair_packets(f.packets[k], P);
  return s;
}
inline cplx pair(const StepFunction& f, const WavePacket& P) { return pair_step(f, P); }
inline cplx pair(const TestFunction& f, const WavePacket& P) {
  return std::visit([&](const auto& g) { return pair(g, P); }, f);
}

/// Uniform samples f(x0 + n h).
struct SampledFunction {
  Rat x0, h;
  std::vector<cplx> v;
  Rat end() const { return x0 + h * Rat(static_cast<long>(v.size())); }
};

struct PairReport {
  cplx value = 0;
  double error_bound = 0;  // window-tail part of the error
  bool flagged = false;    // grid does not cover the required window or is too coarse
};

/// Trapezoid pairing h * sum f(x_n) conj(Phi_P(x_n)). The error bound covers the
/// packet mass outside the sampled window; coarse or short grids are flagged.
inline PairReport pair_sampled(const SampledFunction& f, const WavePacket& P) {
  PairReport r;
  const auto& prof = BumpProfile::standard();
  auto s = P.sample(f.x0, f.h, f.v.size());
  cplx acc = 0;
  double fmax = 0;
  for (std::size_t n = 0; n < s.size(); ++n) {
    acc += f.v[n] * std::conj(s[n]);
    fmax = std::max(fmax, std::abs(f.v[n]));
  }
  r.value = acc * to_double(f.h);
  const double left = to_double((P.x - f.x0) / P.len);
  const double right = to_double((f.end() - P.x) / P.len);
  const double cover = std::min(left, right);
  r.error_bound = fmax * std::sqrt(P.len_d) * prof.tail_l1(std::max(0.0, cover));
  if (cover < 64.0 || f.h > P.len / 2) r.flagged = true;
  return r;
}

/// sup over the sampling window of |Phi_P(x)| |I|^{1/2} / cutoff^M. The window has
/// radius 64|I| and 64 samples per |I|. Orders above the certified one are flagged.
struct DecayCertificate {
  double constant = 0;
  bool flagged = false;
};

inline DecayCertificate verify_decay(const WavePacket& P, int M) {
  if (M < 0) throw InvalidArgument("decay order must be nonnegative");
  DecayCertificate d;
  d.flagged = M > BumpProfile::kCertifiedOrder;
  const Rat h = P.len / 64;
  const Rat x0 = P.x - Rat(64) * P.len;
  const std::size_t n = 64 * 128 + 1;
  auto s = P.sample(x0, h, n);
  const double sl = std::sqrt(P.len_d);
  for (std::size_t k = 0; k < n; ++k) {
    const double y = -64.0 + static_cast<double>(k) / 64.0;
    const double w = std::pow(1.0 + y * y, 0.5 * M);
    d.constant = std::max(d.constant, std::abs(s[k]) * sl * w);
  }
  return d;
}

/// Largest DFT bin of sampled Phi_P outside (9/10)omega_P padded by one bin,
/// relative to the largest bin overall. Samples: 64 per |I| over radius 128|I|.
inline double dft_support_leakage(const WavePacket& P) {
  const std::size_t N = 64 * 256;
  const Rat h = P.len / 64;
  const Rat x0 = P.x - Rat(128) * P.len;
  auto s = P.sample(x0, h, N);
  std::vector<cplx> out(N);
  fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(N), reinterpret_cast<fftw_complex*>(s.data()),
                                    reinterpret_cast<fftw_complex*>(out.data()), FFTW_FORWARD,
                                    FFTW_ESTIMATE);
  fftw_execute(plan);
  fftw_destroy_plan(plan);
  // Frequency of bin k is k/(N h) modulo the sampling rate 1/h. In bin units the
  // support is [c - 0.45/|I|, c + 0.45/|I|] * N h.
  const Rat Nh = Rat(static_cast<long>(N)) * h;
  Rat lo_b = (P.c - Rat(9, 20) / P.len) * Nh;
  const Rat wrap(static_cast<long>(N));
  lo_b -= wrap * Rat(floor_rat(lo_b / wrap));
  const double lo = to_double(lo_b) - 1.0;
  const double width = to_double(Rat(9, 10) / P.len * Nh) + 2.0;
  double peak = 0, leak = 0;
  for (std::size_t k = 0; k < N; ++k) {
    const double a = std::abs(out[k]);
    peak = std::max(peak, a);
    double rel = static_cast<double>(k) - lo;
    rel -= std::floor(rel / static_cast<double>(N)) * static_cast<double>(N);
    if (rel > width) leak = std::max(leak, a);
  }
  return peak > 0 ? leak / peak : 0.0;
}

}  // namespace ttlab
