#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "ttlab/wavepacket.hpp"

using namespace ttlab;

namespace {

DyadicInterval iv(long j, long k, int s = 0) { return DyadicInterval(j, BigInt(k), s); }
Tile tile(long j, long k, long m, int s = 0) { return Tile(iv(j, k), iv(-j, m, s)); }

const BumpProfile& prof() { return BumpProfile::standard(); }

// psi(y) by adaptive quadrature of the frequency profile, independent of the internal table.
double psi_oracle(double y) {
  auto f = [&](double u) { return prof().psi_hat(u) * std::cos(2 * kPi * u * y); };
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, -0.45, 0.45, 12, 1e-13);
}

// int_a^b conj(Phi_P(x)) dx by adaptive quadrature in space.
cplx interval_oracle(double a, double b, const WavePacket& P) {
  const double x = to_double(P.x), L = P.len_d, c = to_double(P.c);
  auto re = [&](double t) { return psi_oracle((t - x) / L) * std::cos(2 * kPi * c * t) / std::sqrt(L); };
  auto im = [&](double t) { return -psi_oracle((t - x) / L) * std::sin(2 * kPi * c * t) / std::sqrt(L); };
  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  return {GK::integrate(re, a, b, 10, 1e-11), GK::integrate(im, a, b, 10, 1e-11)};
}

SampledFunction sampled(const WavePacket& P, long per_len, long radius) {
  SampledFunction f;
  f.h = P.len / per_len;
  f.x0 = P.x - Rat(radius) * P.len;
  f.v = P.sample(f.x0, f.h, static_cast<std::size_t>(2 * radius * per_len + 1));
  return f;
}

}  // namespace

TEST(Cutoff, CenterAndOneLengthAway) {
  const Interval I{Rat(2), Rat(5)};
  EXPECT_DOUBLE_EQ(approximate_cutoff(I, Rat(7, 2)), 1.0);
  EXPECT_NEAR(approximate_cutoff(I, Rat(13, 2)), 1 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(approximate_cutoff(I, 3.5 + 3e6) * 3e6 / 3.0, 1.0, 1e-9);
}

TEST(Profile, CompactSupportAndPlateau) {
  for (double u = -1; u <= 1; u += 1e-3) {
    if (std::abs(u) >= 0.45) EXPECT_EQ(prof().psi_hat(u), 0.0);
    else if (std::abs(u) < 0.43) EXPECT_GT(prof().psi_hat(u), 0.0);  // the flat edge underflows beyond this
  }
  const double top = prof().psi_hat(0);
  for (double u = -0.2; u <= 0.2; u += 1e-3) EXPECT_DOUBLE_EQ(prof().psi_hat(u), top);
}

TEST(Profile, UnitL2Norm) {
  auto sq = [](double u) { return prof().psi_hat(u) * prof().psi_hat(u); };
  const double n = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(sq, -0.45, 0.45, 15, 1e-14);
  EXPECT_NEAR(n, 1.0, 1e-10);
}

TEST(Profile, TableMatchesQuadrature) {
  for (double y : {0.0, 0.3, 1.7, 4.25, 9.9, 20.5})
    EXPECT_NEAR(prof().psi(y), psi_oracle(y), 1e-9) << "y=" << y;
}

TEST(Packet, UnitTileIsModulatedMotherBump) {
  const auto P = make_wave_packet(tile(0, 0, 0));
  EXPECT_EQ(P.c, Rat(1, 2));
  for (int n = -40; n <= 40; ++n) {
    const Rat x(n, 8);
    const double xd = to_double(x);
    const cplx expect = psi_oracle(xd - 0.5) * std::exp(cplx(0, 2 * kPi * 0.5 * xd));
    EXPECT_NEAR(std::abs(P.eval(x) - expect), 0.0, 1e-9);
  }
}

TEST(Packet, UnitNormBySampling) {
  for (long j : {-3L, 0L, 4L}) {
    const auto P = make_wave_packet(tile(j, 3, -7, 1));
    auto f = sampled(P, 64, 128);
    double s = 0;
    for (auto& v : f.v) s += std::norm(v);
    EXPECT_NEAR(s * to_double(f.h), 1.0, 1e-8) << "j=" << j;
  }
}

TEST(Packet, DilationCovariance) {
  const auto U = make_wave_packet(tile(0, 0, 0));
  const auto D = make_wave_packet(tile(1, 0, 0));
  EXPECT_EQ(D.tile.omega.hi(), Rat(1, 2));
  for (int n = -200; n <= 200; ++n) {
    const Rat x(n, 16);
    EXPECT_NEAR(std::abs(D.eval(x) - U.eval(x / 2) / std::sqrt(2.0)), 0.0, 1e-8);
  }
}

TEST(Packet, FourierTransformMatchesDefinition) {
  const auto P = make_wave_packet(tile(-2, 5, 9, 2));
  for (int n = -20; n <= 20; ++n) {
    const Rat xi = P.c + Rat(n, 10);
    const double d = to_double((xi - P.c) * P.len);
    const cplx expect = std::sqrt(P.len_d) * prof().psi_hat(d) * std::exp(cplx(0, -2 * kPi * to_double((xi - P.c) * P.x)));
    EXPECT_NEAR(std::abs(P.fourier(xi) - expect), 0.0, 1e-12);
    if (xi <= P.freq_lo() || xi >= P.freq_hi()) EXPECT_EQ(P.fourier(xi), cplx(0.0));
  }
}

TEST(Packet, ExtremeScaleRefused) { EXPECT_THROW(make_wave_packet(tile(401, 0, 0)), ResolutionError); }

TEST(Packet, SampledSpectrumStaysInsideNineTenthsOmega) {
  for (auto t : {tile(0, 0, 0), tile(-3, 2, 17, 1), tile(2, -1, -5, 2)}) EXPECT_LT(dft_support_leakage(make_wave_packet(t)), 1e-10);
}

TEST(Pairing, SelfPairingIsOne) {
  const auto P = make_wave_packet(tile(-1, 3, 11, 2));
  EXPECT_NEAR(std::abs(pair_packets(P, P) - 1.0), 0.0, 1e-6);
  auto r = pair_sampled(sampled(P, 64, 128), P);
  EXPECT_FALSE(r.flagged);
  EXPECT_NEAR(std::abs(r.value - 1.0), 0.0, 1e-6);
  EXPECT_LT(r.error_bound, 1e-6);
}

TEST(Pairing, DisjointFrequencySupportsGiveZero) {
  const auto A = make_wave_packet(tile(0, 0, 0));
  const auto B = make_wave_packet(tile(0, 0, 1));
  EXPECT_FALSE(packet_supports_overlap(A, B));
  EXPECT_EQ(pair_packets(A, B), cplx(0.0));
  EXPECT_NEAR(std::abs(pair_sampled(sampled(A, 64, 128), B).value), 0.0, 1e-9);
}

TEST(Pairing, SpaceAndFrequencyComputationsAgree) {
  // Overlapping supports at different scales and positions.
  const auto A = make_wave_packet(tile(0, 0, 0));
  for (auto t : {tile(-1, 1, 1), tile(-1, 0, 0), tile(0, 2, 0, 1), tile(1, 0, 0)}) {
    const auto B = make_wave_packet(t);
    const auto& small = B.len < A.len ? B : A;
    const auto& big = B.len < A.len ? A : B;
    SampledFunction f;
    f.h = small.len / 64;
    f.x0 = big.x - Rat(128) * big.len;
    f.v = big.sample(f.x0, f.h, static_cast<std::size_t>(256 * 64) * static_cast<std::size_t>(to_double(big.len / small.len)) + 1);
    const cplx space = pair_sampled(f, small).value;
    EXPECT_NEAR(std::abs(space - pair_packets(big, small)), 0.0, 1e-8);
  }
}

TEST(Pairing, IntervalPairingMatchesSpaceQuadrature) {
  const auto P = make_wave_packet(tile(0, 0, 3, 1));
  for (auto [a, b] : std::vector<std::pair<Rat, Rat>>{{Rat(0), Rat(1)}, {Rat(-3, 4), Rat(5, 2)}, {Rat(1, 3), Rat(2, 3)}}) {
    const cplx got = pair_interval(a, b, P);
    EXPECT_NEAR(std::abs(got - interval_oracle(to_double(a), to_double(b), P)), 0.0, 1e-7);
  }
  StepFunction f{{Interval{Rat(0), Rat(1, 2)}, Interval{Rat(1, 2), Rat(2)}}, {cplx(1, 0), cplx(0, -1)}};
  const cplx expect = interval_oracle(0, 0.5, P) + cplx(0, -1) * interval_oracle(0.5, 2, P);
  EXPECT_NEAR(std::abs(pair_step(f, P) - expect), 0.0, 1e-7);
}

TEST(Pairing, CoarseOrShortGridIsFlagged) {
  const auto P = make_wave_packet(tile(0, 0, 0));
  EXPECT_TRUE(pair_sampled(sampled(P, 64, 8), P).flagged);
  EXPECT_TRUE(pair_sampled(sampled(P, 1, 128), P).flagged);
}

TEST(Pairing, NestedPacketDecayWithSeparation) {
  // <Phi_{P}, Phi_{Q}> for |I_P| = 2^-s |I_Q|, frequency of P around that of Q, offset by d|I_Q|.
  // Calibrated against the default profile: C about 2.4 with quadratic decay in the separation.
  double worst = 0;
  for (int s = 1; s <= 6; ++s)
    for (int d = 0; d <= 24; ++d) {
      const auto Qp = make_wave_packet(tile(0, 0, 0));
      const auto Pp = make_wave_packet(Tile(DyadicInterval(-s, BigInt(d) << s, 0), containing_interval(s, 0, Qp.c)));
      const double ratio = std::abs(pair_packets(Qp, Pp)) / (std::pow(2.0, -0.5 * s) * std::pow(1.0 + d, -2));
      worst = std::max(worst, ratio);
    }
  EXPECT_TRUE(std::isfinite(worst));
  EXPECT_LT(worst, 3.0);
}

TEST(Decay, ZeroOrderIsSupNorm) {
  const auto P = make_wave_packet(tile(0, 0, 0));
  auto d = verify_decay(P, 0);
  EXPECT_FALSE(d.flagged);
  EXPECT_NEAR(d.constant, psi_oracle(0.0), 1e-6);
}

TEST(Decay, ScaleAndTranslationInvariant) {
  for (int M : {2, 5, 10}) {
    const double ref = verify_decay(make_wave_packet(tile(0, 0, 0)), M).constant;
    EXPECT_TRUE(std::isfinite(ref));
    for (long j = -6; j <= 6; ++j) {
      const double c = verify_decay(make_wave_packet(tile(j, 5, -3)), M).constant;
      EXPECT_NEAR(c / ref, 1.0, 0.05) << "M=" << M << " j=" << j;
    }
    EXPECT_DOUBLE_EQ(verify_decay(make_wave_packet(tile(0, 9, 0)), M).constant, ref);
  }
  EXPECT_TRUE(verify_decay(make_wave_packet(tile(0, 0, 0)), 11).flagged);
}

TEST(PhaseStepper, ExactFractionsForLargeDenominators) {
  const Rat a(BigInt("123456789012345678901234567"), BigInt("98765432109876543210987"));
  const Rat b(BigInt("1"), BigInt("4611686018427387905"));
  PhaseStepper ph(a, b);
  for (int n = 0; n < 50; ++n) {
    EXPECT_NEAR(ph.value(), to_double(frac_rat(a + Rat(n) * b)), 1e-15);
    ph.advance();
  }
}
