#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "covphase/codebook.hpp"
#include "covphase/density.hpp"
#include "covphase/parallel.hpp"
#include "covphase/quadrature.hpp"

using namespace covphase;

namespace {

const double kLog2Pi = std::log(2.0 * std::numbers::pi);

// Integral of exp(logq) over the plane, on a Gauss-Hermite grid scaled to
// sigma and centered at the origin.
template <class F>
double integrate(F&& logq, const ChannelParams& p, std::size_t nodes = 96) {
  const auto rule = gauss_hermite(nodes);
  const double sc = std::numbers::sqrt2 * p.sigma();
  double acc = 0.0;
  for (std::size_t i = 0; i < nodes; ++i) {
    for (std::size_t j = 0; j < nodes; ++j) {
      const ComplexSample z{sc * rule->nodes[i], sc * rule->nodes[j]};
      acc += rule->weights[i] * rule->weights[j] * std::exp(logq(z) - log_q0(z, p));
    }
  }
  return acc / std::numbers::pi;
}

std::vector<ComplexSample> random_points(std::size_t n, std::uint64_t seed, double scale = 2.0) {
  Rng r(seed, 0);
  std::vector<ComplexSample> v(n);
  for (auto& z : v) z = {scale * r.normal(), scale * r.normal()};
  return v;
}

}  // namespace

TEST(LogQ0, Values) {
  const ChannelParams p(1.0, 0.0, 1.0);
  EXPECT_DOUBLE_EQ(log_q0({0, 0}, p), -kLog2Pi);
  EXPECT_DOUBLE_EQ(log_q0({1, 1}, p), -kLog2Pi - 1.0);
  const ChannelParams q(1.0, 0.0, 2.0);
  EXPECT_DOUBLE_EQ(log_q0({0, 0}, q), -std::log(8.0 * std::numbers::pi));
}

TEST(LogQ0, Normalized) {
  for (double sigma : {0.5, 1.0, 3.0}) {
    const ChannelParams p(1.0, 0.0, sigma);
    EXPECT_NEAR(integrate([&](ComplexSample z) { return log_q0(z, p); }, p), 1.0, 1e-8);
  }
}

TEST(LogCosh, StableEverywhere) {
  EXPECT_EQ(log_cosh(0.0), 0.0);
  EXPECT_NEAR(log_cosh(1.0), std::log(std::cosh(1.0)), 1e-15);
  EXPECT_NEAR(log_cosh(-3.0), std::log(std::cosh(3.0)), 1e-14);
  EXPECT_NEAR(log_cosh(1000.0), 1000.0 - std::numbers::ln2, 1e-12);
  EXPECT_NEAR(log_cosh(-1e6), 1e6 - std::numbers::ln2, 1e-6);
}

TEST(LogMeanExp, ShiftsByMax) {
  const std::vector<double> v = {1000.0, 1000.0};
  EXPECT_DOUBLE_EQ(log_mean_exp(v), 1000.0);
  const std::vector<double> w = {-800.0, 0.0};
  EXPECT_NEAR(log_mean_exp(w), std::log(0.5), 1e-15);
  EXPECT_THROW(log_mean_exp(std::span<const double>{}), Error);
}

TEST(LogQ1Bpsk, ZeroAmplitudeIsQ0) {
  const ChannelParams p(1.2, 0.4, 1.3);
  for (const auto& z : random_points(20, 1)) {
    EXPECT_EQ(log_q1_bpsk(z, p, 0.3, 0.0), log_q0(z, p));
  }
}

TEST(LogQ1Bpsk, Origin) {
  const ChannelParams p(1.2, 0.0, 1.0);
  EXPECT_NEAR(log_q1_bpsk({0, 0}, p, 0.0, 0.5), -kLog2Pi - 1.44 * 0.25 / 2.0, 1e-15);
}

TEST(LogQ1Bpsk, ScalarOracle) {
  const ChannelParams p(1.2, 0.0, 1.0);
  const double want = std::log(0.5 / (2.0 * std::numbers::pi) *
                               (std::exp(-0.4 * 0.4 / 2.0) + std::exp(-1.6 * 1.6 / 2.0)));
  EXPECT_NEAR(log_q1_bpsk({1.0, 0.0}, p, 0.0, 0.5), want, 1e-14);
}

TEST(LogQ1Bpsk, Normalized) {
  const ChannelParams p(1.2, 0.5, 1.0);
  EXPECT_NEAR(integrate([&](ComplexSample z) { return log_q1_bpsk(z, p, 0.3, 0.5); }, p), 1.0, 1e-8);
}

TEST(LogQ1Psk2n, SinglePairIsBpskAtPi) {
  const ChannelParams p(1.1, 0.2, 0.8);
  for (const auto& z : random_points(20, 2)) {
    EXPECT_NEAR(log_q1_psk2n(z, p, 1, 0.7), log_q1_bpsk(z, p, kPi, 0.7), 1e-13);
    EXPECT_EQ(log_q1_psk2n(z, p, 3, 0.0), log_q0(z, p));
  }
}

TEST(LogQ1Psk2n, RotationInvariance) {
  for (int n : {1, 2, 3, 5}) {
    const ChannelParams p(1.2, 0.4, 1.0);
    const ChannelParams shifted(1.2, 0.4 + kPi / n, 1.0);
    const double c = std::cos(kPi / n), s = std::sin(kPi / n);
    for (const auto& z : random_points(10, 3)) {
      const ComplexSample rz{c * z.x - s * z.y, s * z.x + c * z.y};
      EXPECT_NEAR(log_q1_psk2n(rz, shifted, n, 0.8), log_q1_psk2n(z, p, n, 0.8), 1e-12);
      EXPECT_NEAR(log_q1_psk2n(rz, p, n, 0.8), log_q1_psk2n(z, p, n, 0.8), 1e-12);
    }
  }
}

TEST(LogQ1Psk2n, Normalized) {
  const ChannelParams p(1.2, 0.0, 1.0);
  for (int n : {2, 3, 4}) {
    EXPECT_NEAR(integrate([&](ComplexSample z) { return log_q1_psk2n(z, p, n, 1.0); }, p), 1.0, 1e-8);
  }
}

TEST(LogQhatNbpsk, Reductions) {
  const ChannelParams p(1.2, 0.3, 1.0);
  const auto pts = random_points(7, 4);
  double sum_bpsk = 0.0, sum_q0 = 0.0;
  for (const auto& z : pts) {
    sum_bpsk += log_q1_bpsk(z, p, kPi, 0.6);
    sum_q0 += log_q0(z, p);
  }
  EXPECT_NEAR(log_qhat_nbpsk(pts, p, 1, 0.6), sum_bpsk, 1e-12);
  EXPECT_NEAR(log_qhat_nbpsk(pts, p, 3, 0.0), sum_q0, 1e-12);
  for (const auto& z : pts) {
    const std::vector<ComplexSample> one = {z};
    for (int n : {2, 3, 4}) EXPECT_NEAR(log_qhat_nbpsk(one, p, n, 0.6), log_q1_psk2n(z, p, n, 0.6), 1e-12);
  }
  EXPECT_THROW(log_qhat_nbpsk({}, p, 2, 0.5), Error);
}

TEST(LogQhatNbpsk, ThetaOffsetIsRotation) {
  const ChannelParams p(1.2, 0.3, 1.0);
  const ChannelParams q(1.2, 0.3 + 0.25, 1.0);
  const auto pts = random_points(5, 5);
  EXPECT_NEAR(log_qhat_nbpsk(pts, p, 3, 0.5, 0.25), log_qhat_nbpsk(pts, q, 3, 0.5), 1e-12);
}

TEST(LogLikelihoodRatio, MatchesDensities) {
  const ChannelParams p(1.2, 0.1, 0.9);
  const auto pts = random_points(6, 6);
  double q0 = 0.0;
  for (const auto& z : pts) q0 += log_q0(z, p);
  for (const auto& c : {CodebookSpec::bpsk(0.3), CodebookSpec::psk2n(3), CodebookSpec::nbpsk(3),
                        CodebookSpec::gen4psk(1.0), CodebookSpec::gen2bpsk(1.0)}) {
    EXPECT_NEAR(log_likelihood_ratio(pts, p, c.phases(), 0.5), log_q1(pts, p, c, 0.5) - q0, 1e-10)
        << c.label();
  }
  double prod = 0.0;
  for (const auto& z : pts) prod += log_q1_psk2n(z, p, 3, 0.5);
  EXPECT_NEAR(log_q1(pts, p, CodebookSpec::psk2n(3), 0.5), prod, 1e-11);
  EXPECT_NEAR(log_q1(pts, p, CodebookSpec::nbpsk(3), 0.5), log_qhat_nbpsk(pts, p, 3, 0.5), 1e-11);
}

TEST(Density, FiniteInTails) {
  const ChannelParams p(1.0, 0.0, 1.0);
  const double beta = 10.0;
  for (double x : {-50.0, -7.0, 0.0, 13.0, 50.0}) {
    for (double y : {-50.0, 0.0, 50.0}) {
      const ComplexSample z{x, y};
      EXPECT_TRUE(std::isfinite(log_q1_bpsk(z, p, 0.0, beta)));
      EXPECT_TRUE(std::isfinite(log_q1_psk2n(z, p, 4, beta)));
      const std::vector<ComplexSample> many(200, z);
      EXPECT_TRUE(std::isfinite(log_qhat_nbpsk(many, p, 4, beta)));
    }
  }
}

// Importance sampling against Q0^n: E_Q0[Qhat/Q0^n] = 1.
TEST(LogQhatNbpsk, NormalizedByMonteCarlo) {
  const ChannelParams p(1.0, 0.0, 1.0);
  for (std::size_t n : {1u, 2u, 3u, 4u}) {
    Rng rng(60, n);
    std::vector<ComplexSample> obs(n);
    Moments m;
    for (int i = 0; i < 100000; ++i) {
      draw_h0_observation(p, obs, rng);
      m.add(std::exp(log_qhat_nbpsk(obs, p, 3, 0.5) - [&] {
        double s = 0;
        for (const auto& z : obs) s += log_q0(z, p);
        return s;
      }()));
    }
    EXPECT_NEAR(m.mean, 1.0, 3.0 * m.std_error()) << "n=" << n;
  }
}

// First-letter marginal of the shared-angle law equals the per-symbol mixture.
TEST(LogQhatNbpsk, MarginalMatchesPsk2nAtThreeLetters) {
  const ChannelParams p(1.2, 0.0, 1.0);
  const double beta = 0.8;
  const auto ph = CodebookSpec::nbpsk(2).phases();
  Rng rng(61, 0);
  std::vector<ComplexSample> obs(3);
  Moments mx2, my2, mxy;
  for (int i = 0; i < 200000; ++i) {
    draw_h1_observation(ph, p, beta, obs, rng);
    mx2.add(obs[0].x * obs[0].x);
    my2.add(obs[0].y * obs[0].y);
    mxy.add(obs[0].x * obs[0].y);
  }
  // Per-symbol 4-PSK at angles pi/2, pi: E[x^2] = E[y^2] = sigma^2 + A^2 beta^2 / 2, E[xy] = 0.
  const double want = 1.0 + 1.44 * beta * beta / 2.0;
  EXPECT_NEAR(mx2.mean, want, 3.0 * mx2.std_error());
  EXPECT_NEAR(my2.mean, want, 3.0 * my2.std_error());
  EXPECT_NEAR(mxy.mean, 0.0, 3.0 * mxy.std_error());
}
