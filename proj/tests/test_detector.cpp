#include <gtest/gtest.h>

#include <cmath>

#include "covphase/detector.hpp"
#include "covphase/divergence.hpp"

using namespace covphase;

namespace {
const ChannelParams kUnit(1.0, 0.0, 1.0);
}

TEST(OptimalTest, BlindAtZeroAmplitude) {
  const auto d = simulate_optimal_test(CodebookSpec::psk2n(2), kUnit, 0.0, 10, 5000, Rng(1, 0));
  EXPECT_NEAR(d.error_sum(), 1.0, 3.0 * d.error_sum_se() + 1e-12);
  EXPECT_EQ(d.tv_estimate, 0.0);
  EXPECT_EQ(d.trials, 5000);
}

TEST(OptimalTest, SeparatedMixtures) {
  const auto d = simulate_optimal_test(CodebookSpec::bpsk(0.0), kUnit, 10.0, 1, 5000, Rng(2, 0));
  EXPECT_LT(d.error_sum(), 0.01);
  EXPECT_GT(d.tv_estimate, 0.99);
}

TEST(OptimalTest, PinskerFloorAtBudget) {
  const double beta = beta_for_epsilon(0.05, 100, kUnit);
  for (const auto& c : {CodebookSpec::bpsk(0.0), CodebookSpec::psk2n(2), CodebookSpec::nbpsk(2)}) {
    const auto d = simulate_optimal_test(c, kUnit, beta, 100, 20000, Rng(3, 0));
    EXPECT_GE(d.error_sum(), 1.0 - std::sqrt(0.05) - 3.0 * d.error_sum_se()) << c.label();
    EXPECT_GE(d.p_fa, 0.0);
    EXPECT_LE(d.p_md, 1.0);
  }
}

TEST(OptimalTest, TvIdentity) {
  for (const auto& c : {CodebookSpec::bpsk(0.0), CodebookSpec::nbpsk(2)}) {
    const auto d = simulate_optimal_test(c, kUnit, 0.4, 20, 20000, Rng(4, 0));
    const auto tv = tv_distance_mc(c, kUnit, 0.4, 20, 20000, Rng(4, 0));
    const double se = std::hypot(d.error_sum_se(), tv.std_error);
    EXPECT_NEAR(1.0 - tv.value, d.error_sum(), 3.0 * se) << c.label();
    const double kl = c.is_product() ? 20 * kl_single_letter(c, kUnit, 0.4).value
                                     : kl_nbpsk_mc(kUnit, 2, 0.4, 20, 20000, Rng(5, 0)).value;
    EXPECT_LE(tv.value, std::sqrt(kl) + 3.0 * tv.std_error) << c.label();
  }
}

TEST(OptimalTest, ErrorSumFallsWithAmplitude) {
  const Rng rng(6, 0);
  double prev = 2.0, prev_se = 0.0;
  for (double beta : {0.1, 0.2, 0.3, 0.4, 0.5}) {
    const auto d = simulate_optimal_test(CodebookSpec::psk2n(2), kUnit, beta, 20, 20000, rng);
    EXPECT_LE(d.error_sum(), prev + 3.0 * std::hypot(d.error_sum_se(), prev_se)) << beta;
    prev = d.error_sum();
    prev_se = d.error_sum_se();
  }
}

TEST(OptimalTest, Preconditions) {
  EXPECT_THROW(simulate_optimal_test(CodebookSpec::bpsk(0.0), kUnit, 0.1, 10, 999, Rng(1, 0)), Error);
  EXPECT_THROW(simulate_optimal_test(CodebookSpec::bpsk(0.0), kUnit, -0.1, 10, 1000, Rng(1, 0)), Error);
  EXPECT_THROW(tv_distance_mc(CodebookSpec::bpsk(0.0), kUnit, 0.1, 10, 9999, Rng(1, 0)), Error);
}

TEST(TvDistance, ZeroAmplitude) {
  const auto tv = tv_distance_mc(CodebookSpec::psk2n(3), kUnit, 0.0, 10, 10000, Rng(7, 0));
  EXPECT_EQ(tv.value, 0.0);
  EXPECT_EQ(tv.samples, 10000);
}

TEST(Detector, SerialAndParallelAgree) {
  const auto a = simulate_optimal_test(CodebookSpec::nbpsk(3), kUnit, 0.3, 15, 9000, Rng(8, 0), Exec::Serial,
                                       ChunkLayout{1000});
  const auto b = simulate_optimal_test(CodebookSpec::nbpsk(3), kUnit, 0.3, 15, 9000, Rng(8, 0), Exec::Parallel,
                                       ChunkLayout{1000});
  EXPECT_EQ(a.p_fa, b.p_fa);
  EXPECT_EQ(a.p_md, b.p_md);
  const auto ta = tv_distance_mc(CodebookSpec::nbpsk(3), kUnit, 0.3, 15, 12000, Rng(8, 0), Exec::Serial);
  const auto tb = tv_distance_mc(CodebookSpec::nbpsk(3), kUnit, 0.3, 15, 12000, Rng(8, 0), Exec::Parallel);
  EXPECT_EQ(ta.value, tb.value);
  EXPECT_EQ(ta.std_error, tb.std_error);
}
