#pragma once

// Willie's likelihood-ratio test between pure noise and the codebook's H1 law,
// simulated episode by episode, and a direct Monte Carlo estimate of the total
// variation distance between the two laws.

#include <cstddef>
#include <cstdint>

#include "covphase/core.hpp"
#include "covphase/parallel.hpp"
#include "covphase/rng.hpp"

namespace covphase {

struct DetectionResult {
  double p_fa = 0.0;
  double p_md = 0.0;
  std::int64_t trials = 0;
  // 1 - (p_fa + p_md), clamped to [0, 1].
  double tv_estimate = 0.0;
  double se_fa = 0.0;
  double se_md = 0.0;

  double error_sum() const noexcept { return p_fa + p_md; }
  double error_sum_se() const noexcept;
};

// trials H0 episodes and trials H1 episodes of n symbols each; decides H1 iff
// log Q1 - log Q0 > 0. H0 chunk c draws from rng.split(0).split(c), H1 chunk c
// from rng.split(1).split(c). Draw order does not depend on beta, so one rng
// reused across a beta grid gives common random numbers. trials >= 1000.
DetectionResult simulate_optimal_test(const CodebookSpec& c, const ChannelParams& p, double beta,
                                      std::size_t n, std::size_t trials, const Rng& rng,
                                      Exec exec = Exec::Parallel, ChunkLayout layout = {});

struct TvEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::int64_t samples = 0;
};

// V = 1/2 E_Q0 |Q1/Q0 - 1| from samples pure-noise blocks drawn on
// rng.split(2).split(c). samples >= 10^4.
TvEstimate tv_distance_mc(const CodebookSpec& c, const ChannelParams& p, double beta, std::size_t n,
                          std::size_t samples, const Rng& rng, Exec exec = Exec::Parallel,
                          ChunkLayout layout = {});

}  // namespace covphase
