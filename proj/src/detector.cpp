#include "covphase/detector.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <fmt/format.h>

#include "covphase/codebook.hpp"
#include "covphase/density.hpp"

namespace covphase {

namespace {

void check_inputs(const CodebookSpec& c, const ChannelParams& p, double beta, std::size_t n) {
  validate_params(p, c);
  require_beta(beta);
  if (n == 0) throw Error(ErrorCode::EmptySampleList, "block length must be >= 1");
}

double binomial_se(double q, std::size_t trials) {
  return std::sqrt(q * (1.0 - q) / static_cast<double>(trials));
}

}  // namespace

double DetectionResult::error_sum_se() const noexcept { return std::hypot(se_fa, se_md); }

DetectionResult simulate_optimal_test(const CodebookSpec& c, const ChannelParams& p, double beta,
                                      std::size_t n, std::size_t trials, const Rng& rng, Exec exec,
                                      ChunkLayout layout) {
  check_inputs(c, p, beta, n);
  if (trials < 1000) throw Error(ErrorCode::TooFewSamples, fmt::format("{} < 1000 trials", trials));

  const PhaseSet ph = c.phases();
  const Rng h0 = rng.split(0);
  const Rng h1 = rng.split(1);

  const auto false_alarms = map_chunks<std::int64_t>(
      trials, layout, exec, [&](std::size_t chunk, std::size_t begin, std::size_t end) {
        Rng r = h0.split(chunk);
        std::vector<ComplexSample> obs(n);
        std::int64_t hits = 0;
        for (std::size_t i = begin; i < end; ++i) {
          draw_h0_observation(p, obs, r);
          if (log_likelihood_ratio(obs, p, ph, beta) > 0.0) ++hits;
        }
        return hits;
      });
  const auto misses = map_chunks<std::int64_t>(
      trials, layout, exec, [&](std::size_t chunk, std::size_t begin, std::size_t end) {
        Rng r = h1.split(chunk);
        std::vector<ComplexSample> obs(n);
        std::int64_t hits = 0;
        for (std::size_t i = begin; i < end; ++i) {
          draw_h1_observation(ph, p, beta, obs, r);
          if (!(log_likelihood_ratio(obs, p, ph, beta) > 0.0)) ++hits;
        }
        return hits;
      });

  std::int64_t fa = 0, md = 0;
  for (auto v : false_alarms) fa += v;
  for (auto v : misses) md += v;

  DetectionResult out;
  out.trials = static_cast<std::int64_t>(trials);
  out.p_fa = static_cast<double>(fa) / static_cast<double>(trials);
  out.p_md = static_cast<double>(md) / static_cast<double>(trials);
  out.se_fa = binomial_se(out.p_fa, trials);
  out.se_md = binomial_se(out.p_md, trials);
  out.tv_estimate = std::clamp(1.0 - out.error_sum(), 0.0, 1.0);
  return out;
}

TvEstimate tv_distance_mc(const CodebookSpec& c, const ChannelParams& p, double beta, std::size_t n,
                          std::size_t samples, const Rng& rng, Exec exec, ChunkLayout layout) {
  check_inputs(c, p, beta, n);
  if (samples < 10000) throw Error(ErrorCode::TooFewSamples, fmt::format("{} < 10000 samples", samples));

  const PhaseSet ph = c.phases();
  const Rng base = rng.split(2);
  const auto parts = map_chunks<Moments>(
      samples, layout, exec, [&](std::size_t chunk, std::size_t begin, std::size_t end) {
        Rng r = base.split(chunk);
        std::vector<ComplexSample> obs(n);
        Moments m;
        for (std::size_t i = begin; i < end; ++i) {
          draw_h0_observation(p, obs, r);
          m.add(0.5 * std::fabs(std::expm1(log_likelihood_ratio(obs, p, ph, beta))));
        }
        return m;
      });
  const Moments m = merge_all(parts);
  return {m.mean, m.std_error(), m.count};
}

}  // namespace covphase
