#pragma once

// Log-densities of the warden's observations, fully normalized, in nats.
//
// Every mixture is evaluated in the log domain. A pair mixture
//   1/2 [N(+mu, s^2 I) + N(-mu, s^2 I)]
// is written as q0 * exp(-|mu|^2 / 2 s^2) * cosh(<mu, z> / s^2), so the
// log-ratio against q0 reduces to a stable log-cosh and the pair average to a
// max-shifted log-sum-exp.

#include <span>

#include "covphase/core.hpp"

namespace covphase {

// log cosh(u) without overflow for any finite u.
double log_cosh(double u) noexcept;

// log((1/n) sum exp(v_i)), max-shifted. Requires a non-empty span.
double log_mean_exp(std::span<const double> v);

double log_q0(ComplexSample s, const ChannelParams& p) noexcept;

// Two-component mixture with means +-A beta e^{i(theta0 + theta)}.
double log_q1_bpsk(ComplexSample s, const ChannelParams& p, double theta, double beta);

// 2N-component mixture with means +-A beta e^{i(theta0 + t pi / N)}, t = 1..N.
double log_q1_psk2n(ComplexSample s, const ChannelParams& p, int n_pairs, double beta);

// n-letter shared-angle law: log[(1/N) sum_t prod_i q_t(s_i)] where q_t is the
// pair mixture at angle theta0 + theta + t pi / N.
double log_qhat_nbpsk(std::span<const ComplexSample> samples, const ChannelParams& p, int n_pairs,
                      double beta, double theta = 0.0);

// Single-letter log(q1 / q0) for the equal-weight mixture over the given pair
// angles (relative to theta0).
double log_ratio_mixture(ComplexSample s, const ChannelParams& p, std::span<const double> angles,
                         double beta);

double log_q1_mixture(ComplexSample s, const ChannelParams& p, std::span<const double> angles,
                      double beta);

// out[t] = sum_i log(q_t(s_i) / q0(s_i)) for every pair angle t: the
// per-pair n-letter log-likelihood ratios.
void pair_log_ratios(std::span<const ComplexSample> samples, const ChannelParams& p,
                     std::span<const double> angles, double beta, std::span<double> out);

// n-letter log(Q1 / Q0^n) for a codebook's phase structure.
double log_likelihood_ratio(std::span<const ComplexSample> samples, const ChannelParams& p,
                            const PhaseSet& phases, double beta);

// n-letter normalized log Q1 for any codebook.
double log_q1(std::span<const ComplexSample> samples, const ChannelParams& p,
              const CodebookSpec& c, double beta);

}  // namespace covphase
