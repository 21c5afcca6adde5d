#include "covphase/divergence.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <fmt/format.h>

#include "covphase/codebook.hpp"
#include "covphase/density.hpp"
#include "covphase/quadrature.hpp"

namespace covphase {

namespace {

constexpr std::size_t kMinMcSamples = 10000;

double s_squared(const ChannelParams& p, double beta) {
  const double s = p.snr_amplitude(beta);
  return s * s;
}

void require_samples(std::size_t samples) {
  if (samples < kMinMcSamples) {
    throw Error(ErrorCode::TooFewSamples, fmt::format("{} < {} MC samples", samples, kMinMcSamples));
  }
}

}  // namespace

double single_letter_kl_grid(std::span<const double> angles, const ChannelParams& p, double beta,
                             int nodes_per_dim, Exec exec) {
  require_beta(beta);
  if (angles.empty()) throw Error(ErrorCode::ZeroPairs, "mixture needs at least one pair");
  if (nodes_per_dim < 1) throw Error(ErrorCode::InvalidConfig, "nodes_per_dim must be >= 1");
  if (beta == 0.0) return 0.0;

  const auto rule = gauss_hermite(static_cast<std::size_t>(nodes_per_dim));
  const std::size_t nodes = rule->nodes.size();

  // Component means +-A beta e^{i(theta0 + phi)}.
  struct Mean {
    double x, y;
  };
  std::vector<Mean> means;
  means.reserve(2 * angles.size());
  for (double phi : angles) {
    const double a = p.theta0() + phi;
    const double mx = p.amplitude() * beta * std::cos(a);
    const double my = p.amplitude() * beta * std::sin(a);
    means.push_back({mx, my});
    means.push_back({-mx, -my});
  }

  const double scale = std::numbers::sqrt2 * p.sigma();
  const std::size_t rows = means.size() * nodes;
  const auto row_sums = map_chunks<double>(
      rows, ChunkLayout{1}, exec, [&](std::size_t row, std::size_t, std::size_t) {
        const Mean& mu = means[row / nodes];
        const std::size_t i = row % nodes;
        const double x = mu.x + scale * rule->nodes[i];
        double acc = 0.0;
        for (std::size_t j = 0; j < nodes; ++j) {
          const ComplexSample z{x, mu.y + scale * rule->nodes[j]};
          acc += rule->weights[j] * log_ratio_mixture(z, p, angles, beta);
        }
        return rule->weights[i] * acc;
      });

  double total = 0.0;
  for (double r : row_sums) total += r;
  return total / (std::numbers::pi * static_cast<double>(means.size()));
}

KlEstimate kl_single_letter(const CodebookSpec& c, const ChannelParams& p, double beta,
                            const QuadratureSpec& q, Exec exec) {
  validate_params(p, c);
  require_beta(beta);
  if (!c.is_product()) {
    throw Error(ErrorCode::UnsupportedCodebook,
                c.label() + " has no single-letter law; use the Monte Carlo estimator");
  }
  if (q.nodes_per_dim < 8) throw Error(ErrorCode::InvalidConfig, "nodes_per_dim must be >= 8");

  const PhaseSet ph = c.phases();
  int nodes = q.nodes_per_dim;
  double prev = single_letter_kl_grid(ph.angles, p, beta, nodes, exec);
  double delta = 0.0;
  for (int d = 0; d < q.max_doublings; ++d) {
    nodes *= 2;
    const double cur = single_letter_kl_grid(ph.angles, p, beta, nodes, exec);
    delta = std::fabs(cur - prev);
    prev = cur;
    if (delta <= q.tol) {
      return {cur, Method::Quadrature, delta, nodes, fmt::format("{}x{} Gauss-Hermite", nodes, nodes)};
    }
  }
  throw Error(ErrorCode::NonConvergence,
              fmt::format("{}: quadrature delta {} above tol {} at {} nodes", c.label(), delta, q.tol,
                          nodes));
}

KlEstimate kl_product(std::int64_t n, const KlEstimate& single) {
  if (n < 1) throw Error(ErrorCode::InvalidConfig, "block length must be >= 1");
  KlEstimate out = single;
  out.value *= static_cast<double>(n);
  out.error_bound *= static_cast<double>(n);
  return out;
}

KlEstimate kl_mc(const CodebookSpec& c, const ChannelParams& p, double beta, std::size_t n,
                 std::size_t samples, const Rng& rng, Exec exec, ChunkLayout layout) {
  validate_params(p, c);
  require_beta(beta);
  if (n == 0) throw Error(ErrorCode::EmptySampleList, "block length must be >= 1");
  if (samples < 2) throw Error(ErrorCode::TooFewSamples, "need at least two draws");

  const PhaseSet ph = c.phases();
  const auto parts = map_chunks<Moments>(
      samples, layout, exec, [&](std::size_t chunk, std::size_t begin, std::size_t end) {
        Rng r = rng.split(chunk);
        std::vector<ComplexSample> obs(n);
        Moments m;
        for (std::size_t i = begin; i < end; ++i) {
          draw_h1_observation(ph, p, beta, obs, r);
          m.add(log_likelihood_ratio(obs, p, ph, beta));
        }
        return m;
      });
  const Moments m = merge_all(parts);
  return {m.mean, Method::MonteCarlo, m.std_error(), static_cast<std::int64_t>(samples),
          fmt::format("{} draws of n={}", samples, n)};
}

KlEstimate kl_nbpsk_mc(const ChannelParams& p, int n_pairs, double beta, std::size_t n,
                       std::size_t samples, const Rng& rng, Exec exec, ChunkLayout layout) {
  require_samples(samples);
  return kl_mc(CodebookSpec::nbpsk(n_pairs), p, beta, n, samples, rng, exec, layout);
}

KlEstimate approx_kl(const CodebookSpec& c, const ChannelParams& p, double beta, std::int64_t n) {
  validate_params(p, c);
  require_beta(beta);
  if (n < 1) throw Error(ErrorCode::InvalidConfig, "block length must be >= 1");

  const double nn = static_cast<double>(n);
  const double s2 = s_squared(p, beta);
  const double s4 = s2 * s2;
  const double s6 = s4 * s2;
  const double s8 = s4 * s4;
  const double bpsk = nn * (s4 / 4.0 - s6 / 6.0);

  auto estimate = [&](double value, int omitted_order) {
    const double bound = nn * (omitted_order == 8 ? s8 : s6);
    return KlEstimate{value, Method::ClosedForm, bound, 0, fmt::format("O(beta^{})", omitted_order)};
  };

  return std::visit(
      [&](const auto& b) -> KlEstimate {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, codebooks::Bpsk>) {
          return estimate(bpsk, 8);
        } else if constexpr (std::is_same_v<T, codebooks::Psk2N>) {
          // A single pair is BPSK rotated to pi.
          return b.n_pairs == 1 ? estimate(bpsk, 8) : estimate(nn * s4 / 8.0, 6);
        } else if constexpr (std::is_same_v<T, codebooks::NBpsk>) {
          return estimate(nn * s4 / (b.n_pairs == 1 ? 4.0 : 8.0), 6);
        } else if constexpr (std::is_same_v<T, codebooks::Gen4Psk>) {
          const double sn = std::sin(b.delta1);
          return estimate(bpsk * (1.0 - 0.5 * sn * sn), 8);
        } else {
          const double cs2 = std::cos(b.delta2) * std::cos(b.delta2);
          return estimate(nn * s4 / 8.0 * (1.0 + 2.0 * cs2 - cs2 * cs2), 6);
        }
      },
      c.variant());
}

double beta_for_epsilon(double epsilon, std::int64_t n, const ChannelParams& p) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw Error(ErrorCode::EpsilonOutOfRange, fmt::format("epsilon = {} not in (0, 1)", epsilon));
  }
  if (n < 1) throw Error(ErrorCode::InvalidConfig, "block length must be >= 1");
  return std::pow(4.0 * epsilon / static_cast<double>(n), 0.25) * p.sigma() / p.amplitude();
}

std::size_t recommended_mc_samples(double expected) {
  const double d = std::max(expected, 1e-12);
  const double target = std::max(1e-4, 0.02 * d);
  const double m = std::ceil(2.0 * d / (target * target));
  return static_cast<std::size_t>(std::clamp(m, 1e4, 1e8));
}

double phase_gain(const CodebookSpec& c, const ChannelParams& p, double epsilon, std::int64_t n,
                  Method method, const PhaseGainOptions& opts) {
  if (c.is<codebooks::Bpsk>()) {
    throw Error(ErrorCode::UnsupportedCodebook, "phase gain is measured against BPSK itself");
  }
  const double beta = beta_for_epsilon(epsilon, n, p);
  const CodebookSpec bpsk = CodebookSpec::bpsk(0.0);
  switch (method) {
    case Method::ClosedForm:
      return approx_kl(c, p, beta, n).value / approx_kl(bpsk, p, beta, n).value;
    case Method::Quadrature:
      // The block length cancels in the ratio of two product laws.
      return kl_single_letter(c, p, beta, opts.quadrature, opts.exec).value /
             kl_single_letter(bpsk, p, beta, opts.quadrature, opts.exec).value;
    case Method::MonteCarlo: {
      const auto len = static_cast<std::size_t>(n);
      const Rng base(opts.seed, 0);
      return kl_mc(c, p, beta, len, opts.mc_samples, base.split(1), opts.exec, opts.layout).value /
             kl_mc(bpsk, p, beta, len, opts.mc_samples, base.split(2), opts.exec, opts.layout).value;
    }
  }
  throw Error(ErrorCode::InvalidConfig, "unknown method");
}

std::array<PsiMoment, 3> psi_moments_mc(const ChannelParams& p, int n_pairs, double beta,
                                        std::size_t n, std::size_t samples, const Rng& rng,
                                        Exec exec, ChunkLayout layout) {
  if (n_pairs < 2) {
    throw Error(ErrorCode::PairCountTooSmall, fmt::format("Psi moments need N >= 2, got {}", n_pairs));
  }
  require_beta(beta);
  require_samples(samples);
  if (n == 0) throw Error(ErrorCode::EmptySampleList, "block length must be >= 1");

  const PhaseSet ph = CodebookSpec::nbpsk(n_pairs).phases();
  using Triple = std::array<Moments, 3>;
  const auto parts = map_chunks<Triple>(
      samples, layout, exec, [&](std::size_t chunk, std::size_t begin, std::size_t end) {
        Rng r = rng.split(chunk);
        std::vector<ComplexSample> obs(n);
        std::vector<double> llr(ph.angles.size());
        Triple m;
        for (std::size_t i = begin; i < end; ++i) {
          draw_h1_observation(ph, p, beta, obs, r);
          pair_log_ratios(obs, p, ph.angles, beta, llr);
          const double psi = std::expm1(log_mean_exp(llr));
          m[0].add(psi);
          m[1].add(psi * psi);
          m[2].add(psi * psi * psi);
        }
        return m;
      });

  std::array<PsiMoment, 3> out;
  for (int k = 0; k < 3; ++k) {
    Moments m;
    for (const auto& part : parts) m.merge(part[static_cast<std::size_t>(k)]);
    out[static_cast<std::size_t>(k)] = {k + 1, m.mean, m.std_error(), m.count};
  }
  return out;
}

PsiMoment psi_moment_mc(const ChannelParams& p, int n_pairs, double beta, std::size_t n, int order,
                        std::size_t samples, const Rng& rng, Exec exec, ChunkLayout layout) {
  if (order < 1 || order > 3) throw Error(ErrorCode::InvalidConfig, "Psi moment order must be 1..3");
  return psi_moments_mc(p, n_pairs, beta, n, samples, rng, exec, layout)[static_cast<std::size_t>(order - 1)];
}

double psi_moment_exact(const ChannelParams& p, std::span<const double> angles, double beta,
                        std::int64_t n, int order) {
  if (order < 1 || order > 6) throw Error(ErrorCode::InvalidConfig, "exact Psi moments: order 1..6");
  if (angles.empty()) throw Error(ErrorCode::ZeroPairs, "no pair angles");
  if (n < 1) throw Error(ErrorCode::InvalidConfig, "block length must be >= 1");
  require_beta(beta);

  const double s2 = s_squared(p, beta);
  const std::size_t m = angles.size();
  const double nn = static_cast<double>(n);

  // excess[j] = E_Qhat[(Psi + 1)^j] - 1, kept as an excess to avoid
  // cancelling against 1.
  std::vector<double> excess(static_cast<std::size_t>(order) + 1, 0.0);
  for (int j = 1; j <= order; ++j) {
    const std::size_t len = static_cast<std::size_t>(j) + 1;
    std::vector<std::size_t> tuple(len, 0);
    double tuple_sum = 0.0;
    std::size_t tuple_count = 0;
    for (;;) {
      // Per-letter factor minus one, averaged over the 2^len sign patterns.
      double factor_excess = 0.0;
      const std::size_t patterns = std::size_t{1} << len;
      for (std::size_t mask = 0; mask < patterns; ++mask) {
        double x = 0.0;
        for (std::size_t a = 0; a < len; ++a) {
          for (std::size_t b = a + 1; b < len; ++b) {
            const double sign = (((mask >> a) ^ (mask >> b)) & 1u) ? -1.0 : 1.0;
            x += sign * std::cos(angles[tuple[a]] - angles[tuple[b]]);
          }
        }
        factor_excess += std::expm1(s2 * x);
      }
      factor_excess /= static_cast<double>(patterns);
      tuple_sum += std::expm1(nn * std::log1p(factor_excess));
      ++tuple_count;

      std::size_t pos = 0;
      while (pos < len && ++tuple[pos] == m) tuple[pos++] = 0;
      if (pos == len) break;
    }
    excess[static_cast<std::size_t>(j)] = tuple_sum / static_cast<double>(tuple_count);
  }

  // E[Psi^k] = sum_j C(k, j) (-1)^{k-j} E[(Psi+1)^j]; the j = 0 term cancels
  // against the constant parts of the others.
  double result = 0.0;
  double binom = 1.0;
  for (int j = 1; j <= order; ++j) {
    binom = binom * (order - j + 1) / j;
    const double sign = ((order - j) % 2 == 0) ? 1.0 : -1.0;
    result += sign * binom * excess[static_cast<std::size_t>(j)];
  }
  return result;
}

double psi_moment_exact(const ChannelParams& p, int n_pairs, double beta, std::int64_t n,
                        int order) {
  const PhaseSet ph = CodebookSpec::nbpsk(n_pairs).phases();
  return psi_moment_exact(p, ph.angles, beta, n, order);
}

double psi_moment_closed_form(const ChannelParams& p, double beta, std::int64_t n, int order) {
  require_beta(beta);
  const double nn = static_cast<double>(n);
  const double s2 = s_squared(p, beta);
  const double s4 = s2 * s2;
  const double s6 = s4 * s2;
  switch (order) {
    case 1: return nn * s4 / 4.0;
    case 2: return nn * s4 / 4.0 + nn * s6 / 4.0;
    case 3: return 3.0 * nn * s6 / 4.0;
    default: throw Error(ErrorCode::InvalidConfig, "closed-form Psi moments: order 1..3");
  }
}

}  // namespace covphase
