#pragma once

// KL divergences D(Q1 || Q0) of the warden's H1 observation law from pure
// noise, by three independent routes:
//
//  * tensor-product Gauss-Hermite quadrature, one grid per mixture component
//    recentered at the component mean (product codebooks only);
//  * Monte Carlo over codeword + noise draws, any codebook and block length;
//  * the leading-order closed-form expansions in the amplitude beta.
//
// All values are in nats.

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>

#include "covphase/core.hpp"
#include "covphase/parallel.hpp"
#include "covphase/rng.hpp"

namespace covphase {

struct QuadratureSpec {
  int nodes_per_dim = 64;
  // Doubling passes allowed after the first grid.
  int max_doublings = 6;
  double tol = 1e-10;
};

// One fixed grid: the mixture-weighted average of per-component Gauss-Hermite
// expectations of log(q1 / q0). angles are pair angles relative to theta0.
double single_letter_kl_grid(std::span<const double> angles, const ChannelParams& p, double beta,
                             int nodes_per_dim, Exec exec = Exec::Parallel);

// Per-symbol divergence of a product codebook, refined by doubling the grid
// until successive values differ by less than q.tol.
KlEstimate kl_single_letter(const CodebookSpec& c, const ChannelParams& p, double beta,
                            const QuadratureSpec& q = {}, Exec exec = Exec::Parallel);

// Chain rule for product laws: scales value and error bound by n.
KlEstimate kl_product(std::int64_t n, const KlEstimate& single);

// Monte Carlo estimate of the n-letter divergence for any codebook: the mean
// of log Q1(obs) - log Q0(obs) over draws from Q1. Chunk c draws from
// rng.split(c); the result depends on (seed, stream, layout) only.
KlEstimate kl_mc(const CodebookSpec& c, const ChannelParams& p, double beta, std::size_t n,
                 std::size_t samples, const Rng& rng, Exec exec = Exec::Parallel,
                 ChunkLayout layout = {});

// kl_mc for the shared-angle N-BPSK law. samples >= 10^4.
KlEstimate kl_nbpsk_mc(const ChannelParams& p, int n_pairs, double beta, std::size_t n,
                       std::size_t samples, const Rng& rng, Exec exec = Exec::Parallel,
                       ChunkLayout layout = {});

// Leading-order closed forms in s = A beta / sigma:
//   BPSK               n (s^4/4 - s^6/6)
//   2N-PSK, N >= 2     n s^4/8
//   N-BPSK, N >= 2     n s^4/8;  N = 1: n s^4/4
//   Gen4Psk(d1)        n (s^4/4 - s^6/6) (1 - sin^2(d1)/2)
//   Gen2Bpsk(d2)       n s^4/8 (1 + 2 cos^2 d2 - cos^4 d2)
// error_bound is n s^k for the first omitted order k.
KlEstimate approx_kl(const CodebookSpec& c, const ChannelParams& p, double beta, std::int64_t n);

// Amplitude that puts the BPSK leading term exactly at epsilon:
// beta = (4 epsilon / n)^{1/4} sigma / A.
double beta_for_epsilon(double epsilon, std::int64_t n, const ChannelParams& p);

// MC sample count giving a standard error of max(1e-4, 0.02 * expected) for a
// divergence of about `expected` nats, using Var[LLR] ~ 2 D for weak signals.
std::size_t recommended_mc_samples(double expected);

struct PhaseGainOptions {
  QuadratureSpec quadrature;
  std::size_t mc_samples = 100000;
  std::uint64_t seed = 1;
  Exec exec = Exec::Parallel;
  ChunkLayout layout;
};

// D_c / D_BPSK at beta_for_epsilon(epsilon, n), both by the same method.
double phase_gain(const CodebookSpec& c, const ChannelParams& p, double epsilon, std::int64_t n,
                  Method method, const PhaseGainOptions& opts = {});

// Moments of Psi = (1/N) sum_p Q_p^n / Q0^n - 1 under the shared-angle law.
struct PsiMoment {
  int order = 1;
  double value = 0.0;
  double std_error = 0.0;
  std::int64_t samples = 0;
};

// MC estimates of E[Psi], E[Psi^2], E[Psi^3] from one set of draws.
std::array<PsiMoment, 3> psi_moments_mc(const ChannelParams& p, int n_pairs, double beta,
                                        std::size_t n, std::size_t samples, const Rng& rng,
                                        Exec exec = Exec::Parallel, ChunkLayout layout = {});

// Single order (1, 2 or 3); N >= 2, samples >= 10^4.
PsiMoment psi_moment_mc(const ChannelParams& p, int n_pairs, double beta, std::size_t n, int order,
                        std::size_t samples, const Rng& rng, Exec exec = Exec::Parallel,
                        ChunkLayout layout = {});

// Exact E[Psi^order] by enumerating the Gaussian integrals
//   E_Q0[prod_j Q_{p_j} / Q0] = 2^-(k+1) sum_signs exp(s^2 sum_{i<j} +-cos(phi_i - phi_j))
// over all (k+1)-tuples of pair angles; order in 1..6.
double psi_moment_exact(const ChannelParams& p, std::span<const double> angles, double beta,
                        std::int64_t n, int order);
double psi_moment_exact(const ChannelParams& p, int n_pairs, double beta, std::int64_t n,
                        int order);

// Reference leading-order forms for N >= 2:
//   E[Psi] = n s^4/4, E[Psi^2] = n s^4/4 + n s^6/4, E[Psi^3] = 3 n s^6/4.
double psi_moment_closed_form(const ChannelParams& p, double beta, std::int64_t n, int order);

}  // namespace covphase
