#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "covphase/core.hpp"
#include "covphase/rng.hpp"

namespace covphase {

// One reflection coefficient. The pair convention stores (beta, phi + pi) as
// (-beta, phi), so phase is always one of the codebook's pair angles.
struct Symbol {
  double amplitude = 0.0;
  double phase = 0.0;

  std::complex<double> value() const { return std::polar(1.0, phase) * amplitude; }
};

struct Codeword {
  std::vector<Symbol> symbols;
  // Pair angle drawn for the whole codeword (shared-angle codebooks only).
  std::optional<double> shared_angle;
};

// Every distinct symbol value: +-beta e^{i phi} for each pair angle phi.
std::vector<std::complex<double>> constellation(const CodebookSpec& c, double beta);

// Draws a codeword of n symbols. The number and order of random draws does
// not depend on beta, so sweeps over beta with one stream share random numbers.
Codeword sample_codeword(const CodebookSpec& c, double beta, std::size_t n, Rng& rng);

// A e^{i theta0} c_i + z_i with z_i ~ CN(0, 2 sigma^2).
std::vector<ComplexSample> willie_observation(const Codeword& codeword, const ChannelParams& p,
                                              Rng& rng);

// Allocation-free equivalent of willie_observation(sample_codeword(...)):
// consumes the same draws in the same order and writes into out.
void draw_h1_observation(const PhaseSet& phases, const ChannelParams& p, double beta,
                         std::span<ComplexSample> out, Rng& rng);

// Pure noise, the H0 observation.
void draw_h0_observation(const ChannelParams& p, std::span<ComplexSample> out, Rng& rng);

}  // namespace covphase
