#pragma once

// Shared domain types for the phase-gain covertness library: the equivalent
// channel description seen by the warden, codebook descriptors, observation
// samples and divergence estimates.

#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace covphase {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

enum class ErrorCode {
  NonPositiveAmplitude,
  NonPositiveNoise,
  NonFiniteValue,
  ZeroPairs,
  AngleOutOfRange,
  NegativeAmplitude,
  EpsilonOutOfRange,
  PairCountTooSmall,
  ExpansionRegimeViolated,
  EmptySampleList,
  TooFewSamples,
  UnsupportedCodebook,
  NonConvergence,
  InvalidConfig,
};

std::string_view to_string(ErrorCode code);

// Every precondition failure in the library is reported through this type.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Maps any finite angle onto [0, 2pi).
double normalize_angle(double radians);

// Equivalent reflected-path description at the warden: the product of the
// RF-source-to-IRS and IRS-to-warden coefficients and the broadcast symbol
// collapses to an expected amplitude and phase. sigma is the per-real-dimension
// noise standard deviation (complex noise power 2 sigma^2).
class ChannelParams {
 public:
  ChannelParams(double amplitude, double theta0, double sigma);

  // noise_power is the total complex noise power 2 sigma^2.
  static ChannelParams from_noise_power(double amplitude, double theta0, double noise_power);

  double amplitude() const noexcept { return amplitude_; }
  double theta0() const noexcept { return theta0_; }
  double sigma() const noexcept { return sigma_; }
  double variance() const noexcept { return sigma_ * sigma_; }
  // A beta / sigma, the per-dimension signal-to-noise amplitude of one symbol.
  double snr_amplitude(double beta) const noexcept { return amplitude_ * beta / sigma_; }

  friend bool operator==(const ChannelParams&, const ChannelParams&) = default;

 private:
  double amplitude_;
  double theta0_;
  double sigma_;
};

namespace codebooks {

// One angle pair (theta, theta + pi) for every symbol.
struct Bpsk {
  double theta = 0.0;
  friend bool operator==(const Bpsk&, const Bpsk&) = default;
};

// Angle pair t*pi/N, t = 1..N, drawn independently for every symbol.
struct Psk2N {
  int n_pairs = 2;
  friend bool operator==(const Psk2N&, const Psk2N&) = default;
};

// Angle pair t*pi/N drawn once per codeword and shared with the receiver.
struct NBpsk {
  int n_pairs = 2;
  friend bool operator==(const NBpsk&, const NBpsk&) = default;
};

// Two-pair PSK with pairs at delta1 and pi, drawn per symbol.
struct Gen4Psk {
  double delta1 = kPi / 2.0;
  friend bool operator==(const Gen4Psk&, const Gen4Psk&) = default;
};

// Shared-angle BPSK with the codeword angle drawn from {delta2, pi}.
struct Gen2Bpsk {
  double delta2 = kPi / 2.0;
  friend bool operator==(const Gen2Bpsk&, const Gen2Bpsk&) = default;
};

}  // namespace codebooks

// The phase structure every codebook reduces to: a set of pair angles
// (relative to theta0) and whether the pair is drawn per symbol or once per
// codeword.
struct PhaseSet {
  std::vector<double> angles;
  bool shared = false;
};

class CodebookSpec {
 public:
  using Variant = std::variant<codebooks::Bpsk, codebooks::Psk2N, codebooks::NBpsk,
                               codebooks::Gen4Psk, codebooks::Gen2Bpsk>;

  // Validates and normalizes; throws Error on invalid parameters.
  explicit CodebookSpec(Variant v);

  static CodebookSpec bpsk(double theta) { return CodebookSpec(codebooks::Bpsk{theta}); }
  static CodebookSpec psk2n(int n_pairs) { return CodebookSpec(codebooks::Psk2N{n_pairs}); }
  static CodebookSpec nbpsk(int n_pairs) { return CodebookSpec(codebooks::NBpsk{n_pairs}); }
  static CodebookSpec gen4psk(double delta1) { return CodebookSpec(codebooks::Gen4Psk{delta1}); }
  static CodebookSpec gen2bpsk(double delta2) { return CodebookSpec(codebooks::Gen2Bpsk{delta2}); }

  const Variant& variant() const noexcept { return v_; }

  template <class T>
  bool is() const noexcept {
    return std::holds_alternative<T>(v_);
  }

  PhaseSet phases() const;
  // Number of distinct angle pairs the law ranges over.
  int pair_count() const;
  // True when the H1 observation law is an n-fold product of one letter law.
  bool is_product() const;
  std::string label() const;

  friend bool operator==(const CodebookSpec&, const CodebookSpec&) = default;

 private:
  Variant v_;
};

// One observation at the warden.
struct ComplexSample {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const ComplexSample&, const ComplexSample&) = default;
};

enum class Method { Quadrature, MonteCarlo, ClosedForm };

std::string_view to_string(Method m);
Method parse_method(std::string_view s);

// A divergence value in nats. error_bound is the MC standard error, the last
// quadrature refinement delta, or the scale of the first omitted term of a
// closed-form expansion.
struct KlEstimate {
  double value = 0.0;
  Method method = Method::ClosedForm;
  double error_bound = 0.0;
  std::int64_t n_samples_or_nodes = 0;
  std::string note;
};

// Re-checks every invariant of the two descriptors. The constructors already
// call the same checks, so this only fails for values that were mutated or
// deserialized around them.
void validate_params(const ChannelParams& p, const CodebookSpec& c);

void require_beta(double beta);

}  // namespace covphase
