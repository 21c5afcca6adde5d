#include "covphase/core.hpp"

#include <cmath>
#include <type_traits>
#include <utility>

#include <fmt/format.h>

namespace covphase {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonPositiveAmplitude: return "NonPositiveAmplitude";
    case ErrorCode::NonPositiveNoise: return "NonPositiveNoise";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::ZeroPairs: return "ZeroPairs";
    case ErrorCode::AngleOutOfRange: return "AngleOutOfRange";
    case ErrorCode::NegativeAmplitude: return "NegativeAmplitude";
    case ErrorCode::EpsilonOutOfRange: return "EpsilonOutOfRange";
    case ErrorCode::PairCountTooSmall: return "PairCountTooSmall";
    case ErrorCode::ExpansionRegimeViolated: return "ExpansionRegimeViolated";
    case ErrorCode::EmptySampleList: return "EmptySampleList";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::UnsupportedCodebook: return "UnsupportedCodebook";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

double normalize_angle(double radians) {
  if (!std::isfinite(radians)) throw Error(ErrorCode::NonFiniteValue, "angle must be finite");
  double r = std::fmod(radians, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  // fmod of a value just below a multiple of 2pi can round up to 2pi.
  if (r >= kTwoPi) r = 0.0;
  return r;
}

namespace {

void check_channel(double amplitude, double theta0, double sigma) {
  if (!std::isfinite(amplitude) || !std::isfinite(theta0) || !std::isfinite(sigma)) {
    throw Error(ErrorCode::NonFiniteValue, "channel parameters must be finite");
  }
  if (amplitude <= 0.0) throw Error(ErrorCode::NonPositiveAmplitude, fmt::format("A = {}", amplitude));
  if (sigma <= 0.0) throw Error(ErrorCode::NonPositiveNoise, fmt::format("sigma = {}", sigma));
}

void check_deflection(double delta) {
  if (!std::isfinite(delta)) throw Error(ErrorCode::NonFiniteValue, "deflection angle must be finite");
  if (delta < 0.0 || delta > kPi) {
    throw Error(ErrorCode::AngleOutOfRange, fmt::format("deflection {} outside [0, pi]", delta));
  }
}

void check_pairs(int n_pairs) {
  if (n_pairs < 1) throw Error(ErrorCode::ZeroPairs, fmt::format("n_pairs = {}", n_pairs));
}

struct Checker {
  void operator()(const codebooks::Bpsk& b) const {
    if (!std::isfinite(b.theta)) throw Error(ErrorCode::NonFiniteValue, "theta must be finite");
  }
  void operator()(const codebooks::Psk2N& b) const { check_pairs(b.n_pairs); }
  void operator()(const codebooks::NBpsk& b) const { check_pairs(b.n_pairs); }
  void operator()(const codebooks::Gen4Psk& b) const { check_deflection(b.delta1); }
  void operator()(const codebooks::Gen2Bpsk& b) const { check_deflection(b.delta2); }
};

std::vector<double> uniform_pairs(int n_pairs) {
  std::vector<double> a;
  a.reserve(static_cast<std::size_t>(n_pairs));
  for (int t = 1; t <= n_pairs; ++t) a.push_back(t * kPi / n_pairs);
  return a;
}

}  // namespace

ChannelParams::ChannelParams(double amplitude, double theta0, double sigma) {
  check_channel(amplitude, theta0, sigma);
  amplitude_ = amplitude;
  theta0_ = normalize_angle(theta0);
  sigma_ = sigma;
}

ChannelParams ChannelParams::from_noise_power(double amplitude, double theta0, double noise_power) {
  if (!std::isfinite(noise_power)) throw Error(ErrorCode::NonFiniteValue, "noise power must be finite");
  if (noise_power <= 0.0) {
    throw Error(ErrorCode::NonPositiveNoise, fmt::format("noise power = {}", noise_power));
  }
  return ChannelParams(amplitude, theta0, std::sqrt(noise_power / 2.0));
}

CodebookSpec::CodebookSpec(Variant v) : v_(std::move(v)) {
  std::visit(Checker{}, v_);
  if (auto* b = std::get_if<codebooks::Bpsk>(&v_)) b->theta = normalize_angle(b->theta);
}

PhaseSet CodebookSpec::phases() const {
  return std::visit(
      [](const auto& b) -> PhaseSet {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, codebooks::Bpsk>) {
          return {{b.theta}, false};
        } else if constexpr (std::is_same_v<T, codebooks::Psk2N>) {
          return {uniform_pairs(b.n_pairs), false};
        } else if constexpr (std::is_same_v<T, codebooks::NBpsk>) {
          return {uniform_pairs(b.n_pairs), true};
        } else if constexpr (std::is_same_v<T, codebooks::Gen4Psk>) {
          return {{b.delta1, kPi}, false};
        } else {
          return {{b.delta2, kPi}, true};
        }
      },
      v_);
}

int CodebookSpec::pair_count() const { return static_cast<int>(phases().angles.size()); }

bool CodebookSpec::is_product() const {
  const PhaseSet ph = phases();
  return !ph.shared || ph.angles.size() == 1;
}

std::string CodebookSpec::label() const {
  return std::visit(
      [](const auto& b) -> std::string {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, codebooks::Bpsk>) {
          return fmt::format("bpsk(theta={:.6g})", b.theta);
        } else if constexpr (std::is_same_v<T, codebooks::Psk2N>) {
          return fmt::format("psk2n(N={})", b.n_pairs);
        } else if constexpr (std::is_same_v<T, codebooks::NBpsk>) {
          return fmt::format("nbpsk(N={})", b.n_pairs);
        } else if constexpr (std::is_same_v<T, codebooks::Gen4Psk>) {
          return fmt::format("gen4psk(delta1={:.6g})", b.delta1);
        } else {
          return fmt::format("gen2bpsk(delta2={:.6g})", b.delta2);
        }
      },
      v_);
}

std::string_view to_string(Method m) {
  switch (m) {
    case Method::Quadrature: return "quadrature";
    case Method::MonteCarlo: return "monte_carlo";
    case Method::ClosedForm: return "closed_form";
  }
  return "unknown";
}

Method parse_method(std::string_view s) {
  if (s == "quadrature") return Method::Quadrature;
  if (s == "monte_carlo" || s == "mc") return Method::MonteCarlo;
  if (s == "closed_form" || s == "approx") return Method::ClosedForm;
  throw Error(ErrorCode::InvalidConfig, fmt::format("unknown method '{}'", s));
}

void validate_params(const ChannelParams& p, const CodebookSpec& c) {
  check_channel(p.amplitude(), p.theta0(), p.sigma());
  std::visit(Checker{}, c.variant());
}

void require_beta(double beta) {
  if (!std::isfinite(beta)) throw Error(ErrorCode::NonFiniteValue, "beta must be finite");
  if (beta < 0.0) throw Error(ErrorCode::NegativeAmplitude, fmt::format("beta = {}", beta));
}

}  // namespace covphase
