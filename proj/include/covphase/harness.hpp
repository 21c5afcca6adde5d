#pragma once

// Experiment orchestration: KL and ratio sweeps over beta, deflection-angle
// sweeps, detector runs and the verification suite, with CSV
// and JSON output. Output depends only on (config, seed); wall time is kept
// in memory and never written.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "covphase/core.hpp"
#include "covphase/detector.hpp"
#include "covphase/divergence.hpp"
#include "covphase/identities.hpp"

namespace covphase {

struct SweepConfig {
  ChannelParams channel{1.2, 0.0, 1.0};
  std::vector<CodebookSpec> codebooks;
  // Raw amplitudes; epsilon_grid entries are appended through beta_for_epsilon(eps, n).
  std::vector<double> beta_grid;
  std::vector<double> epsilon_grid;
  std::int64_t n = 1;
  std::vector<Method> methods;
  std::uint64_t seed = 1;
  std::string output_path;

  QuadratureSpec quadrature;
  std::size_t mc_samples = 100000;
  ChunkLayout layout;
  Exec exec = Exec::Parallel;
  std::size_t delta_points = 181;
  // Amplitude of the quadrature deflection sweep.
  double deflect_beta = 0.3;
  std::size_t trials = 100000;
  bool bits = false;
};

// A = 1.2, sigma^2 = 1, beta in {0.05, 0.10, ..., 1.00}, BPSK and 2N-PSK for
// N = 2, 3, 4, quadrature and closed form, n = 1.
SweepConfig default_sweep_config();

// BPSK, 2N-PSK and N-BPSK with N = 2 at n = 100, beta = beta(eps = 0.05),
// 10^5 episodes.
SweepConfig default_detect_config();

// Every key is optional and falls back to the matching field of base.
SweepConfig config_from_json(const nlohmann::json& j, SweepConfig base = default_sweep_config());
nlohmann::ordered_json config_to_json(const SweepConfig& cfg);
SweepConfig load_config(const std::string& path, SweepConfig base = default_sweep_config());

CodebookSpec codebook_from_json(const nlohmann::json& j);
nlohmann::ordered_json codebook_to_json(const CodebookSpec& c);

// beta_grid followed by the mapped epsilon_grid; throws on an empty result.
std::vector<double> resolved_betas(const SweepConfig& cfg);

// Throws InvalidConfig on empty grids or repeated codebook labels.
void validate_config(const SweepConfig& cfg);

struct SweepRow {
  std::string codebook;
  double beta = 0.0;
  int n_pairs = 0;
  Method method = Method::ClosedForm;
  double kl_nats = 0.0;
  double error_bound = 0.0;
  std::optional<double> ratio;
  double wall_time = 0.0;
};

struct Check {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::vector<Check> checks;

  bool all_passed() const;
  // Header codebook,beta,n_pairs,method,kl_nats|kl_bits,error_bound,seed
  // plus a ratio column when any row carries one.
  std::string to_csv(std::uint64_t seed, bool bits) const;
};

// Quadrature / MC / closed-form KL of every codebook on the beta grid, scaled
// by cfg.n. Requires BPSK and 2N-PSK with N = 2, 3, 4 in cfg.codebooks.
// Checks: 2N-PSK below BPSK pointwise, closed-form gap <= 10% at beta = 0.1,
// spread over N > 1% at beta = 1.0.
SweepResult run_kl_sweep(const SweepConfig& cfg);

// D_2N / D_B per beta and method. Checks: N = 2 ratio in [0.48, 0.52] at
// beta = 0.1, and monotone approach to 1/2 over beta = 0.2, 0.1, 0.05.
SweepResult run_ratio_sweep(const SweepConfig& cfg);

// Closed forms of both generalized codebooks and Gen4Psk quadrature at
// cfg.deflect_beta, over delta_grid (which must cover [0, pi]).
// Checks argmin at pi/2 within one step and the boundary factors.
SweepResult run_deflection_sweep(const SweepConfig& cfg, const std::vector<double>& delta_grid);

// points evenly spaced values on [0, pi], both ends included.
std::vector<double> uniform_delta_grid(std::size_t points);

struct DetectRow {
  std::string codebook;
  double beta = 0.0;
  std::int64_t n = 0;
  DetectionResult detection;
  TvEstimate tv;
  double kl_nats = 0.0;
};

struct DetectResult {
  std::vector<DetectRow> rows;
  std::vector<Check> checks;

  bool all_passed() const;
  std::string to_csv(std::uint64_t seed) const;
};

// Detector and TV estimates for every (codebook, beta). Checks the Pinsker
// floor 1 - sqrt(D) - 3 SE, the TV identity within 3 combined SE, and that
// the error sum does not increase with beta beyond 3 SE.
DetectResult run_detect(const SweepConfig& cfg);

using ApproxFn =
    std::function<KlEstimate(const CodebookSpec&, const ChannelParams&, double, std::int64_t)>;

struct VerifyOptions {
  // Closed form used by the MC-versus-closed-form check.
  ApproxFn approx = approx_kl;
  std::size_t mc_samples = 200000;
  Exec exec = Exec::Parallel;
};

// The full identity, moment and method-agreement suite.
std::vector<IdentityReport> run_verify_all(std::uint64_t seed, const VerifyOptions& opts = {});

// Writes text to path, creating parent directories.
void write_file(const std::string& path, const std::string& text);

}  // namespace covphase
