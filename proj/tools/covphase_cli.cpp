// covphase: sweeps, detector runs and the verification suite.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <string>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "covphase/harness.hpp"

using namespace covphase;

namespace {

struct Common {
  std::string config;
  std::uint64_t seed = 1;
  std::string out;
  bool bits = false;
  double noise_power = 2.0;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* noise_opt = nullptr;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config, "JSON config file")->check(CLI::ExistingFile);
  c.seed_opt = sub->add_option("--seed", c.seed, "RNG seed");
  sub->add_option("--out", c.out, "Output path (default: config output_path, else stdout)");
  sub->add_flag("--bits", c.bits, "Report divergences in bits");
  c.noise_opt = sub->add_option("--noise-power", c.noise_power, "Total complex noise power 2 sigma^2")
                    ->check(CLI::PositiveNumber);
}

SweepConfig resolve(const Common& c, SweepConfig base) {
  SweepConfig cfg = c.config.empty() ? std::move(base) : load_config(c.config, std::move(base));
  if (c.seed_opt->count() > 0) cfg.seed = c.seed;
  if (!c.out.empty()) cfg.output_path = c.out;
  if (c.bits) cfg.bits = true;
  if (c.noise_opt->count() > 0) {
    cfg.channel = ChannelParams::from_noise_power(cfg.channel.amplitude(), cfg.channel.theta0(), c.noise_power);
  }
  validate_config(cfg);
  return cfg;
}

// CSV to the output path plus a sidecar <stem>.config.json, or CSV to stdout.
void emit(const SweepConfig& cfg, const std::string& csv) {
  if (cfg.output_path.empty()) {
    std::cout << csv;
    return;
  }
  write_file(cfg.output_path, csv);
  std::filesystem::path side(cfg.output_path);
  side.replace_extension(".config.json");
  write_file(side.string(), config_to_json(cfg).dump(2) + "\n");
  std::cerr << fmt::format("wrote {} and {}\n", cfg.output_path, side.string());
}

int report(const std::vector<Check>& checks) {
  bool ok = true;
  for (const auto& c : checks) {
    std::cerr << fmt::format("[{}] {}: {}\n", c.passed ? "PASS" : "FAIL", c.name, c.detail);
    ok = ok && c.passed;
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Phase-gain covertness: divergence sweeps, detector simulation and checks"};
  app.require_subcommand(1);

  Common c_sweep, c_ratio, c_deflect, c_detect, c_verify, c_beta;
  auto* sweep = app.add_subcommand("sweep", "KL divergence versus amplitude for each codebook");
  add_common(sweep, c_sweep);
  auto* ratio = app.add_subcommand("ratio", "2N-PSK to BPSK divergence ratio versus amplitude");
  add_common(ratio, c_ratio);
  auto* deflect = app.add_subcommand("deflect-sweep", "Generalized codebooks over the deflection angle");
  add_common(deflect, c_deflect);
  auto* detect = app.add_subcommand("detect", "Optimal detector and total variation estimates");
  add_common(detect, c_detect);
  auto* verify = app.add_subcommand("verify", "Identity, moment and method-agreement suite");
  add_common(verify, c_verify);
  std::size_t verify_samples = 200000;
  verify->add_option("--samples", verify_samples, "MC draws per Monte Carlo check")
      ->check(CLI::Range(std::size_t{10000}, std::size_t{100000000}));
  auto* beta_for = app.add_subcommand("beta-for", "Amplitude that spends a divergence budget epsilon");
  add_common(beta_for, c_beta);
  double epsilon = 0.1;
  std::int64_t block = 100;
  double amplitude = 1.2;
  beta_for->add_option("--epsilon", epsilon, "Divergence budget in nats")->required();
  beta_for->add_option("-n,--block-length", block, "Block length n")->required();
  auto* amp_opt = beta_for->add_option("--amplitude", amplitude, "Channel amplitude A");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sweep) {
      const auto cfg = resolve(c_sweep, default_sweep_config());
      const auto res = run_kl_sweep(cfg);
      emit(cfg, res.to_csv(cfg.seed, cfg.bits));
      return report(res.checks);
    }
    if (*ratio) {
      const auto cfg = resolve(c_ratio, default_sweep_config());
      const auto res = run_ratio_sweep(cfg);
      emit(cfg, res.to_csv(cfg.seed, cfg.bits));
      return report(res.checks);
    }
    if (*deflect) {
      const auto cfg = resolve(c_deflect, default_sweep_config());
      const auto res = run_deflection_sweep(cfg, uniform_delta_grid(cfg.delta_points));
      emit(cfg, res.to_csv(cfg.seed, cfg.bits));
      return report(res.checks);
    }
    if (*detect) {
      const auto cfg = resolve(c_detect, default_detect_config());
      const auto res = run_detect(cfg);
      emit(cfg, res.to_csv(cfg.seed));
      return report(res.checks);
    }
    if (*verify) {
      const auto cfg = resolve(c_verify, default_sweep_config());
      VerifyOptions opts;
      opts.mc_samples = verify_samples;
      opts.exec = cfg.exec;
      const auto reports = run_verify_all(cfg.seed, opts);
      std::string lines;
      bool ok = true;
      for (const auto& r : reports) {
        lines += to_json_line(r) + "\n";
        ok = ok && r.passed;
        std::cerr << fmt::format("[{}] {}\n", r.passed ? "PASS" : "FAIL", r.name);
      }
      if (cfg.output_path.empty()) {
        std::cout << lines;
      } else {
        write_file(cfg.output_path, lines);
      }
      return ok ? 0 : 1;
    }
    if (*beta_for) {
      auto cfg = resolve(c_beta, default_sweep_config());
      if (amp_opt->count() > 0) {
        cfg.channel = ChannelParams(amplitude, cfg.channel.theta0(), cfg.channel.sigma());
      }
      const double beta = beta_for_epsilon(epsilon, block, cfg.channel);
      const double kl = approx_kl(CodebookSpec::bpsk(0.0), cfg.channel, beta, block).value;
      const double unit = cfg.bits ? std::numbers::ln2 : 1.0;
      std::cout << fmt::format("beta={:.17g}\nbpsk_closed_form_kl_{}={:.17g}\n", beta, cfg.bits ? "bits" : "nats", kl / unit);
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
