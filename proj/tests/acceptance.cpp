// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <fmt/core.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "covphase/divergence.hpp"
#include "covphase/harness.hpp"
#include "covphase/identities.hpp"

using namespace covphase;

namespace {

constexpr std::uint64_t kSeed = 1;
const ChannelParams kRef(1.2, 0.0, 1.0);
const ChannelParams kUnit(1.0, 0.0, 1.0);

struct Outcome {
  bool passed = false;
  std::string detail;
};

// Least-squares slope of log|y| against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(std::fabs(y[i]));
  }
  mx /= x.size();
  my /= y.size();
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(std::fabs(y[i])) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

const Check* find(const std::vector<Check>& cs, const std::string& name) {
  for (const auto& c : cs) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

Outcome from_checks(const std::vector<Check>& cs, const std::vector<std::string>& names) {
  Outcome o{true, ""};
  for (const auto& n : names) {
    const Check* c = find(cs, n);
    if (!c) {
      o.passed = false;
      o.detail += n + ": missing; ";
      continue;
    }
    o.passed = o.passed && c->passed;
    o.detail += fmt::format("{}: {} ({}); ", n, c->passed ? "ok" : "FAIL", c->detail);
  }
  return o;
}

Outcome identity_suite() {
  Rng rng(kSeed, 1);
  double worst_l1 = 0, worst_c = 0;
  for (int n = 3; n <= 32; ++n) {
    std::vector<double> th(100);
    for (double& t : th) t = kTwoPi * rng.uniform01();
    worst_l1 = std::max(worst_l1, check_pair_sums(n, th).max_abs_residual);

    const ChannelParams p(1.2, kTwoPi * rng.uniform01(), 1.0);
    std::vector<ComplexSample> pts(100);
    // Observation scale: noise-like points, sigma per dimension.
    for (auto& z : pts) z = {p.sigma() * rng.normal(), p.sigma() * rng.normal()};
    worst_c = std::max(worst_c, check_projection_sums(n, p, pts).max_abs_residual);
  }
  return {worst_l1 < 1e-9 && worst_c < 1e-9,
          fmt::format("max residual pair sums {:.3g}, Y sums {:.3g}", worst_l1, worst_c)};
}

Outcome cosh_series_order() {
  const std::vector<double> bs = {0.1, 0.05, 0.025, 0.0125};
  Rng rng(kSeed, 2);
  std::vector<double> ys(4);
  for (double& y : ys) y = 2.0 * rng.uniform01() - 1.0;
  const auto r = check_cosh_series(4, ys, bs);
  const double e = r.fitted_exponent.value_or(NAN);
  return {e >= 5.5 && e <= 6.5, fmt::format("fitted exponent {:.4f}", e)};
}

Outcome bpsk_closed_form() {
  Outcome o{true, ""};
  for (double beta : {0.1, 0.2, 0.3}) {
    const double q = kl_single_letter(CodebookSpec::bpsk(0.0), kRef, beta).value;
    const double cf = approx_kl(CodebookSpec::bpsk(0.0), kRef, beta, 1).value;
    const double rel = std::fabs(q - cf) / cf;
    const double lim = 2.0 * std::pow(kRef.snr_amplitude(beta), 2);
    o.passed = o.passed && rel <= lim;
    o.detail += fmt::format("beta={} rel {:.3g} <= {:.3g}; ", beta, rel, lim);
  }
  return o;
}

Outcome psk2n_closed_form() {
  Outcome o{true, ""};
  const std::vector<double> bs = {0.05, 0.1, 0.2};
  for (int n = 2; n <= 4; ++n) {
    const auto c = CodebookSpec::psk2n(n);
    std::vector<double> resid;
    double gap = 0;
    for (double beta : bs) {
      const double s = kRef.snr_amplitude(beta);
      const double lead = std::pow(s, 4) / 8.0;
      const double q = kl_single_letter(c, kRef, beta).value;
      resid.push_back(q - lead);
      if (beta == 0.1) gap = std::fabs(q - lead) / lead;
    }
    std::vector<double> ss;
    for (double b : bs) ss.push_back(kRef.snr_amplitude(b));
    const double e = loglog_slope(ss, resid);
    o.passed = o.passed && gap <= 0.10 && e >= 5.0 && e <= 7.0;
    o.detail += fmt::format("N={} gap {:.3g} exponent {:.3f}; ", n, gap, e);
  }
  return o;
}

SweepConfig kl_sweep_config() {
  SweepConfig cfg = default_sweep_config();
  cfg.channel = kRef;
  cfg.beta_grid = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  cfg.methods = {Method::Quadrature, Method::MonteCarlo, Method::ClosedForm};
  cfg.mc_samples = 100000;
  cfg.seed = kSeed;
  return cfg;
}

SweepConfig ratio_sweep_config() {
  SweepConfig cfg = default_sweep_config();
  cfg.channel = kRef;
  cfg.beta_grid = {0.05, 0.1, 0.2};
  cfg.methods = {Method::Quadrature};
  cfg.seed = kSeed;
  return cfg;
}

Outcome nbpsk_phase_gain() {
  const std::int64_t n = 50;
  const double beta = beta_for_epsilon(0.1, n, kRef);
  const auto mc = kl_nbpsk_mc(kRef, 2, beta, n, 1000000, Rng(kSeed, 7));
  const double db = kl_product(n, kl_single_letter(CodebookSpec::bpsk(0.0), kRef, beta)).value;
  const double ratio = mc.value / db;
  const double z = std::fabs(mc.value - 0.05) / mc.error_bound;
  return {z <= 3.0 && mc.error_bound <= 0.002 && ratio >= 0.45 && ratio <= 0.55,
          fmt::format("D_NB {:.6f} +- {:.2g} ({:.2f} SE from 0.05), ratio to D_B {:.4f}", mc.value,
                      mc.error_bound, z, ratio)};
}

Outcome nbpsk_single_pair() {
  const std::int64_t n = 20;
  const double beta = 0.3;
  const auto mc = kl_nbpsk_mc(kRef, 1, beta, n, 1000000, Rng(kSeed, 8));
  const double db = kl_product(n, kl_single_letter(CodebookSpec::bpsk(0.0), kRef, beta)).value;
  const double z = std::fabs(mc.value - db) / mc.error_bound;
  return {z <= 3.0, fmt::format("MC {:.6f} +- {:.2g}, quadrature {:.6f}, {:.2f} SE", mc.value, mc.error_bound, db, z)};
}

Outcome psi_moments() {
  Outcome o{true, ""};
  const std::int64_t n = 10;
  const double beta = 0.2;
  for (int pairs : {2, 3}) {
    const auto m = psi_moments_mc(kUnit, pairs, beta, n, 1000000, Rng(kSeed, 9 + pairs));
    for (int k = 1; k <= 3; ++k) {
      const double cf = psi_moment_closed_form(kUnit, beta, n, k);
      const double exact = psi_moment_exact(kUnit, pairs, beta, n, k);
      const double z = std::fabs(m[k - 1].value - cf) / m[k - 1].std_error;
      o.passed = o.passed && z <= 3.0;
      o.detail += fmt::format("N={} k={}: MC {:.4g} +- {:.2g}, closed form {:.4g} ({:.1f} SE), exact {:.4g}; ", pairs,
                              k, m[k - 1].value, m[k - 1].std_error, cf, z, exact);
    }
  }
  return o;
}

Outcome detector(const DetectResult& res) {
  Outcome o{true, ""};
  const double floor = 1.0 - std::sqrt(0.05);
  for (const auto& r : res.rows) {
    const auto& d = r.detection;
    const double sum = d.error_sum();
    const bool fl = sum >= floor - 3.0 * d.error_sum_se();
    const double gap = std::fabs((1.0 - r.tv.value) - sum);
    const double se = std::hypot(d.error_sum_se(), r.tv.std_error);
    const bool id = gap <= 3.0 * se;
    o.passed = o.passed && fl && id;
    o.detail += fmt::format("{}: sum {:.4f} (floor {:.4f}), tv gap {:.2g} / 3SE {:.2g}; ", r.codebook, sum, floor,
                            gap, 3.0 * se);
  }
  return o;
}

}  // namespace

int main() {
  using clock = std::chrono::steady_clock;
  int failures = 0;
  auto run = [&](int id, const std::string& name, double limit_s, const std::function<Outcome()>& fn) {
    const auto t0 = clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(clock::now() - t0).count();
    const bool ok = o.passed && secs < limit_s;
    if (!ok) ++failures;
    fmt::print("{} {:>2} {} [{:.1f}s / {:.0f}s] {}\n", ok ? "PASS" : "FAIL", id, name, secs, limit_s, o.detail);
    std::fflush(stdout);
  };

  std::vector<std::string> csv_first;
  SweepConfig detect_cfg = default_detect_config();
  detect_cfg.seed = kSeed;

  run(1, "identity_suite", 5, identity_suite);
  run(2, "series_remainder_order", 1, cosh_series_order);
  run(3, "bpsk_quadrature_vs_closed_form", 10, bpsk_closed_form);
  run(4, "psk2n_quadrature_vs_closed_form", 30, psk2n_closed_form);
  run(5, "kl_sweep_psk2n_below_bpsk", 60, [&] {
    const auto res = run_kl_sweep(kl_sweep_config());
    csv_first.push_back(res.to_csv(kSeed, false));
    return from_checks(res.checks, {"psk2n_below_bpsk"});
  });
  run(6, "ratio_sweep", 60, [&] {
    const auto res = run_ratio_sweep(ratio_sweep_config());
    csv_first.push_back(res.to_csv(kSeed, false));
    return from_checks(res.checks, {"ratio_band_beta_0.1", "ratio_monotone_to_half"});
  });
  run(7, "nbpsk_phase_gain", 180, nbpsk_phase_gain);
  run(8, "nbpsk_single_pair_is_bpsk", 60, nbpsk_single_pair);
  run(9, "psi_moments_vs_closed_form", 120, psi_moments);
  run(10, "deflection_sweep", 60, [&] {
    SweepConfig cfg = default_sweep_config();
    cfg.seed = kSeed;
    const auto res = run_deflection_sweep(cfg, uniform_delta_grid(181));
    csv_first.push_back(res.to_csv(kSeed, false));
    std::vector<std::string> names;
    for (const auto& c : res.checks) names.push_back(c.name);
    Outcome o = from_checks(res.checks, names);
    o.passed = o.passed && !names.empty();
    return o;
  });
  run(11, "detector_operational", 180, [&] {
    const auto res = run_detect(detect_cfg);
    csv_first.push_back(res.to_csv(kSeed));
    return detector(res);
  });
  run(12, "deterministic_csv", 600, [&] {
    std::vector<std::string> again;
    again.push_back(run_kl_sweep(kl_sweep_config()).to_csv(kSeed, false));
    again.push_back(run_ratio_sweep(ratio_sweep_config()).to_csv(kSeed, false));
    SweepConfig cfg = default_sweep_config();
    cfg.seed = kSeed;
    again.push_back(run_deflection_sweep(cfg, uniform_delta_grid(181)).to_csv(kSeed, false));
    again.push_back(run_detect(detect_cfg).to_csv(kSeed));
    Outcome o{csv_first.size() == again.size(), ""};
    for (std::size_t i = 0; i < std::min(csv_first.size(), again.size()); ++i) {
      const bool same = csv_first[i] == again[i];
      o.passed = o.passed && same;
      o.detail += fmt::format("run {}: {} bytes {}; ", i + 1, again[i].size(), same ? "identical" : "DIFFER");
    }
    return o;
  });

  fmt::print("{} of 12 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
