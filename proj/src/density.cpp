#include "covphase/density.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

namespace covphase {

namespace {

// Running log-sum-exp: one pass, no scratch storage.
class LogSumExp {
 public:
  void add(double v) noexcept {
    if (v > max_) {
      acc_ = acc_ * std::exp(max_ - v) + 1.0;
      max_ = v;
    } else {
      acc_ += std::exp(v - max_);
    }
    ++n_;
  }
  double log_mean() const noexcept { return max_ + std::log(acc_ / static_cast<double>(n_)); }

 private:
  double max_ = -std::numeric_limits<double>::infinity();
  double acc_ = 0.0;
  int n_ = 0;
};

struct PairAxis {
  double c;
  double s;
};

// Unit direction of pair angle phi after the channel rotation theta0.
PairAxis axis(const ChannelParams& p, double phi) {
  const double a = p.theta0() + phi;
  return {std::cos(a), std::sin(a)};
}

}  // namespace

double log_cosh(double u) noexcept {
  const double a = std::fabs(u);
  return a + std::log1p(std::exp(-2.0 * a)) - std::numbers::ln2;
}

double log_mean_exp(std::span<const double> v) {
  if (v.empty()) throw Error(ErrorCode::EmptySampleList, "log_mean_exp of nothing");
  const double m = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(m)) return m;
  double acc = 0.0;
  for (double x : v) acc += std::exp(x - m);
  return m + std::log(acc / static_cast<double>(v.size()));
}

double log_q0(ComplexSample s, const ChannelParams& p) noexcept {
  const double var = p.variance();
  return -std::log(2.0 * std::numbers::pi * var) - (s.x * s.x + s.y * s.y) / (2.0 * var);
}

double log_ratio_mixture(ComplexSample s, const ChannelParams& p, std::span<const double> angles,
                         double beta) {
  if (angles.empty()) throw Error(ErrorCode::ZeroPairs, "mixture needs at least one pair");
  if (beta == 0.0) return 0.0;
  const double var = p.variance();
  const double k = p.amplitude() * beta / var;
  const double energy = p.amplitude() * p.amplitude() * beta * beta / (2.0 * var);
  if (angles.size() == 1) {
    const PairAxis ax = axis(p, angles[0]);
    return log_cosh(k * (s.x * ax.c + s.y * ax.s)) - energy;
  }
  LogSumExp lse;
  for (double phi : angles) {
    const PairAxis ax = axis(p, phi);
    lse.add(log_cosh(k * (s.x * ax.c + s.y * ax.s)));
  }
  return lse.log_mean() - energy;
}

double log_q1_mixture(ComplexSample s, const ChannelParams& p, std::span<const double> angles,
                      double beta) {
  return log_q0(s, p) + log_ratio_mixture(s, p, angles, beta);
}

double log_q1_bpsk(ComplexSample s, const ChannelParams& p, double theta, double beta) {
  require_beta(beta);
  const double angle[] = {theta};
  return log_q1_mixture(s, p, angle, beta);
}

double log_q1_psk2n(ComplexSample s, const ChannelParams& p, int n_pairs, double beta) {
  require_beta(beta);
  const PhaseSet ph = CodebookSpec::psk2n(n_pairs).phases();
  return log_q1_mixture(s, p, ph.angles, beta);
}

void pair_log_ratios(std::span<const ComplexSample> samples, const ChannelParams& p,
                     std::span<const double> angles, double beta, std::span<double> out) {
  const double var = p.variance();
  const double k = p.amplitude() * beta / var;
  const double energy = p.amplitude() * p.amplitude() * beta * beta / (2.0 * var);
  const double n = static_cast<double>(samples.size());
  for (std::size_t t = 0; t < angles.size(); ++t) {
    const PairAxis ax = axis(p, angles[t]);
    double sum = 0.0;
    for (const auto& s : samples) sum += log_cosh(k * (s.x * ax.c + s.y * ax.s));
    out[t] = sum - n * energy;
  }
}

double log_likelihood_ratio(std::span<const ComplexSample> samples, const ChannelParams& p,
                            const PhaseSet& phases, double beta) {
  if (samples.empty()) throw Error(ErrorCode::EmptySampleList, "no observations");
  if (beta == 0.0) return 0.0;
  if (!phases.shared || phases.angles.size() == 1) {
    double sum = 0.0;
    for (const auto& s : samples) sum += log_ratio_mixture(s, p, phases.angles, beta);
    return sum;
  }
  const double var = p.variance();
  const double k = p.amplitude() * beta / var;
  const double energy = p.amplitude() * p.amplitude() * beta * beta / (2.0 * var);
  const double n = static_cast<double>(samples.size());
  LogSumExp lse;
  for (double phi : phases.angles) {
    const PairAxis ax = axis(p, phi);
    double sum = 0.0;
    for (const auto& s : samples) sum += log_cosh(k * (s.x * ax.c + s.y * ax.s));
    lse.add(sum - n * energy);
  }
  return lse.log_mean();
}

double log_qhat_nbpsk(std::span<const ComplexSample> samples, const ChannelParams& p, int n_pairs,
                      double beta, double theta) {
  require_beta(beta);
  if (samples.empty()) throw Error(ErrorCode::EmptySampleList, "no observations");
  PhaseSet ph = CodebookSpec::nbpsk(n_pairs).phases();
  for (double& a : ph.angles) a += theta;
  double base = 0.0;
  for (const auto& s : samples) base += log_q0(s, p);
  return base + log_likelihood_ratio(samples, p, ph, beta);
}

double log_q1(std::span<const ComplexSample> samples, const ChannelParams& p,
              const CodebookSpec& c, double beta) {
  require_beta(beta);
  if (samples.empty()) throw Error(ErrorCode::EmptySampleList, "no observations");
  double base = 0.0;
  for (const auto& s : samples) base += log_q0(s, p);
  return base + log_likelihood_ratio(samples, p, c.phases(), beta);
}

}  // namespace covphase
