#include "covphase/identities.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <fmt/format.h>
#include "json.hpp"

namespace covphase {

namespace {

void require_three_pairs(int n_pairs) {
  if (n_pairs < 3) {
    throw Error(ErrorCode::PairCountTooSmall, fmt::format("identity needs N >= 3, got {}", n_pairs));
  }
}

// Least-squares slope of log|r| against log|b|.
std::optional<double> log_log_slope(const std::vector<double>& b, const std::vector<double>& r) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < b.size(); ++i) {
    if (b[i] != 0.0 && r[i] != 0.0) {
      lx.push_back(std::log(std::fabs(b[i])));
      ly.push_back(std::log(std::fabs(r[i])));
    }
  }
  if (lx.size() < 2) return std::nullopt;
  const auto m = static_cast<double>(lx.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= m;
  my /= m;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  if (sxx == 0.0) return std::nullopt;
  return sxy / sxx;
}

}  // namespace

void KahanSum::add(double x) noexcept {
  const double t = sum_ + x;
  if (std::fabs(sum_) >= std::fabs(x)) {
    comp_ += (sum_ - t) + x;
  } else {
    comp_ += (x - t) + sum_;
  }
  sum_ = t;
}

double PairSumResiduals::max_abs() const noexcept {
  return std::max({std::fabs(sin_sum), std::fabs(cos_sum), std::fabs(cos4), std::fabs(sin2cos2),
                   std::fabs(cos3sin)});
}

PairSumResiduals pair_sum_residuals(int n_pairs, double theta) {
  if (n_pairs < 1) throw Error(ErrorCode::ZeroPairs, "n_pairs must be >= 1");
  if (!std::isfinite(theta)) throw Error(ErrorCode::NonFiniteValue, "theta must be finite");
  KahanSum s1, c1, c4, s2c2, c3s;
  const double nn = n_pairs;
  for (int t = 1; t <= n_pairs; ++t) {
    const double a2 = 2.0 * t * kPi / nn + theta;
    s1.add(std::sin(a2));
    c1.add(std::cos(a2));
    const double a = theta + t * kPi / nn;
    const double c = std::cos(a);
    const double s = std::sin(a);
    c4.add(c * c * c * c);
    s2c2.add(s * s * c * c);
    c3s.add(c * c * c * s);
  }
  return {s1.value(), c1.value(), c4.value() - 3.0 * nn / 8.0, s2c2.value() - nn / 8.0, c3s.value()};
}

IdentityReport check_pair_sums(int n_pairs, std::span<const double> thetas, double threshold) {
  require_three_pairs(n_pairs);
  double worst = 0.0;
  for (double th : thetas) worst = std::max(worst, pair_sum_residuals(n_pairs, th).max_abs());
  return {"pair_sums",
          worst,
          static_cast<std::int64_t>(thetas.size()),
          fmt::format("N={}, {} thetas", n_pairs, thetas.size()),
          threshold,
          worst <= threshold,
          std::nullopt};
}

double projection_y(const ChannelParams& p, int n_pairs, int t, ComplexSample z) noexcept {
  const double a = p.theta0() + t * kPi / n_pairs;
  return p.amplitude() * (z.x * std::cos(a) + z.y * std::sin(a)) / p.variance();
}

IdentityReport check_projection_sums(int n_pairs, const ChannelParams& p,
                                     std::span<const ComplexSample> points, double threshold) {
  require_three_pairs(n_pairs);
  const double nn = n_pairs;
  const double a2 = p.amplitude() * p.amplitude();
  const double s4 = p.variance() * p.variance();
  double worst = 0.0;
  for (const auto& z : points) {
    if (!std::isfinite(z.x) || !std::isfinite(z.y)) {
      throw Error(ErrorCode::NonFiniteValue, "points must be finite");
    }
    KahanSum y2, y4;
    for (int t = 1; t <= n_pairs; ++t) {
      const double y = projection_y(p, n_pairs, t, z);
      y2.add(y * y);
      y4.add(y * y * y * y);
    }
    const double r2 = z.x * z.x + z.y * z.y;
    const double want2 = nn * a2 * r2 / (2.0 * s4);
    const double want4 = 3.0 * nn * a2 * a2 * r2 * r2 / (8.0 * s4 * s4);
    worst = std::max({worst, std::fabs(y2.value() - want2), std::fabs(y4.value() - want4)});
  }
  return {"projection_sums",
          worst,
          static_cast<std::int64_t>(points.size()),
          fmt::format("N={}, theta0={:.6g}, {} points", n_pairs, p.theta0(), points.size()),
          threshold,
          worst <= threshold,
          std::nullopt};
}

double cosh_mean_exact(std::span<const double> ys, double b) {
  if (ys.empty()) throw Error(ErrorCode::ZeroPairs, "no Y values");
  // cosh(u) - 1 = 2 sinh^2(u/2)
  KahanSum excess;
  for (double y : ys) {
    const double h = std::sinh(0.5 * y * b);
    excess.add(2.0 * h * h);
  }
  return std::log1p(excess.value() / static_cast<double>(ys.size()));
}

double cosh_mean_series(std::span<const double> ys, double b) {
  if (ys.empty()) throw Error(ErrorCode::ZeroPairs, "no Y values");
  KahanSum s2, s4;
  for (double y : ys) {
    s2.add(y * y);
    s4.add(y * y * y * y);
  }
  const auto n = static_cast<double>(ys.size());
  const double m2 = s2.value() / n;
  const double m4 = s4.value() / n;
  const double b2 = b * b;
  return b2 / 2.0 * m2 + b2 * b2 / 24.0 * (m4 - 3.0 * m2 * m2);
}

IdentityReport check_cosh_series(int n_pairs, std::span<const double> ys,
                                      std::span<const double> b_values) {
  if (n_pairs < 1) throw Error(ErrorCode::ZeroPairs, "n_pairs must be >= 1");
  if (ys.size() != static_cast<std::size_t>(n_pairs)) {
    throw Error(ErrorCode::InvalidConfig, fmt::format("{} Y values for N={}", ys.size(), n_pairs));
  }
  double ymax = 0.0;
  KahanSum y6;
  for (double y : ys) {
    if (!std::isfinite(y)) throw Error(ErrorCode::NonFiniteValue, "Y values must be finite");
    ymax = std::max(ymax, std::fabs(y));
    y6.add(std::pow(std::fabs(y), 6));
  }
  std::vector<double> bs, rs;
  double worst = 0.0;
  double bound_max = 0.0;
  bool within_bound = true;
  for (double b : b_values) {
    if (!std::isfinite(b)) throw Error(ErrorCode::NonFiniteValue, "B must be finite");
    if (std::fabs(b) * ymax > 0.2) {
      throw Error(ErrorCode::ExpansionRegimeViolated,
                  fmt::format("|B| max|Y| = {:.6g} > 0.2", std::fabs(b) * ymax));
    }
    const double r = cosh_mean_exact(ys, b) - cosh_mean_series(ys, b);
    bs.push_back(b);
    rs.push_back(r);
    worst = std::max(worst, std::fabs(r));
    // A few ulps of slack for the value itself.
    const double slack = 8.0 * std::numeric_limits<double>::epsilon() * std::fabs(cosh_mean_series(ys, b));
    const double bound = std::pow(b, 6) * y6.value();
    bound_max = std::max(bound_max, bound);
    if (std::fabs(r) > bound + slack) within_bound = false;
  }
  const auto slope = log_log_slope(bs, rs);
  const bool slope_ok = !slope || (*slope >= 5.5 && *slope <= 6.5);
  return {"cosh_series",
          worst,
          static_cast<std::int64_t>(b_values.size()),
          fmt::format("N={}, {} B values", n_pairs, b_values.size()),
          bound_max,
          within_bound && slope_ok,
          slope};
}

std::string to_json_line(const IdentityReport& r) {
  nlohmann::ordered_json j;
  j["name"] = r.name;
  j["passed"] = r.passed;
  j["max_abs_residual"] = r.max_abs_residual;
  j["threshold"] = r.threshold;
  j["trials"] = r.trials;
  j["param_grid"] = r.param_grid;
  j["fitted_exponent"] = r.fitted_exponent ? nlohmann::ordered_json(*r.fitted_exponent) : nullptr;
  return j.dump();
}

}  // namespace covphase
