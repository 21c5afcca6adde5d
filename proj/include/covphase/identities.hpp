#pragma once

// Numerical checks of the trigonometric identities and series expansion
// behind the closed-form divergences. Used as regression guards.

#include <cstdint>
#include <optional>
#include <span>
#include <string>

#include "covphase/core.hpp"

namespace covphase {

struct IdentityReport {
  std::string name;
  double max_abs_residual = 0.0;
  std::int64_t trials = 0;
  std::string param_grid;
  double threshold = 0.0;
  bool passed = false;
  // Log-log slope of residual against the expansion variable, when fitted.
  std::optional<double> fitted_exponent;
};

// Compensated (Neumaier) accumulator.
class KahanSum {
 public:
  void add(double x) noexcept;
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// Signed residuals of the pair-angle sums at one theta, for any N >= 1:
//   sum_t sin(2 t pi/N + theta), sum_t cos(2 t pi/N + theta),
//   sum_t cos^4(theta + t pi/N) - 3N/8,
//   sum_t sin^2 cos^2 (theta + t pi/N) - N/8,
//   sum_t cos^3 sin (theta + t pi/N).
// Only the first two vanish at N = 2.
struct PairSumResiduals {
  double sin_sum = 0.0;
  double cos_sum = 0.0;
  double cos4 = 0.0;
  double sin2cos2 = 0.0;
  double cos3sin = 0.0;

  double max_abs() const noexcept;
};

PairSumResiduals pair_sum_residuals(int n_pairs, double theta);

// All four identities at every theta; N >= 3.
IdentityReport check_pair_sums(int n_pairs, std::span<const double> thetas, double threshold = 1e-9);

// Y_t = A (x cos(theta0 + t pi/N) + y sin(theta0 + t pi/N)) / sigma^2.
double projection_y(const ChannelParams& p, int n_pairs, int t, ComplexSample z) noexcept;

// sum_t Y_t^2 = N A^2 (x^2+y^2) / (2 sigma^4) and
// sum_t Y_t^4 = 3 N A^4 (x^2+y^2)^2 / (8 sigma^8) at every point; N >= 3.
IdentityReport check_projection_sums(int n_pairs, const ChannelParams& p,
                                     std::span<const ComplexSample> points,
                                     double threshold = 1e-9);

// log[(1/N) sum_t cosh(Y_t B)] evaluated without cancellation.
double cosh_mean_exact(std::span<const double> ys, double b);
// B^2/2 m2 + B^4/24 (m4 - 3 m2^2), m_k = (1/N) sum_t Y_t^k.
double cosh_mean_series(std::span<const double> ys, double b);

// Residual exact - series at every B. Passes when each residual is within
// |B|^6 sum_t |Y_t|^6 and, given two or more nonzero residuals, the fitted
// exponent lies in [5.5, 6.5]. threshold holds the largest of those bounds.
// Requires ys.size() == N and |B| <= 0.2 / max|Y_t|.
IdentityReport check_cosh_series(int n_pairs, std::span<const double> ys,
                                      std::span<const double> b_values);

// One JSON object per line.
std::string to_json_line(const IdentityReport& r);

}  // namespace covphase
