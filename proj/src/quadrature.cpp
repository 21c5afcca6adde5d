#include "covphase/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <vector>

#include "covphase/core.hpp"

namespace covphase {

namespace {

constexpr double kScale = 1e150;

// Orthonormal Hermite recurrence
//   p_j = z sqrt(2/j) p_{j-1} - sqrt((j-1)/j) p_{j-2}
// with coefficients cached per degree.
struct Recurrence {
  std::vector<double> a, b;

  explicit Recurrence(std::size_t n) : a(n + 1), b(n + 1) {
    for (std::size_t j = 1; j <= n; ++j) {
      const auto jd = static_cast<double>(j);
      a[j] = std::sqrt(2.0 / jd);
      b[j] = std::sqrt((jd - 1.0) / jd);
    }
  }

  std::size_t degree() const { return a.size() - 1; }
};

struct HermiteEval {
  double p;       // scaled p_n(z)
  double p_prev;  // scaled p_{n-1}(z)
  int rescales;   // both values carry a factor kScale^-rescales
};

HermiteEval hermite(const Recurrence& r, double z) {
  double p1 = 1.0 / std::sqrt(std::sqrt(std::numbers::pi));
  double p2 = 0.0;
  int rescales = 0;
  for (std::size_t j = 1; j <= r.degree(); ++j) {
    const double p3 = p2;
    p2 = p1;
    p1 = z * r.a[j] * p2 - r.b[j] * p3;
    if (std::fabs(p1) > kScale) {
      p1 /= kScale;
      p2 /= kScale;
      ++rescales;
    }
  }
  return {p1, p2, rescales};
}

// Number of roots of p_n above z: sign changes along p_0..p_n (Sturm).
std::size_t roots_above(const Recurrence& r, double z) {
  double p1 = 1.0;
  double p2 = 0.0;
  std::size_t changes = 0;
  for (std::size_t j = 1; j <= r.degree(); ++j) {
    const double p3 = p2;
    p2 = p1;
    p1 = z * r.a[j] * p2 - r.b[j] * p3;
    // An exact zero takes the sign opposite to its predecessor.
    if (p1 == 0.0) p1 = -std::copysign(std::numeric_limits<double>::min(), p2);
    if ((p1 < 0.0) != (p2 < 0.0)) ++changes;
    if (std::fabs(p1) > kScale) {
      p1 /= kScale;
      p2 /= kScale;
    }
  }
  return changes;
}

}  // namespace

GaussHermiteRule compute_gauss_hermite(std::size_t n) {
  if (n == 0) throw Error(ErrorCode::InvalidConfig, "Gauss-Hermite rule needs n >= 1");
  const Recurrence rec(n);
  GaussHermiteRule rule;
  rule.nodes.assign(n, 0.0);
  rule.weights.assign(n, 0.0);
  const std::size_t half = (n + 1) / 2;
  const auto nd = static_cast<double>(n);
  const double log_scale = std::log(kScale);

  // Largest root first; each root is bracketed by bisection on the Sturm
  // count, then polished by Newton.
  double hi = std::sqrt(2.0 * nd + 1.0) + 1.0;
  for (std::size_t i = 0; i < half; ++i) {
    double lo = 0.0;
    double up = hi;
    if (n % 2 == 1 && i == half - 1) {
      up = 0.0;
    } else {
      // roots_above(z) > i below the root, <= i at and above it.
      for (int it = 0; it < 200 && up - lo > 1e-10 * std::max(1.0, up); ++it) {
        const double mid = 0.5 * (lo + up);
        if (roots_above(rec, mid) > i) {
          lo = mid;
        } else {
          up = mid;
        }
      }
    }
    double z = 0.5 * (lo + up);
    if (n % 2 == 1 && i == half - 1) z = 0.0;

    HermiteEval h = hermite(rec, z);
    for (int it = 0; it < 4 && z != 0.0; ++it) {
      const double pp = std::sqrt(2.0 * nd) * h.p_prev;
      const double next = z - h.p / pp;
      if (!(next > lo - 1e-9 && next < up + 1e-9)) break;
      z = next;
      h = hermite(rec, z);
    }
    if (!std::isfinite(z)) {
      throw Error(ErrorCode::NonConvergence, "Gauss-Hermite root search failed");
    }
    const double pp = std::sqrt(2.0 * nd) * h.p_prev;
    // w = 2 / pp^2, pp carrying kScale^-rescales.
    const double log_w = std::log(2.0) - 2.0 * (std::log(std::fabs(pp)) + h.rescales * log_scale);

    rule.nodes[i] = z;
    rule.nodes[n - 1 - i] = -z;
    rule.weights[i] = std::exp(log_w);
    rule.weights[n - 1 - i] = rule.weights[i];
    hi = z;
  }
  // Ascending order.
  std::reverse(rule.nodes.begin(), rule.nodes.end());
  std::reverse(rule.weights.begin(), rule.weights.end());
  return rule;
}

std::shared_ptr<const GaussHermiteRule> gauss_hermite(std::size_t n) {
  static std::mutex mu;
  static std::map<std::size_t, std::shared_ptr<const GaussHermiteRule>> cache;
  {
    std::lock_guard<std::mutex> lock(mu);
    if (auto it = cache.find(n); it != cache.end()) return it->second;
  }
  auto rule = std::make_shared<const GaussHermiteRule>(compute_gauss_hermite(n));
  std::lock_guard<std::mutex> lock(mu);
  return cache.emplace(n, std::move(rule)).first->second;
}

}  // namespace covphase
