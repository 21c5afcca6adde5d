#pragma once

#include <cstddef>
#include <memory>
#include <vector>

namespace covphase {

// Physicists' Gauss-Hermite rule: integral of e^{-x^2} f(x) dx ~ sum w_i f(x_i).
struct GaussHermiteRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Computes the n-point rule by Newton iteration on the orthonormal Hermite
// recurrence. n >= 1.
GaussHermiteRule compute_gauss_hermite(std::size_t n);

// Cached, thread-safe access to the n-point rule.
std::shared_ptr<const GaussHermiteRule> gauss_hermite(std::size_t n);

}  // namespace covphase
