#include "covphase/codebook.hpp"

#include <cmath>

namespace covphase {

namespace {

// Sign and pair index come from one uniform integer over 2 * pairs options so
// that every (sign, pair) combination is exactly equiprobable.
struct Draw {
  double sign;
  std::size_t pair;
};

Draw draw_per_symbol(std::size_t pairs, Rng& rng) {
  const std::uint32_t k = rng.uniform_index(static_cast<std::uint32_t>(2 * pairs));
  return {(k & 1u) ? -1.0 : 1.0, k >> 1};
}

double draw_sign(Rng& rng) { return rng.uniform_index(2) ? -1.0 : 1.0; }

}  // namespace

std::vector<std::complex<double>> constellation(const CodebookSpec& c, double beta) {
  require_beta(beta);
  const PhaseSet ph = c.phases();
  std::vector<std::complex<double>> pts;
  pts.reserve(2 * ph.angles.size());
  for (double phi : ph.angles) {
    const std::complex<double> u = std::polar(beta, phi);
    pts.push_back(u);
    pts.push_back(-u);
  }
  return pts;
}

Codeword sample_codeword(const CodebookSpec& c, double beta, std::size_t n, Rng& rng) {
  require_beta(beta);
  if (n == 0) throw Error(ErrorCode::EmptySampleList, "codeword length must be >= 1");
  const PhaseSet ph = c.phases();
  Codeword cw;
  cw.symbols.resize(n);
  if (ph.shared) {
    const std::size_t t = rng.uniform_index(static_cast<std::uint32_t>(ph.angles.size()));
    cw.shared_angle = ph.angles[t];
    for (auto& s : cw.symbols) s = {draw_sign(rng) * beta, ph.angles[t]};
  } else {
    for (auto& s : cw.symbols) {
      const Draw d = draw_per_symbol(ph.angles.size(), rng);
      s = {d.sign * beta, ph.angles[d.pair]};
    }
  }
  return cw;
}

std::vector<ComplexSample> willie_observation(const Codeword& codeword, const ChannelParams& p,
                                              Rng& rng) {
  std::vector<ComplexSample> out(codeword.symbols.size());
  const double sigma = p.sigma();
  for (std::size_t i = 0; i < out.size(); ++i) {
    const Symbol& s = codeword.symbols[i];
    const double phi = p.theta0() + s.phase;
    const double a = p.amplitude() * s.amplitude;
    const double zx = rng.normal();
    const double zy = rng.normal();
    out[i] = {a * std::cos(phi) + sigma * zx, a * std::sin(phi) + sigma * zy};
  }
  return out;
}

void draw_h1_observation(const PhaseSet& phases, const ChannelParams& p, double beta,
                         std::span<ComplexSample> out, Rng& rng) {
  const std::size_t pairs = phases.angles.size();
  const double ab = p.amplitude() * beta;
  const double sigma = p.sigma();

  // Symbols first, then noise: the same draw order as the two-step path.
  if (phases.shared) {
    const std::size_t t = rng.uniform_index(static_cast<std::uint32_t>(pairs));
    const double phi = p.theta0() + phases.angles[t];
    const double cx = ab * std::cos(phi);
    const double cy = ab * std::sin(phi);
    for (auto& o : out) {
      const double s = draw_sign(rng);
      o = {s * cx, s * cy};
    }
  } else {
    for (auto& o : out) {
      const Draw d = draw_per_symbol(pairs, rng);
      const double phi = p.theta0() + phases.angles[d.pair];
      o = {d.sign * ab * std::cos(phi), d.sign * ab * std::sin(phi)};
    }
  }
  for (auto& o : out) {
    const double zx = rng.normal();
    const double zy = rng.normal();
    o.x += sigma * zx;
    o.y += sigma * zy;
  }
}

void draw_h0_observation(const ChannelParams& p, std::span<ComplexSample> out, Rng& rng) {
  const double sigma = p.sigma();
  for (auto& o : out) {
    const double zx = rng.normal();
    const double zy = rng.normal();
    o = {sigma * zx, sigma * zy};
  }
}

}  // namespace covphase
