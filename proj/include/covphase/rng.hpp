#pragma once

#include <cstdint>
#include <random>

namespace covphase {

// Seeded random source. Equal (seed, stream_id) pairs give bit-identical
// sequences; split() derives child streams for parallel workers so that no
// engine is ever shared between threads.
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

  // Child stream keyed on (seed, stream_id, child). Does not advance *this.
  Rng split(std::uint64_t child) const;

  std::uint64_t next_u64() { return engine_(); }
  // Exactly uniform on [0, n).
  std::uint32_t uniform_index(std::uint32_t n);
  double uniform01();
  double normal();

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

}  // namespace covphase
