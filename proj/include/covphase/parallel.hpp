#pragma once

// Chunked execution shared by the Monte Carlo and quadrature kernels.
//
// Work is cut into fixed-size chunks; chunk i always sees the same inputs
// (including its own RNG stream) and partial results are combined in chunk
// order. The serial loop and the OpenMP loop therefore produce bit-identical
// results, and the serial path stays available as the reference for tests and
// benchmarks.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <vector>

namespace covphase {

enum class Exec { Serial, Parallel };

struct ChunkLayout {
  std::size_t chunk_size = 4096;
};

// Streaming mean/variance with Chan's pairwise merge.
struct Moments {
  std::int64_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) noexcept {
    ++count;
    const double d = x - mean;
    mean += d / static_cast<double>(count);
    m2 += d * (x - mean);
  }

  void merge(const Moments& o) noexcept {
    if (o.count == 0) return;
    if (count == 0) {
      *this = o;
      return;
    }
    const auto n = static_cast<double>(count + o.count);
    const double d = o.mean - mean;
    mean += d * static_cast<double>(o.count) / n;
    m2 += o.m2 + d * d * static_cast<double>(count) * static_cast<double>(o.count) / n;
    count += o.count;
  }

  double variance() const noexcept { return count > 1 ? m2 / static_cast<double>(count - 1) : 0.0; }
  double std_error() const noexcept {
    return count > 1 ? std::sqrt(variance() / static_cast<double>(count)) : 0.0;
  }
};

inline std::size_t chunk_count(std::size_t total, ChunkLayout layout) {
  const std::size_t cs = layout.chunk_size == 0 ? 1 : layout.chunk_size;
  return (total + cs - 1) / cs;
}

// Calls fn(chunk_index, begin, end) for every chunk of [0, total) and returns
// the partials in chunk order.
template <class Partial, class Fn>
std::vector<Partial> map_chunks(std::size_t total, ChunkLayout layout, Exec exec, Fn&& fn) {
  const std::size_t cs = layout.chunk_size == 0 ? 1 : layout.chunk_size;
  const std::size_t chunks = chunk_count(total, layout);
  std::vector<Partial> out(chunks);

  if (exec == Exec::Serial) {
    for (std::size_t c = 0; c < chunks; ++c) {
      const std::size_t begin = c * cs;
      const std::size_t end = begin + cs < total ? begin + cs : total;
      out[c] = fn(c, begin, end);
    }
    return out;
  }

  std::exception_ptr failure;
  const auto n = static_cast<std::int64_t>(chunks);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t ci = 0; ci < n; ++ci) {
    const auto c = static_cast<std::size_t>(ci);
    const std::size_t begin = c * cs;
    const std::size_t end = begin + cs < total ? begin + cs : total;
    try {
      out[c] = fn(c, begin, end);
    } catch (...) {
#pragma omp critical(covphase_map_chunks_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

// Ordered merge of per-chunk moments.
inline Moments merge_all(const std::vector<Moments>& parts) {
  Moments m;
  for (const auto& p : parts) m.merge(p);
  return m;
}

int worker_threads();

}  // namespace covphase
