#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>

namespace kochlab {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seed for chunk `chunk` of stream `stream` under a master seed.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t chunk) {
  return splitmix64(splitmix64(master ^ splitmix64(stream)) + chunk);
}

// Platform-independent draws on top of mt19937_64 (the standard distributions
// are implementation-defined, which would break cross-build reproducibility).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t bits() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform on (0, 1].
  double uniform_open0() { return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53; }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double r = std::sqrt(-2.0 * std::log(uniform_open0()));
    double phi = 2.0 * M_PI * uniform();
    spare_ = r * std::sin(phi);
    has_spare_ = true;
    return r * std::cos(phi);
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

struct ParallelOptions {
  int workers = 1;
  int chunk_size = 256;
};

// Runs body(chunk_index, begin, end) over [0, count) split into fixed-size
// chunks. Chunk boundaries depend only on chunk_size, so any per-chunk
// seeding is independent of the worker count.
void parallel_chunks(std::size_t count, const ParallelOptions& options,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& body);

}  // namespace kochlab
