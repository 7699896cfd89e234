#pragma once

// Shared plumbing: error types, deterministic RNG streams, parallel_for.

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

namespace gsd {

inline constexpr const char* kToolVersion = "0.1.0";

// Malformed binary/JSON input; carries the byte offset of the failure.
struct ParseError : std::runtime_error {
  std::size_t byte_offset;
  ParseError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " (byte offset " + std::to_string(offset) + ")"),
        byte_offset(offset) {}
};

struct UnsupportedVersion : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad key/value in a config file or invalid configuration values.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Missing or unreadable/unwritable file.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
inline double logit(double p) { return std::log(p / (1.0 - p)); }

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kTwoPi = 2.0 * kPi;

// splitmix64 finalizer; full-avalanche 64->64 mix.
inline uint64_t mix64(uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Derives an independent stream id for (seed, event, item). Every random event
// in the tool seeds a fresh Rng this way, so evaluation order never matters.
inline uint64_t mix_seed(uint64_t seed, uint64_t a, uint64_t b = 0) {
  uint64_t h = mix64(seed + 0x9e3779b97f4a7c15ull * (a + 1));
  return mix64(h + 0x94d049bb133111ebull * (b + 1));
}

// Event tags for mix_seed.
enum : uint64_t {
  kTagScene = 1,
  kTagCameras = 2,
  kTagInitCloud = 3,
  kTagSplit = 4,
  kTagPruneViews = 5,
  kTagOracle = 100,  // test-side streams live above 100
};

// splitmix64 sequence. Small, portable, deterministic; good enough statistics
// for scene sampling and densification jitter.
struct Rng {
  uint64_t state;

  explicit Rng(uint64_t seed) : state(seed) {}

  uint64_t next_u64() {
    state += 0x9e3779b97f4a7c15ull;
    return mix64(state);
  }

  // uniform in [0,1)
  double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // uniform integer in [0,n), n > 0
  uint64_t uniform_index(uint64_t n) {
    return uint64_t((static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  // standard normal via Box-Muller (std::normal_distribution is
  // implementation-defined, which would break bit-reproducibility)
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(kTwoPi * u2);
    have_spare_ = true;
    return r * std::cos(kTwoPi * u2);
  }

 private:
  double spare_ = 0.0;
  bool have_spare_ = false;
};

// Worker count: GSDEFEND_THREADS if set (>0), else hardware concurrency.
int worker_count();

// Splits [0,n) into worker_count() contiguous chunks and runs f(begin,end) on
// each, one per thread. The chunk boundaries depend only on (n, workers), so
// per-chunk partial results can be merged in chunk order for bit-stable
// reductions. f must only touch disjoint state per index.
void parallel_chunks(int n, const std::function<void(int, int)>& f);

}  // namespace gsd
