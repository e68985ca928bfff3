#pragma once

#include <cstdint>
#include <random>

namespace afcomb {

// Role tags for splitting one experiment seed into independent substreams.
// Input, measurement noise, and plant random walk never share a generator,
// and the plant initialization stream is shared by all realizations.
enum class StreamRole : std::uint64_t {
  kInput = 1,
  kNoise = 2,
  kProcessWalk = 3,
  kPlantInit = 4,
};

// Mixes (seed, realization, role) into a single well-spread 64-bit state.
std::uint64_t derive_stream_seed(std::uint64_t seed, std::uint64_t realization,
                                 StreamRole role);

// Standard-normal stream; one instance per (realization, role).
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) : gen_(seed) {}

  double next() { return normal_(gen_); }

 private:
  std::mt19937_64 gen_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace afcomb
