#include "afcomb/rng.hpp"

namespace afcomb {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t derive_stream_seed(std::uint64_t seed, std::uint64_t realization,
                                 StreamRole role) {
  std::uint64_t state = seed;
  std::uint64_t mixed = splitmix64(state);
  state = mixed ^ (realization * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL);
  mixed = splitmix64(state);
  state = mixed ^ static_cast<std::uint64_t>(role);
  return splitmix64(state);
}

}  // namespace afcomb
