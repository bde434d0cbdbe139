#include "lexmatch/rng.hpp"

namespace lexmatch {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

RngSeed RngSeed::child(std::uint64_t sub) const {
  return RngSeed{splitmix64(seed ^ splitmix64(stream)), sub};
}

Rng::Rng(RngSeed s)
    : engine_(splitmix64(splitmix64(s.seed) ^ splitmix64(s.stream + 0x632be59bd9b4e019ULL))) {}

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::below(std::uint64_t n) {
  std::uniform_int_distribution<std::uint64_t> dist(0, n - 1);
  return dist(engine_);
}

}  // namespace lexmatch
