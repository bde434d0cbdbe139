#pragma once

#include <cstdint>
#include <random>

namespace lexmatch {

// A (seed, stream) pair. Distinct streams of the same seed never share state,
// so replica i of an experiment always draws the same numbers no matter how
// replicas are scheduled.
struct RngSeed {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;

  RngSeed child(std::uint64_t sub) const;
};

std::uint64_t splitmix64(std::uint64_t x);

class Rng {
 public:
  explicit Rng(RngSeed s);
  Rng(std::uint64_t seed, std::uint64_t stream) : Rng(RngSeed{seed, stream}) {}

  using result_type = std::uint64_t;
  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

  // Uniform on [0,1) with 53 random bits.
  double uniform();
  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace lexmatch
