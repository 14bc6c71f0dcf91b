#pragma once

#include <cstdint>
#include <span>
#include <string_view>

#include <boost/random/mersenne_twister.hpp>

namespace loopsoup {

/// Seeded random stream used by every sampler.
///
/// The engine is the 64-bit Mersenne twister (mt19937_64) and all variates are
/// produced by Boost.Random distribution code, so a given seed yields the same
/// draws on every platform. Each sampler documents its order of draws.
class Stream {
 public:
  using Engine = boost::random::mt19937_64;

  explicit Stream(std::uint64_t seed) : engine_(seed), seed_(seed) {}

  /// Child stream keyed by a name: seed = splitmix64(seed ^ fnv1a64(key)).
  static Stream derive(std::uint64_t master, std::string_view key);
  /// Child stream keyed by a counter: seed = splitmix64(seed + counter + 1).
  static Stream derive(std::uint64_t master, std::uint64_t counter);

  std::uint64_t seed() const { return seed_; }

  double uniform();  // [0, 1)
  double exponential(double rate);
  double normal();
  double gamma(double shape, double rate);
  std::uint64_t poisson(double mean);

  /// Index i with probability (cumulative[i] - cumulative[i-1]) / cumulative.back().
  std::size_t categorical(std::span<const double> cumulative);

  Engine& engine() { return engine_; }

 private:
  Engine engine_;
  std::uint64_t seed_;
};

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a64(std::string_view key);

}  // namespace loopsoup
