#include "loopsoup/rng.hpp"

#include <algorithm>
#include <stdexcept>

#include <boost/random/exponential_distribution.hpp>
#include <boost/random/gamma_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/poisson_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>

namespace loopsoup {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a64(std::string_view key) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : key) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

Stream Stream::derive(std::uint64_t master, std::string_view key) {
  return Stream(splitmix64(master ^ fnv1a64(key)));
}

Stream Stream::derive(std::uint64_t master, std::uint64_t counter) {
  return Stream(splitmix64(master + counter + 1));
}

double Stream::uniform() {
  return boost::random::uniform_real_distribution<double>(0.0, 1.0)(engine_);
}

double Stream::exponential(double rate) {
  return boost::random::exponential_distribution<double>(rate)(engine_);
}

double Stream::normal() {
  return boost::random::normal_distribution<double>(0.0, 1.0)(engine_);
}

double Stream::gamma(double shape, double rate) {
  // Boost parameterizes by scale.
  return boost::random::gamma_distribution<double>(shape, 1.0 / rate)(engine_);
}

std::uint64_t Stream::poisson(double mean) {
  if (mean <= 0.0) return 0;
  // Split large means so the sampler never sees exp(-mean) underflow.
  if (mean > 500.0) return poisson(mean / 2) + poisson(mean / 2);
  return boost::random::poisson_distribution<std::uint64_t, double>(mean)(engine_);
}

std::size_t Stream::categorical(std::span<const double> cumulative) {
  if (cumulative.empty() || !(cumulative.back() > 0.0))
    throw std::invalid_argument("categorical: empty or zero-mass distribution");
  const double u = uniform() * cumulative.back();
  auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  if (it == cumulative.end()) --it;
  // Skip zero-width cells that upper_bound could land on after rounding.
  auto idx = static_cast<std::size_t>(it - cumulative.begin());
  while (idx > 0 && cumulative[idx] == cumulative[idx - 1]) --idx;
  return idx;
}

}  // namespace loopsoup
