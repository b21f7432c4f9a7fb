#include "selfnorm/rng.hpp"

#include <cmath>
#include <numbers>

namespace selfnorm {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t CounterRng::bits(std::uint64_t stream, std::uint64_t counter) const {
  return splitmix64(splitmix64(splitmix64(seed_) ^ stream) ^ counter);
}

double CounterRng::uniform(std::uint64_t stream, std::uint64_t counter) const {
  return static_cast<double>(bits(stream, counter) >> 11) * 0x1.0p-53;
}

std::uint64_t CounterRng::below(std::uint64_t bound, std::uint64_t stream,
                                std::uint64_t counter) const {
  const unsigned __int128 product =
      static_cast<unsigned __int128>(bits(stream, counter)) * static_cast<unsigned __int128>(bound);
  return static_cast<std::uint64_t>(product >> 64);
}

double CounterRng::normal(std::uint64_t stream, std::uint64_t counter) const {
  // 1 - u keeps the logarithm's argument in (0, 1].
  const double u1 = 1.0 - uniform(stream, 2 * counter);
  const double u2 = uniform(stream, 2 * counter + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace selfnorm
