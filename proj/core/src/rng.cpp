#include "staree/rng.hpp"

#include <cmath>
#include <numbers>

namespace staree {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

std::uint64_t mix64(std::uint64_t x) {
  x += kGolden;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace

StreamRng::StreamRng(std::uint64_t seed, std::string_view label)
    : key_(mix64(seed ^ mix64(fnv1a(label)))) {}

std::uint64_t StreamRng::next_u64() { return mix64(key_ + kGolden * ++counter_); }

double StreamRng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double StreamRng::uniform_open() {
  return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
}

double StreamRng::normal() {
  // Box-Muller; uniform_open keeps the log argument strictly positive.
  const double r = std::sqrt(-2.0 * std::log(uniform_open()));
  return r * std::cos(2.0 * std::numbers::pi * uniform());
}

std::complex<double> StreamRng::cnormal() {
  const double mag = std::sqrt(-std::log(uniform_open()));
  const double phase = 2.0 * std::numbers::pi * uniform();
  return {mag * std::cos(phase), mag * std::sin(phase)};
}

}  // namespace staree
