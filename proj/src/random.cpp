#include "handsynth/random.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace handsynth {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;
}

// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ull;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBull;
  x ^= x >> 31;
  return x;
}

// FNV-1a, then mixed.
std::uint64_t hash_tag(std::string_view tag) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char c : tag) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  return mix64(h);
}

RandomStream RandomStream::for_scene(std::uint64_t master_seed, std::uint64_t scene_id, std::string_view tag) {
  const std::uint64_t k = mix64(mix64(master_seed + kGolden) ^ mix64(scene_id * kGolden + 1));
  return RandomStream(mix64(k ^ hash_tag(tag)));
}

RandomStream RandomStream::substream(std::string_view tag) const {
  return RandomStream(mix64(key_ ^ hash_tag(tag) ^ 0xD1B54A32D192ED03ull));
}

std::uint64_t RandomStream::next_u64() {
  ++counter_;
  return mix64(key_ + counter_ * kGolden);
}

double RandomStream::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t RandomStream::uniform_index(std::uint64_t n) {
  // Rejection on the top of the range removes modulo bias.
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t x;
  do {
    x = next_u64();
  } while (x >= limit);
  return x % n;
}

double RandomStream::normal() {
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Vec3 RandomStream::unit_vector() {
  const double z = uniform(-1.0, 1.0);
  const double phi = uniform(0.0, 2.0 * std::numbers::pi);
  const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
  return {r * std::cos(phi), r * std::sin(phi), z};
}

}  // namespace handsynth
