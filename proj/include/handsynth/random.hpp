#pragma once

#include "handsynth/geometry.hpp"

#include <cstdint>
#include <string_view>

namespace handsynth {

// Counter-based random stream. Output i is a pure function of (key, i), so a
// stream derived from (master_seed, scene_id, factor tag) yields the same
// values regardless of which thread draws it or in which order scenes run.
// Distributions are implemented here rather than through <random> so results
// are identical across standard libraries.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t key) : key_(key) {}

  static RandomStream for_scene(std::uint64_t master_seed, std::uint64_t scene_id, std::string_view tag);

  // Independent child stream; the parent's counter is not advanced.
  RandomStream substream(std::string_view tag) const;

  std::uint64_t next_u64();
  // Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Uniform integer in [0, n). n must be > 0.
  std::uint64_t uniform_index(std::uint64_t n);
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }
  // Uniformly distributed direction on the unit sphere.
  Vec3 unit_vector();
  bool bernoulli(double p) { return uniform() < p; }

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t mix64(std::uint64_t x);
std::uint64_t hash_tag(std::string_view tag);

}  // namespace handsynth
