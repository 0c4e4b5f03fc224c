#pragma once

#include <cstdint>
#include <random>

namespace physiocue {

// Portable seeded generator. The engine is std::mt19937_64, whose output
// sequence is fixed by the C++ standard; the uniform and normal transforms
// below are written out here (53-bit mantissa fill, Box-Muller) instead of
// using <random> distributions, whose algorithms vary between standard
// libraries. Identical seeds give bit-identical streams everywhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Uniform integer in [lo, hi].
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }

  std::uint64_t next_u64() { return engine_(); }

  // Independent child stream; used to give each scenario component its own
  // generator so adding draws to one does not shift another.
  Rng fork(std::uint64_t salt);

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// splitmix64 finalizer; mixes seeds for forked streams.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt);

}  // namespace physiocue
