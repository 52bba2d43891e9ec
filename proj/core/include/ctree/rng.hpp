#pragma once

#include <cstdint>
#include <random>

namespace ctree {

// Thin wrapper over mt19937_64. Replicate i of an experiment seeded with
// `master` always uses Rng::stream(master, i), so results do not depend on
// how replicates are scheduled.
class Rng {
 public:
  using engine_type = std::mt19937_64;
  using result_type = engine_type::result_type;

  explicit Rng(std::uint64_t seed = 1) : engine_(seed) {}

  static Rng stream(std::uint64_t master, std::uint64_t index);

  static constexpr result_type min() { return engine_type::min(); }
  static constexpr result_type max() { return engine_type::max(); }
  result_type operator()() { return engine_(); }

  // Uniform on the open interval (0, 1).
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }
  double normal() { return normal_(engine_); }
  double exponential() { return exponential_(engine_); }
  bool coin() { return (engine_() >> 63) != 0; }
  std::uint64_t below(std::uint64_t n) {
    return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(engine_);
  }

  engine_type& engine() { return engine_; }

 private:
  engine_type engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::exponential_distribution<double> exponential_{1.0};
};

}  // namespace ctree
