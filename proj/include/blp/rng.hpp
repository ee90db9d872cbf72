#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace blp {

/// Random stream used by every sampler in the library.
///
/// Wraps std::mt19937_64, whose output sequence and std::seed_seq seeding are
/// fixed by the C++ standard, so a given (master seed, replication index)
/// pair yields the same draws on every conforming platform. All variates are
/// derived with the hand-written transforms below rather than <random>
/// distributions, whose algorithms are implementation-defined.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}
  explicit Rng(std::seed_seq& seq) : engine_(seq) {}

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

  /// Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform_open() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Exponential with the given rate.
  double exponential(double rate) { return -std::log(uniform_open()) / rate; }

 private:
  std::mt19937_64 engine_;
};

/// Counter-based stream derivation: the stream for replication `index` depends
/// only on (master_seed, index), never on scheduling.
inline Rng seed_stream(std::uint64_t master_seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(master_seed),
                    static_cast<std::uint32_t>(master_seed >> 32),
                    static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32), 0x626c7000u};
  return Rng(seq);
}

}  // namespace blp
