#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace bolab {

/// Seeded random stream. Wraps mt19937_64 and draws doubles with an explicit
/// 53-bit construction so sequences do not depend on the standard library's
/// distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n). Rejection sampling, no modulo bias.
  std::uint64_t below(std::uint64_t n);

  double normal();

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t z);

/// FNV-1a 64-bit hash, used to fold string identifiers into seeds.
std::uint64_t fnv1a64(std::string_view text);

/// Derives an independent stream seed from (master, case hash, dataset, solver
/// tag, run). Each component is absorbed by xor-then-mix so that every field
/// influences every output bit.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t case_hash, std::uint64_t dataset,
                          std::uint64_t solver_tag, std::uint64_t run);

}  // namespace bolab
