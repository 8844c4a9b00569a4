#pragma once

#include <crrn/types.hpp>

#include <cstdint>
#include <random>

namespace crrn {

/// splitmix64 finalizer; derives independent substream seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

/// Seeded generator owned by the caller. Substreams are keyed by
/// (seed, index) so parallel sampling is independent of thread count.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  double normal();
  /// Uniform on [0, 1).
  double uniform();
  double uniform(double lo, double hi);
  Matrix gaussian(Index rows, Index cols);

  Rng substream(std::uint64_t index) const;
  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
  std::uniform_real_distribution<double> uniform_;
};

} // namespace crrn
