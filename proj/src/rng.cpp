#include <crrn/rng.hpp>

namespace crrn {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Rng::Rng(std::uint64_t seed, std::uint64_t stream)
    : seed_(mix_seed(seed, stream)), engine_(seed_), normal_(0.0, 1.0),
      uniform_(0.0, 1.0) {}

double Rng::normal() { return normal_(engine_); }

double Rng::uniform() { return uniform_(engine_); }

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

Matrix Rng::gaussian(Index rows, Index cols) {
  Matrix m(rows, cols);
  // column-major fill order is part of the determinism contract
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i)
      m(i, j) = normal();
  return m;
}

Rng Rng::substream(std::uint64_t index) const { return Rng(seed_, index); }

} // namespace crrn
