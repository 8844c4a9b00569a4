#pragma once

#include <crrn/types.hpp>

#include <cstdint>
#include <functional>

namespace crrn {

using LinearMap = std::function<Vector(const Vector &)>;

/// S^{-1/2} for symmetric positive definite S (eigendecomposition).
Matrix spd_inverse_sqrt(const Matrix &s);
/// S^{1/2} for symmetric positive semidefinite S.
Matrix spd_sqrt(const Matrix &s);

struct PowerIterationResult {
  double norm = 0.0;
  Index iterations = 0;
  bool converged = false;
};

/// Largest |eigenvalue| of a symmetric map by power iteration. Stops when the
/// estimate changes by less than rel_tol relatively; max_iters <= 0 selects
/// 10 * dim.
PowerIterationResult symmetric_norm(const LinearMap &op, Index dim,
                                    double rel_tol = 1e-8, Index max_iters = 0,
                                    std::uint64_t seed = 0x5eed);

/// ||A||_2 for dense symmetric A. Exact (eigenvalues) up to n = 4000, power
/// iteration with tolerance rel_tol above.
double spectral_norm(const Matrix &a, double rel_tol = 1e-8);

struct EigenPair {
  double value = 0.0;
  Vector vector;
};

/// Smallest eigenpair of a symmetric map via Lanczos with full
/// reorthogonalization. Exact once steps reaches dim.
EigenPair lanczos_smallest(const LinearMap &op, Index dim, Index steps,
                           std::uint64_t seed = 0x1a2c05);

} // namespace crrn
