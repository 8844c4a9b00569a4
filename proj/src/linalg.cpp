#include <crrn/linalg.hpp>
#include <crrn/rng.hpp>

#include <cmath>

namespace crrn {

namespace {
constexpr Index kDenseNormLimit = 4000;
}

Matrix spd_inverse_sqrt(const Matrix &s) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(s);
  const Vector d = es.eigenvalues().array().rsqrt();
  return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
}

Matrix spd_sqrt(const Matrix &s) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(s);
  const Vector d = es.eigenvalues().array().max(0.0).sqrt();
  return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
}

PowerIterationResult symmetric_norm(const LinearMap &op, Index dim,
                                    double rel_tol, Index max_iters,
                                    std::uint64_t seed) {
  PowerIterationResult out;
  if (dim == 0)
    return out;
  if (max_iters <= 0)
    max_iters = 10 * dim;
  Rng rng(seed);
  Vector v(dim);
  for (Index i = 0; i < dim; ++i)
    v(i) = rng.normal();
  v.normalize();
  double estimate = 0.0;
  for (Index it = 1; it <= max_iters; ++it) {
    Vector w = op(v);
    const double nw = w.norm();
    out.iterations = it;
    if (nw == 0.0) {
      // v is in the null space; any |eigenvalue| found so far stands
      out.converged = true;
      break;
    }
    const double change = std::abs(nw - estimate);
    estimate = nw;
    v = w / nw;
    if (change <= rel_tol * nw) {
      out.converged = true;
      break;
    }
  }
  out.norm = estimate;
  return out;
}

double spectral_norm(const Matrix &a, double rel_tol) {
  if (a.size() == 0)
    return 0.0;
  if (a.isZero(0.0))
    return 0.0;
  if (a.rows() <= kDenseNormLimit) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(a, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
  }
  return symmetric_norm([&a](const Vector &v) -> Vector { return a * v; },
                        a.rows(), rel_tol)
      .norm;
}

EigenPair lanczos_smallest(const LinearMap &op, Index dim, Index steps,
                           std::uint64_t seed) {
  EigenPair out;
  if (dim == 0)
    return out;
  steps = std::min(steps, dim);
  Matrix q(dim, steps);
  Vector alpha(steps), beta(steps);
  Rng rng(seed);
  Vector v(dim);
  for (Index i = 0; i < dim; ++i)
    v(i) = rng.normal();
  v.normalize();
  Index m = 0;
  for (; m < steps; ++m) {
    q.col(m) = v;
    Vector w = op(v);
    alpha(m) = v.dot(w);
    // full reorthogonalization, twice for stability
    for (int pass = 0; pass < 2; ++pass)
      w -= q.leftCols(m + 1) * (q.leftCols(m + 1).transpose() * w);
    beta(m) = w.norm();
    if (beta(m) <= 1e-13 * (std::abs(alpha(m)) + 1.0)) {
      ++m;
      break;
    }
    v = w / beta(m);
  }
  Matrix t = Matrix::Zero(m, m);
  for (Index i = 0; i < m; ++i) {
    t(i, i) = alpha(i);
    if (i + 1 < m)
      t(i, i + 1) = t(i + 1, i) = beta(i);
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(t);
  out.value = es.eigenvalues()(0);
  out.vector = q.leftCols(m) * es.eigenvectors().col(0);
  out.vector.normalize();
  return out;
}

} // namespace crrn
