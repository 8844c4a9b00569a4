#pragma once

#include <crrn/manifold.hpp>
#include <crrn/objective.hpp>

#include <cmath>
#include <memory>

namespace crrn::testing {

/// f(x) = sum x_ij^4 / 4, a non-quadratic ambient-smooth objective.
inline ObjectiveHandle make_quartic() {
  ObjectiveHandle h;
  h.eval_f = [](const Matrix &x) { return 0.25 * x.array().pow(4).sum(); };
  h.eval_grad_ambient = [](const Matrix &x) -> Matrix {
    return x.array().pow(3).matrix();
  };
  h.eval_hess_vec_ambient = [](const Matrix &x, const Matrix &d) -> Matrix {
    return (3.0 * x.array().square() * d.array()).matrix();
  };
  h.metadata.name = "quartic";
  return h;
}

/// Central difference gradient of an ambient function.
template <class F> Matrix fd_gradient(F &&f, const Matrix &x, double h) {
  Matrix g(x.rows(), x.cols());
  for (Index i = 0; i < x.size(); ++i) {
    Matrix p = x, m = x;
    p(i) += h;
    m(i) -= h;
    g(i) = (f(p) - f(m)) / (2.0 * h);
  }
  return g;
}

inline double rel_error(const Matrix &a, const Matrix &b) {
  return (a - b).norm() / std::max(1.0, b.norm());
}

inline double rel_error(double a, double b) {
  return std::abs(a - b) / std::max(1.0, std::abs(b));
}

/// Random symmetric matrix with eigenvalues `eig` (Haar-ish eigenbasis).
inline Matrix with_spectrum(const Vector &eig, std::uint64_t seed) {
  Rng rng(seed);
  const Index n = eig.size();
  Eigen::HouseholderQR<Matrix> qr(rng.gaussian(n, n));
  const Matrix q = qr.householderQ();
  return q * eig.asDiagonal() * q.transpose();
}

} // namespace crrn::testing
