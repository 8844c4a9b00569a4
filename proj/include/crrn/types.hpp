#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace crrn {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not match the manifold or each other.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Malformed text input (descriptors, MatrixMarket headers, config values).
class ParseError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// An iterative method produced a non-finite value.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

/// Assembled algorithm constants violate the regularization rule.
class ConstantsError : public Error {
 public:
  using Error::Error;
};

/// A point or tangent fails its feasibility invariant.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Frobenius inner product.
inline double inner(const Matrix &a, const Matrix &b) {
  return (a.array() * b.array()).sum();
}

inline Eigen::Map<const Vector> as_vector(const Matrix &m) {
  return {m.data(), m.size()};
}

inline Matrix as_matrix(const Vector &v, Index rows, Index cols) {
  return Eigen::Map<const Matrix>(v.data(), rows, cols);
}

} // namespace crrn
