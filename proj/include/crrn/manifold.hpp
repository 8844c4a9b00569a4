#pragma once

#include <crrn/rng.hpp>
#include <crrn/types.hpp>

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace crrn {

/// Feasibility and tangency tolerance shared by Point/Tangent invariants.
inline constexpr double kFeasibilityTol = 1e-10;

enum class Retraction { Polar, QR, Normalize };

Retraction parse_retraction(std::string_view name);
std::string to_string(Retraction scheme);

/// Which embedded manifold is being optimized over, and its ambient shape.
///
/// Sphere(n) is an n x 1 column and Stiefel(n, r) an n x r matrix with
/// orthonormal columns. A product stacks its blocks as row ranges of one
/// ambient matrix, each block stored transposed: a stiefel(k, d) block
/// u_i (k x d) occupies d rows holding u_i^T, so the ambient matrix is
/// U = [u_1, ..., u_n]^T. All blocks of a product share the column count k.
class ManifoldDescriptor {
 public:
  enum class Kind { Sphere, Stiefel, Product };

  static ManifoldDescriptor sphere(Index n);
  static ManifoldDescriptor stiefel(Index n, Index r);
  static ManifoldDescriptor product(std::vector<ManifoldDescriptor> blocks);
  static ManifoldDescriptor product(Index count, const ManifoldDescriptor &block);

  /// `sphere:<n>`, `stiefel:<n>,<r>`, `product:<count>x<block>`.
  static ManifoldDescriptor parse(std::string_view text);
  std::string to_string() const;

  Kind kind() const { return kind_; }
  /// Sphere/Stiefel: n (embedding dimension of each column).
  Index n() const { return n_; }
  /// Sphere: 1. Stiefel: r. Product: 0.
  Index r() const { return r_; }
  const std::vector<ManifoldDescriptor> &blocks() const { return blocks_; }
  Index block_offset(std::size_t i) const { return offsets_.at(i); }

  Index ambient_rows() const { return rows_; }
  Index ambient_cols() const { return cols_; }
  Index ambient_size() const { return rows_ * cols_; }
  Index intrinsic_dim() const { return dim_; }

  /// True for a sphere or a product of spheres.
  bool sphere_family() const;
  /// ||x||_F^2, constant over the feasible set.
  double squared_norm_on_manifold() const;

  bool operator==(const ManifoldDescriptor &other) const;
  bool operator!=(const ManifoldDescriptor &other) const {
    return !(*this == other);
  }

 private:
  ManifoldDescriptor() = default;

  Kind kind_ = Kind::Sphere;
  Index n_ = 0;
  Index r_ = 0;
  std::vector<ManifoldDescriptor> blocks_;
  std::vector<Index> offsets_;
  Index rows_ = 0;
  Index cols_ = 0;
  Index dim_ = 0;
};

using DescriptorPtr = std::shared_ptr<const ManifoldDescriptor>;

/// A feasible point (ambient coordinates).
class Point {
 public:
  /// Throws DimensionError on shape mismatch and DomainError when the
  /// feasibility residual exceeds kFeasibilityTol.
  Point(DescriptorPtr descriptor, Matrix value);
  Point(const ManifoldDescriptor &descriptor, Matrix value);

  const Matrix &value() const { return value_; }
  const ManifoldDescriptor &descriptor() const { return *descriptor_; }
  const DescriptorPtr &descriptor_ptr() const { return descriptor_; }

 private:
  DescriptorPtr descriptor_;
  Matrix value_;
};

/// A tangent vector at `base`, in ambient coordinates.
class Tangent {
 public:
  /// Throws DimensionError on shape mismatch and DomainError when the
  /// tangency residual exceeds kFeasibilityTol * (1 + ||value||).
  Tangent(Point base, Matrix value);

  const Matrix &value() const { return value_; }
  const Point &base() const { return base_; }
  double norm() const { return value_.norm(); }

 private:
  Point base_;
  Matrix value_;
};

/// Frobenius-orthonormal basis of T_xM. Column j of `coordinates` is
/// vec(e_j) in column-major ambient order.
class TangentBasis {
 public:
  TangentBasis(Point base, Matrix coordinates);

  const Point &base() const { return base_; }
  Index size() const { return coordinates_.cols(); }
  const Matrix &coordinates() const { return coordinates_; }
  Tangent vector(Index j) const;
  Matrix ambient(Index j) const;

  /// Basis coordinates of an ambient matrix: E^T vec(m).
  Vector coords_of(const Matrix &m) const;
  /// Ambient matrix of a coordinate vector: reshape(E c).
  Matrix from_coords(const Vector &c) const;

 private:
  Point base_;
  Matrix coordinates_;
};

// Operations on typed values.
Tangent project_tangent(const Point &x, const Matrix &g);
Point retract(const Point &x, const Tangent &xi,
              Retraction scheme = Retraction::Polar);
Point extended_retract(const Point &x, const Matrix &z,
                       Retraction scheme = Retraction::Polar);
TangentBasis tangent_basis(const Point &x);
Point random_point(const ManifoldDescriptor &descriptor, std::uint64_t seed);
Tangent random_tangent(const Point &x, std::uint64_t seed, double target_norm);

/// Matrix-level kernels. Callers guarantee x is feasible; shapes are checked.
namespace geometry {

Matrix project(const ManifoldDescriptor &m, const Matrix &x, const Matrix &g);
Matrix retract(const ManifoldDescriptor &m, const Matrix &x, const Matrix &z,
               Retraction scheme = Retraction::Polar);
Matrix extended_retract(const ManifoldDescriptor &m, const Matrix &x,
                        const Matrix &z, Retraction scheme = Retraction::Polar);
double feasibility_residual(const ManifoldDescriptor &m, const Matrix &x);
double tangency_residual(const ManifoldDescriptor &m, const Matrix &x,
                         const Matrix &z);
/// Closest feasible point (polar factor per block).
Matrix nearest_point(const ManifoldDescriptor &m, const Matrix &a);
/// ambient_size x intrinsic_dim matrix of an orthonormal tangent basis.
Matrix basis_matrix(const ManifoldDescriptor &m, const Matrix &x);
Matrix random_point(const ManifoldDescriptor &m, Rng &rng);
/// Projected Gaussian rescaled to target_norm.
Matrix random_tangent(const ManifoldDescriptor &m, const Matrix &x, Rng &rng,
                      double target_norm);

void check_shape(const ManifoldDescriptor &m, const Matrix &a,
                 const char *what);

/// Visits every column-orthonormal block: fn(block, row_offset, transposed).
/// Product blocks are stored transposed; block_of/store_block convert.
template <class Fn> void for_each_block(const ManifoldDescriptor &m, Fn &&fn) {
  if (m.kind() != ManifoldDescriptor::Kind::Product) {
    fn(m, Index{0}, false);
    return;
  }
  for (std::size_t i = 0; i < m.blocks().size(); ++i)
    fn(m.blocks()[i], m.block_offset(i), true);
}
Matrix block_of(const Matrix &a, Index offset, Index rows, bool transposed);
void store_block(Matrix &out, const Matrix &b, Index offset, bool transposed);

// Single column-orthonormal block kernels (X is n x r, X^T X = I).
Matrix stiefel_project(const Matrix &x, const Matrix &g);
Matrix stiefel_polar(const Matrix &x, const Matrix &z);
Matrix stiefel_qr(const Matrix &x, const Matrix &z);
Matrix sphere_normalize(const Matrix &x, const Matrix &z);

/// Row-slice view of a product block (r x n, i.e. X^T) inside the ambient
/// matrix, used by the transposed-layout kernels below.
using RowSlice = Eigen::Ref<const Matrix, 0, Eigen::OuterStride<>>;
using MutRowSlice = Eigen::Ref<Matrix, 0, Eigen::OuterStride<>>;
/// stiefel_project in transposed layout: out = Z^T - sym(X^T Z) X^T.
void project_rows(const RowSlice &xr, const RowSlice &zr, MutRowSlice out);

} // namespace geometry

} // namespace crrn
