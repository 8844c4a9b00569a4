#include <crrn/linalg.hpp>
#include <crrn/manifold.hpp>

#include <charconv>
#include <cmath>
#include <sstream>

namespace crrn {

// ---------------------------------------------------------------------------
// Descriptor

ManifoldDescriptor ManifoldDescriptor::sphere(Index n) {
  if (n < 1)
    throw DimensionError("sphere: n must be >= 1");
  ManifoldDescriptor d;
  d.kind_ = Kind::Sphere;
  d.n_ = n;
  d.r_ = 1;
  d.rows_ = n;
  d.cols_ = 1;
  d.dim_ = n - 1;
  return d;
}

ManifoldDescriptor ManifoldDescriptor::stiefel(Index n, Index r) {
  if (r < 1 || r > n)
    throw DimensionError("stiefel: requires 1 <= r <= n");
  ManifoldDescriptor d;
  d.kind_ = Kind::Stiefel;
  d.n_ = n;
  d.r_ = r;
  d.rows_ = n;
  d.cols_ = r;
  d.dim_ = n * r - r * (r + 1) / 2;
  return d;
}

ManifoldDescriptor ManifoldDescriptor::product(
    std::vector<ManifoldDescriptor> blocks) {
  if (blocks.empty())
    throw DimensionError("product: needs at least one block");
  ManifoldDescriptor d;
  d.kind_ = Kind::Product;
  d.cols_ = blocks.front().n_;
  for (const auto &b : blocks) {
    if (b.kind_ == Kind::Product)
      throw DimensionError("product: nested products are not supported");
    if (b.n_ != d.cols_)
      throw DimensionError("product: blocks must share the embedding "
                           "dimension (ambient column count)");
    d.offsets_.push_back(d.rows_);
    d.rows_ += b.r_;
    d.dim_ += b.dim_;
  }
  d.blocks_ = std::move(blocks);
  return d;
}

ManifoldDescriptor ManifoldDescriptor::product(Index count,
                                               const ManifoldDescriptor &block) {
  if (count < 1)
    throw DimensionError("product: count must be >= 1");
  return product(std::vector<ManifoldDescriptor>(static_cast<std::size_t>(count),
                                                 block));
}

namespace {

Index parse_index(std::string_view s, std::string_view context) {
  Index v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    throw ParseError("manifold descriptor: bad integer '" + std::string(s) +
                     "' in '" + std::string(context) + "'");
  return v;
}

} // namespace

ManifoldDescriptor ManifoldDescriptor::parse(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos)
    throw ParseError("manifold descriptor: missing ':' in '" +
                     std::string(text) + "'");
  const auto head = text.substr(0, colon);
  const auto body = text.substr(colon + 1);
  try {
    if (head == "sphere")
      return sphere(parse_index(body, text));
    if (head == "stiefel") {
      const auto comma = body.find(',');
      if (comma == std::string_view::npos)
        throw ParseError("manifold descriptor: stiefel needs '<n>,<r>'");
      return stiefel(parse_index(body.substr(0, comma), text),
                     parse_index(body.substr(comma + 1), text));
    }
    if (head == "product") {
      const auto x = body.find('x');
      if (x == std::string_view::npos)
        throw ParseError("manifold descriptor: product needs "
                         "'<count>x<block>'");
      return product(parse_index(body.substr(0, x), text),
                     parse(body.substr(x + 1)));
    }
  } catch (const DimensionError &e) {
    throw ParseError(std::string("manifold descriptor: ") + e.what());
  }
  throw ParseError("manifold descriptor: unknown kind '" + std::string(head) +
                   "'");
}

std::string ManifoldDescriptor::to_string() const {
  std::ostringstream os;
  switch (kind_) {
  case Kind::Sphere:
    os << "sphere:" << n_;
    break;
  case Kind::Stiefel:
    os << "stiefel:" << n_ << "," << r_;
    break;
  case Kind::Product: {
    bool homogeneous = true;
    for (const auto &b : blocks_)
      homogeneous = homogeneous && b == blocks_.front();
    if (homogeneous) {
      os << "product:" << blocks_.size() << "x" << blocks_.front().to_string();
    } else {
      os << "product[";
      for (std::size_t i = 0; i < blocks_.size(); ++i)
        os << (i ? ";" : "") << blocks_[i].to_string();
      os << "]";
    }
    break;
  }
  }
  return os.str();
}

bool ManifoldDescriptor::sphere_family() const {
  if (kind_ == Kind::Sphere)
    return true;
  if (kind_ == Kind::Stiefel)
    return false;
  for (const auto &b : blocks_)
    if (b.kind_ != Kind::Sphere)
      return false;
  return true;
}

double ManifoldDescriptor::squared_norm_on_manifold() const {
  if (kind_ != Kind::Product)
    return static_cast<double>(r_);
  return static_cast<double>(rows_);
}

bool ManifoldDescriptor::operator==(const ManifoldDescriptor &other) const {
  return kind_ == other.kind_ && n_ == other.n_ && r_ == other.r_ &&
         blocks_ == other.blocks_;
}

std::string to_string(Retraction scheme) {
  switch (scheme) {
  case Retraction::Polar:
    return "polar";
  case Retraction::QR:
    return "qr";
  case Retraction::Normalize:
    return "normalize";
  }
  return "?";
}

Retraction parse_retraction(std::string_view name) {
  if (name == "polar")
    return Retraction::Polar;
  if (name == "qr")
    return Retraction::QR;
  if (name == "normalize")
    return Retraction::Normalize;
  throw ParseError("unknown retraction '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// Block kernels

namespace geometry {

Matrix stiefel_project(const Matrix &x, const Matrix &g) {
  return g - 0.5 * (x * (x.transpose() * g) + x * (g.transpose() * x));
}

Matrix stiefel_polar(const Matrix &x, const Matrix &z) {
  if (z.isZero(0.0))
    return x;
  const Index r = x.cols();
  const Matrix s = Matrix::Identity(r, r) + z.transpose() * z;
  return (x + z) * spd_inverse_sqrt(s);
}

Matrix stiefel_qr(const Matrix &x, const Matrix &z) {
  if (z.isZero(0.0))
    return x;
  const Matrix a = x + z;
  Eigen::HouseholderQR<Matrix> qr(a);
  Matrix q = qr.householderQ() * Matrix::Identity(a.rows(), a.cols());
  const Matrix &packed = qr.matrixQR();
  for (Index j = 0; j < a.cols(); ++j)
    if (packed(j, j) < 0.0)
      q.col(j) = -q.col(j);
  return q;
}

Matrix sphere_normalize(const Matrix &x, const Matrix &z) {
  if (z.isZero(0.0))
    return x;
  const Matrix y = x + z;
  return y / y.norm();
}

void project_rows(const RowSlice &xr, const RowSlice &zr, MutRowSlice out) {
  // blocks are tiny; lazy products skip the packed GEMM path
  const Matrix p = xr.lazyProduct(zr.transpose());
  const Matrix sym = 0.5 * (p + p.transpose());
  out = zr;
  out -= sym.lazyProduct(xr);
}

Matrix block_of(const Matrix &a, Index offset, Index rows, bool transposed) {
  if (!transposed)
    return a;
  return a.middleRows(offset, rows).transpose();
}

void store_block(Matrix &out, const Matrix &b, Index offset, bool transposed) {
  if (!transposed) {
    out = b;
    return;
  }
  out.middleRows(offset, b.cols()) = b.transpose();
}

namespace {

/// Applies a binary block kernel (x_block, z_block) -> block across m.
template <class Kernel>
Matrix map_blocks(const ManifoldDescriptor &m, const Matrix &x, const Matrix &z,
                  Kernel &&kernel) {
  Matrix out(x.rows(), x.cols());
  for_each_block(m, [&](const ManifoldDescriptor &b, Index off, bool t) {
    const Matrix xb = block_of(x, off, b.r(), t);
    const Matrix zb = block_of(z, off, b.r(), t);
    store_block(out, kernel(b, xb, zb), off, t);
  });
  return out;
}

/// Orthonormal basis of the tangent space of one block, as n x r matrices.
std::vector<Matrix> block_basis(const Matrix &x) {
  const Index n = x.rows();
  const Index r = x.cols();
  Eigen::HouseholderQR<Matrix> qr(x);
  const Matrix q = qr.householderQ();
  const Matrix perp = q.rightCols(n - r);
  std::vector<Matrix> out;
  out.reserve(static_cast<std::size_t>(n * r - r * (r + 1) / 2));
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  // skew part X * Omega
  for (Index i = 0; i < r; ++i)
    for (Index j = i + 1; j < r; ++j) {
      Matrix omega = Matrix::Zero(r, r);
      omega(i, j) = inv_sqrt2;
      omega(j, i) = -inv_sqrt2;
      out.push_back(x * omega);
    }
  // normal-complement part X_perp * K
  for (Index b = 0; b < r; ++b)
    for (Index a = 0; a < n - r; ++a) {
      Matrix e = Matrix::Zero(n, r);
      e.col(b) = perp.col(a);
      out.push_back(std::move(e));
    }
  return out;
}

Matrix block_random_point(Index n, Index r, Rng &rng) {
  const Matrix g = rng.gaussian(n, r);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(n, r);
  const Matrix &packed = qr.matrixQR();
  for (Index j = 0; j < r; ++j)
    if (packed(j, j) < 0.0)
      q.col(j) = -q.col(j);
  return q;
}

} // namespace

void check_shape(const ManifoldDescriptor &m, const Matrix &a,
                 const char *what) {
  if (a.rows() != m.ambient_rows() || a.cols() != m.ambient_cols()) {
    std::ostringstream os;
    os << what << ": expected " << m.ambient_rows() << "x" << m.ambient_cols()
       << " for " << m.to_string() << ", got " << a.rows() << "x" << a.cols();
    throw DimensionError(os.str());
  }
}

Matrix project(const ManifoldDescriptor &m, const Matrix &x, const Matrix &g) {
  check_shape(m, x, "project");
  check_shape(m, g, "project");
  if (m.kind() != ManifoldDescriptor::Kind::Product)
    return stiefel_project(x, g);
  Matrix out(x.rows(), x.cols());
  for (std::size_t i = 0; i < m.blocks().size(); ++i) {
    const Index off = m.block_offset(i);
    const Index rows = m.blocks()[i].r();
    project_rows(x.middleRows(off, rows), g.middleRows(off, rows),
                 out.middleRows(off, rows));
  }
  return out;
}

Matrix retract(const ManifoldDescriptor &m, const Matrix &x, const Matrix &z,
               Retraction scheme) {
  check_shape(m, x, "retract");
  check_shape(m, z, "retract");
  if (scheme == Retraction::Normalize && !m.sphere_family())
    throw DimensionError("retract: normalize requires a sphere or product of "
                         "spheres");
  return map_blocks(m, x, z,
                    [scheme](const ManifoldDescriptor &, const Matrix &xb,
                             const Matrix &zb) -> Matrix {
                      switch (scheme) {
                      case Retraction::Polar:
                        return stiefel_polar(xb, zb);
                      case Retraction::QR:
                        return stiefel_qr(xb, zb);
                      case Retraction::Normalize:
                        return sphere_normalize(xb, zb);
                      }
                      return xb;
                    });
}

Matrix extended_retract(const ManifoldDescriptor &m, const Matrix &x,
                        const Matrix &z, Retraction scheme) {
  return retract(m, x, project(m, x, z), scheme);
}

double feasibility_residual(const ManifoldDescriptor &m, const Matrix &x) {
  check_shape(m, x, "feasibility_residual");
  double worst = 0.0;
  for_each_block(m, [&](const ManifoldDescriptor &b, Index off, bool t) {
    const Matrix xb = block_of(x, off, b.r(), t);
    const Matrix gram = xb.transpose() * xb;
    worst = std::max(
        worst, (gram - Matrix::Identity(gram.rows(), gram.cols())).norm());
  });
  return worst;
}

double tangency_residual(const ManifoldDescriptor &m, const Matrix &x,
                         const Matrix &z) {
  check_shape(m, x, "tangency_residual");
  check_shape(m, z, "tangency_residual");
  double worst = 0.0;
  for_each_block(m, [&](const ManifoldDescriptor &b, Index off, bool t) {
    const Matrix xb = block_of(x, off, b.r(), t);
    const Matrix zb = block_of(z, off, b.r(), t);
    const Matrix s = xb.transpose() * zb;
    worst = std::max(worst, (s + s.transpose()).norm());
  });
  return worst;
}

Matrix nearest_point(const ManifoldDescriptor &m, const Matrix &a) {
  check_shape(m, a, "nearest_point");
  Matrix out(a.rows(), a.cols());
  for_each_block(m, [&](const ManifoldDescriptor &b, Index off, bool t) {
    const Matrix ab = block_of(a, off, b.r(), t);
    store_block(out, ab * spd_inverse_sqrt(ab.transpose() * ab), off, t);
  });
  return out;
}

Matrix basis_matrix(const ManifoldDescriptor &m, const Matrix &x) {
  check_shape(m, x, "basis_matrix");
  Matrix out = Matrix::Zero(m.ambient_size(), m.intrinsic_dim());
  Index col = 0;
  for_each_block(m, [&](const ManifoldDescriptor &b, Index off, bool t) {
    const Matrix xb = block_of(x, off, b.r(), t);
    for (const Matrix &e : block_basis(xb)) {
      Matrix full = Matrix::Zero(x.rows(), x.cols());
      store_block(full, e, off, t);
      out.col(col++) = as_vector(full);
    }
  });
  return out;
}

Matrix random_point(const ManifoldDescriptor &m, Rng &rng) {
  Matrix out(m.ambient_rows(), m.ambient_cols());
  for_each_block(m, [&](const ManifoldDescriptor &b, Index off, bool t) {
    store_block(out, block_random_point(b.n(), b.r(), rng), off, t);
  });
  return out;
}

Matrix random_tangent(const ManifoldDescriptor &m, const Matrix &x, Rng &rng,
                      double target_norm) {
  if (target_norm < 0.0)
    throw DimensionError("random_tangent: target_norm must be >= 0");
  if (target_norm == 0.0 || m.intrinsic_dim() == 0)
    return Matrix::Zero(x.rows(), x.cols());
  Matrix z = project(m, x, rng.gaussian(x.rows(), x.cols()));
  for (std::uint64_t attempt = 1; z.norm() == 0.0; ++attempt) {
    Rng redraw = rng.substream(attempt);
    z = project(m, x, redraw.gaussian(x.rows(), x.cols()));
  }
  return z * (target_norm / z.norm());
}

} // namespace geometry

// ---------------------------------------------------------------------------
// Typed values

Point::Point(DescriptorPtr descriptor, Matrix value)
    : descriptor_(std::move(descriptor)), value_(std::move(value)) {
  geometry::check_shape(*descriptor_, value_, "Point");
  const double res = geometry::feasibility_residual(*descriptor_, value_);
  if (!(res <= kFeasibilityTol))
    throw DomainError("Point: feasibility residual " + std::to_string(res) +
                      " exceeds tolerance");
}

Point::Point(const ManifoldDescriptor &descriptor, Matrix value)
    : Point(std::make_shared<const ManifoldDescriptor>(descriptor),
            std::move(value)) {}

Tangent::Tangent(Point base, Matrix value)
    : base_(std::move(base)), value_(std::move(value)) {
  geometry::check_shape(base_.descriptor(), value_, "Tangent");
  const double res = geometry::tangency_residual(base_.descriptor(),
                                                 base_.value(), value_);
  if (!(res <= kFeasibilityTol * (1.0 + value_.norm())))
    throw DomainError("Tangent: tangency residual " + std::to_string(res) +
                      " exceeds tolerance");
}

TangentBasis::TangentBasis(Point base, Matrix coordinates)
    : base_(std::move(base)), coordinates_(std::move(coordinates)) {
  if (coordinates_.rows() != base_.descriptor().ambient_size())
    throw DimensionError("TangentBasis: coordinate rows must equal ambient "
                         "size");
}

Matrix TangentBasis::ambient(Index j) const {
  const auto &d = base_.descriptor();
  return as_matrix(coordinates_.col(j), d.ambient_rows(), d.ambient_cols());
}

Tangent TangentBasis::vector(Index j) const { return {base_, ambient(j)}; }

Vector TangentBasis::coords_of(const Matrix &m) const {
  geometry::check_shape(base_.descriptor(), m, "TangentBasis::coords_of");
  return coordinates_.transpose() * as_vector(m);
}

Matrix TangentBasis::from_coords(const Vector &c) const {
  if (c.size() != size())
    throw DimensionError("TangentBasis::from_coords: length mismatch");
  const auto &d = base_.descriptor();
  return as_matrix(coordinates_ * c, d.ambient_rows(), d.ambient_cols());
}

Tangent project_tangent(const Point &x, const Matrix &g) {
  return {x, geometry::project(x.descriptor(), x.value(), g)};
}

Point retract(const Point &x, const Tangent &xi, Retraction scheme) {
  if (xi.base().descriptor() != x.descriptor() ||
      xi.base().value() != x.value())
    throw DimensionError("retract: tangent is based at a different point");
  return {x.descriptor_ptr(),
          geometry::retract(x.descriptor(), x.value(), xi.value(), scheme)};
}

Point extended_retract(const Point &x, const Matrix &z, Retraction scheme) {
  return retract(x, project_tangent(x, z), scheme);
}

TangentBasis tangent_basis(const Point &x) {
  return {x, geometry::basis_matrix(x.descriptor(), x.value())};
}

Point random_point(const ManifoldDescriptor &descriptor, std::uint64_t seed) {
  Rng rng(seed);
  return {descriptor, geometry::random_point(descriptor, rng)};
}

Tangent random_tangent(const Point &x, std::uint64_t seed, double target_norm) {
  Rng rng(seed);
  return {x, geometry::random_tangent(x.descriptor(), x.value(), rng,
                                      target_norm)};
}

} // namespace crrn
