#include "helpers.hpp"

#include <crrn/manifold.hpp>

#include <gtest/gtest.h>

#include <cmath>

using namespace crrn;

namespace {

Matrix unit(Index n, Index i) {
  Matrix e = Matrix::Zero(n, 1);
  e(i) = 1.0;
  return e;
}

Matrix first_columns(Index n, Index r) {
  return Matrix::Identity(n, n).leftCols(r);
}

std::vector<ManifoldDescriptor> families() {
  return {ManifoldDescriptor::sphere(5), ManifoldDescriptor::stiefel(6, 3),
          ManifoldDescriptor::parse("product:4xsphere:3"),
          ManifoldDescriptor::parse("product:3xstiefel:4,2")};
}

} // namespace

TEST(Descriptor, ParseAndDimensions) {
  const auto s = ManifoldDescriptor::parse("stiefel:4,2");
  EXPECT_EQ(s.intrinsic_dim(), 5);
  EXPECT_EQ(s.ambient_rows(), 4);
  EXPECT_EQ(s.ambient_cols(), 2);
  EXPECT_EQ(ManifoldDescriptor::parse("sphere:7").intrinsic_dim(), 6);

  const auto p = ManifoldDescriptor::parse("product:300xstiefel:6,3");
  EXPECT_EQ(p.ambient_rows(), 900);
  EXPECT_EQ(p.ambient_cols(), 6);
  EXPECT_EQ(p.intrinsic_dim(), 300 * (18 - 6));
  EXPECT_EQ(p.to_string(), "product:300xstiefel:6,3");

  const auto ps = ManifoldDescriptor::parse("product:3xsphere:4");
  EXPECT_EQ(ps.intrinsic_dim(), 9);
  EXPECT_TRUE(ps.sphere_family());
}

TEST(Descriptor, RejectsMalformed) {
  EXPECT_THROW(ManifoldDescriptor::parse("stiefel:2,3"), Error);
  EXPECT_THROW(ManifoldDescriptor::parse("torus:3"), ParseError);
  EXPECT_THROW(ManifoldDescriptor::parse("sphere:"), ParseError);
  EXPECT_THROW(ManifoldDescriptor::parse("product:0xsphere:3"), Error);
}

TEST(Point, FeasibilityInvariant) {
  const auto m = ManifoldDescriptor::stiefel(4, 2);
  EXPECT_NO_THROW(Point(m, first_columns(4, 2)));
  EXPECT_THROW(Point(m, 2.0 * first_columns(4, 2)), DomainError);
  EXPECT_THROW(Point(m, Matrix::Zero(3, 2)), DimensionError);
}

TEST(ProjectTangent, FixesTangentVectors) {
  const auto m = ManifoldDescriptor::stiefel(5, 2);
  const Point x = random_point(m, 3);
  const Tangent z = random_tangent(x, 4, 1.7);
  EXPECT_LE((project_tangent(x, z.value()).value() - z.value()).norm(), 1e-12);
}

TEST(ProjectTangent, SphereNormalIsZero) {
  const auto m = ManifoldDescriptor::sphere(3);
  const Point x(m, unit(3, 0));
  EXPECT_EQ(project_tangent(x, unit(3, 0)).value().norm(), 0.0);
}

TEST(ProjectTangent, MatchesBasisLeastSquares) {
  const auto m = ManifoldDescriptor::stiefel(4, 2);
  const Point x(m, first_columns(4, 2));
  const Matrix g = Matrix::Ones(4, 2);
  const Matrix formula =
      g - 0.5 * (x.value() * x.value().transpose() * g +
                 x.value() * g.transpose() * x.value());
  const TangentBasis basis = tangent_basis(x);
  // least-squares projection onto span of an orthonormal basis
  const Matrix oracle = basis.from_coords(basis.coords_of(g));
  EXPECT_LE((project_tangent(x, g).value() - formula).norm(), 1e-12);
  EXPECT_LE((formula - oracle).norm(), 1e-12);
}

TEST(ProjectTangent, IdempotentAndSelfAdjoint) {
  for (const auto &m : families()) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      Rng rng(seed);
      const Matrix x = geometry::random_point(m, rng);
      const Matrix u = rng.gaussian(m.ambient_rows(), m.ambient_cols());
      const Matrix v = rng.gaussian(m.ambient_rows(), m.ambient_cols());
      const Matrix pu = geometry::project(m, x, u);
      EXPECT_LE((geometry::project(m, x, pu) - pu).norm(), 1e-12);
      EXPECT_LE(std::abs(inner(pu, v) - inner(u, geometry::project(m, x, v))),
                1e-12);
      EXPECT_LE(geometry::tangency_residual(m, x, pu), 1e-10);
    }
  }
}

TEST(ProjectTangent, ShapeMismatchThrows) {
  const auto m = ManifoldDescriptor::stiefel(4, 2);
  const Point x(m, first_columns(4, 2));
  EXPECT_THROW(project_tangent(x, Matrix::Ones(4, 3)), DimensionError);
}

TEST(Retract, ZeroStepIsIdentity) {
  for (const auto &m : families()) {
    const Point x = random_point(m, 11);
    const Tangent zero(x, Matrix::Zero(m.ambient_rows(), m.ambient_cols()));
    for (auto scheme : {Retraction::Polar, Retraction::QR}) {
      EXPECT_EQ(retract(x, zero, scheme).value(), x.value());
    }
  }
}

TEST(Retract, SphereNormalize) {
  const auto m = ManifoldDescriptor::sphere(3);
  const Point x(m, unit(3, 0));
  const Point y = retract(x, Tangent(x, unit(3, 1)), Retraction::Normalize);
  const Matrix expected = (unit(3, 0) + unit(3, 1)) / std::sqrt(2.0);
  EXPECT_LE((y.value() - expected).norm(), 1e-15);
}

TEST(Retract, NormalizeRejectedOffSphere) {
  const auto m = ManifoldDescriptor::stiefel(4, 2);
  const Point x(m, first_columns(4, 2));
  const Tangent z(x, Matrix::Zero(4, 2));
  EXPECT_THROW(retract(x, z, Retraction::Normalize), DimensionError);
}

TEST(Retract, PolarOnSingleColumnIsNormalization) {
  const auto m = ManifoldDescriptor::stiefel(3, 1);
  const Point x(m, unit(3, 0));
  const Matrix z = 0.3 * unit(3, 1);
  const Matrix y = retract(x, Tangent(x, z)).value();
  const Matrix direct = (x.value() + z) / (x.value() + z).norm();
  EXPECT_LE((y - direct).norm(), 1e-15);
  EXPECT_LE((y - x.value() - z).norm(), 0.5 * z.squaredNorm());
}

TEST(Retract, OutputsFeasible) {
  for (const auto &m : families()) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const Point x = random_point(m, seed);
      const Tangent z = random_tangent(x, seed + 100, 3.0);
      for (auto scheme : {Retraction::Polar, Retraction::QR}) {
        EXPECT_LE(geometry::feasibility_residual(m, retract(x, z, scheme).value()),
                  1e-12);
      }
    }
  }
}

TEST(Retract, FirstOrderCondition) {
  const auto m = ManifoldDescriptor::stiefel(6, 3);
  const Point x = random_point(m, 5);
  const Tangent xi = random_tangent(x, 6, 1.0);
  double previous = 1.0;
  for (double t : {1e-3, 1e-4, 1e-5}) {
    const Matrix y = geometry::retract(m, x.value(), t * xi.value());
    const double err = ((y - x.value()) / t - xi.value()).norm();
    EXPECT_LE(err, 1.0 * t);
    EXPECT_LT(err, previous);
    previous = err;
  }
}

TEST(Retract, PolarIsSecondOrder) {
  for (const auto &m : families()) {
    const Point x = random_point(m, 8);
    const Tangent xi = random_tangent(x, 9, 1.0);
    const double t = 1e-3;
    const Matrix yp = geometry::retract(m, x.value(), t * xi.value());
    const Matrix ym = geometry::retract(m, x.value(), -t * xi.value());
    const Matrix acc = (yp - 2.0 * x.value() + ym) / (t * t);
    EXPECT_LE(geometry::project(m, x.value(), acc).norm(),
              1e-4 * xi.value().squaredNorm());
  }
}

TEST(Retract, PolarRegularityConstants) {
  const auto m = ManifoldDescriptor::stiefel(6, 3);
  Rng rng(21);
  for (int i = 0; i < 1000; ++i) {
    const Matrix x = geometry::random_point(m, rng);
    const double norm = std::exp(rng.uniform(std::log(1e-3), std::log(10.0)));
    const Matrix xi = geometry::random_tangent(m, x, rng, norm);
    const Matrix y = geometry::retract(m, x, xi);
    EXPECT_LE((y - x).norm(), norm * (1.0 + 1e-12));
    EXPECT_LE((y - x - xi).norm(), 0.5 * norm * norm * (1.0 + 1e-12) + 1e-15);
  }
}

TEST(ExtendedRetract, CompositionWithProjection) {
  const auto m = ManifoldDescriptor::stiefel(4, 2);
  const Point x = random_point(m, 2);
  Rng rng(3);
  const Matrix z = rng.gaussian(4, 2);
  const Point a = extended_retract(x, z);
  const Point b = retract(x, project_tangent(x, z));
  EXPECT_LE((a.value() - b.value()).norm(), 1e-14);

  const Tangent t = random_tangent(x, 4, 0.5);
  EXPECT_LE((extended_retract(x, t.value()).value() - retract(x, t).value()).norm(),
            1e-14);
}

TEST(ExtendedRetract, PureNormalReturnsBase) {
  const auto m = ManifoldDescriptor::sphere(3);
  const Point x(m, unit(3, 0));
  EXPECT_EQ(extended_retract(x, unit(3, 0)).value(), x.value());
}

TEST(ExtendedRetract, JacobianAtZeroIsProjection) {
  for (const auto &m : families()) {
    Rng rng(17);
    const Matrix x = geometry::random_point(m, rng);
    const Matrix eta = rng.gaussian(m.ambient_rows(), m.ambient_cols());
    const double h = 1e-6;
    const Matrix fd = (geometry::extended_retract(m, x, h * eta) -
                       geometry::extended_retract(m, x, -h * eta)) /
                      (2.0 * h);
    EXPECT_LE((fd - geometry::project(m, x, eta)).norm(), 1e-6);
  }
}

TEST(TangentBasis, SizesMatchDimension) {
  EXPECT_EQ(tangent_basis(random_point(ManifoldDescriptor::stiefel(4, 2), 0))
                .size(),
            5);
  EXPECT_EQ(tangent_basis(random_point(ManifoldDescriptor::sphere(6), 0)).size(),
            5);
  EXPECT_EQ(tangent_basis(random_point(
                              ManifoldDescriptor::parse("product:3xsphere:4"), 0))
                .size(),
            9);
}

TEST(TangentBasis, OrthonormalAndSpanning) {
  for (const auto &m : families()) {
    const Point x = random_point(m, 31);
    const TangentBasis basis = tangent_basis(x);
    const Matrix &e = basis.coordinates();
    const Matrix gram = e.transpose() * e;
    EXPECT_LE((gram - Matrix::Identity(gram.rows(), gram.cols()))
                  .cwiseAbs()
                  .maxCoeff(),
              1e-10);
    for (Index j = 0; j < basis.size(); ++j) {
      EXPECT_LE(geometry::tangency_residual(m, x.value(), basis.ambient(j)),
                1e-10);
    }
    Rng rng(32);
    const Matrix g = rng.gaussian(m.ambient_rows(), m.ambient_cols());
    EXPECT_LE((basis.from_coords(basis.coords_of(g)) -
               project_tangent(x, g).value())
                  .norm(),
              1e-8);
  }
}

TEST(Random, DeterministicAndExact) {
  const auto m = ManifoldDescriptor::stiefel(7, 3);
  const Point a = random_point(m, 42), b = random_point(m, 42);
  EXPECT_EQ(a.value(), b.value());
  const Matrix x = a.value();
  EXPECT_LE((x.transpose() * x - Matrix::Identity(3, 3)).norm(), 1e-12);

  const Tangent t1 = random_tangent(a, 5, 2.5), t2 = random_tangent(a, 5, 2.5);
  EXPECT_EQ(t1.value(), t2.value());
  EXPECT_NEAR(t1.norm(), 2.5, 1e-12);
  EXPECT_EQ(random_tangent(a, 5, 0.0).norm(), 0.0);
}

TEST(NearestPoint, RestoresFeasibility) {
  const auto m = ManifoldDescriptor::parse("product:5xstiefel:4,2");
  Rng rng(1);
  const Matrix x = geometry::random_point(m, rng);
  const Matrix drifted = x + 1e-6 * rng.gaussian(x.rows(), x.cols());
  EXPECT_GT(geometry::feasibility_residual(m, drifted), 1e-10);
  const Matrix fixed = geometry::nearest_point(m, drifted);
  EXPECT_LE(geometry::feasibility_residual(m, fixed), 1e-13);
  EXPECT_LE((fixed - x).norm(), 1e-5);
}
