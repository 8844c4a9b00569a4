#include <crrn/linalg.hpp>
#include <crrn/rng.hpp>
#include <crrn/verify.hpp>

#include <Eigen/Eigenvalues>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace crrn {

using geometry::block_of;
using geometry::for_each_block;
using geometry::store_block;

Matrix solve_sylvester(const Matrix &a, const Matrix &r,
                       SylvesterMethod method) {
  const Index n = a.rows();
  if (a.cols() != n || r.rows() != n || r.cols() != n)
    throw DimensionError("solve_sylvester: operands must be square and equal");
  if (method == SylvesterMethod::Auto)
    method = n <= 20 ? SylvesterMethod::Kronecker : SylvesterMethod::Eigen;
  if (method == SylvesterMethod::Kronecker) {
    // vec(A X + X A) = (I (x) A + A^T (x) I) vec(X)
    const Matrix id = Matrix::Identity(n, n);
    Matrix k(n * n, n * n);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j)
        k.block(i * n, j * n, n, n) = id(i, j) * a + a(j, i) * id;
    const Vector x = k.partialPivLu().solve(as_vector(r));
    return as_matrix(x, n, n);
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(a);
  const Matrix &u = es.eigenvectors();
  const Vector &lam = es.eigenvalues();
  Matrix t = u.transpose() * r * u;
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      t(i, j) /= lam(i) + lam(j);
  return u * t * u.transpose();
}

BlockCurve polar_curve_block(const Matrix &x, const Matrix &z, const Matrix &v,
                             SylvesterMethod method) {
  const Index r = x.cols();
  BlockCurve b;
  b.S = Matrix::Identity(r, r) + z.transpose() * z;
  Eigen::SelfAdjointEigenSolver<Matrix> es(b.S);
  const Matrix &u = es.eigenvectors();
  const Vector &lam = es.eigenvalues();
  const Matrix s_inv = u * lam.cwiseInverse().asDiagonal() * u.transpose();
  const Matrix s_inv_half =
      u * lam.cwiseSqrt().cwiseInverse().asDiagonal() * u.transpose();
  const Matrix m = v.transpose() * z + z.transpose() * v;

  const Matrix rhs_c = -s_inv * m * s_inv;
  b.C = solve_sylvester(s_inv_half, rhs_c, method);
  const Matrix rhs_d = -s_inv * (v.transpose() * v) * s_inv +
                       s_inv * m * s_inv * m * s_inv - b.C * b.C;
  b.D = solve_sylvester(s_inv_half, rhs_d, method);

  auto residual = [&](const Matrix &sol, const Matrix &rhs) {
    const double err = (s_inv_half * sol + sol * s_inv_half - rhs).norm();
    return err / std::max(rhs.norm(), std::numeric_limits<double>::min());
  };
  b.residual_C = rhs_c.norm() > 0.0 ? residual(b.C, rhs_c) : b.C.norm();
  b.residual_D = rhs_d.norm() > 0.0 ? residual(b.D, rhs_d) : b.D.norm();

  const Matrix xz = x + z;
  b.Y0 = xz * s_inv_half;
  b.Y1 = xz * b.C + v * s_inv_half;
  b.Y2 = 2.0 * v * b.C + 2.0 * xz * b.D;
  return b;
}

CurveDerivatives polar_curve_derivatives(const ManifoldDescriptor &m,
                                         const Matrix &x, const Matrix &z,
                                         const Matrix &v,
                                         SylvesterMethod method) {
  geometry::check_shape(m, x, "polar_curve_derivatives");
  geometry::check_shape(m, z, "polar_curve_derivatives");
  geometry::check_shape(m, v, "polar_curve_derivatives");
  CurveDerivatives out;
  out.Y0.resize(x.rows(), x.cols());
  out.Y1.resize(x.rows(), x.cols());
  out.Y2.resize(x.rows(), x.cols());
  double sc2 = 0.0;
  for_each_block(m, [&](const ManifoldDescriptor &b, Index off, bool t) {
    BlockCurve bc = polar_curve_block(block_of(x, off, b.r(), t),
                                      block_of(z, off, b.r(), t),
                                      block_of(v, off, b.r(), t), method);
    store_block(out.Y0, bc.Y0, off, t);
    store_block(out.Y1, bc.Y1, off, t);
    store_block(out.Y2, bc.Y2, off, t);
    sc2 += (spd_sqrt(bc.S) * bc.C).squaredNorm();
    out.max_residual =
        std::max({out.max_residual, bc.residual_C, bc.residual_D});
    out.blocks.push_back(std::move(bc));
  });
  out.sqrt_s_c_norm = std::sqrt(sc2);
  return out;
}

CurveDerivatives polar_curve_derivatives(const Point &x, const Tangent &z,
                                         const Tangent &v) {
  if (z.base().value() != x.value() || v.base().value() != x.value())
    throw DimensionError("polar_curve_derivatives: tangents based elsewhere");
  return polar_curve_derivatives(x.descriptor(), x.value(), z.value(),
                                 v.value());
}

std::string SampleReport::to_json() const {
  nlohmann::ordered_json j;
  j["op"] = op;
  j["samples"] = samples;
  j["skipped"] = skipped;
  j["violations"] = violations;
  j["max_ratio"] = max_ratio;
  j["bound"] = bound;
  j["seed"] = seed;
  j["worst_case_norms"] = worst_case_norms;
  return j.dump();
}

namespace {

/// Second derivative at Z = 0: -X V^T V per block.
Matrix zero_curve_y2(const ManifoldDescriptor &m, const Matrix &x,
                     const Matrix &v) {
  Matrix out(x.rows(), x.cols());
  for_each_block(m, [&](const ManifoldDescriptor &b, Index off, bool t) {
    const Matrix xb = block_of(x, off, b.r(), t);
    const Matrix vb = block_of(v, off, b.r(), t);
    store_block(out, -xb * (vb.transpose() * vb), off, t);
  });
  return out;
}

/// Per-sample outcome merged in index order.
struct Outcome {
  bool skipped = false;
  bool violated = false;
  double ratio = 0.0;
  std::vector<double> norms;
};

SampleReport merge(std::string op, const std::vector<Outcome> &outcomes,
                   double bound, std::uint64_t seed) {
  SampleReport r;
  r.op = std::move(op);
  r.bound = bound;
  r.seed = seed;
  r.samples = static_cast<Index>(outcomes.size());
  bool first = true;
  for (const auto &o : outcomes) {
    if (o.skipped) {
      ++r.skipped;
      continue;
    }
    if (o.violated)
      ++r.violations;
    if (first || o.ratio > r.max_ratio) {
      r.max_ratio = o.ratio;
      r.worst_case_norms = o.norms;
      first = false;
    }
  }
  return r;
}

template <class Fn>
std::vector<Outcome> sample(const VerifyOptions &opts, Fn &&fn) {
  const Rng root(opts.seed);
  return parallel_map<Outcome>(
      opts.samples,
      [&](Index i) {
        Rng rng = root.substream(static_cast<std::uint64_t>(i));
        return fn(rng);
      },
      opts.exec);
}

double log_uniform(Rng &rng, double lo, double hi) {
  return std::exp(rng.uniform(std::log(lo), std::log(hi)));
}

Matrix unit_ambient(const ManifoldDescriptor &m, Rng &rng) {
  Matrix v = rng.gaussian(m.ambient_rows(), m.ambient_cols());
  return v / v.norm();
}

/// Five-point second derivative of a scalar curve at 0.
template <class Fn> double second_derivative(Fn &&g, double h, double g0) {
  return (-g(2.0 * h) + 16.0 * g(h) - 30.0 * g0 + 16.0 * g(-h) - g(-2.0 * h)) /
         (12.0 * h * h);
}

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kCg = 1.0 / 8.62;

} // namespace

double pullback_lipschitz_constant(const ObjectiveHandle &obj,
                                   const ManifoldDescriptor &m,
                                   std::uint64_t seed) {
  ConstantsOptions o;
  o.mode = obj.metadata.is_quadratic ? ConstantsMode::Analytic
                                     : ConstantsMode::Sampled;
  o.k_B_override = 0.0;
  o.seed = seed;
  const ProblemBounds b = estimate_bounds(obj, m, o);
  return 13.66 * b.G.value + 12.55 * b.ell_f.value + 4.0 * b.ell_H.value;
}

SampleReport verify_curve(const ManifoldDescriptor &m,
                          const VerifyOptions &opts) {
  const auto outcomes = sample(opts, [&](Rng &rng) {
    Outcome o;
    const Matrix x = geometry::random_point(m, rng);
    const double zn = log_uniform(rng, 1e-3, 5.0);
    const Matrix z = geometry::random_tangent(m, x, rng, zn);
    const Matrix v = geometry::random_tangent(m, x, rng, 1.0);
    const CurveDerivatives cz = polar_curve_derivatives(m, x, z, v);
    const CurveDerivatives c0 =
        polar_curve_derivatives(m, x, Matrix::Zero(x.rows(), x.cols()), v);

    const double d1 = (cz.Y1 - c0.Y1).norm();
    const double d2 = (cz.Y2 - c0.Y2).norm();
    const double slack = 1e-9;
    bool ok = cz.max_residual <= 1e-10 && c0.max_residual <= 1e-10;
    ok = ok && cz.sqrt_s_c_norm <= std::min(zn, 1.0) * (1.0 + slack) + 1e-14;
    ok = ok && d1 <= 2.31 * zn * (1.0 + slack);
    ok = ok && d2 <= 13.66 * zn * (1.0 + slack);
    ok = ok && cz.Y1.norm() <= 4.0 * (1.0 + slack);
    // Z = 0 closed forms
    ok = ok && (c0.Y1 - v).norm() <= 1e-12 &&
         (c0.Y2 - zero_curve_y2(m, x, v)).norm() <= 1e-12;

    // central differences of t -> Retr(X, Z + tV)
    const double h = 1e-4;
    const Matrix rp = geometry::retract(m, x, z + h * v);
    const Matrix rm = geometry::retract(m, x, z - h * v);
    const Matrix r0 = geometry::retract(m, x, z);
    const Matrix fd1 = (rp - rm) / (2.0 * h);
    const Matrix fd2 = (rp - 2.0 * r0 + rm) / (h * h);
    const double tol = 1e-6 * (1.0 + zn + 1.0);
    ok = ok && (fd1 - cz.Y1).norm() <= tol && (fd2 - cz.Y2).norm() <= tol;

    o.violated = !ok;
    o.ratio = d2 / zn;
    o.norms = {zn, v.norm()};
    return o;
  });
  return merge("curve", outcomes, 13.66, opts.seed);
}

SampleReport verify_pullback_lipschitz(const ObjectiveHandle &obj,
                                       const ManifoldDescriptor &m,
                                       const VerifyOptions &opts) {
  const double lh =
      opts.L_H ? *opts.L_H : pullback_lipschitz_constant(obj, m, opts.seed);
  const auto outcomes = sample(opts, [&](Rng &rng) {
    Outcome o;
    const Matrix x = geometry::random_point(m, rng);
    const double zn = log_uniform(rng, 1e-3, 5.0);
    const Matrix z = geometry::random_tangent(m, x, rng, zn);
    const Matrix v = geometry::random_tangent(m, x, rng, 1.0);
    auto curve = [&](const Matrix &base) {
      return [&obj, &m, &x, &v, base](double t) {
        return obj.eval_f(geometry::retract(m, x, base + t * v));
      };
    };
    const Matrix zero = Matrix::Zero(x.rows(), x.cols());
    const auto gz = curve(z);
    const auto g0 = curve(zero);
    const double hz = 1e-3 * (1.0 + zn), h0 = 1e-3;
    const double fz = gz(0.0), f0 = g0(0.0);
    const double diff = std::abs(second_derivative(gz, hz, fz) -
                                 second_derivative(g0, h0, f0));
    // rounding in the stencil: ~64 eps |f| / h^2 for each derivative
    const double noise =
        64.0 * kEps * ((1.0 + std::abs(fz)) / (hz * hz) +
                       (1.0 + std::abs(f0)) / (h0 * h0));
    if (noise > 0.1 * lh * zn && lh > 0.0) {
      o.skipped = true;
      return o;
    }
    o.ratio = diff / zn;
    o.violated = diff > lh * zn + noise;
    o.norms = {zn, 1.0};
    return o;
  });
  return merge("lipschitz", outcomes, lh, opts.seed);
}

SampleReport verify_cg_bound(const ObjectiveHandle &obj,
                             const ManifoldDescriptor &m,
                             const VerifyOptions &opts) {
  const auto outcomes = sample(opts, [&](Rng &rng) {
    Outcome o;
    const Matrix x = geometry::random_point(m, rng);
    // (0, C_g]: 1 - uniform lies in (0, 1]
    const double xn = kCg * (1.0 - rng.uniform());
    const Matrix xi = geometry::random_tangent(m, x, rng, xn);
    const Matrix basis = geometry::basis_matrix(m, x);
    const double h = 1e-6 * (1.0 + xn);
    Vector pull(basis.cols());
    for (Index j = 0; j < basis.cols(); ++j) {
      const Matrix e = as_matrix(basis.col(j), x.rows(), x.cols());
      pull(j) = (obj.eval_f(geometry::extended_retract(m, x, xi + h * e)) -
                 obj.eval_f(geometry::extended_retract(m, x, xi - h * e))) /
                (2.0 * h);
    }
    const Matrix y = geometry::retract(m, x, xi);
    const double lhs =
        geometry::project(m, y, obj.eval_grad_ambient(y)).norm();
    const double rhs = pull.norm();
    const double noise =
        std::sqrt(static_cast<double>(basis.cols())) *
        (4.0 * kEps * (1.0 + std::abs(obj.eval_f(y))) / h + 1e-9);
    o.ratio = rhs > 0.0 ? lhs / rhs : (lhs > 0.0 ? 2.0 : 0.0);
    o.violated = lhs > 2.0 * (rhs + noise);
    o.norms = {xn};
    return o;
  });
  return merge("cg", outcomes, 2.0, opts.seed);
}

SampleReport verify_hess_grad_coupling(const ObjectiveHandle &obj,
                                       const ManifoldDescriptor &m,
                                       const VerifyOptions &opts) {
  double l2 = 0.5;
  if (opts.scheme != Retraction::Polar) {
    VerifyOptions reg = opts;
    reg.seed = mix_seed(opts.seed, 0x12);
    l2 = estimate_retraction_regularity(m, reg).L2_hat;
  }
  const auto outcomes = sample(opts, [&](Rng &rng) {
    Outcome o;
    const Matrix x = geometry::random_point(m, rng);
    const Matrix eta = geometry::random_tangent(m, x, rng, 1.0);
    RiemannianHessian hess(obj, m, x);
    const double quad = inner(hess.apply(eta), eta);
    const auto g = [&](double t) {
      return obj.eval_f(geometry::retract(m, x, t * eta, opts.scheme));
    };
    const double h = 1e-3;
    const double f0 = g(0.0);
    const double gap = std::abs(second_derivative(g, h, f0) - quad);
    const double bound =
        std::max(2.0 * l2 * hess.gradient().norm() * eta.squaredNorm(), 1e-6);
    o.ratio = gap / bound;
    o.violated = gap > bound;
    o.norms = {eta.norm(), hess.gradient().norm()};
    return o;
  });
  return merge("coupling", outcomes, 1.0, opts.seed);
}

SampleReport verify_projection_difference(const ManifoldDescriptor &m,
                                          const VerifyOptions &opts) {
  const auto outcomes = sample(opts, [&](Rng &rng) {
    Outcome o;
    const Matrix x = geometry::random_point(m, rng);
    const double zn = log_uniform(rng, 1e-3, 5.0);
    const Matrix z = geometry::random_tangent(m, x, rng, zn);
    const Matrix v = unit_ambient(m, rng);
    const Matrix w = geometry::retract(m, x, z);
    const Matrix vp = geometry::project(m, x, v);
    const CurveDerivatives c = polar_curve_derivatives(m, x, z, vp);
    const double diff = (geometry::project(m, w, v) - c.Y1).norm();
    o.ratio = diff / zn;
    o.violated = diff > 4.31 * zn * (1.0 + 1e-9);
    o.norms = {zn, v.norm()};
    return o;
  });
  return merge("projdiff", outcomes, 4.31, opts.seed);
}

RegularityEstimate estimate_retraction_regularity(const ManifoldDescriptor &m,
                                                  const VerifyOptions &opts) {
  struct Ratio {
    double l1 = 0.0, l2 = 0.0;
    bool excluded = false;
  };
  const Rng root(opts.seed);
  const auto ratios = parallel_map<Ratio>(
      opts.samples,
      [&](Index i) {
        Rng rng = root.substream(static_cast<std::uint64_t>(i));
        Ratio r;
        const Matrix x = geometry::random_point(m, rng);
        const Matrix xi =
            geometry::random_tangent(m, x, rng, log_uniform(rng, 1e-3, 10.0));
        const double n = xi.norm();
        if (n == 0.0) {
          r.excluded = true;
          return r;
        }
        const Matrix y = geometry::retract(m, x, xi, opts.scheme);
        r.l1 = (y - x).norm() / n;
        r.l2 = (y - x - xi).norm() / (n * n);
        return r;
      },
      opts.exec);
  RegularityEstimate est;
  for (const auto &r : ratios) {
    if (r.excluded) {
      ++est.excluded;
      continue;
    }
    ++est.samples;
    est.L1_hat = std::max(est.L1_hat, r.l1);
    est.L2_hat = std::max(est.L2_hat, r.l2);
  }
  return est;
}

SampleReport verify_regularity(const ManifoldDescriptor &m,
                               const VerifyOptions &opts) {
  const RegularityEstimate est = estimate_retraction_regularity(m, opts);
  SampleReport r;
  r.op = "regularity";
  r.samples = est.samples + est.excluded;
  r.skipped = est.excluded;
  r.seed = opts.seed;
  r.bound = 0.5;
  r.max_ratio = est.L2_hat;
  r.worst_case_norms = {est.L1_hat, est.L2_hat};
  if (opts.scheme == Retraction::Polar ||
      (opts.scheme == Retraction::Normalize && m.sphere_family())) {
    r.violations = (est.L1_hat > 1.0 + 1e-9 ? 1 : 0) +
                   (est.L2_hat > 0.5 + 1e-9 ? 1 : 0);
  }
  return r;
}

} // namespace crrn
