#include <crrn/linalg.hpp>
#include <crrn/objective.hpp>
#include <crrn/rng.hpp>

#include <cmath>

namespace crrn {

ObjectiveHandle make_quadratic_problem(const Matrix &a, Sense sense,
                                       std::string name) {
  if (a.rows() != a.cols())
    throw DimensionError("quadratic problem: A must be square");
  auto data = std::make_shared<const Matrix>(0.5 * (a + a.transpose()));
  const double s = sense == Sense::Maximize ? -1.0 : 1.0;
  ObjectiveHandle h;
  h.eval_f = [data, s](const Matrix &u) {
    if (u.rows() != data->rows())
      throw DimensionError("quadratic problem: A and U row counts differ");
    return s * inner(*data * u, u);
  };
  h.eval_grad_ambient = [data, s](const Matrix &u) -> Matrix {
    if (u.rows() != data->rows())
      throw DimensionError("quadratic problem: A and U row counts differ");
    return (2.0 * s) * (*data * u);
  };
  h.eval_hess_vec_ambient = [data, s](const Matrix &,
                                      const Matrix &xi) -> Matrix {
    return (2.0 * s) * (*data * xi);
  };
  h.metadata = {std::move(name), true, sense, data};
  return h;
}

ObjectiveHandle make_linear_problem(const Matrix &c, std::string name) {
  auto data = std::make_shared<const Matrix>(c);
  ObjectiveHandle h;
  h.eval_f = [data](const Matrix &x) {
    if (x.rows() != data->rows() || x.cols() != data->cols())
      throw DimensionError("linear problem: shape mismatch");
    return inner(*data, x);
  };
  h.eval_grad_ambient = [data](const Matrix &) -> Matrix { return *data; };
  h.eval_hess_vec_ambient = [](const Matrix &, const Matrix &xi) -> Matrix {
    return Matrix::Zero(xi.rows(), xi.cols());
  };
  // linear is a (degenerate) quadratic; there is no symmetric A to expose
  h.metadata = {std::move(name), false, Sense::Minimize, data};
  return h;
}

Matrix sample_goe(Index n, std::uint64_t seed) {
  if (n < 1)
    throw DimensionError("sample_goe: n must be >= 1");
  Rng rng(seed);
  Matrix a(n, n);
  const double off = std::sqrt(1.0 / static_cast<double>(n));
  const double diag = std::sqrt(2.0 / static_cast<double>(n));
  for (Index j = 0; j < n; ++j) {
    a(j, j) = diag * rng.normal();
    for (Index i = j + 1; i < n; ++i) {
      a(i, j) = off * rng.normal();
      a(j, i) = a(i, j);
    }
  }
  return a;
}

// ---------------------------------------------------------------------------
// Riemannian derivatives

namespace {

/// One column-orthonormal block of the Hessian formula:
/// P_X(H - 1/2 (xi X^T G + X xi^T G + xi G^T X + X G^T xi)).
Matrix block_hessian(const Matrix &x, const Matrix &g, const Matrix &h,
                     const Matrix &xi) {
  const Matrix corr = xi * (x.transpose() * g) + x * (xi.transpose() * g) +
                      xi * (g.transpose() * x) + x * (g.transpose() * xi);
  return geometry::stiefel_project(x, h - 0.5 * corr);
}

/// Same formula for a product block stored as a d x k row slice (X^T).
/// With S = X^T G the transposed correction is
/// (S + S^T) Xi^T + (G^T Xi + Xi^T G)^T X^T.
void row_block_hessian(const geometry::RowSlice &xr,
                       const geometry::RowSlice &gr,
                       const geometry::RowSlice &hr,
                       const geometry::RowSlice &zr,
                       geometry::MutRowSlice out) {
  const Matrix s = xr.lazyProduct(gr.transpose());
  const Matrix c = zr.lazyProduct(gr.transpose());
  const Matrix ss = 0.5 * (s + s.transpose());
  const Matrix cs = 0.5 * (c + c.transpose());
  Matrix z = hr;
  z -= ss.lazyProduct(zr);
  z -= cs.lazyProduct(xr);
  geometry::project_rows(xr, z, out);
}

} // namespace

RiemannianHessian::RiemannianHessian(const ObjectiveHandle &obj,
                                     const ManifoldDescriptor &m, Matrix x)
    : obj_(&obj), manifold_(&m), x_(std::move(x)) {
  geometry::check_shape(m, x_, "RiemannianHessian");
  egrad_ = obj.eval_grad_ambient(x_);
  grad_ = geometry::project(m, x_, egrad_);
}

Matrix RiemannianHessian::apply(const Matrix &xi) const {
  const auto &m = *manifold_;
  geometry::check_shape(m, xi, "RiemannianHessian::apply");
  const Matrix h = obj_->eval_hess_vec_ambient(x_, xi);
  if (m.kind() != ManifoldDescriptor::Kind::Product)
    return block_hessian(x_, egrad_, h, xi);
  Matrix out(x_.rows(), x_.cols());
  for (std::size_t i = 0; i < m.blocks().size(); ++i) {
    const Index off = m.block_offset(i);
    const Index rows = m.blocks()[i].r();
    row_block_hessian(x_.middleRows(off, rows), egrad_.middleRows(off, rows),
                      h.middleRows(off, rows), xi.middleRows(off, rows),
                      out.middleRows(off, rows));
  }
  return out;
}

Vector RiemannianHessian::apply_vec(const Vector &v) const {
  const auto &m = *manifold_;
  const Matrix z = geometry::project(
      m, x_, as_matrix(v, m.ambient_rows(), m.ambient_cols()));
  return as_vector(apply(z));
}

Tangent riemannian_grad(const ObjectiveHandle &obj, const Point &x) {
  return {x, geometry::project(x.descriptor(), x.value(),
                               obj.eval_grad_ambient(x.value()))};
}

Tangent riemannian_hess_vec(const ObjectiveHandle &obj, const Point &x,
                            const Tangent &xi) {
  if (xi.base().value() != x.value())
    throw DimensionError("riemannian_hess_vec: tangent based elsewhere");
  RiemannianHessian hess(obj, x.descriptor(), x.value());
  return {x, hess.apply(xi.value())};
}

Matrix hessian_coordinates(const RiemannianHessian &hess, const Matrix &basis,
                           Execution exec) {
  const auto &m = hess.manifold();
  const Index dim = basis.cols();
  Matrix images(basis.rows(), dim);
  parallel_for(
      dim,
      [&](Index j) {
        const Matrix e = as_matrix(basis.col(j), m.ambient_rows(),
                                   m.ambient_cols());
        images.col(j) = as_vector(hess.apply(e));
      },
      exec);
  Matrix b = basis.transpose() * images;
  return 0.5 * (b + b.transpose());
}

// ---------------------------------------------------------------------------
// Constants

std::string to_string(Provenance p) {
  switch (p) {
  case Provenance::Analytic:
    return "analytic";
  case Provenance::Sampled:
    return "sampled";
  case Provenance::User:
    return "user";
  }
  return "?";
}

double sigma_lower_bound(double L2, double k_B, double L_H, double G) {
  const double root =
      std::sqrt(10.0 * L2 * k_B + (2.0 / 3.0) * L_H + 9.0 * L2 * L2 * G) +
      3.0 * L2 * std::sqrt(G);
  return std::max(root * root, 1.0);
}

namespace {

struct SampleMax {
  double G = 0.0, ell_f = 0.0, ell_H = 0.0, k_B = 0.0;
};

/// Spectral norm of P o Hess o P at x (power iteration, matrix-free).
double riemannian_hessian_norm(const ObjectiveHandle &obj,
                               const ManifoldDescriptor &m, const Matrix &x,
                               std::uint64_t seed) {
  if (m.intrinsic_dim() == 0)
    return 0.0;
  RiemannianHessian hess(obj, m, x);
  return symmetric_norm([&hess](const Vector &v) { return hess.apply_vec(v); },
                        m.ambient_size(), 1e-6, 300, seed)
      .norm;
}

SampleMax sample_bounds(const ObjectiveHandle &obj, const ManifoldDescriptor &m,
                        const ConstantsOptions &opts, bool problem_terms) {
  Rng root(opts.seed);
  const auto per_sample = parallel_map<SampleMax>(
      opts.sample_budget,
      [&](Index i) {
        Rng rng = root.substream(static_cast<std::uint64_t>(i));
        SampleMax s;
        const Matrix x = geometry::random_point(m, rng);
        s.k_B = riemannian_hessian_norm(obj, m, x, rng.substream(1).seed());
        if (!problem_terms)
          return s;
        s.G = obj.eval_grad_ambient(x).norm();
        // points of Conv(M) for the ambient Hessian quantities
        const Matrix y = geometry::random_point(m, rng);
        const Matrix w = geometry::random_point(m, rng);
        const double t = rng.uniform();
        const double t2 = rng.uniform();
        const Matrix c1 = t * x + (1.0 - t) * y;
        const Matrix c2 = t2 * x + (1.0 - t2) * w;
        s.ell_f =
            symmetric_norm(
                [&](const Vector &v) -> Vector {
                  return as_vector(obj.eval_hess_vec_ambient(
                      c1, as_matrix(v, m.ambient_rows(), m.ambient_cols())));
                },
                m.ambient_size(), 1e-6, 300, rng.substream(2).seed())
                .norm;
        Matrix v = rng.gaussian(m.ambient_rows(), m.ambient_cols());
        v /= v.norm();
        const double dist = (c1 - c2).norm();
        if (dist > 0.0)
          s.ell_H = (obj.eval_hess_vec_ambient(c1, v) -
                     obj.eval_hess_vec_ambient(c2, v))
                        .norm() /
                    dist;
        return s;
      },
      opts.exec);
  SampleMax out;
  for (const auto &s : per_sample) {
    out.G = std::max(out.G, s.G);
    out.ell_f = std::max(out.ell_f, s.ell_f);
    out.ell_H = std::max(out.ell_H, s.ell_H);
    out.k_B = std::max(out.k_B, s.k_B);
  }
  return out;
}

} // namespace

ProblemBounds estimate_bounds(const ObjectiveHandle &obj,
                              const ManifoldDescriptor &m,
                              const ConstantsOptions &opts) {
  if (opts.inflation < 1.0)
    throw ConstantsError("constants: inflation must be >= 1");
  ProblemBounds b;
  const bool analytic = opts.mode == ConstantsMode::Analytic;
  if (analytic && !obj.metadata.is_quadratic)
    throw ConstantsError("constants: analytic mode requires a quadratic "
                         "objective");
  const bool need_kb_samples = !opts.k_B_override.has_value();
  SampleMax sampled;
  if (!analytic || need_kb_samples)
    sampled = sample_bounds(obj, m, opts, !analytic);

  if (analytic) {
    const double norm_a = spectral_norm(*obj.metadata.data);
    b.ell_f = {2.0 * norm_a, Provenance::Analytic};
    b.ell_H = {0.0, Provenance::Analytic};
    b.G = {2.0 * norm_a * std::sqrt(m.squared_norm_on_manifold()),
           Provenance::Analytic};
  } else {
    b.G = {opts.inflation * sampled.G, Provenance::Sampled};
    b.ell_f = {opts.inflation * sampled.ell_f, Provenance::Sampled};
    b.ell_H = {opts.inflation * sampled.ell_H, Provenance::Sampled};
  }
  if (opts.k_B_override)
    b.k_B = {*opts.k_B_override, Provenance::User};
  else
    b.k_B = {opts.inflation * sampled.k_B, Provenance::Sampled};
  return b;
}

ConstantSet assemble_constants(const ProblemBounds &bounds, double sigma_margin,
                               std::optional<double> sigma_override) {
  if (!(sigma_margin > 0.0) && !sigma_override)
    throw ConstantsError("constants: sigma margin must be > 0");
  ConstantSet c;
  c.G = bounds.G;
  c.ell_f = bounds.ell_f;
  c.ell_H = bounds.ell_H;
  c.k_B = bounds.k_B;
  c.L1 = {1.0, Provenance::Analytic};
  c.L2 = {0.5, Provenance::Analytic};
  const bool derived_analytic = bounds.G.provenance == Provenance::Analytic &&
                                bounds.ell_f.provenance ==
                                    Provenance::Analytic &&
                                bounds.ell_H.provenance == Provenance::Analytic;
  const Provenance derived =
      derived_analytic ? Provenance::Analytic : Provenance::Sampled;
  c.L_H = {13.66 * c.G.value + 12.55 * c.ell_f.value + 4.0 * c.ell_H.value,
           derived};
  c.C_g = {1.0 / 8.62, Provenance::Analytic};

  const double L2 = c.L2.value, kB = c.k_B.value, G = c.G.value;
  c.sigma_lower_bound = sigma_lower_bound(L2, kB, c.L_H.value, G);
  if (sigma_override) {
    if (!(*sigma_override > 0.0))
      throw ConstantsError("constants: sigma must be > 0");
    c.sigma = {*sigma_override, Provenance::User};
  } else {
    const Provenance sp = (derived_analytic &&
                           c.k_B.provenance != Provenance::Sampled)
                              ? Provenance::Analytic
                              : Provenance::Sampled;
    c.sigma = {(1.0 + sigma_margin) * c.sigma_lower_bound, sp};
  }
  const double sigma = c.sigma.value;
  const double coupling = 10.0 * L2 * kB + 6.0 * L2 * std::sqrt(sigma * G);
  c.tau1 = {sigma - coupling - (2.0 / 3.0) * c.L_H.value, c.sigma.provenance};
  c.tau2 = {sigma + c.L_H.value + coupling, c.sigma.provenance};
  c.R = {3.0 * kB + 3.0 * std::sqrt(G), c.k_B.provenance};
  c.theory_compliant = sigma > c.sigma_lower_bound && c.tau1.value > 0.0;
  if (!sigma_override && !(c.tau1.value > 0.0))
    throw ConstantsError("constants: tau1 <= 0 after assembly (sigma rule "
                         "violated)");
  return c;
}

ConstantSet compute_constants(const ObjectiveHandle &obj,
                              const ManifoldDescriptor &m,
                              const ConstantsOptions &opts) {
  return assemble_constants(estimate_bounds(obj, m, opts), opts.sigma_margin,
                            opts.sigma_override);
}

} // namespace crrn
