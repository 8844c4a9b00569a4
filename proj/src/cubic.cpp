#include <crrn/cubic.hpp>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>

namespace crrn {

CubicSubproblem CubicSubproblem::dense(Vector g, Matrix B, double sigma) {
  if (B.rows() != B.cols() || B.rows() != g.size())
    throw DimensionError("cubic subproblem: B must be square and match g");
  if ((B - B.transpose()).norm() > 1e-10 * (1.0 + B.norm()))
    throw DomainError("cubic subproblem: B is not symmetric");
  if (!(sigma > 0.0))
    throw DomainError("cubic subproblem: sigma must be > 0");
  CubicSubproblem sp;
  sp.g = std::move(g);
  sp.B = 0.5 * (B + B.transpose());
  sp.sigma = sigma;
  return sp;
}

CubicSubproblem CubicSubproblem::matrix_free(Vector g, LinearMap apply_B,
                                             double sigma) {
  if (!apply_B)
    throw DomainError("cubic subproblem: missing Hessian operator");
  if (!(sigma > 0.0))
    throw DomainError("cubic subproblem: sigma must be > 0");
  CubicSubproblem sp;
  sp.g = std::move(g);
  sp.apply_B = std::move(apply_B);
  sp.sigma = sigma;
  return sp;
}

Vector CubicSubproblem::apply(const Vector &v) const {
  return is_dense() ? Vector(B * v) : apply_B(v);
}

double model_value(const CubicSubproblem &sp, const Vector &xi) {
  if (xi.size() != sp.dim())
    throw DimensionError("model_value: dimension mismatch");
  const double n = xi.norm();
  return sp.g.dot(xi) + 0.5 * xi.dot(sp.apply(xi)) + sp.sigma / 6.0 * n * n * n;
}

Vector model_grad(const CubicSubproblem &sp, const Vector &xi) {
  if (xi.size() != sp.dim())
    throw DimensionError("model_grad: dimension mismatch");
  return sp.g + sp.apply(xi) + (0.5 * sp.sigma * xi.norm()) * xi;
}

namespace {

double operator_norm(const CubicSubproblem &sp) {
  if (sp.is_dense())
    return spectral_norm(sp.B);
  return symmetric_norm(sp.apply_B, sp.dim(), 1e-6, 300).norm;
}

double smallest_eigenvalue(const CubicSubproblem &sp) {
  if (sp.is_dense()) {
    if (sp.dim() == 0)
      return 0.0;
    Eigen::SelfAdjointEigenSolver<Matrix> es(sp.B, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
  }
  return lanczos_smallest(sp.apply_B, sp.dim(), std::min<Index>(sp.dim(), 200))
      .value;
}

} // namespace

Certificate check_certificate(const CubicSubproblem &sp, const Vector &xi,
                              double lambda_star, double tol) {
  Certificate c;
  c.stationarity = (sp.apply(xi) + lambda_star * xi + sp.g).norm();
  c.multiplier = std::abs(lambda_star - 0.5 * sp.sigma * xi.norm());
  c.curvature = std::max(0.0, -(smallest_eigenvalue(sp) + lambda_star));
  const double scale = tol * (1.0 + sp.g.norm());
  c.stationarity_ok = c.stationarity <= scale;
  c.multiplier_ok = c.multiplier <= scale;
  c.curvature_ok = c.curvature <= scale;
  return c;
}

SubproblemSolution solve_exact(const CubicSubproblem &sp) {
  if (!sp.is_dense())
    throw DomainError("solve_exact: requires a dense subproblem");
  const Index dim = sp.dim();
  if (dim < 1)
    throw DimensionError("solve_exact: dimension must be >= 1");
  const double sigma = sp.sigma;

  Eigen::SelfAdjointEigenSolver<Matrix> es(sp.B);
  const Vector &ev = es.eigenvalues();
  const Matrix &q = es.eigenvectors();
  const Vector gamma = q.transpose() * sp.g;
  const double gnorm = sp.g.norm();
  const double lmin = ev(0);
  const double bnorm = std::max(std::abs(ev(0)), std::abs(ev(dim - 1)));

  // Bottom eigenspace and the share of g inside it.
  const double cluster = 1e-10 * std::max(1.0, bnorm);
  Index bottom = 1;
  while (bottom < dim && ev(bottom) - lmin <= cluster)
    ++bottom;
  const double gamma_bottom = gamma.head(bottom).norm();

  auto step_norm = [&](double lambda, Index from) {
    double s = 0.0;
    for (Index i = from; i < dim; ++i) {
      const double t = gamma(i) / (ev(i) + lambda);
      s += t * t;
    }
    return std::sqrt(s);
  };

  SubproblemSolution sol;
  const double lo = std::max(0.0, -lmin);
  Vector y(dim);
  double lambda;

  const bool gamma_negligible = gamma_bottom <= 1e-12 * (1.0 + gnorm);
  const bool hard = lo > 0.0 && gamma_negligible &&
                    step_norm(lo, bottom) <= 2.0 * lo / sigma;
  if (gnorm == 0.0 && lo == 0.0) {
    // B is PSD and g = 0: the model is nonnegative.
    y.setZero();
    lambda = 0.0;
  } else if (hard) {
    lambda = lo;
    y.setZero();
    for (Index i = bottom; i < dim; ++i)
      y(i) = -gamma(i) / (ev(i) + lambda);
    const double target = 2.0 * lambda / sigma;
    const double alpha =
        std::sqrt(std::max(0.0, target * target - y.squaredNorm()));
    // Fixed sign: the eigenvector's first nonzero coordinate is positive.
    Vector v = q.col(0);
    for (Index i = 0; i < dim; ++i) {
      if (std::abs(v(i)) > 1e-14) {
        if (v(i) < 0.0)
          v = -v;
        break;
      }
    }
    sol.hard_case = true;
    Vector xi = q * y + alpha * v;
    sol.xi = std::move(xi);
    sol.lambda_star = lambda;
    sol.model_decrease = -model_value(sp, sol.xi);
    sol.certificate = check_certificate(sp, sol.xi, lambda);
    return sol;
  } else {
    // Work in mu = lambda - lo so the small denominators ev_i + lambda near
    // the bottom of the spectrum keep full relative precision.
    // psi(mu) = 1/||xi|| - sigma/(2 (lo + mu)) is increasing and negative
    // near mu = 0; bracket its root and run safeguarded Newton.
    const Index from = gamma_negligible && lo > 0.0 ? bottom : 0;
    Vector shifted(dim);
    for (Index i = 0; i < dim; ++i)
      shifted(i) = i < bottom && lo > 0.0 ? 0.0 : ev(i) + lo;
    auto psi = [&](double mu, double *dpsi) {
      double s = 0.0, ds = 0.0;
      for (Index i = from; i < dim; ++i) {
        const double d = shifted(i) + mu;
        const double t = gamma(i) * gamma(i) / (d * d);
        s += t;
        ds -= 2.0 * t / d;
      }
      const double norm = std::sqrt(s);
      const double l = lo + mu;
      if (dpsi)
        *dpsi = -0.5 * ds / (s * norm) + sigma / (2.0 * l * l);
      return 1.0 / norm - sigma / (2.0 * l);
    };
    double a = 0.0;
    double b = 1.5 * std::max(bnorm, std::sqrt(sigma * gnorm)) + 1.0;
    while (psi(b, nullptr) < 0.0) {
      a = b;
      b *= 2.0;
    }
    double mu = 0.5 * (a + b);
    for (int it = 0; it < 500; ++it) {
      double d;
      const double val = psi(mu, &d);
      if (val == 0.0)
        break;
      if (val < 0.0)
        a = mu;
      else
        b = mu;
      if (b - a <= 4.0 * std::numeric_limits<double>::epsilon() * b)
        break;
      double next = mu - val / d;
      if (!(next > a && next < b) || !std::isfinite(next))
        next = 0.5 * (a + b);
      if (std::abs(next - mu) <= 1e-15 * mu) {
        mu = next;
        break;
      }
      mu = next;
    }
    lambda = lo + mu;
    y.setZero();
    for (Index i = from; i < dim; ++i)
      y(i) = -gamma(i) / (shifted(i) + mu);
  }
  sol.xi = q * y;
  sol.lambda_star = lambda;
  sol.model_decrease = -model_value(sp, sol.xi);
  sol.certificate = check_certificate(sp, sol.xi, lambda);
  return sol;
}

double default_gd_step(const CubicSubproblem &sp, double radius) {
  const double bnorm = operator_norm(sp);
  if (radius < 0.0)
    radius = 3.0 / sp.sigma *
             std::max(bnorm, std::sqrt(sp.sigma * sp.g.norm()));
  const double lip = bnorm + sp.sigma * radius;
  return lip > 0.0 ? 1.0 / lip : 1.0;
}

SubproblemSolution solve_gd(const CubicSubproblem &sp, double grad_norm_outer,
                            const GdOptions &opts) {
  if (!(opts.c > 0.0 && opts.c < 1.0))
    throw DomainError("solve_gd: c must lie in (0, 1)");
  if (grad_norm_outer < 0.0)
    throw DomainError("solve_gd: outer gradient norm must be >= 0");
  const double step = opts.step > 0.0 ? opts.step : default_gd_step(sp);
  const double threshold = opts.c * grad_norm_outer;

  SubproblemSolution sol;
  Vector xi = Vector::Zero(sp.dim());
  // One operator application per iteration: B xi gives both the model value
  // and its gradient at the current iterate.
  double value = 0.0;
  Index stalled = 0;
  Index it = 0;
  sol.converged = false;
  for (;; ++it) {
    Vector grad = sp.g;
    if (it > 0) {
      const Vector bxi = sp.apply(xi);
      const double norm = xi.norm();
      const double next = sp.g.dot(xi) + 0.5 * xi.dot(bxi) +
                          sp.sigma / 6.0 * norm * norm * norm;
      if (!std::isfinite(next))
        throw DivergenceError("solve_gd: non-finite model value (step too "
                              "large)");
      if (value - next <= 1e-14 * std::max(1.0, std::abs(next)))
        ++stalled;
      else
        stalled = 0;
      value = next;
      grad += bxi + 0.5 * sp.sigma * norm * xi;
    }
    if (grad.norm() <= threshold) {
      sol.converged = true;
      break;
    }
    if (it >= opts.max_iters)
      break;
    if (stalled >= opts.stall_window && sp.is_dense()) {
      SubproblemSolution exact = solve_exact(sp);
      exact.iterations = it;
      exact.fell_back = true;
      return exact;
    }
    xi -= step * grad;
  }
  sol.iterations = it;
  sol.xi = std::move(xi);
  sol.lambda_star = 0.5 * sp.sigma * sol.xi.norm();
  sol.model_decrease = -value;
  if (sp.is_dense())
    sol.certificate = check_certificate(sp, sol.xi, sol.lambda_star);
  return sol;
}

CubicSubproblem assemble_subproblem(const RiemannianHessian &hess,
                                    std::shared_ptr<const TangentBasis> basis,
                                    double sigma, Execution exec) {
  Vector g = basis->coordinates().transpose() * as_vector(hess.gradient());
  Matrix b = hessian_coordinates(hess, basis->coordinates(), exec);
  CubicSubproblem sp = CubicSubproblem::dense(std::move(g), std::move(b), sigma);
  sp.basis = std::move(basis);
  return sp;
}

CubicSubproblem assemble_matrix_free(const RiemannianHessian &hess,
                                     double sigma) {
  return CubicSubproblem::matrix_free(
      as_vector(hess.gradient()),
      [&hess](const Vector &v) { return hess.apply_vec(v); }, sigma);
}

} // namespace crrn
