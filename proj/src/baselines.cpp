#include <crrn/baselines.hpp>

#include <chrono>
#include <cmath>

namespace crrn {

namespace {

std::int64_t elapsed_ns(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(
             std::chrono::steady_clock::now() - start)
      .count();
}

Matrix keep_feasible(const ManifoldDescriptor &m, Matrix x, SolveTrace &t) {
  if (geometry::feasibility_residual(m, x) > kFeasibilityTol) {
    ++t.reorthonormalizations;
    return geometry::nearest_point(m, x);
  }
  return x;
}

double checked(double f, Index k) {
  if (!std::isfinite(f))
    throw DivergenceError("iteration " + std::to_string(k) +
                          ": non-finite objective value");
  return f;
}

} // namespace

double default_rgd_step(const ConstantSet &c) {
  const double lip = 2.0 * c.ell_f.value + 2.0 * c.G.value * c.L2.value;
  return lip > 0.0 ? 1.0 / lip : 1.0;
}

SolveTrace run_rgd(const ObjectiveHandle &obj, const Point &x0,
                   const RgdConfig &cfg) {
  if (!(cfg.step_size > 0.0))
    throw DomainError("run_rgd: step size must be > 0");
  const auto &m = x0.descriptor();
  SolveTrace t;
  Matrix x = x0.value();
  double f = checked(obj.eval_f(x), 0);
  for (Index k = 0;; ++k) {
    const auto start = std::chrono::steady_clock::now();
    const Matrix grad = geometry::project(m, x, obj.eval_grad_ambient(x));
    IterationRecord rec;
    rec.k = k;
    rec.f = f;
    rec.grad_norm = grad.norm();
    if (rec.grad_norm <= cfg.grad_tol || k >= cfg.max_iters) {
      t.status = rec.grad_norm <= cfg.grad_tol ? SolveStatus::Converged
                                               : SolveStatus::BudgetExhausted;
      rec.wall_ns = cfg.record_timings ? elapsed_ns(start) : 0;
      t.records.push_back(rec);
      break;
    }
    Matrix next = keep_feasible(
        m, geometry::retract(m, x, -cfg.step_size * grad, cfg.retraction), t);
    const double f_next = checked(obj.eval_f(next), k);
    rec.step_norm = cfg.step_size * rec.grad_norm;
    rec.actual_decrease = f - f_next;
    rec.wall_ns = cfg.record_timings ? elapsed_ns(start) : 0;
    t.records.push_back(rec);
    x = std::move(next);
    f = f_next;
  }
  t.x_final = x;
  return t;
}

SolveTrace run_rtr(const ObjectiveHandle &obj, const Point &x0,
                   const RtrConfig &cfg) {
  const auto &m = x0.descriptor();
  const double root_dim = std::sqrt(static_cast<double>(m.intrinsic_dim()));
  const double max_radius = cfg.max_radius > 0.0 ? cfg.max_radius : root_dim;
  double radius = cfg.initial_radius > 0.0 ? cfg.initial_radius
                                           : root_dim / 8.0;
  if (!(radius > 0.0 && radius <= max_radius))
    throw DomainError("run_rtr: need 0 < initial radius <= max radius");
  const Index max_inner =
      cfg.max_inner > 0 ? cfg.max_inner : std::max<Index>(1, m.intrinsic_dim());

  SolveTrace t;
  Matrix x = x0.value();
  double f = checked(obj.eval_f(x), 0);
  for (Index k = 0;; ++k) {
    const auto start = std::chrono::steady_clock::now();
    RiemannianHessian hess(obj, m, x);
    const Matrix &g = hess.gradient();
    const double gnorm = g.norm();
    IterationRecord rec;
    rec.k = k;
    rec.f = f;
    rec.grad_norm = gnorm;
    if (gnorm <= cfg.grad_tol || k >= cfg.max_iters) {
      t.status = gnorm <= cfg.grad_tol ? SolveStatus::Converged
                                       : SolveStatus::BudgetExhausted;
      rec.wall_ns = cfg.record_timings ? elapsed_ns(start) : 0;
      t.records.push_back(rec);
      break;
    }

    // Steihaug-Toint truncated CG on m(eta) = <g, eta> + 1/2 <H eta, eta>.
    Matrix eta = Matrix::Zero(x.rows(), x.cols());
    Matrix r = g;
    Matrix d = -r;
    double rr = r.squaredNorm();
    const double stop = gnorm * std::min(cfg.kappa, std::pow(gnorm, cfg.theta));
    Index cg_iters = 0;
    auto to_boundary = [&](const Matrix &e, const Matrix &dir) {
      const double a = dir.squaredNorm(), b = 2.0 * inner(e, dir),
                   c = e.squaredNorm() - radius * radius;
      return (-b + std::sqrt(b * b - 4.0 * a * c)) / (2.0 * a);
    };
    while (cg_iters < max_inner) {
      ++cg_iters;
      const Matrix hd = hess.apply(d);
      const double dhd = inner(d, hd);
      if (dhd <= 0.0) {
        eta += to_boundary(eta, d) * d;
        break;
      }
      const double alpha = rr / dhd;
      const Matrix trial = eta + alpha * d;
      if (trial.norm() >= radius) {
        eta += to_boundary(eta, d) * d;
        break;
      }
      eta = trial;
      r += alpha * hd;
      const double rr_next = r.squaredNorm();
      if (std::sqrt(rr_next) <= stop)
        break;
      d = -r + (rr_next / rr) * d;
      rr = rr_next;
    }
    eta = geometry::project(m, x, eta);

    const double predicted =
        -(inner(g, eta) + 0.5 * inner(eta, hess.apply(eta)));
    Matrix next =
        keep_feasible(m, geometry::retract(m, x, eta, cfg.retraction), t);
    const double f_next = checked(obj.eval_f(next), k);
    const double actual = f - f_next;
    const double rho = predicted > 0.0 ? actual / predicted
                                       : (actual >= 0.0 ? 1.0 : -1.0);
    const double eta_norm = eta.norm();
    if (rho < 0.25)
      radius *= 0.25;
    else if (rho > cfg.rho_expand && eta_norm >= 0.99 * radius)
      radius = std::min(2.0 * radius, max_radius);

    rec.model_decrease = predicted;
    rec.subsolver_iters = cg_iters;
    if (rho >= cfg.rho_accept) {
      rec.step_norm = eta_norm;
      rec.actual_decrease = actual;
      x = std::move(next);
      f = f_next;
    }
    rec.wall_ns = cfg.record_timings ? elapsed_ns(start) : 0;
    t.records.push_back(rec);
  }
  t.x_final = x;
  return t;
}

} // namespace crrn
