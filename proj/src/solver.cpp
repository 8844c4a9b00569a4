#include <crrn/solver.hpp>

#include <Eigen/Eigenvalues>

#include <chrono>
#include <cmath>
#include <limits>

namespace crrn {

namespace {

std::int64_t elapsed_ns(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(
             std::chrono::steady_clock::now() - start)
      .count();
}

void validate(const SolverConfig &cfg) {
  if (!(cfg.epsilon > 0.0))
    throw DomainError("solver: epsilon must be > 0");
  if (cfg.max_iters < 1)
    throw DomainError("solver: max_iters must be >= 1");
  if (!(cfg.constants.sigma.value > 0.0))
    throw DomainError("solver: sigma must be > 0");
}

} // namespace

SolveResult run(const ObjectiveHandle &obj, const Point &x0,
                const SolverConfig &cfg) {
  validate(cfg);
  const auto &m = x0.descriptor();
  const ConstantSet &c = cfg.constants;
  const double sigma = c.sigma.value;
  const bool dense = m.intrinsic_dim() <= cfg.dense_limit;
  const bool exact = dense && cfg.subsolver == SubsolverKind::Exact;
  const bool early = cfg.stop_rule == StopRule::EarlySmallStep;

  SolveResult result;
  if (early)
    result.lambda_lipschitz =
        cfg.lambda_lipschitz
            ? *cfg.lambda_lipschitz
            : estimate_lambda_lipschitz(obj, m, 4, 0.1,
                                        mix_seed(cfg.seed, 0xd), cfg.dense_limit);
  const double early_slope = result.lambda_lipschitz * c.L1.value + 0.5 * sigma;

  SolveTrace &trace = result.trace;
  Matrix x = x0.value();
  double f = obj.eval_f(x);
  double best = std::numeric_limits<double>::infinity();
  result.x_out = x;

  for (Index k = 0; k < cfg.max_iters; ++k) {
    const auto start = std::chrono::steady_clock::now();
    RiemannianHessian hess(obj, m, x);
    const double gnorm = hess.gradient().norm();

    SubproblemSolution sol;
    Matrix xi;
    try {
      if (dense) {
        auto basis = std::make_shared<const TangentBasis>(
            Point(x0.descriptor_ptr(), x), geometry::basis_matrix(m, x));
        const CubicSubproblem sp = assemble_subproblem(hess, basis, sigma,
                                                       cfg.exec);
        sol = exact ? solve_exact(sp) : solve_gd(sp, gnorm, cfg.gd);
        xi = basis->from_coords(sol.xi);
      } else {
        const CubicSubproblem sp = assemble_matrix_free(hess, sigma);
        sol = solve_gd(sp, gnorm, cfg.gd);
        xi = geometry::project(
            m, x, as_matrix(sol.xi, m.ambient_rows(), m.ambient_cols()));
      }
    } catch (const DivergenceError &e) {
      throw DivergenceError("iteration " + std::to_string(k) + ": " +
                            e.what());
    }

    Matrix next = geometry::retract(m, x, xi, cfg.retraction);
    if (geometry::feasibility_residual(m, next) > kFeasibilityTol) {
      next = geometry::nearest_point(m, next);
      ++trace.reorthonormalizations;
    }
    const double f_next = obj.eval_f(next);
    if (!std::isfinite(f_next))
      throw DivergenceError("iteration " + std::to_string(k) +
                            ": non-finite objective value");

    const double step = xi.norm();
    IterationRecord rec;
    rec.k = k;
    rec.f = f;
    rec.grad_norm = gnorm;
    rec.step_norm = step;
    rec.lambda_star = sol.lambda_star;
    rec.model_decrease = sol.model_decrease;
    rec.actual_decrease = f - f_next;
    rec.descent_rhs = 0.25 * c.tau1.value * step * step * step;
    rec.subsolver_iters = sol.iterations;
    rec.wall_ns = cfg.record_timings ? elapsed_ns(start) : 0;
    trace.records.push_back(rec);

    const double cube = step * step * step;
    if (cube < best) {
      best = cube;
      result.k_star = k;
      result.x_out = next;
    }
    x = std::move(next);
    f = f_next;

    const bool small = c.tau2.value * step * step <= cfg.epsilon &&
                       early_slope * step <= std::sqrt(cfg.epsilon);
    if ((early && small) || step == 0.0) {
      trace.status = SolveStatus::Converged;
      break;
    }
  }
  trace.x_final = x;
  result.certified = certify_stationarity(obj, m, result.x_out, cfg.epsilon,
                                          cfg.dense_limit);
  return result;
}

TangentEigen lambda_min_tangent(const ObjectiveHandle &obj,
                                const ManifoldDescriptor &m, const Matrix &x,
                                Index dense_limit, Execution exec) {
  TangentEigen out;
  out.direction = Matrix::Zero(m.ambient_rows(), m.ambient_cols());
  if (m.intrinsic_dim() == 0)
    return out;
  RiemannianHessian hess(obj, m, x);
  if (m.intrinsic_dim() <= dense_limit) {
    const Matrix basis = geometry::basis_matrix(m, x);
    const Matrix b = hessian_coordinates(hess, basis, exec);
    Eigen::SelfAdjointEigenSolver<Matrix> es(b);
    out.value = es.eigenvalues()(0);
    out.direction = as_matrix(basis * es.eigenvectors().col(0),
                              m.ambient_rows(), m.ambient_cols());
    return out;
  }
  // Normal directions get eigenvalue `shift`, above the tangent spectrum.
  const double norm =
      symmetric_norm([&](const Vector &v) { return hess.apply_vec(v); },
                     m.ambient_size(), 1e-3, 200)
          .norm;
  const double shift = 2.0 * norm + 1.0;
  const auto op = [&](const Vector &v) -> Vector {
    const Matrix z = as_matrix(v, m.ambient_rows(), m.ambient_cols());
    const Matrix pz = geometry::project(m, x, z);
    return as_vector(hess.apply(pz)) + shift * as_vector(z - pz);
  };
  const EigenPair pair = lanczos_smallest(
      op, m.ambient_size(), std::min<Index>(m.ambient_size(), 300));
  out.value = pair.value;
  out.direction = geometry::project(
      m, x, as_matrix(pair.vector, m.ambient_rows(), m.ambient_cols()));
  const double dn = out.direction.norm();
  if (dn > 0.0)
    out.direction /= dn;
  return out;
}

StationarityReport certify_stationarity(const ObjectiveHandle &obj,
                                        const ManifoldDescriptor &m,
                                        const Matrix &x, double epsilon,
                                        Index dense_limit) {
  if (!(epsilon > 0.0))
    throw DomainError("certify_stationarity: epsilon must be > 0");
  StationarityReport r;
  r.epsilon = epsilon;
  r.grad_norm = geometry::project(m, x, obj.eval_grad_ambient(x)).norm();
  r.lambda_min = lambda_min_tangent(obj, m, x, dense_limit).value;
  r.lambda_threshold = -std::sqrt(epsilon);
  r.first_order = r.grad_norm <= epsilon;
  r.second_order = r.first_order && r.lambda_min >= r.lambda_threshold;
  return r;
}

double estimate_lambda_lipschitz(const ObjectiveHandle &obj,
                                 const ManifoldDescriptor &m, Index samples,
                                 double radius, std::uint64_t seed,
                                 Index dense_limit) {
  const Rng root(seed);
  const auto ratios = parallel_map<double>(samples, [&](Index i) {
    Rng rng = root.substream(static_cast<std::uint64_t>(i));
    const Matrix x = geometry::random_point(m, rng);
    const Matrix y =
        geometry::retract(m, x, geometry::random_tangent(m, x, rng, radius));
    const double dist = (x - y).norm();
    if (dist == 0.0)
      return 0.0;
    return std::abs(lambda_min_tangent(obj, m, x, dense_limit).value -
                    lambda_min_tangent(obj, m, y, dense_limit).value) /
           dist;
  });
  double out = 0.0;
  for (double r : ratios)
    out = std::max(out, r);
  return out;
}

// ---------------------------------------------------------------------------
// Rate diagnostics

namespace {

bool is_three_halves(double p) { return std::abs(p - 1.5) < 1e-12; }

} // namespace

double rate_scale(const RateOptions &o) {
  if (is_three_halves(o.p))
    throw DomainError("rate_scale: undefined for p = 3/2");
  const double d = 2.0 * o.p - 3.0;
  return std::exp(3.0 / d * std::log(o.tau_f) +
                  2.0 * o.p / d * std::log(4.0 / o.tau1) +
                  3.0 * o.p / d * std::log(o.tau2));
}

RateReport diagnose_rates(const std::vector<IterationRecord> &trace,
                          const RateOptions &o) {
  if (trace.empty())
    throw DomainError("diagnose_rates: empty trace");
  if (!(o.p >= 1.0))
    throw DomainError("diagnose_rates: p must be >= 1");
  RateReport r;

  std::vector<double> gaps;
  for (const auto &rec : trace)
    gaps.push_back(rec.f - o.f_bar);
  gaps.push_back(trace.back().f - trace.back().actual_decrease - o.f_bar);

  const bool halving = is_three_halves(o.p);
  const double scale = halving ? 1.0 : rate_scale(o);
  const double expo = 3.0 / (2.0 * o.p);
  for (std::size_t k = 0; k + 1 < gaps.size(); ++k) {
    if (!(gaps[k] > 0.0) || !(gaps[k + 1] > 0.0)) {
      ++r.skipped;
      continue;
    }
    ++r.pairs;
    const double zk = scale * gaps[k], zn = scale * gaps[k + 1];
    if (halving) {
      if (zn <= 0.5 * zk * (1.0 + o.rel_tol))
        ++r.recurrence_ok;
    } else {
      if (zk >= (zn + std::pow(zn, expo)) * (1.0 - o.rel_tol))
        ++r.recurrence_ok;
      if (zn <= std::pow(zk, 1.0 / expo) * (1.0 + o.rel_tol))
        ++r.power_ok;
    }
  }
  if (r.pairs > 0) {
    r.recurrence_fraction = static_cast<double>(r.recurrence_ok) / r.pairs;
    r.power_fraction =
        halving ? 0.0 : static_cast<double>(r.power_ok) / r.pairs;
  }

  for (std::size_t k = 0; k + 1 < trace.size(); ++k) {
    const double s = trace[k].step_norm, sn = trace[k + 1].step_norm;
    if (s > 0.0 && s < 1.0 && sn > 0.0)
      r.q.push_back(std::log(sn) / std::log(s));
    if (o.delta0 && s > 0.0) {
      const double w = 2.0 * o.tau2 / *o.delta0;
      ++r.quadratic_pairs;
      if (w * sn <= (w * s) * (w * s) * (1.0 + o.rel_tol))
        ++r.quadratic_ok;
    }
  }
  if (r.quadratic_pairs > 0)
    r.quadratic_fraction =
        static_cast<double>(r.quadratic_ok) / r.quadratic_pairs;
  return r;
}

} // namespace crrn
