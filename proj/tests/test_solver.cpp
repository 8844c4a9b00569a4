#include "helpers.hpp"

#include <crrn/solver.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace crrn;

namespace {

SolverConfig theory_config(const ObjectiveHandle &obj, const ManifoldDescriptor &m,
                           Index iters) {
  SolverConfig cfg;
  cfg.constants = compute_constants(obj, m);
  cfg.max_iters = iters;
  return cfg;
}

Matrix pca_matrix() {
  Vector eig(6);
  eig << -3.0, -2.0, -1.0, 1.0, 2.5, 4.0;
  return crrn::testing::with_spectrum(eig, 17);
}

} // namespace

TEST(Run, StationaryStartDegenerates) {
  const Matrix a = pca_matrix();
  const auto m = ManifoldDescriptor::stiefel(6, 3);
  const auto obj = make_quadratic_problem(a, Sense::Minimize);
  Eigen::SelfAdjointEigenSolver<Matrix> es(a);
  const Point x0(m, es.eigenvectors().leftCols(3));
  const auto res = run(obj, x0, theory_config(obj, m, 5));
  ASSERT_FALSE(res.trace.records.empty());
  EXPECT_LE(res.trace.records[0].step_norm, 1e-12);
  // rounding-level gradients along the flat rotation directions give steps of
  // order sqrt(2 |g| / sigma), far above the gradient itself
  EXPECT_LE((res.x_out - x0.value()).norm(), 1e-6);
  EXPECT_TRUE(res.certified.second_order);
}

TEST(Run, ZeroObjectiveIsConstant) {
  const auto m = ManifoldDescriptor::parse("product:5xsphere:3");
  const auto obj = make_quadratic_problem(Matrix::Zero(5, 5), Sense::Maximize);
  const Point x0 = random_point(m, 1);
  const auto res = run(obj, x0, theory_config(obj, m, 4));
  for (const auto &r : res.trace.records) {
    EXPECT_EQ(r.step_norm, 0.0);
    EXPECT_EQ(r.f, 0.0);
  }
  EXPECT_EQ(res.x_out, x0.value());
}

TEST(Run, TheoryCompliantMaxCutObeysDescent) {
  const auto m = ManifoldDescriptor::parse("product:50xsphere:4");
  const auto obj = make_quadratic_problem(sample_goe(50, 3), Sense::Maximize);
  auto cfg = theory_config(obj, m, 40);
  const Point x0 = random_point(m, 3);
  const auto res = run(obj, x0, cfg);
  const auto &c = cfg.constants;
  ASSERT_EQ(static_cast<Index>(res.trace.records.size()), 40);
  double sum_cubes = 0.0;
  for (const auto &r : res.trace.records) {
    EXPECT_GE(r.actual_decrease, r.descent_rhs - 1e-10 * (1.0 + std::abs(r.f))) << r.k;
    EXPECT_GE(r.actual_decrease, 0.0);
    EXPECT_NEAR(r.descent_rhs, c.tau1.value / 4.0 * std::pow(r.step_norm, 3),
                1e-15 * (1.0 + r.descent_rhs));
    EXPECT_LE(r.step_norm,
              3.0 / c.sigma.value *
                      std::max(c.k_B.value, std::sqrt(c.sigma.value * r.grad_norm)) +
                  1e-12);
    EXPECT_LE(r.step_norm, c.R.value);
    sum_cubes += std::pow(r.step_norm, 3);
  }
  for (size_t k = 1; k < res.trace.records.size(); ++k)
    EXPECT_LE(res.trace.records[k].f, res.trace.records[k - 1].f);
  const double f_min = res.trace.records.back().f - res.trace.records.back().actual_decrease;
  EXPECT_LE(sum_cubes, 4.0 * (res.trace.records.front().f - f_min) / c.tau1.value + 1e-12);
  EXPECT_LE(geometry::feasibility_residual(m, res.x_out), 1e-10);
}

TEST(Run, OutputIndexAndGradientBound) {
  const auto m = ManifoldDescriptor::stiefel(6, 3);
  const auto obj = make_quadratic_problem(pca_matrix(), Sense::Minimize);
  auto cfg = theory_config(obj, m, 30);
  const auto res = run(obj, random_point(m, 5), cfg);
  const auto &recs = res.trace.records;
  Index best = 0;
  for (Index k = 1; k < static_cast<Index>(recs.size()); ++k)
    if (std::pow(recs[static_cast<size_t>(k)].step_norm, 3) <
        std::pow(recs[static_cast<size_t>(best)].step_norm, 3))
      best = k;
  EXPECT_EQ(res.k_star, best);
  const double xi = recs[static_cast<size_t>(best)].step_norm;
  if (xi <= cfg.constants.C_g.value) {
    const double g = riemannian_grad(obj, Point(m, res.x_out)).norm();
    const double tau2 = cfg.constants.tau2.value;
    EXPECT_LE(g, tau2 * xi * xi + 1e-8 * tau2);
  }
}

TEST(Run, DeterministicAcrossRunsAndExecution) {
  const auto m = ManifoldDescriptor::parse("product:6xstiefel:3,2");
  const auto obj = make_quadratic_problem(sample_goe(12, 4), Sense::Maximize);
  auto cfg = theory_config(obj, m, 10);
  const Point x0 = random_point(m, 9);
  const auto a = run(obj, x0, cfg);
  cfg.exec = Execution::Serial;
  const auto b = run(obj, x0, cfg);
  std::ostringstream sa, sb;
  write_trace_csv(sa, a.trace.records);
  write_trace_csv(sb, b.trace.records);
  EXPECT_EQ(sa.str(), sb.str());
  EXPECT_EQ(a.x_out, b.x_out);
}

TEST(Run, EarlyStopCertifiesPca) {
  const auto m = ManifoldDescriptor::stiefel(6, 3);
  const auto obj = make_quadratic_problem(pca_matrix(), Sense::Minimize);
  SolverConfig cfg;
  ConstantsOptions co;
  co.sigma_override = 1.0;
  cfg.constants = compute_constants(obj, m, co);
  cfg.max_iters = 200;
  cfg.stop_rule = StopRule::EarlySmallStep;
  const auto res = run(obj, random_point(m, 2), cfg);
  EXPECT_LT(static_cast<Index>(res.trace.records.size()), 200);
  EXPECT_EQ(res.trace.status, SolveStatus::Converged);
  EXPECT_TRUE(res.certified.first_order);
  EXPECT_TRUE(res.certified.second_order);
  EXPECT_GT(res.lambda_lipschitz, 0.0);
  // reached the global minimum (sum of the three smallest eigenvalues)
  EXPECT_NEAR(obj.eval_f(res.x_out), -6.0, 1e-8);
}

TEST(Run, GradientSubsolverAgreesWithExactAtSolution) {
  const auto m = ManifoldDescriptor::stiefel(6, 3);
  const auto obj = make_quadratic_problem(pca_matrix(), Sense::Minimize);
  SolverConfig cfg;
  ConstantsOptions co;
  co.sigma_override = 2.0;
  cfg.constants = compute_constants(obj, m, co);
  cfg.max_iters = 300;
  cfg.stop_rule = StopRule::EarlySmallStep;
  cfg.subsolver = SubsolverKind::GradientDescent;
  const auto res = run(obj, random_point(m, 2), cfg);
  EXPECT_NEAR(obj.eval_f(res.x_out), -6.0, 1e-6);
  for (const auto &r : res.trace.records)
    EXPECT_GE(r.subsolver_iters, 0);
}

TEST(Run, MatrixFreePathMatchesDenseAtSolution) {
  const auto m = ManifoldDescriptor::parse("product:8xsphere:3");
  const auto obj = make_quadratic_problem(sample_goe(8, 6), Sense::Maximize);
  SolverConfig cfg;
  ConstantsOptions co;
  co.sigma_override = 5.0;
  cfg.constants = compute_constants(obj, m, co);
  cfg.max_iters = 400;
  cfg.stop_rule = StopRule::EarlySmallStep;
  cfg.subsolver = SubsolverKind::GradientDescent;
  const Point x0 = random_point(m, 4);
  const auto dense = run(obj, x0, cfg);
  cfg.dense_limit = 0;
  const auto free = run(obj, x0, cfg);
  EXPECT_TRUE(free.certified.first_order);
  EXPECT_NEAR(obj.eval_f(free.x_out), obj.eval_f(dense.x_out), 1e-6);
}

TEST(LambdaMin, ZeroObjective) {
  const auto m = ManifoldDescriptor::stiefel(4, 2);
  const auto obj = make_quadratic_problem(Matrix::Zero(4, 4), Sense::Minimize);
  EXPECT_EQ(lambda_min_tangent(obj, m, random_point(m, 1).value()).value, 0.0);
}

TEST(LambdaMin, SphereClosedForm) {
  const auto m = ManifoldDescriptor::sphere(3);
  const Matrix d = Vector(Eigen::Vector3d(1.0, 2.0, 3.0)).asDiagonal();
  const auto obj = make_quadratic_problem(d, Sense::Minimize);
  Matrix x = Matrix::Zero(3, 1);
  x(0) = 1.0;
  const auto e = lambda_min_tangent(obj, m, x);
  EXPECT_NEAR(e.value, 2.0, 1e-12);
  EXPECT_NEAR(std::abs(e.direction(1)), 1.0, 1e-12);
}

TEST(LambdaMin, BelowRandomRayleighQuotients) {
  const auto m = ManifoldDescriptor::stiefel(5, 2);
  const auto obj = make_quadratic_problem(sample_goe(5, 2), Sense::Minimize);
  const Point x = random_point(m, 3);
  const double lmin = lambda_min_tangent(obj, m, x.value()).value;
  double sampled = std::numeric_limits<double>::infinity();
  for (std::uint64_t s = 0; s < 10000; ++s) {
    const Tangent xi = random_tangent(x, s, 1.0);
    sampled = std::min(sampled, inner(riemannian_hess_vec(obj, x, xi).value(), xi.value()));
  }
  EXPECT_LE(lmin, sampled + 1e-12);
  EXPECT_LE(sampled - lmin, 0.05 * (1.0 + std::abs(lmin)));
}

TEST(LambdaMin, LanczosPathMatchesDense) {
  const auto m = ManifoldDescriptor::parse("product:10xstiefel:3,2");
  const auto obj = make_quadratic_problem(sample_goe(20, 3), Sense::Maximize);
  const Point x = random_point(m, 7);
  const double dense = lambda_min_tangent(obj, m, x.value()).value;
  const double lanczos = lambda_min_tangent(obj, m, x.value(), 0).value;
  EXPECT_NEAR(lanczos, dense, 1e-8 * (1.0 + std::abs(dense)));
}

TEST(Certify, PcaMinimizerAndSaddle) {
  const Matrix a = pca_matrix();
  const auto m = ManifoldDescriptor::stiefel(6, 3);
  const auto obj = make_quadratic_problem(a, Sense::Minimize);
  Eigen::SelfAdjointEigenSolver<Matrix> es(a);
  const Matrix best = es.eigenvectors().leftCols(3);
  for (double eps : {1e-2, 1e-6, 1e-10}) {
    const auto r = certify_stationarity(obj, m, best, eps);
    EXPECT_TRUE(r.first_order);
    EXPECT_TRUE(r.second_order);
    EXPECT_NEAR(r.lambda_threshold, -std::sqrt(eps), 1e-15);
  }
  Matrix saddle(6, 3);
  saddle << es.eigenvectors().col(0), es.eigenvectors().col(1), es.eigenvectors().col(3);
  const auto r = certify_stationarity(obj, m, saddle, 1e-6);
  EXPECT_TRUE(r.first_order);
  EXPECT_FALSE(r.second_order);
  // most negative curvature swaps eigenvector 3 (value 1) with 2 (value -1)
  EXPECT_NEAR(r.lambda_min, 2.0 * (-1.0 - 1.0), 1e-10);
}

TEST(Rates, HalvingSequencePasses) {
  std::vector<IterationRecord> t;
  for (int k = 0; k < 20; ++k) {
    IterationRecord r;
    r.k = k;
    r.f = std::ldexp(1.0, -k);
    r.actual_decrease = std::ldexp(1.0, -k - 1);
    t.push_back(r);
  }
  RateOptions o;
  o.p = 1.5;
  const auto rep = diagnose_rates(t, o);
  EXPECT_EQ(rep.pairs, 20);
  EXPECT_EQ(rep.recurrence_ok, rep.pairs);
  EXPECT_EQ(rep.recurrence_fraction, 1.0);
}

TEST(Rates, SlowSequenceFailsHalving) {
  std::vector<IterationRecord> t;
  for (int k = 0; k < 10; ++k) {
    IterationRecord r;
    r.f = 1.0 / (1.0 + k);
    t.push_back(r);
  }
  RateOptions o;
  const auto rep = diagnose_rates(t, o);
  EXPECT_LT(rep.recurrence_fraction, 0.5);
  EXPECT_GT(rep.pairs, 0);
}

TEST(Rates, NonpositiveGapsSkipped) {
  std::vector<IterationRecord> t(4);
  t[0].f = 1.0;
  t[1].f = 0.5;
  t[2].f = 0.0;
  t[3].f = -0.1;
  RateOptions o;
  const auto rep = diagnose_rates(t, o);
  EXPECT_GT(rep.skipped, 0);
}

TEST(Rates, QuadraticSequencePasses) {
  std::vector<IterationRecord> t;
  for (int k = 0; k < 4; ++k) {
    IterationRecord r;
    r.f = 1.0;
    r.step_norm = std::pow(10.0, -std::pow(2.0, k));
    t.push_back(r);
  }
  RateOptions o;
  o.tau2 = 0.5;
  o.delta0 = 1.0; // 2 tau2 / delta0 = 1
  const auto rep = diagnose_rates(t, o);
  EXPECT_EQ(rep.quadratic_pairs, 3);
  EXPECT_EQ(rep.quadratic_ok, 3);
  ASSERT_EQ(rep.q.size(), 3u);
  for (double q : rep.q)
    EXPECT_NEAR(q, 2.0, 1e-12);
}

TEST(Rates, RecurrenceForGeneralDegree) {
  // z_{k+1} from z_k = z_{k+1} + z_{k+1}^{3/(2p)} exactly, p = 2.
  RateOptions o;
  o.p = 2.0;
  o.tau_f = 1.3;
  o.tau1 = 2.0;
  o.tau2 = 3.0;
  const double scale = rate_scale(o);
  const double expected = std::pow(1.3, 3.0) * std::pow(2.0, 4.0) * std::pow(3.0, 6.0);
  EXPECT_NEAR(scale, expected, 1e-9 * expected);
  std::vector<IterationRecord> t;
  double z = 5.0;
  for (int k = 0; k < 15; ++k) {
    IterationRecord r;
    r.f = z / scale;
    t.push_back(r);
    // solve w + w^{3/4} = z by bisection
    double lo = 0.0, hi = z;
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (lo + hi);
      (mid + std::pow(mid, 0.75) > z ? hi : lo) = mid;
    }
    z = lo * 0.999;
  }
  const auto rep = diagnose_rates(t, o);
  EXPECT_EQ(rep.recurrence_ok, rep.pairs - 1); // the last pair uses the final gap
  EXPECT_THROW(rate_scale(RateOptions{}), DomainError);
}

TEST(Rates, PcaTailIsQuadratic) {
  const auto m = ManifoldDescriptor::stiefel(6, 3);
  const auto obj = make_quadratic_problem(pca_matrix(), Sense::Minimize);
  SolverConfig cfg;
  ConstantsOptions co;
  co.sigma_override = 1.0;
  cfg.constants = compute_constants(obj, m, co);
  cfg.max_iters = 60;
  cfg.epsilon = 1e-14;
  cfg.stop_rule = StopRule::EarlySmallStep;
  const auto res = run(obj, random_point(m, 2), cfg);
  RateOptions o;
  const auto rep = diagnose_rates(res.trace.records, o);
  ASSERT_FALSE(rep.q.empty());
  // last ratio before round-off dominates
  const auto &t = res.trace.records;
  double tail = 0.0;
  size_t qi = 0;
  for (size_t k = 0; k + 1 < t.size(); ++k) {
    if (!(t[k].step_norm > 0.0 && t[k].step_norm < 1.0 && t[k + 1].step_norm > 0.0))
      continue;
    EXPECT_NEAR(rep.q[qi], std::log(t[k + 1].step_norm) / std::log(t[k].step_norm), 1e-15);
    if (t[k + 1].step_norm > 1e-12)
      tail = rep.q[qi];
    ++qi;
  }
  EXPECT_EQ(qi, rep.q.size());
  EXPECT_GE(tail, 1.5);
}
