#pragma once

#include <crrn/cubic.hpp>
#include <crrn/manifold.hpp>
#include <crrn/objective.hpp>
#include <crrn/trace.hpp>

#include <cstdint>
#include <optional>
#include <vector>

namespace crrn {

enum class SubsolverKind { Exact, GradientDescent };
enum class StopRule { FixedT, EarlySmallStep };

struct SolverConfig {
  ConstantSet constants;
  double epsilon = 1e-6;
  /// Outer iteration budget T.
  Index max_iters = 1000;
  SubsolverKind subsolver = SubsolverKind::Exact;
  GdOptions gd;
  StopRule stop_rule = StopRule::FixedT;
  std::uint64_t seed = 0;
  Retraction retraction = Retraction::Polar;
  Execution exec = Execution::Parallel;
  /// Above this intrinsic dimension the subproblem is matrix-free (forces
  /// the gradient subsolver).
  Index dense_limit = 2000;
  /// Lipschitz estimate of lambda_min^M used by the early-stop proxy;
  /// sampled at the start of the run when absent.
  std::optional<double> lambda_lipschitz;
  /// Store wall-clock times in the trace (otherwise 0, keeping traces
  /// byte-reproducible).
  bool record_timings = false;
};

struct SolveResult {
  SolveTrace trace;
  Index k_star = 0;
  /// x_{k*+1} = Retr(x_{k*}, xi_{k*}).
  Matrix x_out;
  StationarityReport certified;
  /// Lipschitz estimate used by the early-stop rule (0 when unused).
  double lambda_lipschitz = 0.0;
};

/// Cubic-regularized Riemannian Newton iteration from x0. A subsolver
/// DivergenceError is rethrown with the iteration index in its message.
SolveResult run(const ObjectiveHandle &obj, const Point &x0,
                const SolverConfig &cfg);

struct TangentEigen {
  double value = 0.0;
  /// Ambient unit tangent attaining the value.
  Matrix direction;
};

/// Smallest eigenvalue of the Riemannian Hessian restricted to T_xM. Dense
/// basis eigensolve up to dense_limit, shifted Lanczos above.
TangentEigen lambda_min_tangent(const ObjectiveHandle &obj,
                                const ManifoldDescriptor &m, const Matrix &x,
                                Index dense_limit = 2000,
                                Execution exec = Execution::Parallel);

StationarityReport certify_stationarity(const ObjectiveHandle &obj,
                                        const ManifoldDescriptor &m,
                                        const Matrix &x, double epsilon,
                                        Index dense_limit = 2000);

/// Sampled max |lambda_min^M(x) - lambda_min^M(y)| / ||x - y|| over pairs
/// y = Retr(x, xi) around random points.
double estimate_lambda_lipschitz(const ObjectiveHandle &obj,
                                 const ManifoldDescriptor &m, Index samples,
                                 double radius, std::uint64_t seed,
                                 Index dense_limit = 2000);

struct RateOptions {
  /// Gradient-dominance degree (>= 1).
  double p = 1.5;
  double tau_f = 1.0;
  double f_bar = 0.0;
  double tau1 = 1.0;
  double tau2 = 1.0;
  /// Enables the quadratic-rate check (2 tau2/delta0)||xi_{k+1}|| <=
  /// ((2 tau2/delta0)||xi_k||)^2.
  std::optional<double> delta0;
  /// Relative slack in each pair comparison.
  double rel_tol = 1e-12;
};

struct RateReport {
  Index pairs = 0;
  Index skipped = 0;
  /// Pairs with z_k >= z_{k+1} + z_{k+1}^{3/(2p)} (p = 3/2: z_{k+1} <= z_k/2
  /// on unscaled gaps).
  Index recurrence_ok = 0;
  /// Pairs with z_{k+1} <= z_k^{2p/3} (p != 3/2 only).
  Index power_ok = 0;
  double recurrence_fraction = 0.0;
  double power_fraction = 0.0;
  /// log||xi_{k+1}|| / log||xi_k|| over pairs with 0 < ||xi_k|| < 1.
  std::vector<double> q;
  Index quadratic_pairs = 0;
  Index quadratic_ok = 0;
  double quadratic_fraction = 0.0;
};

/// z_k scaling for degree p (undefined at p = 3/2).
double rate_scale(const RateOptions &opts);

RateReport diagnose_rates(const std::vector<IterationRecord> &trace,
                          const RateOptions &opts);

} // namespace crrn
