#pragma once

#include <crrn/manifold.hpp>
#include <crrn/objective.hpp>
#include <crrn/trace.hpp>

namespace crrn {

struct RgdConfig {
  /// Fixed step size (see default_rgd_step).
  double step_size = 0.0;
  Index max_iters = 10000;
  double grad_tol = 1e-6;
  Retraction retraction = Retraction::Polar;
  bool record_timings = false;
};

/// 1 / (2 ell_f + 2 G L2).
double default_rgd_step(const ConstantSet &c);

/// x_{k+1} = Retr(x_k, -alpha grad f(x_k)). The row for the iterate that
/// meets grad_tol is recorded with a zero step.
SolveTrace run_rgd(const ObjectiveHandle &obj, const Point &x0,
                   const RgdConfig &cfg);

struct RtrConfig {
  /// <= 0 selects sqrt(intrinsic_dim) / 8 and sqrt(intrinsic_dim).
  double initial_radius = 0.0;
  double max_radius = 0.0;
  double rho_accept = 0.1;
  double rho_expand = 0.75;
  /// Truncated CG stops at ||r|| <= ||g|| min(kappa, ||g||^theta).
  double kappa = 0.1;
  double theta = 1.0;
  /// <= 0 caps inner iterations at intrinsic_dim.
  Index max_inner = 0;
  Index max_iters = 1000;
  double grad_tol = 1e-6;
  Retraction retraction = Retraction::Polar;
  bool record_timings = false;
};

/// Riemannian trust region with a Steihaug-Toint truncated CG inner solver
/// working on ambient tangent matrices.
SolveTrace run_rtr(const ObjectiveHandle &obj, const Point &x0,
                   const RtrConfig &cfg);

} // namespace crrn
