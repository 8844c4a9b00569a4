#pragma once

#include <crrn/linalg.hpp>
#include <crrn/manifold.hpp>
#include <crrn/objective.hpp>
#include <crrn/types.hpp>

#include <memory>

namespace crrn {

/// min_xi g^T xi + 1/2 xi^T B xi + sigma/6 ||xi||^3 over coordinates xi.
///
/// Dense mode stores B explicitly (coordinates in an orthonormal tangent
/// basis). Matrix-free mode only carries apply_B and works on vec(ambient)
/// tangents; only solve_gd accepts it.
struct CubicSubproblem {
  Vector g;
  Matrix B;
  LinearMap apply_B;
  double sigma = 1.0;
  std::shared_ptr<const TangentBasis> basis;

  static CubicSubproblem dense(Vector g, Matrix B, double sigma);
  static CubicSubproblem matrix_free(Vector g, LinearMap apply_B, double sigma);

  Index dim() const { return g.size(); }
  bool is_dense() const { return !apply_B; }
  Vector apply(const Vector &v) const;
};

struct Certificate {
  /// ||(B + lambda I) xi + g||
  double stationarity = 0.0;
  /// |lambda - sigma ||xi|| / 2|
  double multiplier = 0.0;
  /// max(0, -lambda_min(B + lambda I))
  double curvature = 0.0;
  bool stationarity_ok = false;
  bool multiplier_ok = false;
  bool curvature_ok = false;
  bool all() const { return stationarity_ok && multiplier_ok && curvature_ok; }
};

struct SubproblemSolution {
  Vector xi;
  double lambda_star = 0.0;
  /// m(0) - m(xi)
  double model_decrease = 0.0;
  Certificate certificate;
  Index iterations = 0;
  bool converged = true;
  bool hard_case = false;
  /// solve_gd stalled and handed over to solve_exact.
  bool fell_back = false;
};

double model_value(const CubicSubproblem &sp, const Vector &xi);
Vector model_grad(const CubicSubproblem &sp, const Vector &xi);

/// Global minimizer via eigendecomposition of B and the secular equation
/// ||xi(lambda)|| = 2 lambda / sigma. Dense mode only.
SubproblemSolution solve_exact(const CubicSubproblem &sp);

struct GdOptions {
  /// Stop once ||grad m(xi)|| <= c * grad_norm_outer.
  double c = 0.1;
  /// <= 0 selects default_gd_step(sp).
  double step = 0.0;
  Index max_iters = 10000;
  /// Iterations without relative progress before falling back to solve_exact.
  Index stall_window = 500;
};

/// Fixed-step gradient descent on the model from xi = 0. Throws
/// DivergenceError on a non-finite model value.
SubproblemSolution solve_gd(const CubicSubproblem &sp, double grad_norm_outer,
                            const GdOptions &opts = {});

/// 1 / (||B||_2 + sigma * radius), radius defaulting to the step bound
/// (3 / sigma) max{||B||_2, sqrt(sigma ||g||)}.
double default_gd_step(const CubicSubproblem &sp, double radius = -1.0);

/// Residuals of the three global optimality conditions; a condition passes
/// when its residual is <= tol * (1 + ||g||).
Certificate check_certificate(const CubicSubproblem &sp, const Vector &xi,
                              double lambda_star, double tol = 1e-8);

/// Gradient and Hessian coordinates in an orthonormal tangent basis.
CubicSubproblem assemble_subproblem(const RiemannianHessian &hess,
                                    std::shared_ptr<const TangentBasis> basis,
                                    double sigma,
                                    Execution exec = Execution::Parallel);

/// vec(ambient) formulation using Hessian-vector products only.
CubicSubproblem assemble_matrix_free(const RiemannianHessian &hess,
                                     double sigma);

} // namespace crrn
