#pragma once

#include <crrn/manifold.hpp>
#include <crrn/objective.hpp>
#include <crrn/parallel.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace crrn {

enum class SylvesterMethod { Auto, Kronecker, Eigen };

/// Solves A X + X A = R for symmetric positive definite A. Auto uses the
/// Kronecker system for r <= 20 and A's eigenbasis above.
Matrix solve_sylvester(const Matrix &a, const Matrix &r,
                       SylvesterMethod method = SylvesterMethod::Auto);

/// Derivatives of t -> Retr_polar(X, Z + tV) at t = 0 for one
/// column-orthonormal block. With S = I + Z^T Z and M = V^T Z + Z^T V:
///   S^-1/2 C + C S^-1/2 = -S^-1 M S^-1
///   S^-1/2 D + D S^-1/2 + C^2 = -S^-1 V^T V S^-1 + S^-1 M S^-1 M S^-1
///   Y1 = (X + Z) C + V S^-1/2,  Y2 = 2 V C + 2 (X + Z) D.
struct BlockCurve {
  Matrix S, C, D, Y0, Y1, Y2;
  /// Relative residuals of the two Sylvester equations.
  double residual_C = 0.0;
  double residual_D = 0.0;
};

BlockCurve polar_curve_block(const Matrix &x, const Matrix &z, const Matrix &v,
                             SylvesterMethod method = SylvesterMethod::Auto);

struct CurveDerivatives {
  Matrix Y0, Y1, Y2;
  /// Per-block factors (one entry for a single Stiefel/sphere).
  std::vector<BlockCurve> blocks;
  /// sqrt(sum_b ||S_b^1/2 C_b||^2)
  double sqrt_s_c_norm = 0.0;
  double max_residual = 0.0;
};

/// Blockwise for products. V need not be tangent (the formulas are applied
/// to V as given).
CurveDerivatives polar_curve_derivatives(
    const ManifoldDescriptor &m, const Matrix &x, const Matrix &z,
    const Matrix &v, SylvesterMethod method = SylvesterMethod::Auto);
CurveDerivatives polar_curve_derivatives(const Point &x, const Tangent &z,
                                         const Tangent &v);

struct SampleReport {
  std::string op;
  Index samples = 0;
  Index skipped = 0;
  Index violations = 0;
  double max_ratio = 0.0;
  double bound = 0.0;
  std::uint64_t seed = 0;
  /// Norms (||Z|| or ||xi||, ||V|| or ||eta||) at the largest ratio.
  std::vector<double> worst_case_norms;

  bool passed() const { return violations == 0; }
  std::string to_json() const;
};

struct VerifyOptions {
  Index samples = 1000;
  std::uint64_t seed = 0;
  Execution exec = Execution::Parallel;
  /// Overrides the pullback Lipschitz constant (otherwise assembled from the
  /// problem bounds).
  std::optional<double> L_H;
  Retraction scheme = Retraction::Polar;
};

/// Polar-curve bounds with ||V|| = 1: Sylvester residuals <= 1e-10,
/// ||S^1/2 C|| <= min{||Z||, 1}, ||Y1(Z) - Y1(0)|| <= 2.31 ||Z||,
/// ||Y2(Z) - Y2(0)|| <= 13.66 ||Z||, ||Y1(Z)|| <= 4, and agreement of Y1, Y2
/// with central differences. max_ratio tracks the Y2 bound.
SampleReport verify_curve(const ManifoldDescriptor &m,
                          const VerifyOptions &opts);

/// |g''_{Z,V}(0) - g''_{0,V}(0)| <= L_H ||Z|| with g(t) = f(Retr(X, Z + tV))
/// by five-point differences; ||Z|| log-uniform in [1e-3, 5].
SampleReport verify_pullback_lipschitz(const ObjectiveHandle &obj,
                                       const ManifoldDescriptor &m,
                                       const VerifyOptions &opts);

/// ||grad f(Retr(x, xi))|| <= 2 ||grad of pullback at xi|| for
/// ||xi|| uniform in (0, 1/8.62].
SampleReport verify_cg_bound(const ObjectiveHandle &obj,
                             const ManifoldDescriptor &m,
                             const VerifyOptions &opts);

/// |d^2/dt^2 f(Retr(x, t eta)) - <Hess[eta], eta>| <=
/// max(2 L2 ||grad|| ||eta||^2, 1e-6). L2 = 1/2 for polar; other schemes use
/// the sampled regularity estimate.
SampleReport verify_hess_grad_coupling(const ObjectiveHandle &obj,
                                       const ManifoldDescriptor &m,
                                       const VerifyOptions &opts);

/// ||P_W[V] - Y1(Z, P_X V)|| <= 4.31 ||Z|| with W = Retr(X, Z) and ambient
/// unit V.
SampleReport verify_projection_difference(const ManifoldDescriptor &m,
                                          const VerifyOptions &opts);

struct RegularityEstimate {
  double L1_hat = 0.0;
  double L2_hat = 0.0;
  Index samples = 0;
  Index excluded = 0;
};

/// max ||Retr(x, xi) - x|| / ||xi|| and max ||Retr(x, xi) - x - xi|| /
/// ||xi||^2 with ||xi|| log-uniform in [1e-3, 10].
RegularityEstimate estimate_retraction_regularity(const ManifoldDescriptor &m,
                                                  const VerifyOptions &opts);

/// Checks the estimate against L1 = 1, L2 = 1/2 (polar) with 1e-9 slack.
SampleReport verify_regularity(const ManifoldDescriptor &m,
                               const VerifyOptions &opts);

/// Pullback Lipschitz constant 13.66 G + 12.55 ell_f + 4 ell_H for obj.
double pullback_lipschitz_constant(const ObjectiveHandle &obj,
                                   const ManifoldDescriptor &m,
                                   std::uint64_t seed);

} // namespace crrn
