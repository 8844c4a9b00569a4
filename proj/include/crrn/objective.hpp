#pragma once

#include <crrn/manifold.hpp>
#include <crrn/parallel.hpp>
#include <crrn/types.hpp>

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>

namespace crrn {

enum class Sense { Minimize, Maximize };

struct ProblemMetadata {
  std::string name;
  bool is_quadratic = false;
  Sense sense = Sense::Minimize;
  /// Problem data (the symmetric matrix A for quadratic problems).
  std::shared_ptr<const Matrix> data;
};

/// Ambient-smooth objective. The library always minimizes; maximization
/// problems are ingested with their sign flipped.
struct ObjectiveHandle {
  std::function<double(const Matrix &)> eval_f;
  std::function<Matrix(const Matrix &)> eval_grad_ambient;
  /// (x, direction) -> Euclidean Hessian applied to direction.
  std::function<Matrix(const Matrix &, const Matrix &)> eval_hess_vec_ambient;
  ProblemMetadata metadata;
};

/// f(U) = s <A, U U^T> with s = -1 for Maximize. A is symmetrized.
ObjectiveHandle make_quadratic_problem(const Matrix &a, Sense sense,
                                       std::string name = "quadratic");

/// f(X) = <C, X>.
ObjectiveHandle make_linear_problem(const Matrix &c,
                                    std::string name = "linear");

/// Gaussian orthogonal ensemble: off-diagonal N(0, 1/n), diagonal N(0, 2/n).
Matrix sample_goe(Index n, std::uint64_t seed);

/// Riemannian Hessian at a fixed point, with the Euclidean gradient cached.
///
/// apply(xi) = P_x(D G~(x)[xi]) where G~(y) = P~_y(grad f(y)) extends the
/// Riemannian gradient to ambient y with the algebraic projection formula.
class RiemannianHessian {
 public:
  RiemannianHessian(const ObjectiveHandle &obj, const ManifoldDescriptor &m,
                    Matrix x);

  Matrix apply(const Matrix &xi) const;
  /// vec -> vec form of P o Hess o P, for matrix-free solvers.
  Vector apply_vec(const Vector &v) const;

  const Matrix &point() const { return x_; }
  const Matrix &euclidean_gradient() const { return egrad_; }
  const Matrix &gradient() const { return grad_; }
  const ManifoldDescriptor &manifold() const { return *manifold_; }

 private:
  const ObjectiveHandle *obj_;
  const ManifoldDescriptor *manifold_;
  Matrix x_;
  Matrix egrad_;
  Matrix grad_;
};

Tangent riemannian_grad(const ObjectiveHandle &obj, const Point &x);
Tangent riemannian_hess_vec(const ObjectiveHandle &obj, const Point &x,
                            const Tangent &xi);

/// B(i, j) = <e_i, Hess[e_j]> over the columns of `basis` (symmetrized).
/// Columns are independent; the parallel path reproduces the serial one.
Matrix hessian_coordinates(const RiemannianHessian &hess, const Matrix &basis,
                           Execution exec = Execution::Parallel);

// ---------------------------------------------------------------------------
// Algorithm constants

enum class Provenance { Analytic, Sampled, User };
std::string to_string(Provenance p);

struct Constant {
  double value = 0.0;
  Provenance provenance = Provenance::Analytic;
};

struct ConstantSet {
  Constant G, ell_f, ell_H, k_B, L1, L2, L_H, C_g, R, sigma, tau1, tau2;
  /// Right-hand side of the sigma rule (sigma must exceed it).
  double sigma_lower_bound = 1.0;
  /// False when a user-supplied sigma does not satisfy the sigma rule.
  bool theory_compliant = true;
};

enum class ConstantsMode { Analytic, Sampled };

struct ConstantsOptions {
  ConstantsMode mode = ConstantsMode::Analytic;
  Index sample_budget = 32;
  double inflation = 1.5;
  /// sigma = (1 + margin) * lower bound.
  double sigma_margin = 0.01;
  std::optional<double> k_B_override;
  std::optional<double> sigma_override;
  std::uint64_t seed = 0;
  Execution exec = Execution::Parallel;
};

/// Raw problem quantities before the sigma rule is applied.
struct ProblemBounds {
  Constant G, ell_f, ell_H, k_B;
};

ProblemBounds estimate_bounds(const ObjectiveHandle &obj,
                              const ManifoldDescriptor &m,
                              const ConstantsOptions &opts);

/// Applies L1 = 1, L2 = 1/2, the pullback Lipschitz formula
/// L_H = 13.66 G + 12.55 ell_f + 4 ell_H, C_g = 1/8.62, and the sigma/tau/R
/// rules. Throws ConstantsError if a rule-derived sigma gives tau1 <= 0.
ConstantSet assemble_constants(const ProblemBounds &bounds,
                               double sigma_margin = 0.01,
                               std::optional<double> sigma_override = {});

ConstantSet compute_constants(const ObjectiveHandle &obj,
                              const ManifoldDescriptor &m,
                              const ConstantsOptions &opts = {});

/// sigma rule lower bound max{(sqrt(10 L2 kB + 2/3 LH + 9 L2^2 G) +
/// 3 L2 sqrt(G))^2, 1}.
double sigma_lower_bound(double L2, double k_B, double L_H, double G);

} // namespace crrn
