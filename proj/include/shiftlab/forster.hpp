#pragma once

#include <variant>
#include <vector>

#include "shiftlab/errors.hpp"
#include "shiftlab/point.hpp"
#include "shiftlab/rng.hpp"

namespace shiftlab {

/// Empirical second-moment matrix (1/|S|) sum x x^T of a unit point set.
/// Symmetric PSD with unit trace. Throws NonUnitInput if any norm deviates
/// from 1 by more than 1e-9.
Eigen::MatrixXd second_moment(const std::vector<Point>& unit_points);

/// True iff every eigenvalue of second_moment(S) lies in
/// [(1-eps)/n, (1+eps)/n].
bool is_radially_isotropic(const std::vector<Point>& unit_points, double eps);

/// Tightest eps at which the set is isotropic: max_i |n*lambda_i - 1|.
double isotropy_eps(const std::vector<Point>& unit_points);

struct ForsterTransform {
  Eigen::MatrixXd map;  // invertible n x n matrix A
  int iterations = 0;
};

struct ForsterSubspace {
  Eigen::MatrixXd basis;     // n x d orthonormal, d < n
  std::vector<int> members;  // indices of S within 1e-9 of the subspace
};

using ForsterOutcome = std::variant<ForsterTransform, ForsterSubspace>;

/// Indices of points within `tol` of the span of `basis` (orthonormal cols).
std::vector<int> subspace_members(const std::vector<Point>& points,
                                  const Eigen::MatrixXd& basis,
                                  double tol = 1e-9);

/// Counting certificate |S cap W| > (dim W / n) |S|, in exact integer
/// arithmetic.
bool counting_condition(std::size_t member_count, int sub_dim,
                        std::size_t total, int ambient_dim);

/// Either an invertible A whose normalized images {Ax/||Ax||} are
/// eps-isotropic, or a proper subspace holding a supra-proportional share of
/// S. Every returned object is re-verified before return; BudgetExceeded
/// signals a numerically hard input. Accepts non-unit inputs (points are
/// normalized internally); norms below 1e-12 raise NonUnitInput.
/// max_iters <= 0 selects the default 1000*n.
ForsterOutcome forster_transform(const std::vector<Point>& points, double eps,
                                 int max_iters = 0);

/// One stage of the subspace-chain decomposition: a subspace V (orthonormal
/// basis), an invertible transform A on V (basis coordinates), and its
/// inverse. The transformed members {A B^T x / ||.||, x in S cap V} are
/// eps-isotropic inside V and |S cap V| > (dim V / n) |S|.
struct ForsterStage {
  Eigen::MatrixXd basis;          // n x d, orthonormal columns
  Eigen::MatrixXd transform;      // d x d
  Eigen::MatrixXd transform_inv;  // d x d

  int ambient_dim() const { return static_cast<int>(basis.rows()); }
  int dim() const { return static_cast<int>(basis.cols()); }

  /// P_V x expressed in basis coordinates.
  Eigen::VectorXd to_subspace(const Point& x) const {
    return basis.transpose() * x;
  }

  /// A P_V x / ||A P_V x||, in basis coordinates. Throws on near-zero norm.
  Eigen::VectorXd transformed_unit(const Point& x) const;
};

/// Loop of at most n rounds shrinking V until the transform certificate
/// holds; per-round failure budget delta/n realized by repeated attempts
/// with randomized iteration restarts.
ForsterStage forster_decompose(const std::vector<Point>& points, double delta,
                               Rng& rng, double eps = 0.5);

}  // namespace shiftlab
