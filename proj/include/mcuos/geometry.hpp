#pragma once

#include <vector>

#include <Eigen/Dense>

#include "mcuos/random.hpp"

namespace mcuos {

namespace tol {
inline constexpr double kOrthonormality = 1e-10;
inline constexpr double kRank = 1e-10;
}  // namespace tol

/// A point on the Grassmann manifold G(m, s), stored as an m x s orthonormal basis.
class Subspace {
 public:
  /// Wraps an orthonormal basis. Throws InvalidArgument if the columns deviate
  /// from orthonormality by more than `tolerance` (max-abs of B^T B - I).
  explicit Subspace(Eigen::MatrixXd basis, double tolerance = tol::kOrthonormality);

  const Eigen::MatrixXd& basis() const noexcept { return basis_; }
  Eigen::Index ambient_dim() const noexcept { return basis_.rows(); }
  Eigen::Index dim() const noexcept { return basis_.cols(); }

 private:
  Eigen::MatrixXd basis_;
};

using SubspaceCollection = std::vector<Subspace>;

/// Throws unless the collection is non-empty and every member shares (m, s).
void check_collection(const SubspaceCollection& subspaces);

double orthonormality_error(const Eigen::MatrixXd& basis);

/// Flips columns so that the first entry that is not negligible is positive.
void fix_column_signs(Eigen::MatrixXd& basis);

/// Thin QR with the deterministic sign convention. Throws RankDeficient.
Subspace orthonormalize(const Eigen::MatrixXd& matrix);

/// Thin QR that keeps each column as close as possible to the input (positive
/// R diagonal); used to remove floating-point drift from nearly orthonormal bases.
Eigen::MatrixXd reorthonormalize(const Eigen::MatrixXd& nearly_orthonormal);

Subspace random_subspace(Eigen::Index m, Eigen::Index s, Rng& rng);

/// Eigenvectors of a symmetric matrix for its `count` largest eigenvalues, in
/// descending eigenvalue order, sign-fixed. Throws NumericalFailure.
Eigen::MatrixXd top_eigenvectors(const Eigen::MatrixXd& symmetric, Eigen::Index count);

/// d_u(a, b) = sqrt(s - ||Da^T Db||_F^2).
double subspace_distance(const Subspace& a, const Subspace& b);
double subspace_distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

Eigen::VectorXd project(const Subspace& sub, const Eigen::VectorXd& x);

struct SubspaceMatch {
  std::vector<int> truth_index;   // learned subspace l is paired with truth_index[l]
  std::vector<double> distances;  // normalized distance of each pair
  double d_avg = 0.0;
};

/// Greedy no-reuse matching by descending ||D_l^T T_p||_F (ties: lowest indices),
/// then the mean normalized distance between matched pairs.
SubspaceMatch match_subspaces(const SubspaceCollection& learned, const SubspaceCollection& truth);

}  // namespace mcuos
