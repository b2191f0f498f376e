#include "mcuos/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mcuos/errors.hpp"

namespace mcuos {

Subspace::Subspace(Eigen::MatrixXd basis, double tolerance) : basis_(std::move(basis)) {
  if (basis_.cols() < 1 || basis_.cols() > basis_.rows())
    fail(ErrorCode::ShapeMismatch, "subspace basis must be m x s with 1 <= s <= m");
  const double err = orthonormality_error(basis_);
  if (!(err <= tolerance)) {
    std::ostringstream os;
    os << "basis is not orthonormal (deviation " << err << ")";
    fail(ErrorCode::InvalidArgument, os.str());
  }
}

void check_collection(const SubspaceCollection& subspaces) {
  if (subspaces.empty()) fail(ErrorCode::InsufficientData, "empty subspace collection");
  const auto m = subspaces.front().ambient_dim();
  const auto s = subspaces.front().dim();
  for (const auto& sub : subspaces)
    if (sub.ambient_dim() != m || sub.dim() != s)
      fail(ErrorCode::ShapeMismatch, "subspaces in a collection must share (m, s)");
}

double orthonormality_error(const Eigen::MatrixXd& basis) {
  const Eigen::MatrixXd gram = basis.transpose() * basis;
  return (gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
}

void fix_column_signs(Eigen::MatrixXd& basis) {
  for (Eigen::Index j = 0; j < basis.cols(); ++j) {
    auto col = basis.col(j);
    const double scale = col.cwiseAbs().maxCoeff();
    if (scale == 0.0) continue;
    for (Eigen::Index i = 0; i < col.size(); ++i) {
      if (std::abs(col(i)) > 1e-12 * scale) {
        if (col(i) < 0.0) col = -col;
        break;
      }
    }
  }
}

namespace {

// Q, R of a thin Householder QR.
void thin_qr(const Eigen::MatrixXd& matrix, Eigen::MatrixXd& q, Eigen::VectorXd& r_diag) {
  const auto m = matrix.rows();
  const auto k = matrix.cols();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(matrix);
  q = qr.householderQ() * Eigen::MatrixXd::Identity(m, k);
  r_diag = qr.matrixQR().diagonal().head(k);
}

}  // namespace

Subspace orthonormalize(const Eigen::MatrixXd& matrix) {
  const auto m = matrix.rows();
  const auto k = matrix.cols();
  if (k < 1 || k > m) fail(ErrorCode::ShapeMismatch, "orthonormalize expects an m x k matrix with 1 <= k <= m");
  if (!matrix.allFinite()) fail(ErrorCode::InvalidArgument, "orthonormalize: non-finite entries");
  Eigen::MatrixXd q;
  Eigen::VectorXd r;
  thin_qr(matrix, q, r);
  const double scale = std::max(1.0, matrix.colwise().norm().maxCoeff());
  for (Eigen::Index j = 0; j < k; ++j)
    if (std::abs(r(j)) < tol::kRank * scale)
      fail(ErrorCode::RankDeficient, "orthonormalize: matrix is rank deficient");
  fix_column_signs(q);
  return Subspace(std::move(q));
}

Eigen::MatrixXd reorthonormalize(const Eigen::MatrixXd& nearly_orthonormal) {
  Eigen::MatrixXd q;
  Eigen::VectorXd r;
  thin_qr(nearly_orthonormal, q, r);
  for (Eigen::Index j = 0; j < q.cols(); ++j)
    if (r(j) < 0.0) q.col(j) = -q.col(j);
  return q;
}

Subspace random_subspace(Eigen::Index m, Eigen::Index s, Rng& rng) {
  return orthonormalize(gaussian_matrix(m, s, rng));
}

Eigen::MatrixXd top_eigenvectors(const Eigen::MatrixXd& symmetric, Eigen::Index count) {
  const auto n = symmetric.rows();
  if (symmetric.cols() != n || count < 0 || count > n)
    fail(ErrorCode::ShapeMismatch, "top_eigenvectors: bad shape");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(symmetric);
  if (eig.info() != Eigen::Success) fail(ErrorCode::NumericalFailure, "symmetric eigensolver failed");
  // Eigenvalues come back ascending.
  Eigen::MatrixXd out = eig.eigenvectors().rightCols(count).rowwise().reverse();
  fix_column_signs(out);
  return out;
}

double subspace_distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    fail(ErrorCode::ShapeMismatch, "subspace_distance: subspaces differ in (m, s)");
  // ||(I - A A^T) B||_F equals sqrt(s - ||A^T B||_F^2) for orthonormal bases
  // without the cancellation near zero.
  return (b - a * (a.transpose() * b)).norm();
}

double subspace_distance(const Subspace& a, const Subspace& b) {
  return subspace_distance(a.basis(), b.basis());
}

Eigen::VectorXd project(const Subspace& sub, const Eigen::VectorXd& x) {
  if (x.size() != sub.ambient_dim()) fail(ErrorCode::ShapeMismatch, "project: length mismatch");
  return sub.basis() * (sub.basis().transpose() * x);
}

SubspaceMatch match_subspaces(const SubspaceCollection& learned, const SubspaceCollection& truth) {
  check_collection(learned);
  check_collection(truth);
  if (learned.size() != truth.size())
    fail(ErrorCode::ShapeMismatch, "match_subspaces: collections differ in size");
  if (learned.front().ambient_dim() != truth.front().ambient_dim() ||
      learned.front().dim() != truth.front().dim())
    fail(ErrorCode::ShapeMismatch, "match_subspaces: collections differ in (m, s)");

  const int count = static_cast<int>(learned.size());
  const double s = static_cast<double>(learned.front().dim());
  Eigen::MatrixXd score(count, count);
  for (int l = 0; l < count; ++l)
    for (int p = 0; p < count; ++p)
      score(l, p) = (learned[l].basis().transpose() * truth[p].basis()).norm();

  SubspaceMatch match;
  match.truth_index.assign(count, -1);
  match.distances.assign(count, 0.0);
  std::vector<bool> truth_used(count, false);
  for (int round = 0; round < count; ++round) {
    int best_l = -1, best_p = -1;
    double best = -1.0;
    for (int l = 0; l < count; ++l) {
      if (match.truth_index[l] >= 0) continue;
      for (int p = 0; p < count; ++p) {
        if (truth_used[p]) continue;
        if (score(l, p) > best) {
          best = score(l, p);
          best_l = l;
          best_p = p;
        }
      }
    }
    match.truth_index[best_l] = best_p;
    truth_used[best_p] = true;
  }
  double total = 0.0;
  for (int l = 0; l < count; ++l) {
    const double gap = std::max(0.0, s - std::pow(score(l, match.truth_index[l]), 2));
    match.distances[l] = std::sqrt(gap / s);
    total += match.distances[l];
  }
  match.d_avg = total / count;
  return match;
}

}  // namespace mcuos
