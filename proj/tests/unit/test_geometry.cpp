#include <numbers>

#include "helpers.hpp"

using namespace mcuos;
using helpers::error_code_of;

TEST_CASE("Subspace rejects bases that are not orthonormal") {
  Eigen::MatrixXd b(3, 2);
  b << 1, 0, 0, 2, 0, 0;
  CHECK(error_code_of([&] { Subspace s(b); }) == ErrorCode::InvalidArgument);
  b(1, 1) = 1;
  CHECK_NOTHROW(Subspace{b});
}

TEST_CASE("orthonormalize spans the input and flags rank loss") {
  Rng rng(1);
  const Eigen::MatrixXd a = gaussian_matrix(7, 3, rng);
  const Subspace s = orthonormalize(a);
  CHECK(orthonormality_error(s.basis()) < 1e-12);
  const Eigen::MatrixXd residual = a - s.basis() * (s.basis().transpose() * a);
  CHECK(residual.norm() < 1e-12);

  Eigen::MatrixXd deficient(4, 2);
  deficient.col(0) << 1, 2, 3, 4;
  deficient.col(1) = 2.0 * deficient.col(0);
  CHECK(error_code_of([&] { orthonormalize(deficient); }) == ErrorCode::RankDeficient);
}

TEST_CASE("fix_column_signs makes the leading significant entry positive") {
  Eigen::MatrixXd b(3, 2);
  b << 0, -1, -1, 0, 0, 0;
  fix_column_signs(b);
  CHECK(b(1, 0) == 1.0);
  CHECK(b(0, 1) == 1.0);
}

TEST_CASE("top_eigenvectors of a diagonal matrix") {
  const Eigen::Vector4d diag(1.0, 5.0, 3.0, -2.0);
  const Eigen::MatrixXd top = top_eigenvectors(diag.asDiagonal().toDenseMatrix(), 2);
  Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(4, 2);
  expected(1, 0) = 1.0;
  expected(2, 1) = 1.0;
  CHECK((top - expected).norm() < 1e-14);
}

TEST_CASE("top_eigenvectors spans the dominant eigenspace of random symmetric matrices") {
  Rng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::MatrixXd g = gaussian_matrix(9, 9, rng);
    const Eigen::MatrixXd a = g + g.transpose();
    const Eigen::MatrixXd top = top_eigenvectors(a, 3);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
    const Eigen::MatrixXd ref = es.eigenvectors().rightCols(3);
    CHECK(helpers::projector_distance(top, ref) < 1e-9);
    CHECK((top.transpose() * a * top).trace() == doctest::Approx(es.eigenvalues().tail(3).sum()).epsilon(1e-12));
  }
}

TEST_CASE("subspace distance on hand-built cases") {
  Eigen::MatrixXd e12 = Eigen::MatrixXd::Zero(4, 2);
  e12(0, 0) = e12(1, 1) = 1;
  Eigen::MatrixXd e34 = Eigen::MatrixXd::Zero(4, 2);
  e34(2, 0) = e34(3, 1) = 1;
  CHECK(subspace_distance(e12, e12) == doctest::Approx(0.0));
  CHECK(subspace_distance(e12, e34) == doctest::Approx(std::sqrt(2.0)));

  const double theta = 0.3;
  Eigen::MatrixXd line_a(2, 1), line_b(2, 1);
  line_a << 1, 0;
  line_b << std::cos(theta), std::sin(theta);
  CHECK(subspace_distance(line_a, line_b) == doctest::Approx(std::sin(theta)).epsilon(1e-14));
}

TEST_CASE("subspace distance metric axioms") {
  Rng rng(3);
  for (int trial = 0; trial < 300; ++trial) {
    const int m = 3 + trial % 8;
    const int s = 1 + trial % (m - 1);
    const Eigen::MatrixXd a = helpers::random_basis(m, s, rng);
    const Eigen::MatrixXd b = helpers::random_basis(m, s, rng);
    const Eigen::MatrixXd c = helpers::random_basis(m, s, rng);
    const double dab = subspace_distance(a, b);
    CHECK(dab == doctest::Approx(helpers::projector_distance(a, b)).epsilon(1e-9));
    CHECK(std::abs(dab - subspace_distance(b, a)) < 1e-12);
    CHECK(subspace_distance(a, a) < 1e-9);
    CHECK(dab <= subspace_distance(a, c) + subspace_distance(c, b) + 1e-9);
    CHECK(dab >= 0.0);
    CHECK(dab <= std::sqrt(static_cast<double>(s)) + 1e-12);
    const Eigen::MatrixXd rotated = a * helpers::random_rotation(s, rng);
    CHECK(std::abs(subspace_distance(rotated, b) - dab) < 1e-9);
  }
}

TEST_CASE("project is idempotent and orthogonal") {
  Rng rng(4);
  const Subspace sub = random_subspace(6, 2, rng);
  const Eigen::VectorXd x = gaussian_matrix(6, 1, rng);
  const Eigen::VectorXd p = project(sub, x);
  CHECK((project(sub, p) - p).norm() < 1e-12);
  CHECK(std::abs((x - p).dot(p)) < 1e-12);
}

TEST_CASE("match_subspaces recovers a permutation") {
  Rng rng(5);
  SubspaceCollection truth;
  for (int l = 0; l < 4; ++l) truth.push_back(random_subspace(10, 3, rng));
  const std::vector<int> perm{2, 0, 3, 1};
  SubspaceCollection learned;
  for (int l : perm) learned.emplace_back(truth[l].basis() * helpers::random_rotation(3, rng));
  const SubspaceMatch match = match_subspaces(learned, truth);
  CHECK(match.truth_index == perm);
  CHECK(match.d_avg < 1e-7);

  SubspaceCollection three(truth.begin(), truth.begin() + 3);
  CHECK(error_code_of([&] { match_subspaces(three, truth); }) == ErrorCode::ShapeMismatch);
}

TEST_CASE("d_avg is the mean normalized distance of matched pairs") {
  Rng rng(6);
  SubspaceCollection a{random_subspace(8, 2, rng), random_subspace(8, 2, rng)};
  SubspaceCollection b{random_subspace(8, 2, rng), random_subspace(8, 2, rng)};
  const SubspaceMatch match = match_subspaces(a, b);
  double sum = 0.0;
  for (int l = 0; l < 2; ++l) sum += subspace_distance(a[l], b[match.truth_index[l]]) / std::sqrt(2.0);
  CHECK(match.d_avg == doctest::Approx(sum / 2.0).epsilon(1e-12));
}
