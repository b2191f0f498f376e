#include "helpers.hpp"
#include "mcuos/datagen.hpp"
#include "mcuos/linear.hpp"

using namespace mcuos;
using helpers::error_code_of;

namespace {

Eigen::MatrixXd axis(int m, std::initializer_list<int> dims) {
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(m, static_cast<Eigen::Index>(dims.size()));
  int j = 0;
  for (int d : dims) b(d, j++) = 1.0;
  return b;
}

// Union of L random s-dim subspaces with `per` noisy points each.
Eigen::MatrixXd small_union(int m, int s, int L, int per, double noise, Rng& rng, SubspaceCollection* truth = nullptr) {
  Eigen::MatrixXd data(m, L * per);
  for (int l = 0; l < L; ++l) {
    const Subspace sub = random_subspace(m, s, rng);
    if (truth) truth->push_back(sub);
    data.middleCols(l * per, per) = helpers::points_on(sub.basis(), per, rng);
  }
  data += noise * gaussian_matrix(m, L * per, rng);
  return data;
}

double trace_objective(const Eigen::MatrixXd& d, const Eigen::MatrixXd& a) { return (d.transpose() * a * d).trace(); }

}  // namespace

TEST_CASE("objective_f1 on a hand-computed instance") {
  const Bases bases{axis(3, {0}), axis(3, {1})};
  Eigen::MatrixXd y(3, 2);
  y << 1, 0, 1, 2, 1, 0;
  // closeness: two ordered pairs of orthogonal lines, 1 each; fit: y1 misses 2 units, y2 none.
  CHECK(objective_f1(bases, {0, 1}, y, 2.0) == doctest::Approx(6.0));
  CHECK(objective_f1(bases, {1, 1}, y, 2.0) == doctest::Approx(2.0 + 2.0 * 2.0));
  CHECK(error_code_of([&] { objective_f1(bases, {0}, y, 2.0); }) == ErrorCode::ShapeMismatch);
  CHECK(error_code_of([&] { objective_f1(bases, {0, 2}, y, 2.0); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("assignment picks the largest projection energy, ties to the lowest index") {
  const Bases bases{axis(3, {0}), axis(3, {1})};
  Eigen::MatrixXd y(3, 3);
  y << 1, 0, 0, 0.5, 2, 0, 0, 0, 1;
  CHECK(assign_subspaces(bases, y) == std::vector<int>{0, 1, 0});
}

TEST_CASE("closest_basis maximizes the trace objective") {
  Rng rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const Bases others{helpers::random_basis(6, 2, rng), helpers::random_basis(6, 2, rng)};
    const Eigen::MatrixXd cluster = gaussian_matrix(6, 15, rng);
    const double lambda = 0.5 + trial;
    const Eigen::MatrixXd d = closest_basis(others, cluster, lambda, 2, 6);
    Eigen::MatrixXd a = 0.5 * lambda * cluster * cluster.transpose();
    for (const auto& p : others) a += p * p.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
    const double best = trace_objective(d, a);
    CHECK(best == doctest::Approx(es.eigenvalues().tail(2).sum()).epsilon(1e-12));
    for (int k = 0; k < 500; ++k) CHECK(trace_objective(helpers::random_basis(6, 2, rng), a) <= best + 1e-9);
  }
}

TEST_CASE("update_subspace never increases F1") {
  Rng rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::MatrixXd y = small_union(8, 2, 3, 10, 0.1, rng);
    SubspaceCollection subs{random_subspace(8, 2, rng), random_subspace(8, 2, rng), random_subspace(8, 2, rng)};
    const auto assignments = assign_subspaces(subs, y);
    const double before = objective_f1(bases_of(subs), assignments, y, 1.5);
    for (int l = 0; l < 3; ++l) {
      subs[l] = update_subspace(l, subs, assignments, y, 1.5);
      CHECK(orthonormality_error(subs[l].basis()) < 1e-10);
    }
    CHECK(objective_f1(bases_of(subs), assignments, y, 1.5) <= before + 1e-8);
  }
}

TEST_CASE("MiCUSaL objective is non-increasing at every step") {
  Rng rng(13);
  for (int trial = 0; trial < 15; ++trial) {
    const Eigen::MatrixXd y = small_union(12, 2, 3, 15, 0.05, rng);
    double last = std::numeric_limits<double>::infinity();
    int steps = 0;
    MicusalParams p{3, 2, 2.0, 50, 1e-9, 1, static_cast<std::uint64_t>(trial)};
    micusal(y, p, [&](const StepEvent& e) {
      CHECK(e.objective <= last + 1e-8);
      last = e.objective;
      ++steps;
    });
    CHECK(steps > 3);
  }
}

TEST_CASE("MiCUSaL is deterministic and its model is self-consistent") {
  Rng rng(14);
  const Eigen::MatrixXd y = small_union(10, 2, 2, 20, 0.05, rng);
  MicusalParams p{2, 2, 2.0, 50, 1e-8, 3, 42};
  const McUosModel a = micusal(y, p);
  const McUosModel b = micusal(y, p);
  CHECK(a.assignments == b.assignments);
  CHECK(a.objective == b.objective);
  CHECK((a.mean - y.rowwise().mean()).norm() < 1e-14);
  CHECK(a.objective == doctest::Approx(objective_f1(a, y, 2.0)).epsilon(1e-10));
  const Eigen::MatrixXd centered = y.colwise() - a.mean;
  CHECK(assign_subspaces(a.subspaces, centered) == a.assignments);
}

TEST_CASE("MiCUSaL recovers well-separated noiseless subspaces") {
  Rng rng(15);
  SubspaceCollection truth;
  const Eigen::MatrixXd y = small_union(30, 2, 3, 60, 0.0, rng, &truth);
  MicusalParams p{3, 2, 50.0, 100, 1e-10, 5, 7};
  const McUosModel model = micusal(y, p);
  CHECK(match_subspaces(model.subspaces, truth).d_avg < 0.05);
}

TEST_CASE("MiCUSaL validates its inputs") {
  const Eigen::MatrixXd y = Eigen::MatrixXd::Random(5, 10);
  CHECK(error_code_of([&] { micusal(y, MicusalParams{0, 1, 1.0}); }) == ErrorCode::InvalidArgument);
  CHECK(error_code_of([&] { micusal(y, MicusalParams{1, 5, 1.0}); }) == ErrorCode::InvalidArgument);
  CHECK(error_code_of([&] { micusal(y.leftCols(2), MicusalParams{1, 2, 1.0}); }) == ErrorCode::InsufficientData);
  Eigen::MatrixXd bad = y;
  bad(0, 0) = std::nan("");
  CHECK(error_code_of([&] { micusal(bad, MicusalParams{1, 1, 1.0}); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("dimension estimate on noiseless subspace data") {
  Rng rng(16);
  for (int s : {1, 2, 5}) {
    const Eigen::MatrixXd basis = helpers::random_basis(20, s, rng);
    const Eigen::MatrixXd pts = basis * gaussian_matrix(s, 500, rng);
    CHECK(std::abs(estimate_dimension(pts, 6, 10) - s) <= 0.5);
  }
}

TEST_CASE("dimension estimator errors") {
  Rng rng(17);
  const Eigen::MatrixXd pts = gaussian_matrix(3, 20, rng);
  CHECK(error_code_of([&] { estimate_dimension(pts, 2, 5); }) == ErrorCode::InvalidArgument);
  CHECK(error_code_of([&] { estimate_dimension(pts, 6, 5); }) == ErrorCode::InvalidArgument);
  CHECK(error_code_of([&] { estimate_dimension(pts.leftCols(10), 6, 10); }) == ErrorCode::InsufficientData);
  Eigen::MatrixXd dup = pts;
  dup.col(1) = dup.col(0);
  CHECK(error_code_of([&] { estimate_dimension(dup, 3, 5); }) == ErrorCode::DegenerateNeighborhood);
}

TEST_CASE("aMiCUSaL objective is non-increasing between structural changes") {
  Rng rng(18);
  const Eigen::MatrixXd y = small_union(15, 2, 2, 40, 0.02, rng);
  AmicusalParams p;
  p.L_max = 4;
  p.s_max = 5;
  p.lambda = 2.0;
  p.eps_min = 0.3;
  p.rng_seed = 3;
  double last = std::numeric_limits<double>::infinity();
  amicusal(y, p, [&](const StepEvent& e) {
    if (e.kind == StepKind::Merge || e.kind == StepKind::Reinitialization) {
      last = std::numeric_limits<double>::infinity();
      return;
    }
    CHECK(e.objective <= last + 1e-8);
    last = e.objective;
  });
}

TEST_CASE("aMiCUSaL finds the planted number of subspaces") {
  Rng rng(19);
  SyntheticSpec spec;
  spec.m = 40;
  spec.s = 5;
  spec.L = 2;
  spec.t_s = 1.0;
  spec.cluster_sizes = {120, 120};
  spec.sigma_tr_sq = 0.01;
  spec.rng_seed = 5;
  const auto pair = generate_synthetic(spec);
  AmicusalParams p;
  p.L_max = 5;
  p.s_max = 8;
  p.lambda = 2.0;
  p.eps_min = 0.3;
  p.rng_seed = 9;
  const McUosModel model = amicusal(pair.train.noisy, p);
  CHECK(model.subspaces.size() == 2);
  CHECK(model.subspaces.front().dim() >= 3);
  CHECK(model.subspaces.front().dim() <= 6);
}
