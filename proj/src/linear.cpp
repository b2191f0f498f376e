#include "mcuos/linear.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mcuos/errors.hpp"

namespace mcuos {

Bases bases_of(const SubspaceCollection& subspaces) {
  Bases out;
  out.reserve(subspaces.size());
  for (const auto& sub : subspaces) out.push_back(sub.basis());
  return out;
}

SubspaceCollection subspaces_of(const Bases& bases) {
  SubspaceCollection out;
  out.reserve(bases.size());
  for (const auto& b : bases) out.emplace_back(b);
  return out;
}

namespace {

double closeness_term(const Bases& bases) {
  double total = 0.0;
  for (std::size_t l = 0; l < bases.size(); ++l)
    for (std::size_t p = l + 1; p < bases.size(); ++p) {
      const double s = static_cast<double>(bases[l].cols());
      total += 2.0 * (s - (bases[l].transpose() * bases[p]).squaredNorm());
    }
  return total;
}

void check_data(const Bases& bases, const Eigen::MatrixXd& centered) {
  if (bases.empty()) fail(ErrorCode::InsufficientData, "no subspaces");
  for (const auto& b : bases)
    if (b.rows() != centered.rows())
      fail(ErrorCode::ShapeMismatch, "data dimension differs from subspace ambient dimension");
}

std::vector<Eigen::Index> members(const std::vector<int>& assignments, int ell) {
  std::vector<Eigen::Index> idx;
  for (std::size_t i = 0; i < assignments.size(); ++i)
    if (assignments[i] == ell) idx.push_back(static_cast<Eigen::Index>(i));
  return idx;
}

}  // namespace

double objective_f1(const Bases& bases, const std::vector<int>& assignments,
                    const Eigen::MatrixXd& centered, double lambda) {
  check_data(bases, centered);
  if (static_cast<Eigen::Index>(assignments.size()) != centered.cols())
    fail(ErrorCode::ShapeMismatch, "one assignment per training column required");
  double fit = 0.0;
  for (std::size_t l = 0; l < bases.size(); ++l) {
    const auto idx = members(assignments, static_cast<int>(l));
    if (idx.empty()) continue;
    const Eigen::MatrixXd cluster = centered(Eigen::all, idx);
    fit += cluster.squaredNorm() - (bases[l].transpose() * cluster).squaredNorm();
  }
  for (int a : assignments)
    if (a < 0 || a >= static_cast<int>(bases.size()))
      fail(ErrorCode::InvalidArgument, "assignment index out of range");
  return closeness_term(bases) + lambda * fit;
}

double objective_f1(const McUosModel& model, const Eigen::MatrixXd& data, double lambda) {
  if (model.mean.size() != data.rows()) fail(ErrorCode::ShapeMismatch, "model mean length differs from data");
  const Eigen::MatrixXd centered = data.colwise() - model.mean;
  return objective_f1(bases_of(model.subspaces), model.assignments, centered, lambda);
}

std::vector<int> assign_subspaces(const Bases& bases, const Eigen::MatrixXd& centered) {
  check_data(bases, centered);
  const auto n = centered.cols();
  std::vector<int> out(n, 0);
  Eigen::VectorXd best = Eigen::VectorXd::Constant(n, -1.0);
  for (std::size_t l = 0; l < bases.size(); ++l) {
    const Eigen::VectorXd energy = (bases[l].transpose() * centered).colwise().squaredNorm();
    for (Eigen::Index i = 0; i < n; ++i)
      if (energy(i) > best(i)) {
        best(i) = energy(i);
        out[i] = static_cast<int>(l);
      }
  }
  return out;
}

std::vector<int> assign_subspaces(const SubspaceCollection& subspaces, const Eigen::MatrixXd& centered) {
  check_collection(subspaces);
  return assign_subspaces(bases_of(subspaces), centered);
}

Eigen::MatrixXd gather_cluster(const Eigen::MatrixXd& centered, const std::vector<int>& assignments, int ell) {
  const auto idx = members(assignments, ell);
  return centered(Eigen::all, idx);
}

Eigen::MatrixXd closest_basis(const Bases& others, const Eigen::MatrixXd& cluster, double lambda,
                              Eigen::Index dim, Eigen::Index ambient_dim) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(ambient_dim, ambient_dim);
  for (const auto& d : others) a.selfadjointView<Eigen::Lower>().rankUpdate(d);
  if (cluster.cols() > 0) a.selfadjointView<Eigen::Lower>().rankUpdate(cluster, 0.5 * lambda);
  // The eigensolver reads only the lower triangle.
  return top_eigenvectors(a, dim);
}

namespace {

Eigen::MatrixXd update_block(int ell, const Bases& bases, const std::vector<int>& assignments,
                             const Eigen::MatrixXd& centered, double lambda) {
  Bases others;
  others.reserve(bases.size());
  for (std::size_t p = 0; p < bases.size(); ++p)
    if (static_cast<int>(p) != ell) others.push_back(bases[p]);
  return closest_basis(others, gather_cluster(centered, assignments, ell), lambda, bases[ell].cols(),
                       centered.rows());
}

void check_lambda(double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) fail(ErrorCode::InvalidArgument, "lambda must be positive");
}

}  // namespace

Subspace update_subspace(int ell, const SubspaceCollection& subspaces, const std::vector<int>& assignments,
                         const Eigen::MatrixXd& centered, double lambda) {
  check_collection(subspaces);
  if (ell < 0 || ell >= static_cast<int>(subspaces.size()))
    fail(ErrorCode::InvalidArgument, "subspace index out of range");
  if (static_cast<Eigen::Index>(assignments.size()) != centered.cols())
    fail(ErrorCode::ShapeMismatch, "one assignment per training column required");
  const auto bases = bases_of(subspaces);
  check_data(bases, centered);
  return Subspace(update_block(ell, bases, assignments, centered, lambda));
}

namespace {

struct RunState {
  Bases bases;
  std::vector<int> assignments;
  double objective = 0.0;
};

bool converged(double previous, double current, double rel_tol) {
  if (!std::isfinite(previous)) return false;
  const double scale = std::max(std::abs(previous), std::numeric_limits<double>::min());
  return (previous - current) <= rel_tol * scale;
}

RunState run_alternation(const Eigen::MatrixXd& centered, Bases bases, double lambda, int max_iters,
                         double rel_tol, const StepObserver& observer) {
  RunState state;
  state.bases = std::move(bases);
  double previous = std::numeric_limits<double>::infinity();
  for (int it = 0; it < max_iters; ++it) {
    state.assignments = assign_subspaces(state.bases, centered);
    double f = objective_f1(state.bases, state.assignments, centered, lambda);
    if (observer) observer({StepKind::Assignment, it, -1, f});
    for (int l = 0; l < static_cast<int>(state.bases.size()); ++l) {
      state.bases[l] = update_block(l, state.bases, state.assignments, centered, lambda);
      if (observer) {
        f = objective_f1(state.bases, state.assignments, centered, lambda);
        observer({StepKind::Update, it, l, f});
      }
    }
    if (!observer) f = objective_f1(state.bases, state.assignments, centered, lambda);
    if (converged(previous, f, rel_tol)) break;
    previous = f;
  }
  // Final assignment so the stored labels match the returned bases.
  state.assignments = assign_subspaces(state.bases, centered);
  state.objective = objective_f1(state.bases, state.assignments, centered, lambda);
  if (observer) observer({StepKind::Assignment, max_iters, -1, state.objective});
  return state;
}

void check_micusal(const Eigen::MatrixXd& data, const MicusalParams& params) {
  check_lambda(params.lambda);
  if (params.L < 1 || params.s < 1) fail(ErrorCode::InvalidArgument, "L and s must be positive");
  if (params.s >= data.rows()) fail(ErrorCode::InvalidArgument, "subspace dimension must be below m");
  if (params.restarts < 1) fail(ErrorCode::InvalidArgument, "restarts must be at least 1");
  if (data.cols() <= params.s) fail(ErrorCode::InsufficientData, "need more training columns than s");
  if (!data.allFinite()) fail(ErrorCode::InvalidArgument, "training data contains non-finite values");
}

McUosModel to_model(RunState state, Eigen::VectorXd mean) {
  McUosModel model;
  model.subspaces = subspaces_of(state.bases);
  model.mean = std::move(mean);
  model.assignments = std::move(state.assignments);
  model.objective = state.objective;
  return model;
}

}  // namespace

McUosModel micusal_from(const Eigen::MatrixXd& data, const SubspaceCollection& initial,
                        const MicusalParams& params, const StepObserver& observer) {
  check_collection(initial);
  MicusalParams p = params;
  p.L = static_cast<int>(initial.size());
  p.s = static_cast<int>(initial.front().dim());
  check_micusal(data, p);
  if (initial.front().ambient_dim() != data.rows())
    fail(ErrorCode::ShapeMismatch, "initial bases do not match data dimension");
  const Eigen::VectorXd mean = data.rowwise().mean();
  const Eigen::MatrixXd centered = data.colwise() - mean;
  return to_model(run_alternation(centered, bases_of(initial), p.lambda, p.max_outer_iters, p.rel_tol, observer),
                  mean);
}

McUosModel micusal(const Eigen::MatrixXd& data, const MicusalParams& params, const StepObserver& observer) {
  check_micusal(data, params);
  const Eigen::VectorXd mean = data.rowwise().mean();
  const Eigen::MatrixXd centered = data.colwise() - mean;
  RunState best;
  best.objective = std::numeric_limits<double>::infinity();
  for (int r = 0; r < params.restarts; ++r) {
    Rng rng(derive_seed(params.rng_seed, {static_cast<std::uint64_t>(r)}));
    Bases init;
    for (int l = 0; l < params.L; ++l) init.push_back(random_subspace(data.rows(), params.s, rng).basis());
    RunState run = run_alternation(centered, std::move(init), params.lambda, params.max_outer_iters,
                                   params.rel_tol, observer);
    if (run.objective < best.objective) best = std::move(run);
  }
  return to_model(std::move(best), mean);
}

double estimate_dimension(const Eigen::MatrixXd& points, int k1, int k2) {
  if (k1 < 3 || k2 < k1) fail(ErrorCode::InvalidArgument, "neighbourhood sizes need 3 <= k1 <= k2");
  const auto n = points.cols();
  if (n <= k2) fail(ErrorCode::InsufficientData, "need more points than k2");

  const int span = k2 - k1 + 1;
  Eigen::VectorXd per_k = Eigen::VectorXd::Zero(span);
  std::vector<double> dist(n - 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index w = 0;
    for (Eigen::Index j = 0; j < n; ++j)
      if (j != i) dist[w++] = (points.col(j) - points.col(i)).norm();
    std::partial_sort(dist.begin(), dist.begin() + k2, dist.end());
    if (dist[0] <= 0.0) fail(ErrorCode::DegenerateNeighborhood, "duplicate points give a zero neighbour distance");
    for (int k0 = k1; k0 <= k2; ++k0) {
      const double log_far = std::log(dist[k0 - 1]);
      double sum = 0.0;
      for (int a = 0; a < k0 - 1; ++a) sum += log_far - std::log(dist[a]);
      if (!(sum > 0.0)) fail(ErrorCode::DegenerateNeighborhood, "equidistant neighbourhood");
      per_k(k0 - k1) += (k0 - 2) / sum;
    }
  }
  return per_k.sum() / (static_cast<double>(n) * span);
}

namespace {

// Drops subspaces that received no points and renumbers assignments.
void prune_empty(Bases& bases, std::vector<int>& assignments) {
  std::vector<int> counts(bases.size(), 0);
  for (int a : assignments) ++counts[a];
  std::vector<int> remap(bases.size(), -1);
  Bases kept;
  for (std::size_t l = 0; l < bases.size(); ++l)
    if (counts[l] > 0) {
      remap[l] = static_cast<int>(kept.size());
      kept.push_back(std::move(bases[l]));
    }
  for (int& a : assignments) a = remap[a];
  bases = std::move(kept);
}

RunState adaptive_once(const Eigen::MatrixXd& centered, const AmicusalParams& params, Rng& rng,
                       const StepObserver& observer) {
  const auto m = centered.rows();
  Bases bases;
  for (int l = 0; l < params.L_max; ++l) bases.push_back(random_subspace(m, params.s_max, rng).basis());

  std::vector<int> assignments;
  double previous = std::numeric_limits<double>::infinity();
  for (int it = 0; it < params.max_outer_iters; ++it) {
    assignments = assign_subspaces(bases, centered);
    double f = objective_f1(bases, assignments, centered, params.lambda);
    if (observer) observer({StepKind::Assignment, it, -1, f});
    const auto before = bases.size();
    prune_empty(bases, assignments);
    if (observer) {
      f = objective_f1(bases, assignments, centered, params.lambda);
      observer({StepKind::Pruning, it, -1, f});
    }
    for (int l = 0; l < static_cast<int>(bases.size()); ++l) {
      bases[l] = update_block(l, bases, assignments, centered, params.lambda);
      if (observer) {
        f = objective_f1(bases, assignments, centered, params.lambda);
        observer({StepKind::Update, it, l, f});
      }
    }
    if (!observer) f = objective_f1(bases, assignments, centered, params.lambda);
    if (bases.size() == before && converged(previous, f, params.rel_tol)) break;
    previous = f;
  }

  // Greedy merging of the closest pair while its normalized distance stays below eps_min.
  const double norm = std::sqrt(static_cast<double>(params.s_max));
  while (bases.size() > 1) {
    int best_l = -1, best_p = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int l = 0; l < static_cast<int>(bases.size()); ++l)
      for (int p = l + 1; p < static_cast<int>(bases.size()); ++p) {
        const double d = subspace_distance(bases[l], bases[p]);
        if (d < best) {
          best = d;
          best_l = l;
          best_p = p;
        }
      }
    if (best / norm > params.eps_min) break;
    for (int& a : assignments)
      if (a == best_p) a = best_l;
    Bases others;
    for (int q = 0; q < static_cast<int>(bases.size()); ++q)
      if (q != best_l && q != best_p) others.push_back(bases[q]);
    bases[best_l] = closest_basis(others, gather_cluster(centered, assignments, best_l), params.lambda,
                                  params.s_max, m);
    bases.erase(bases.begin() + best_p);
    for (int& a : assignments)
      if (a > best_p) --a;
    if (observer) observer({StepKind::Merge, -1, best_l, objective_f1(bases, assignments, centered, params.lambda)});
  }

  // Dimension estimate on each cluster after projecting onto its subspace.
  assignments = assign_subspaces(bases, centered);
  double s_hat = -1.0;
  for (int l = 0; l < static_cast<int>(bases.size()); ++l) {
    const Eigen::MatrixXd cluster = gather_cluster(centered, assignments, l);
    if (cluster.cols() <= params.k2) continue;
    const Eigen::MatrixXd denoised = bases[l] * (bases[l].transpose() * cluster);
    try {
      s_hat = std::max(s_hat, estimate_dimension(denoised, params.k1, params.k2));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::DegenerateNeighborhood) throw;
    }
  }
  const int s = s_hat < 0.0 ? params.s_max
                            : std::clamp(static_cast<int>(std::lround(s_hat)), 1, params.s_max);
  for (auto& b : bases) b = Eigen::MatrixXd(b.leftCols(s));
  if (observer) observer({StepKind::Reinitialization, -1, -1, objective_f1(bases, assignments, centered, params.lambda)});

  return run_alternation(centered, std::move(bases), params.lambda, params.max_outer_iters, params.rel_tol,
                         observer);
}

}  // namespace

McUosModel amicusal(const Eigen::MatrixXd& data, const AmicusalParams& params, const StepObserver& observer) {
  check_lambda(params.lambda);
  if (params.L_max < 1 || params.s_max < 1) fail(ErrorCode::InvalidArgument, "L_max and s_max must be positive");
  if (params.s_max >= data.rows()) fail(ErrorCode::InvalidArgument, "s_max must be below m");
  if (params.k1 < 3 || params.k2 < params.k1) fail(ErrorCode::InvalidArgument, "need 3 <= k1 <= k2");
  if (!(params.eps_min >= 0.0 && params.eps_min < 1.0)) fail(ErrorCode::InvalidArgument, "eps_min must lie in [0, 1)");
  if (params.restarts < 1) fail(ErrorCode::InvalidArgument, "restarts must be at least 1");
  if (data.cols() <= params.s_max) fail(ErrorCode::InsufficientData, "need more training columns than s_max");
  if (!data.allFinite()) fail(ErrorCode::InvalidArgument, "training data contains non-finite values");

  const Eigen::VectorXd mean = data.rowwise().mean();
  const Eigen::MatrixXd centered = data.colwise() - mean;
  RunState best;
  best.objective = std::numeric_limits<double>::infinity();
  for (int r = 0; r < params.restarts; ++r) {
    Rng rng(derive_seed(params.rng_seed, {static_cast<std::uint64_t>(r)}));
    RunState run = adaptive_once(centered, params, rng, observer);
    if (run.objective < best.objective) best = std::move(run);
  }
  return to_model(std::move(best), mean);
}

}  // namespace mcuos
