#include "mcuos/missing.hpp"

#include <cmath>
#include <limits>

#include "mcuos/errors.hpp"

namespace mcuos {
namespace {

constexpr double kMaxCondition = 1e12;

struct LeastSquares {
  Eigen::VectorXd theta;
  double residual_sq = 0.0;
};

// Solves min ||D_omega theta - y_omega|| through the s x s normal equations.
LeastSquares solve_on_omega(const Eigen::MatrixXd& basis, const ObservedSignal& signal) {
  if (signal.ambient_dim() != basis.rows())
    fail(ErrorCode::ShapeMismatch, "signal dimension differs from subspace ambient dimension");
  const auto& omega = signal.omega();
  const Eigen::MatrixXd rows = basis(omega, Eigen::all);
  Eigen::MatrixXd normal;
  const auto missing = basis.rows() - static_cast<Eigen::Index>(omega.size());
  if (missing < static_cast<Eigen::Index>(omega.size())) {
    // D^T D = I for an orthonormal basis, so the unobserved rows are cheaper.
    std::vector<int> absent;
    absent.reserve(missing);
    std::size_t k = 0;
    for (int u = 0; u < basis.rows(); ++u) {
      if (k < omega.size() && omega[k] == u) ++k;
      else absent.push_back(u);
    }
    normal = Eigen::MatrixXd::Identity(basis.cols(), basis.cols());
    if (!absent.empty()) {
      const Eigen::MatrixXd hidden = basis(absent, Eigen::all);
      normal.selfadjointView<Eigen::Lower>().rankUpdate(hidden.transpose(), -1.0);
    }
  } else {
    normal = Eigen::MatrixXd::Zero(basis.cols(), basis.cols());
    normal.selfadjointView<Eigen::Lower>().rankUpdate(rows.transpose());
  }
  Eigen::LDLT<Eigen::MatrixXd> ldlt(normal);
  // The pivots of a positive semidefinite normal matrix bound its conditioning.
  const Eigen::VectorXd pivots = ldlt.vectorD().cwiseAbs();
  if (ldlt.info() != Eigen::Success || !(pivots.minCoeff() * kMaxCondition >= pivots.maxCoeff()))
    fail(ErrorCode::RankDeficient, "observed rows of the basis are rank deficient");
  LeastSquares out;
  out.theta = ldlt.solve(rows.transpose() * signal.values());
  out.residual_sq = (signal.values() - rows * out.theta).squaredNorm();
  return out;
}

double closeness_term(const Bases& bases) {
  double total = 0.0;
  for (std::size_t l = 0; l < bases.size(); ++l)
    for (std::size_t p = l + 1; p < bases.size(); ++p)
      total += 2.0 * (static_cast<double>(bases[l].cols()) - (bases[l].transpose() * bases[p]).squaredNorm());
  return total;
}

}  // namespace

double residual_on_omega(const Eigen::MatrixXd& basis, const ObservedSignal& signal) {
  return solve_on_omega(basis, signal).residual_sq;
}

double residual_on_omega(const Subspace& sub, const ObservedSignal& signal) {
  return residual_on_omega(sub.basis(), signal);
}

Eigen::MatrixXd grassmann_closeness_step(int ell, const Bases& bases, double eta_t) {
  if (ell < 0 || ell >= static_cast<int>(bases.size())) fail(ErrorCode::InvalidArgument, "subspace index out of range");
  if (!(eta_t > 0.0)) fail(ErrorCode::InvalidArgument, "step length must be positive");
  const Eigen::MatrixXd& d = bases[ell];
  Eigen::MatrixXd ad = Eigen::MatrixXd::Zero(d.rows(), d.cols());
  for (std::size_t p = 0; p < bases.size(); ++p)
    if (static_cast<int>(p) != ell) ad.noalias() += bases[p] * (bases[p].transpose() * d);
  if (ad.isZero(0.0)) return d;
  const Eigen::MatrixXd delta = 2.0 * (ad - d * (d.transpose() * ad));
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(delta, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) fail(ErrorCode::NumericalFailure, "SVD of the closeness gradient failed");
  const Eigen::ArrayXd angles = svd.singularValues().array() * eta_t;
  const Eigen::MatrixXd& v = svd.matrixV();
  return d * v * angles.cos().matrix().asDiagonal() * v.transpose() +
         svd.matrixU() * angles.sin().matrix().asDiagonal() * v.transpose();
}

Subspace grassmann_closeness_step(int ell, const SubspaceCollection& subspaces, double eta_t) {
  check_collection(subspaces);
  return Subspace(reorthonormalize(grassmann_closeness_step(ell, bases_of(subspaces), eta_t)));
}

Eigen::MatrixXd grouse_style_data_step(const Eigen::MatrixXd& basis, const ObservedSignal& signal, double step) {
  const LeastSquares ls = solve_on_omega(basis, signal);
  const Eigen::VectorXd omega_vec = basis * ls.theta;
  Eigen::VectorXd r = Eigen::VectorXd::Zero(basis.rows());
  const auto& idx = signal.omega();
  for (std::size_t k = 0; k < idx.size(); ++k) r(idx[k]) = signal.values()(k) - omega_vec(idx[k]);
  const double r_norm = r.norm();
  const double w_norm = omega_vec.norm();
  const double t_norm = ls.theta.norm();
  if (r_norm == 0.0 || w_norm == 0.0 || t_norm == 0.0) return basis;
  const double angle = r_norm * w_norm * step;
  const Eigen::VectorXd dir = (std::cos(angle) - 1.0) / w_norm * omega_vec + std::sin(angle) / r_norm * r;
  return basis + dir * (ls.theta.transpose() / t_norm);
}

Subspace grouse_style_data_step(const Subspace& sub, const ObservedSignal& signal, double step) {
  return Subspace(reorthonormalize(grouse_style_data_step(sub.basis(), signal, step)), 1e-8);
}

std::vector<int> assign_observed(const Bases& bases, const std::vector<ObservedSignal>& signals) {
  if (bases.empty()) fail(ErrorCode::InsufficientData, "no subspaces");
  std::vector<int> out(signals.size(), 0);
  for (std::size_t i = 0; i < signals.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    bool any = false;
    for (std::size_t l = 0; l < bases.size(); ++l) {
      double res;
      try {
        res = residual_on_omega(bases[l], signals[i]);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::RankDeficient) throw;
        continue;
      }
      if (!any || res < best) {
        best = res;
        out[i] = static_cast<int>(l);
        any = true;
      }
    }
    if (!any) fail(ErrorCode::RankDeficient, "signal " + std::to_string(i) + " is rank deficient on every subspace");
  }
  return out;
}

double objective_f2(const Bases& bases, const std::vector<int>& assignments,
                    const std::vector<ObservedSignal>& signals, double lambda) {
  if (assignments.size() != signals.size()) fail(ErrorCode::ShapeMismatch, "one assignment per signal required");
  double fit = 0.0;
  for (std::size_t i = 0; i < signals.size(); ++i) {
    const int l = assignments[i];
    if (l < 0 || l >= static_cast<int>(bases.size())) fail(ErrorCode::InvalidArgument, "assignment out of range");
    const double scale = static_cast<double>(signals[i].ambient_dim()) / signals[i].observed_count();
    fit += scale * residual_on_omega(bases[l], signals[i]);
  }
  return closeness_term(bases) + lambda * fit;
}

namespace {

struct RunResult {
  Bases bases;
  std::vector<int> assignments;
  double objective = std::numeric_limits<double>::infinity();
};

void update_block(int ell, Bases& bases, const std::vector<int>& assignments,
                  const std::vector<ObservedSignal>& signals, const RmicusalParams& params) {
  int since_reorth = 0;
  for (int t = 1; t <= params.inner_iters; ++t) {
    const double eta_t = params.eta / t;
    bases[ell] = grassmann_closeness_step(ell, bases, eta_t);
    for (std::size_t i = 0; i < signals.size(); ++i) {
      if (assignments[i] != ell) continue;
      const double step = params.lambda * static_cast<double>(signals[i].ambient_dim()) /
                          signals[i].observed_count() * eta_t;
      try {
        bases[ell] = grouse_style_data_step(bases[ell], signals[i], step);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::RankDeficient) throw;
        continue;
      }
      if (++since_reorth >= params.reorth_every) {
        bases[ell] = reorthonormalize(bases[ell]);
        since_reorth = 0;
      }
    }
  }
  bases[ell] = reorthonormalize(bases[ell]);
}

RunResult run_once(const std::vector<ObservedSignal>& signals, const RmicusalParams& params, Rng& rng,
                   const StepObserver& observer) {
  const auto m = signals.front().ambient_dim();
  RunResult run;
  for (int l = 0; l < params.L; ++l) run.bases.push_back(random_subspace(m, params.s, rng).basis());
  double previous = std::numeric_limits<double>::infinity();
  std::vector<int> last;
  for (int it = 0; it < params.max_outer_iters; ++it) {
    run.assignments = assign_observed(run.bases, signals);
    if (observer) observer({StepKind::Assignment, it, -1, objective_f2(run.bases, run.assignments, signals, params.lambda)});
    if (run.assignments == last) break;
    for (int l = 0; l < params.L; ++l) {
      update_block(l, run.bases, run.assignments, signals, params);
      if (observer) observer({StepKind::Update, it, l, objective_f2(run.bases, run.assignments, signals, params.lambda)});
    }
    const double f = objective_f2(run.bases, run.assignments, signals, params.lambda);
    const double scale = std::max(std::abs(previous), std::numeric_limits<double>::min());
    if (std::isfinite(previous) && std::abs(previous - f) <= params.rel_tol * scale) break;
    previous = f;
    last = run.assignments;
  }
  run.assignments = assign_observed(run.bases, signals);
  run.objective = objective_f2(run.bases, run.assignments, signals, params.lambda);
  return run;
}

}  // namespace

McUosModel rmicusal(const std::vector<ObservedSignal>& signals, const RmicusalParams& params,
                    const StepObserver& observer) {
  if (signals.empty()) fail(ErrorCode::InsufficientData, "no training signals");
  if (!(params.lambda > 0.0) || !(params.eta > 0.0)) fail(ErrorCode::InvalidArgument, "lambda and eta must be positive");
  if (params.L < 1 || params.s < 1 || params.restarts < 1 || params.inner_iters < 1 || params.reorth_every < 1)
    fail(ErrorCode::InvalidArgument, "L, s, restarts, inner_iters and reorth_every must be positive");
  const auto m = signals.front().ambient_dim();
  if (params.s >= m) fail(ErrorCode::InvalidArgument, "s must be below m");
  for (const auto& sig : signals) {
    if (sig.ambient_dim() != m) fail(ErrorCode::ShapeMismatch, "signals must share the ambient dimension");
    if (sig.observed_count() <= params.s)
      fail(ErrorCode::InsufficientObservations, "every signal needs more than s observed entries");
  }

  RunResult best;
  for (int r = 0; r < params.restarts; ++r) {
    Rng rng(derive_seed(params.rng_seed, {static_cast<std::uint64_t>(r)}));
    RunResult run = run_once(signals, params, rng, observer);
    if (run.objective < best.objective) best = std::move(run);
  }
  McUosModel model;
  model.subspaces = subspaces_of(best.bases);
  model.mean = Eigen::VectorXd::Zero(m);
  model.assignments = std::move(best.assignments);
  model.objective = best.objective;
  return model;
}

}  // namespace mcuos
