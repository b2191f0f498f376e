#include "mcuos/kernel_learning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mcuos/errors.hpp"
#include "mcuos/geometry.hpp"

namespace mcuos {

Eigen::Index KernelModel::ambient_dim() const {
  if (trained_on_partial_data()) return observed.front().ambient_dim();
  return training.rows();
}

namespace {

constexpr double kRelativeRank = 1e-10;

// K = U diag(lambda) U^T restricted to eigenvalues above the numerical rank
// threshold, in descending order; `w` = U_r diag(lambda_r)^(-1/2).
struct Whitening {
  Eigen::MatrixXd u;
  Eigen::VectorXd lambda;
  Eigen::MatrixXd w;
};

Whitening whiten(const Eigen::MatrixXd& k) {
  Whitening out;
  const auto n = k.rows();
  if (n == 0) {
    out.u.resize(0, 0);
    out.lambda.resize(0);
    out.w.resize(0, 0);
    return out;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(k);
  if (eig.info() != Eigen::Success) fail(ErrorCode::NumericalFailure, "eigendecomposition of a Gram block failed");
  const Eigen::VectorXd& vals = eig.eigenvalues();
  const double top = vals(n - 1);
  Eigen::Index r = 0;
  if (top > 0.0)
    while (r < n && vals(n - 1 - r) > kRelativeRank * top) ++r;
  out.u.resize(n, r);
  out.lambda.resize(r);
  for (Eigen::Index j = 0; j < r; ++j) {
    out.u.col(j) = eig.eigenvectors().col(n - 1 - j);
    out.lambda(j) = vals(n - 1 - j);
  }
  fix_column_signs(out.u);
  out.w = out.u * out.lambda.cwiseSqrt().cwiseInverse().asDiagonal();
  return out;
}

Eigen::MatrixXd top_coefficients(const Whitening& wh, int s) {
  const auto r = std::min<Eigen::Index>(s, wh.w.cols());
  return wh.w.leftCols(r);
}

std::vector<int> members(const std::vector<int>& assignments, int ell) {
  std::vector<int> out;
  for (std::size_t i = 0; i < assignments.size(); ++i)
    if (assignments[i] == ell) out.push_back(static_cast<int>(i));
  return out;
}

Eigen::MatrixXd block(const Eigen::MatrixXd& g, const std::vector<int>& rows, const std::vector<int>& cols) {
  return g(rows, cols);
}

// Top eigenvectors of W^T A W for A = sum_p K_cp E_p E_p^T K_pc + (lambda/2) K_ca K_ac.
Eigen::MatrixXd update_with(const KernelModel& model, int ell, const Whitening& wh) {
  const auto& c = model.clusters[ell];
  const auto r = wh.w.cols();
  if (r == 0) return Eigen::MatrixXd(c.size(), 0);
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(r, r);
  for (int p = 0; p < model.subspace_count(); ++p) {
    if (p == ell || model.coefficients[p].cols() == 0) continue;
    const Eigen::MatrixXd t = wh.w.transpose() * (block(model.centered, c, model.clusters[p]) * model.coefficients[p]);
    b.noalias() += t * t.transpose();
  }
  const auto assigned = members(model.assignments, ell);
  if (assigned == c) {
    b.diagonal() += 0.5 * model.lambda * wh.lambda;
  } else if (!assigned.empty()) {
    const Eigen::MatrixXd x = wh.w.transpose() * block(model.centered, c, assigned);
    b.noalias() += 0.5 * model.lambda * (x * x.transpose());
  }
  const auto count = std::min<Eigen::Index>(model.s, r);
  return wh.w * top_eigenvectors(b, count);
}

double centered_diag(const KernelModel& model, int i) { return model.centered(i, i); }

}  // namespace

Eigen::MatrixXd whitened_coefficients(const Eigen::MatrixXd& block_matrix, int s) {
  if (block_matrix.rows() != block_matrix.cols()) fail(ErrorCode::ShapeMismatch, "Gram block must be square");
  if (s < 1) fail(ErrorCode::InvalidArgument, "s must be positive");
  return top_coefficients(whiten(block_matrix), s);
}

Eigen::MatrixXd generalized_top_eigenvectors(const Eigen::MatrixXd& a, const Eigen::MatrixXd& k, int count) {
  if (a.rows() != a.cols() || k.rows() != k.cols() || a.rows() != k.rows())
    fail(ErrorCode::ShapeMismatch, "generalized eigenproblem needs square matrices of equal size");
  if (count < 1) fail(ErrorCode::InvalidArgument, "count must be positive");
  const Whitening wh = whiten(k);
  const auto r = wh.w.cols();
  if (r == 0) return Eigen::MatrixXd(k.rows(), 0);
  Eigen::MatrixXd b = wh.w.transpose() * a * wh.w;
  b = 0.5 * (b + b.transpose()).eval();
  return wh.w * top_eigenvectors(b, std::min<Eigen::Index>(count, r));
}

KernelInit gkiop(const Eigen::MatrixXd& centered_gram, int L, int s, Rng& rng) {
  const auto n = centered_gram.rows();
  if (centered_gram.cols() != n) fail(ErrorCode::ShapeMismatch, "Gram matrix must be square");
  if (L < 1 || s < 1) fail(ErrorCode::InvalidArgument, "L and s must be positive");
  if (n < static_cast<Eigen::Index>(L) * s) fail(ErrorCode::InsufficientData, "need at least L*s training points");
  std::vector<char> used(n, 0);
  KernelInit init;
  // Residual of every point against the nearest subspace chosen so far.
  Eigen::VectorXd residual = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::infinity());
  for (int l = 0; l < L; ++l) {
    int seed = -1;
    if (l == 0) {
      std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
      seed = static_cast<int>(pick(rng));
    } else {
      for (Eigen::Index i = 0; i < n; ++i)
        if (!used[i] && (seed < 0 || residual(i) > residual(seed))) seed = static_cast<int>(i);
    }
    std::vector<int> cluster{seed};
    used[seed] = 1;
    Eigen::VectorXd affinity = centered_gram.col(seed);
    for (int q = 1; q < s; ++q) {
      int best = -1;
      for (Eigen::Index i = 0; i < n; ++i)
        if (!used[i] && (best < 0 || affinity(i) > affinity(best))) best = static_cast<int>(i);
      cluster.push_back(best);
      used[best] = 1;
      affinity += centered_gram.col(best);
    }
    init.coefficients.push_back(whitened_coefficients(block(centered_gram, cluster, cluster), s));
    const Eigen::VectorXd energy =
        (init.coefficients.back().transpose() * centered_gram(cluster, Eigen::all)).colwise().squaredNorm();
    residual = residual.cwiseMin(centered_gram.diagonal() - energy);
    init.clusters.push_back(std::move(cluster));
  }
  return init;
}

Eigen::VectorXd model_kernel_column(const KernelModel& model, const ObservedSignal& y) {
  if (y.ambient_dim() != model.ambient_dim()) fail(ErrorCode::ShapeMismatch, "query dimension differs from training");
  if (!model.trained_on_partial_data()) {
    if (y.is_complete()) return kernel_column(model.spec, model.training, y.values());
    Eigen::VectorXd k(model.training.cols());
    for (Eigen::Index i = 0; i < model.training.cols(); ++i)
      k(i) = estimate_kernel_missing(model.spec, ObservedSignal::complete(model.training.col(i)), y);
    return k;
  }
  return estimated_kernel_column(model.spec, model.observed, y);
}

Eigen::VectorXd model_kernel_column(const KernelModel& model, const Eigen::VectorXd& y) {
  return model_kernel_column(model, ObservedSignal::complete(y));
}

double model_self_kernel(const KernelModel& model, const ObservedSignal& y) {
  return estimate_kernel_missing(model.spec, y, y);
}

Eigen::VectorXd projection_energies(const KernelModel& model, const Eigen::VectorXd& k_y) {
  Eigen::VectorXd out(model.subspace_count());
  for (int l = 0; l < model.subspace_count(); ++l) {
    const Eigen::VectorXd psi = centered_cross(k_y, model.stats, model.clusters[l]);
    out(l) = (model.coefficients[l].transpose() * psi).squaredNorm();
  }
  return out;
}

namespace {

int argmin_residual(double self, const Eigen::VectorXd& energies) {
  int best = 0;
  double best_val = self - energies(0);
  for (Eigen::Index l = 1; l < energies.size(); ++l) {
    const double v = self - energies(l);
    if (v < best_val) {
      best_val = v;
      best = static_cast<int>(l);
    }
  }
  return best;
}

Eigen::MatrixXd training_energies(const KernelModel& model) {
  const auto n = model.centered.rows();
  Eigen::MatrixXd e(model.subspace_count(), n);
  for (int l = 0; l < model.subspace_count(); ++l) {
    const auto& c = model.clusters[l];
    const Eigen::MatrixXd proj = model.coefficients[l].transpose() * model.centered(c, Eigen::all);
    e.row(l) = proj.colwise().squaredNorm();
  }
  return e;
}

}  // namespace

int kernel_assign(const KernelModel& model, int training_index) {
  if (training_index < 0 || training_index >= model.centered.rows())
    fail(ErrorCode::InvalidArgument, "training index out of range");
  Eigen::VectorXd energies(model.subspace_count());
  for (int l = 0; l < model.subspace_count(); ++l) {
    const Eigen::VectorXd psi = model.centered(model.clusters[l], training_index);
    energies(l) = (model.coefficients[l].transpose() * psi).squaredNorm();
  }
  return argmin_residual(centered_diag(model, training_index), energies);
}

int kernel_assign(const KernelModel& model, const ObservedSignal& y) {
  const Eigen::VectorXd k_y = model_kernel_column(model, y);
  const double self = centered_self(model_self_kernel(model, y), k_y, model.stats);
  return argmin_residual(self, projection_energies(model, k_y));
}

int kernel_assign(const KernelModel& model, const Eigen::VectorXd& y) {
  return kernel_assign(model, ObservedSignal::complete(y));
}

std::vector<int> kernel_assign_all(const KernelModel& model) {
  const Eigen::MatrixXd e = training_energies(model);
  std::vector<int> out(e.cols());
  for (Eigen::Index i = 0; i < e.cols(); ++i) out[i] = argmin_residual(centered_diag(model, static_cast<int>(i)), e.col(i));
  return out;
}

Eigen::MatrixXd kernel_subspace_update(const KernelModel& model, int ell) {
  if (ell < 0 || ell >= model.subspace_count()) fail(ErrorCode::InvalidArgument, "subspace index out of range");
  const auto& c = model.clusters[ell];
  return update_with(model, ell, whiten(block(model.centered, c, c)));
}

double feature_distance_sq(const KernelModel& model, int ell, int p) {
  if (ell < 0 || p < 0 || ell >= model.subspace_count() || p >= model.subspace_count())
    fail(ErrorCode::InvalidArgument, "subspace index out of range");
  if (ell == p) return 0.0;
  const auto& el = model.coefficients[ell];
  const auto& ep = model.coefficients[p];
  const double cross =
      (el.transpose() * block(model.centered, model.clusters[ell], model.clusters[p]) * ep).squaredNorm();
  return std::clamp(static_cast<double>(el.cols()) - cross, 0.0, static_cast<double>(el.cols()));
}

double objective_f3(const KernelModel& model) {
  const int L = model.subspace_count();
  double closeness = 0.0;
  for (int l = 0; l < L; ++l)
    for (int p = 0; p < L; ++p)
      if (l != p) {
        const double cross = (model.coefficients[l].transpose() *
                              block(model.centered, model.clusters[l], model.clusters[p]) * model.coefficients[p])
                                 .squaredNorm();
        closeness += static_cast<double>(model.coefficients[l].cols()) - cross;
      }
  double fit = 0.0;
  for (int l = 0; l < L; ++l) {
    const auto assigned = members(model.assignments, l);
    if (assigned.empty()) continue;
    for (int i : assigned) fit += centered_diag(model, i);
    fit -= (model.coefficients[l].transpose() * block(model.centered, model.clusters[l], assigned)).squaredNorm();
  }
  return closeness + model.lambda * fit;
}

KernelModel mckusal_gram(const Eigen::MatrixXd& raw_gram, const KernelSpec& spec, const KernelParams& params,
                         const StepObserver& observer) {
  spec.validate();
  if (params.L < 1 || params.s < 1) fail(ErrorCode::InvalidArgument, "L and s must be positive");
  if (!(params.lambda > 0.0)) fail(ErrorCode::InvalidArgument, "lambda must be positive");
  if (params.max_outer_iters < 1 || params.inner_max_sweeps < 1)
    fail(ErrorCode::InvalidArgument, "iteration limits must be positive");
  if (raw_gram.rows() != raw_gram.cols()) fail(ErrorCode::ShapeMismatch, "Gram matrix must be square");
  if (!raw_gram.allFinite()) fail(ErrorCode::InvalidArgument, "Gram matrix contains non-finite values");

  KernelModel model;
  model.spec = spec;
  model.s = params.s;
  model.lambda = params.lambda;
  model.gram = raw_gram;
  model.stats = centering_stats(raw_gram);
  model.centered = center(GramMatrix{raw_gram, false}).values;

  Rng rng(derive_seed(params.rng_seed, {0}));
  KernelInit init = gkiop(model.centered, params.L, params.s, rng);
  model.clusters = std::move(init.clusters);
  model.coefficients = std::move(init.coefficients);
  std::vector<Whitening> cache;
  for (const auto& c : model.clusters) cache.push_back(whiten(block(model.centered, c, c)));

  std::vector<int> previous;
  for (int it = 0; it < params.max_outer_iters; ++it) {
    model.assignments = kernel_assign_all(model);
    if (observer) observer({StepKind::Assignment, it, -1, objective_f3(model), &model.assignments});
    if (model.assignments == previous) break;
    previous = model.assignments;

    for (int l = 0; l < params.L; ++l) {
      auto assigned = members(model.assignments, l);
      if (assigned.empty()) continue;  // keeps the old basis; see the closeness-only update
      model.clusters[l] = std::move(assigned);
      cache[l] = whiten(block(model.centered, model.clusters[l], model.clusters[l]));
      model.coefficients[l] = top_coefficients(cache[l], params.s);
    }
    double f = objective_f3(model);
    if (observer) observer({StepKind::Reinitialization, it, -1, f});

    for (int sweep = 0; sweep < params.inner_max_sweeps; ++sweep) {
      for (int l = 0; l < params.L; ++l) {
        model.coefficients[l] = update_with(model, l, cache[l]);
        if (observer) observer({StepKind::Update, it, l, objective_f3(model)});
      }
      const double next = objective_f3(model);
      const double scale = std::max(std::abs(f), std::numeric_limits<double>::min());
      const bool done = (f - next) <= params.rel_tol * scale;
      f = next;
      if (done) break;
    }
  }
  model.assignments = kernel_assign_all(model);
  model.objective = objective_f3(model);
  if (observer) observer({StepKind::Assignment, params.max_outer_iters, -1, model.objective, &model.assignments});
  return model;
}

KernelModel mckusal(const Eigen::MatrixXd& data, const KernelSpec& spec, const KernelParams& params,
                    const StepObserver& observer) {
  if (!data.allFinite()) fail(ErrorCode::InvalidArgument, "training data contains non-finite values");
  KernelModel model = mckusal_gram(gram(spec, data).values, spec, params, observer);
  model.training = data;
  return model;
}

KernelModel rmckusal(const std::vector<ObservedSignal>& data, const KernelSpec& spec, const KernelParams& params,
                     const StepObserver& observer) {
  if (data.empty()) fail(ErrorCode::InsufficientData, "no training signals");
  const EstimatedGram est = estimated_gram_missing(spec, data, params.delta_min);
  KernelModel model = mckusal_gram(est.values, spec, params, observer);
  model.psd_repaired = est.psd_repaired;
  bool complete = true;
  for (const auto& sig : data) complete = complete && sig.is_complete();
  if (complete) {
    model.training.resize(data.front().ambient_dim(), static_cast<Eigen::Index>(data.size()));
    for (std::size_t i = 0; i < data.size(); ++i) model.training.col(i) = data[i].values();
  } else {
    model.observed = data;
  }
  return model;
}

}  // namespace mcuos
