#include "mcuos/preimage.hpp"

#include <cmath>

#include "mcuos/errors.hpp"

namespace mcuos {
namespace {

double signed_root(double x, int d) {
  return x < 0.0 ? -std::pow(-x, 1.0 / d) : std::pow(x, 1.0 / d);
}

void require_odd_polynomial(const KernelSpec& spec) {
  if (spec.kind == KernelKind::Polynomial && spec.d % 2 == 0)
    fail(ErrorCode::UnsupportedKernel, "polynomial pre-images need an odd degree");
}

Eigen::VectorXd finite_or_fail(Eigen::VectorXd v) {
  if (!v.allFinite()) fail(ErrorCode::NumericalFailure, "pre-image is not finite");
  return v;
}

}  // namespace

PreimageWeights preimage_weights(const KernelModel& model, const ObservedSignal& z) {
  require_odd_polynomial(model.spec);
  const Eigen::VectorXd k_z = model_kernel_column(model, z);
  const double self = centered_self(model_self_kernel(model, z), k_z, model.stats);

  PreimageWeights w;
  const Eigen::VectorXd energies = projection_energies(model, k_z);
  w.tau = 0;
  for (Eigen::Index l = 1; l < energies.size(); ++l)
    if (self - energies(l) < self - energies(w.tau)) w.tau = static_cast<int>(l);

  const auto& c = model.clusters[w.tau];
  const auto& e_tau = model.coefficients[w.tau];
  const Eigen::VectorXd psi = centered_cross(k_z, model.stats, c);
  w.zeta = e_tau * (e_tau.transpose() * psi);

  const auto n = model.gram.rows();
  const double nd = static_cast<double>(n);
  w.chi_hat = Eigen::VectorXd::Constant(n, (1.0 - w.zeta.sum()) / nd);
  for (std::size_t q = 0; q < c.size(); ++q) w.chi_hat(c[q]) += w.zeta(q);

  const double total = model.stats.total_mean;
  Eigen::VectorXd row_means_c(c.size());
  for (std::size_t q = 0; q < c.size(); ++q) row_means_c(q) = model.stats.row_means(c[q]);
  const auto ones = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(c.size()));

  w.projection_norm_sq = w.zeta.dot(psi + 2.0 * row_means_c - 2.0 * total * ones) + total;
  w.feature_dist_sq.resize(n);
  w.inner.resize(n);
  const Eigen::MatrixXd g_c = model.gram(c, Eigen::all);
  const Eigen::VectorXd zeta_g = g_c.transpose() * w.zeta;  // zeta^T psi_tau(y_i) for every i
  const double zeta_sum = w.zeta.sum();
  const double base = w.zeta.dot(psi + 2.0 * row_means_c - 2.0 * total * ones);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double col_mean = model.stats.row_means(i);
    w.inner(i) = zeta_g(i) - col_mean * zeta_sum + col_mean;
    w.feature_dist_sq(i) =
        base - 2.0 * zeta_g(i) + 2.0 * col_mean * zeta_sum + model.gram(i, i) + total - 2.0 * col_mean;
  }

  if (model.spec.kind == KernelKind::Gaussian) {
    w.e = w.chi_hat.cwiseProduct((0.5 * (2.0 - w.feature_dist_sq.array())).matrix());
  } else {
    if (std::abs(w.projection_norm_sq) < 1e-12)
      fail(ErrorCode::DegenerateDenominator, "projection of the query has zero norm");
    const int d = model.spec.d;
    w.e.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double ratio = w.inner(i) / w.projection_norm_sq;
      w.e(i) = w.chi_hat(i) * (d == 1 ? 1.0 : std::pow(signed_root(ratio, d), d - 1));
    }
  }
  return w;
}

double feature_distance_to_projection(const KernelModel& model, const Eigen::VectorXd& z, int i) {
  if (i < 0 || i >= model.gram.rows()) fail(ErrorCode::InvalidArgument, "training index out of range");
  return preimage_weights(model, ObservedSignal::complete(z)).feature_dist_sq(i);
}

namespace {

const Eigen::MatrixXd& complete_training(const KernelModel& model) {
  if (model.trained_on_partial_data())
    fail(ErrorCode::InvalidArgument, "model was trained on partial data; use the missing-data pre-image");
  return model.training;
}

}  // namespace

Eigen::VectorXd preimage_gaussian(const KernelModel& model, const Eigen::VectorXd& z) {
  if (model.spec.kind != KernelKind::Gaussian) fail(ErrorCode::InvalidArgument, "model kernel is not gaussian");
  const Eigen::MatrixXd& y = complete_training(model);
  const PreimageWeights w = preimage_weights(model, ObservedSignal::complete(z));
  const double denom = w.e.sum();
  if (!(std::abs(denom) >= kDegenerateDenominator))
    fail(ErrorCode::DegenerateDenominator, "pre-image weights sum to nearly zero");
  return finite_or_fail(y * w.e / denom);
}

Eigen::VectorXd preimage_polynomial(const KernelModel& model, const Eigen::VectorXd& z) {
  if (model.spec.kind != KernelKind::Polynomial) fail(ErrorCode::InvalidArgument, "model kernel is not polynomial");
  const Eigen::MatrixXd& y = complete_training(model);
  const PreimageWeights w = preimage_weights(model, ObservedSignal::complete(z));
  return finite_or_fail(y * w.e);
}

Eigen::VectorXd preimage_missing(const KernelModel& model, const ObservedSignal& z) {
  const PreimageWeights w = preimage_weights(model, z);
  const auto m = model.ambient_dim();
  const auto n = model.gram.rows();
  Eigen::VectorXd numer = Eigen::VectorXd::Zero(m);
  Eigen::VectorXi covered = Eigen::VectorXi::Zero(m);
  if (model.trained_on_partial_data()) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& sig = model.observed[i];
      for (std::size_t k = 0; k < sig.omega().size(); ++k) {
        numer(sig.omega()[k]) += w.e(i) * sig.values()(k);
        ++covered(sig.omega()[k]);
      }
    }
  } else {
    numer = model.training * w.e;
    covered.setConstant(static_cast<int>(n));
  }
  for (Eigen::Index u = 0; u < m; ++u)
    if (covered(u) == 0) fail(ErrorCode::UncoveredCoordinate, "no training signal observes coordinate " + std::to_string(u));
  if (model.spec.kind == KernelKind::Polynomial) return finite_or_fail(numer);
  const double denom = w.e.sum();
  if (!(std::abs(denom) >= kDegenerateDenominator))
    fail(ErrorCode::DegenerateDenominator, "pre-image weights sum to nearly zero");
  Eigen::VectorXd out(m);
  for (Eigen::Index u = 0; u < m; ++u)
    out(u) = numer(u) / (denom * covered(u) / static_cast<double>(n));
  return finite_or_fail(out);
}

Eigen::VectorXd preimage(const KernelModel& model, const ObservedSignal& z) {
  if (model.trained_on_partial_data() || !z.is_complete()) return preimage_missing(model, z);
  if (model.spec.kind == KernelKind::Gaussian) return preimage_gaussian(model, z.values());
  return preimage_polynomial(model, z.values());
}

}  // namespace mcuos
