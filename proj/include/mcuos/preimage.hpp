#pragma once

#include <Eigen/Dense>

#include "mcuos/kernel_learning.hpp"
#include "mcuos/observed.hpp"

namespace mcuos {

/// Quantities behind a pre-image: the feature-space projection of phi(z) onto
/// subspace tau equals sum_i chi_hat[i] phi(y_i).
struct PreimageWeights {
  int tau = 0;
  Eigen::VectorXd zeta;     // E E^T psi~_tau(z), one entry per member of clusters[tau]
  Eigen::VectorXd chi_hat;  // length N
  Eigen::VectorXd feature_dist_sq;  // d_F^2(P phi(z), phi(y_i))
  Eigen::VectorXd inner;            // (P phi(z))^T phi(y_i)
  double projection_norm_sq = 0.0;  // ||P phi(z)||^2
  Eigen::VectorXd e;                // final combination weights
};

inline constexpr double kDegenerateDenominator = 1e-10;

PreimageWeights preimage_weights(const KernelModel& model, const ObservedSignal& z);

double feature_distance_to_projection(const KernelModel& model, const Eigen::VectorXd& z, int i);

/// Weighted mean of the training signals; needs a gaussian kernel and complete training data.
Eigen::VectorXd preimage_gaussian(const KernelModel& model, const Eigen::VectorXd& z);

/// Weighted sum of the training signals; needs an odd-degree polynomial kernel
/// and complete training data.
Eigen::VectorXd preimage_polynomial(const KernelModel& model, const Eigen::VectorXd& z);

/// Per-coordinate combination over the training signals that observe each
/// coordinate. Works for complete training data too. Throws UncoveredCoordinate.
Eigen::VectorXd preimage_missing(const KernelModel& model, const ObservedSignal& z);

/// Dispatches on the kernel kind and on whether training data were partial.
Eigen::VectorXd preimage(const KernelModel& model, const ObservedSignal& z);

}  // namespace mcuos
