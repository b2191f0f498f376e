#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mcuos/observed.hpp"

namespace mcuos {

enum class KernelKind { Gaussian, Polynomial };

/// gaussian: exp(-||y - y'||^2 / c); polynomial: (<y, y'> + c)^d.
struct KernelSpec {
  KernelKind kind = KernelKind::Gaussian;
  double c = 1.0;
  int d = 1;

  static KernelSpec gaussian(double c);
  static KernelSpec polynomial(double c, int d);
  void validate() const;
  std::string describe() const;
};

double kernel_value(const KernelSpec& spec, const Eigen::VectorXd& a, const Eigen::VectorXd& b);

struct GramMatrix {
  Eigen::MatrixXd values;
  bool centered = false;
};

GramMatrix gram(const KernelSpec& spec, const Eigen::MatrixXd& data);

/// G - HG - GH + HGH with H the N x N averaging matrix. Idempotent.
GramMatrix center(const GramMatrix& g);

/// Row means and grand mean of an uncentered Gram matrix: what is needed to
/// center kernel vectors of new signals.
struct CenteringStats {
  Eigen::VectorXd row_means;
  double total_mean = 0.0;
};
CenteringStats centering_stats(const Eigen::MatrixXd& raw_gram);

/// k_y: kernel values between y and every training column.
Eigen::VectorXd kernel_column(const KernelSpec& spec, const Eigen::MatrixXd& data, const Eigen::VectorXd& y);

/// Centered inner products between phi(y) and the training signals in `cluster`,
/// from k_y and the training centering statistics.
Eigen::VectorXd centered_cross(const Eigen::VectorXd& k_y, const CenteringStats& stats,
                               const std::vector<int>& cluster);

/// ||phi(y) - mean feature||^2 from kappa(y, y) and k_y.
double centered_self(double k_yy, const Eigen::VectorXd& k_y, const CenteringStats& stats);

/// Convenience form working straight from the training data.
Eigen::VectorXd centered_cross_vector(const KernelSpec& spec, const Eigen::MatrixXd& data,
                                      const std::vector<int>& cluster, const Eigen::VectorXd& y);

/// Sorted intersection of two observation sets.
std::vector<int> overlap(const ObservedSignal& a, const ObservedSignal& b);

/// Kernel value estimated from the entries both signals observe, with the
/// squared distance or inner product rescaled by m / |overlap|. Exact when the
/// overlap is everything.
double estimate_kernel_missing(const KernelSpec& spec, const ObservedSignal& a, const ObservedSignal& b);

struct EstimatedGram {
  Eigen::MatrixXd values;
  bool psd_repaired = false;
  double delta_min = 1e-6;
};

inline constexpr double kZeroEigenvalue = 1e-12;

/// A matrix that is positive semidefinite up to rounding (no eigenvalue below
/// -1e-12 max(1, |lambda|_max)) is returned as is. Otherwise eigenvalues within
/// that tolerance of zero become delta_min and negative ones are flipped.
EstimatedGram psd_repair(const Eigen::MatrixXd& g, double delta_min = 1e-6);

/// Pairwise estimates followed by psd_repair. Throws EmptyOverlap naming the pair.
EstimatedGram estimated_gram_missing(const KernelSpec& spec, const std::vector<ObservedSignal>& data,
                                     double delta_min = 1e-6);

/// Estimated kernel values between one (possibly partial) signal and every training signal.
Eigen::VectorXd estimated_kernel_column(const KernelSpec& spec, const std::vector<ObservedSignal>& data,
                                        const ObservedSignal& y);

}  // namespace mcuos
