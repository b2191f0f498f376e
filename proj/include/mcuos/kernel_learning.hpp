#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "mcuos/kernel.hpp"
#include "mcuos/linear.hpp"
#include "mcuos/observed.hpp"
#include "mcuos/random.hpp"

namespace mcuos {

struct KernelParams {
  int L = 1;
  int s = 1;
  double lambda = 1.0;
  int max_outer_iters = 30;
  int inner_max_sweeps = 20;
  double rel_tol = 1e-6;
  double delta_min = 1e-6;
  std::uint64_t rng_seed = 0;
};

/// Union of subspaces in feature space. Subspace l is spanned by the centered
/// feature images of the training points in clusters[l], with orthonormal basis
/// phi~(Y_c) E_l. `clusters` is the support of each basis; `assignments` is the
/// last kernel subspace assignment (they agree after re-initialization).
struct KernelModel {
  KernelSpec spec;
  int s = 1;
  double lambda = 1.0;
  Eigen::MatrixXd gram;      // uncentered (estimated and repaired for partial data)
  CenteringStats stats;
  Eigen::MatrixXd centered;  // G~
  bool psd_repaired = false;
  Eigen::MatrixXd training;             // complete training signals, or empty
  std::vector<ObservedSignal> observed;  // partial training signals, or empty
  std::vector<std::vector<int>> clusters;
  std::vector<Eigen::MatrixXd> coefficients;
  std::vector<int> assignments;
  double objective = 0.0;

  int subspace_count() const { return static_cast<int>(clusters.size()); }
  bool trained_on_partial_data() const { return !observed.empty(); }
  Eigen::Index ambient_dim() const;
};

struct KernelInit {
  std::vector<std::vector<int>> clusters;
  std::vector<Eigen::MatrixXd> coefficients;
};

/// Greedy selection of s training points per subspace by summed centered affinity.
/// The first subspace starts from a random point; later ones start from the
/// unused point with the largest residual against its nearest earlier subspace.
KernelInit gkiop(const Eigen::MatrixXd& centered_gram, int L, int s, Rng& rng);

/// U_s Sigma_s^(-1/2) of a centered Gram block, limited to its numerical rank.
Eigen::MatrixXd whitened_coefficients(const Eigen::MatrixXd& block, int s);

/// Top-`count` solutions of A b = zeta K b normalized to E^T K E = I, computed
/// inside the numerical range of the positive semidefinite K.
Eigen::MatrixXd generalized_top_eigenvectors(const Eigen::MatrixXd& a, const Eigen::MatrixXd& k, int count);

/// ||P_l phi~(y)||^2 for every subspace, given kernel values of y.
Eigen::VectorXd projection_energies(const KernelModel& model, const Eigen::VectorXd& k_y);

int kernel_assign(const KernelModel& model, int training_index);
int kernel_assign(const KernelModel& model, const Eigen::VectorXd& y);
int kernel_assign(const KernelModel& model, const ObservedSignal& y);
std::vector<int> kernel_assign_all(const KernelModel& model);

/// New E_l for the current assignments; E^T G~_cc E = I.
Eigen::MatrixXd kernel_subspace_update(const KernelModel& model, int ell);

/// s_l - ||D_l^T D_p||_F^2 in feature space.
double feature_distance_sq(const KernelModel& model, int ell, int p);

double objective_f3(const KernelModel& model);

/// Kernel values of a new signal against the training set (estimated when the
/// model was trained on partial data).
Eigen::VectorXd model_kernel_column(const KernelModel& model, const Eigen::VectorXd& y);
Eigen::VectorXd model_kernel_column(const KernelModel& model, const ObservedSignal& y);
double model_self_kernel(const KernelModel& model, const ObservedSignal& y);

/// Learning from an uncentered Gram matrix (the shared core of both variants).
KernelModel mckusal_gram(const Eigen::MatrixXd& raw_gram, const KernelSpec& spec, const KernelParams& params,
                         const StepObserver& observer = {});

KernelModel mckusal(const Eigen::MatrixXd& data, const KernelSpec& spec, const KernelParams& params,
                    const StepObserver& observer = {});

/// Same pipeline on the estimated, repaired Gram matrix of partial signals.
KernelModel rmckusal(const std::vector<ObservedSignal>& data, const KernelSpec& spec, const KernelParams& params,
                     const StepObserver& observer = {});

}  // namespace mcuos
