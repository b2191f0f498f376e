#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "mcuos/geometry.hpp"

namespace mcuos {

/// Learned union of subspaces in the ambient space. `assignments[i]` is the
/// 0-based subspace index of training column i.
struct McUosModel {
  SubspaceCollection subspaces;
  Eigen::VectorXd mean;
  std::vector<int> assignments;
  double objective = 0.0;
};

struct MicusalParams {
  int L = 1;
  int s = 1;
  double lambda = 1.0;
  int max_outer_iters = 100;
  double rel_tol = 1e-6;
  int restarts = 1;
  std::uint64_t rng_seed = 0;
};

struct AmicusalParams {
  int L_max = 8;
  int s_max = 20;
  double lambda = 1.0;
  int k1 = 6;
  int k2 = 10;
  double eps_min = 0.0;
  int max_outer_iters = 100;
  double rel_tol = 1e-6;
  int restarts = 1;
  std::uint64_t rng_seed = 0;
};

enum class StepKind { Assignment, Pruning, Update, Merge, Reinitialization };

/// Reported after every step of an alternating-minimization run with the
/// objective value at that point. Lets callers audit monotonicity.
struct StepEvent {
  StepKind kind;
  int iteration;
  int subspace;  // -1 for whole-model steps
  double objective;
  const std::vector<int>* assignments = nullptr;  // set by the kernel learners on assignment steps
};
using StepObserver = std::function<void(const StepEvent&)>;

using Bases = std::vector<Eigen::MatrixXd>;

Bases bases_of(const SubspaceCollection& subspaces);
SubspaceCollection subspaces_of(const Bases& bases);

/// F1 on already-centered data.
double objective_f1(const Bases& bases, const std::vector<int>& assignments,
                    const Eigen::MatrixXd& centered, double lambda);

/// F1 of a model on raw data (centered with the model's mean).
double objective_f1(const McUosModel& model, const Eigen::MatrixXd& data, double lambda);

/// l_i = argmax_l ||D_l^T y_i||^2 with ties going to the lowest index.
std::vector<int> assign_subspaces(const Bases& bases, const Eigen::MatrixXd& centered);
std::vector<int> assign_subspaces(const SubspaceCollection& subspaces, const Eigen::MatrixXd& centered);

/// Top-`dim` eigenvectors of sum_{p in others} D_p D_p^T + (lambda/2) Y Y^T.
Eigen::MatrixXd closest_basis(const Bases& others, const Eigen::MatrixXd& cluster, double lambda,
                              Eigen::Index dim, Eigen::Index ambient_dim);

/// Closed-form block update of subspace `ell` given the current assignments.
Subspace update_subspace(int ell, const SubspaceCollection& subspaces,
                         const std::vector<int>& assignments, const Eigen::MatrixXd& centered,
                         double lambda);

/// Columns of `centered` whose assignment equals `ell`.
Eigen::MatrixXd gather_cluster(const Eigen::MatrixXd& centered, const std::vector<int>& assignments,
                               int ell);

McUosModel micusal(const Eigen::MatrixXd& data, const MicusalParams& params,
                   const StepObserver& observer = {});

/// One MiCUSaL run started from the given bases (no restarts).
McUosModel micusal_from(const Eigen::MatrixXd& data, const SubspaceCollection& initial,
                        const MicusalParams& params, const StepObserver& observer = {});

/// Nearest-neighbour maximum-likelihood estimate of intrinsic dimension,
/// averaged over points and over neighbourhood sizes k1..k2.
double estimate_dimension(const Eigen::MatrixXd& points, int k1, int k2);

McUosModel amicusal(const Eigen::MatrixXd& data, const AmicusalParams& params,
                    const StepObserver& observer = {});

}  // namespace mcuos
