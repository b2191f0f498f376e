#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "mcuos/geometry.hpp"
#include "mcuos/linear.hpp"
#include "mcuos/observed.hpp"

namespace mcuos {

struct RmicusalParams {
  int L = 1;
  int s = 1;
  double lambda = 1.0;
  double eta = 0.05;
  int inner_iters = 100;
  int max_outer_iters = 50;
  double rel_tol = 1e-6;
  int restarts = 1;
  int reorth_every = 50;
  std::uint64_t rng_seed = 0;
};

/// ||y_omega - P y_omega||^2 where P projects onto the range of the basis rows
/// in omega. Throws RankDeficient when those rows lose rank.
double residual_on_omega(const Eigen::MatrixXd& basis, const ObservedSignal& signal);
double residual_on_omega(const Subspace& sub, const ObservedSignal& signal);

/// One geodesic step of length eta_t decreasing -tr(D^T A D) for subspace
/// `ell`, A = sum over the other subspaces of D_p D_p^T.
Eigen::MatrixXd grassmann_closeness_step(int ell, const Bases& bases, double eta_t);
Subspace grassmann_closeness_step(int ell, const SubspaceCollection& subspaces, double eta_t);

/// Rank-one geodesic step toward fitting one partially observed signal.
/// `step` multiplies the rotation angle ||r|| ||w||.
Eigen::MatrixXd grouse_style_data_step(const Eigen::MatrixXd& basis, const ObservedSignal& signal, double step);
Subspace grouse_style_data_step(const Subspace& sub, const ObservedSignal& signal, double step);

/// Closeness term plus lambda * sum_i (m/|omega_i|) residual_on_omega.
double objective_f2(const Bases& bases, const std::vector<int>& assignments,
                    const std::vector<ObservedSignal>& signals, double lambda);

/// l_i = argmin_l residual_on_omega(D_l, y_i) (ties: lowest index).
std::vector<int> assign_observed(const Bases& bases, const std::vector<ObservedSignal>& signals);

/// Learning from partially observed signals. The data are not centered; the
/// returned model carries a zero mean and its objective is F2.
McUosModel rmicusal(const std::vector<ObservedSignal>& signals, const RmicusalParams& params,
                    const StepObserver& observer = {});

}  // namespace mcuos
