#pragma once

#include <vector>

#include <Eigen/Dense>

namespace mcuos {

/// A signal seen only on the index set `omega` (0-based, strictly increasing).
/// `values[k]` is the entry at coordinate `omega[k]`.
class ObservedSignal {
 public:
  ObservedSignal(Eigen::VectorXd values, std::vector<int> omega, Eigen::Index ambient_dim);

  /// Keeps the entries of a fully known vector on `omega`.
  static ObservedSignal from_full(const Eigen::VectorXd& full, std::vector<int> omega);
  static ObservedSignal complete(const Eigen::VectorXd& full);

  const Eigen::VectorXd& values() const noexcept { return values_; }
  const std::vector<int>& omega() const noexcept { return omega_; }
  Eigen::Index ambient_dim() const noexcept { return ambient_dim_; }
  Eigen::Index observed_count() const noexcept { return values_.size(); }
  bool is_complete() const noexcept { return values_.size() == ambient_dim_; }

  /// Ambient-length vector with zeros off omega.
  Eigen::VectorXd zero_filled() const;

 private:
  Eigen::VectorXd values_;
  std::vector<int> omega_;
  Eigen::Index ambient_dim_;
};

/// Column i of `data` restricted to masks[i].
std::vector<ObservedSignal> observe(const Eigen::MatrixXd& data, const std::vector<std::vector<int>>& masks);
std::vector<ObservedSignal> observe_all(const Eigen::MatrixXd& data);

}  // namespace mcuos
