#include "mcuos/observed.hpp"

#include <numeric>

#include "mcuos/errors.hpp"

namespace mcuos {

ObservedSignal::ObservedSignal(Eigen::VectorXd values, std::vector<int> omega, Eigen::Index ambient_dim)
    : values_(std::move(values)), omega_(std::move(omega)), ambient_dim_(ambient_dim) {
  if (ambient_dim_ < 1) fail(ErrorCode::InvalidArgument, "ambient dimension must be positive");
  if (static_cast<Eigen::Index>(omega_.size()) != values_.size())
    fail(ErrorCode::ShapeMismatch, "one value per observed index required");
  for (std::size_t k = 0; k < omega_.size(); ++k) {
    if (omega_[k] < 0 || omega_[k] >= ambient_dim_)
      fail(ErrorCode::InvalidArgument, "observed index out of range");
    if (k > 0 && omega_[k] <= omega_[k - 1])
      fail(ErrorCode::InvalidArgument, "observed indices must be strictly increasing");
  }
  if (!values_.allFinite()) fail(ErrorCode::InvalidArgument, "observed values must be finite");
}

ObservedSignal ObservedSignal::from_full(const Eigen::VectorXd& full, std::vector<int> omega) {
  Eigen::VectorXd values(omega.size());
  for (std::size_t k = 0; k < omega.size(); ++k) {
    if (omega[k] < 0 || omega[k] >= full.size()) fail(ErrorCode::InvalidArgument, "observed index out of range");
    values(k) = full(omega[k]);
  }
  return ObservedSignal(std::move(values), std::move(omega), full.size());
}

ObservedSignal ObservedSignal::complete(const Eigen::VectorXd& full) {
  std::vector<int> omega(full.size());
  std::iota(omega.begin(), omega.end(), 0);
  return ObservedSignal(full, std::move(omega), full.size());
}

Eigen::VectorXd ObservedSignal::zero_filled() const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(ambient_dim_);
  for (std::size_t k = 0; k < omega_.size(); ++k) out(omega_[k]) = values_(k);
  return out;
}

std::vector<ObservedSignal> observe(const Eigen::MatrixXd& data, const std::vector<std::vector<int>>& masks) {
  if (static_cast<Eigen::Index>(masks.size()) != data.cols())
    fail(ErrorCode::ShapeMismatch, "one mask per column required");
  std::vector<ObservedSignal> out;
  out.reserve(masks.size());
  for (Eigen::Index i = 0; i < data.cols(); ++i) out.push_back(ObservedSignal::from_full(data.col(i), masks[i]));
  return out;
}

std::vector<ObservedSignal> observe_all(const Eigen::MatrixXd& data) {
  std::vector<ObservedSignal> out;
  out.reserve(data.cols());
  for (Eigen::Index i = 0; i < data.cols(); ++i) out.push_back(ObservedSignal::complete(data.col(i)));
  return out;
}

}  // namespace mcuos
