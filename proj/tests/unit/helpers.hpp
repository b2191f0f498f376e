#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>
#include <doctest.h>

#include "mcuos/errors.hpp"
#include "mcuos/geometry.hpp"
#include "mcuos/random.hpp"

namespace helpers {

inline Eigen::MatrixXd random_basis(Eigen::Index m, Eigen::Index s, mcuos::Rng& rng) {
  return mcuos::random_subspace(m, s, rng).basis();
}

// Distance through orthogonal projectors: d^2 = ||P_a - P_b||_F^2 / 2 for equal dimensions.
inline double projector_distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const Eigen::MatrixXd pa = a * a.transpose();
  const Eigen::MatrixXd pb = b * b.transpose();
  return std::sqrt(std::max(0.0, 0.5 * (pa - pb).squaredNorm()));
}

inline Eigen::MatrixXd random_rotation(Eigen::Index s, mcuos::Rng& rng) {
  return random_basis(s, s, rng);
}

// Unit-norm points drawn uniformly from the span of `basis`.
inline Eigen::MatrixXd points_on(const Eigen::MatrixXd& basis, int count, mcuos::Rng& rng) {
  Eigen::MatrixXd pts = basis * mcuos::gaussian_matrix(basis.cols(), count, rng);
  pts.colwise().normalize();
  return pts;
}

template <class F>
mcuos::ErrorCode error_code_of(F&& f) {
  try {
    f();
  } catch (const mcuos::Error& e) {
    return e.code();
  }
  FAIL("expected an mcuos::Error");
  return mcuos::ErrorCode::InvalidArgument;
}

}  // namespace helpers
