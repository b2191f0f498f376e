#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

#include <Eigen/Dense>

namespace mcuos {

using Rng = std::mt19937_64;

// Mixes a base seed with stream identifiers (trial, restart, ...) so that
// independent streams never share a state.
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> stream);

Eigen::MatrixXd gaussian_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng);
Eigen::MatrixXd uniform_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng);

}  // namespace mcuos
