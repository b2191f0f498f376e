#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mcuos/kernel.hpp"

namespace mcuos {

/// m ||z||_inf^2 / ||z||_2^2.
double coherence(const Eigen::VectorXd& z);

/// Sampling model for the random signal pairs.
enum class PairKind {
  Gaussian,    // i.i.d. normal entries, unit-normalized
  Rademacher,  // +-1/sqrt(m) entries: the lowest possible coherence
};

struct BoundCheckParams {
  int m = 100;
  int omega_size = 50;  // draws with replacement forming the shared index multiset
  double delta = 0.1;
  int trials = 10000;
  PairKind pairs = PairKind::Gaussian;
  double gaussian_c = 2.0;
  double poly_c = 1.0;
  int poly_d = 3;
  std::uint64_t rng_seed = 0;
};

enum class BoundKind { SquaredDistance, InnerProduct, GaussianKernel, PolynomialKernel };

std::string_view to_string(BoundKind kind) noexcept;

struct BoundReport {
  BoundKind kind;
  BoundCheckParams params;
  int violations = 0;
  double rate = 0.0;
  double mean_width = 0.0;  // average alpha or beta over trials
  /// 2 delta plus three binomial standard deviations.
  double limit() const;
  bool passed() const { return rate <= limit(); }
};

/// Monte Carlo count of how often each concentration sandwich fails for
/// random unit pairs observed on `omega_size` coordinates drawn with replacement.
BoundReport check_bound(BoundKind kind, const BoundCheckParams& params);

std::vector<BoundReport> check_all_bounds(const BoundCheckParams& params);

}  // namespace mcuos
