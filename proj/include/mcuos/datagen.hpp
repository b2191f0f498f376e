#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mcuos/geometry.hpp"
#include "mcuos/random.hpp"

namespace mcuos {

struct SyntheticSpec {
  int m = 180;
  int s = 13;
  int L = 5;
  double t_s = 0.04;
  std::vector<int> cluster_sizes{150, 100, 150, 100, 150};
  double sigma_tr_sq = 0.1;
  double sigma_te_sq = 0.1;
  std::uint64_t rng_seed = 0;

  int total_points() const;
  void validate() const;
};

/// Clean unit-norm signals, their noisy observations and ground truth.
/// `truth` is empty for datasets loaded from files.
struct Dataset {
  Eigen::MatrixXd clean;
  Eigen::MatrixXd noisy;
  std::vector<int> labels;
  SubspaceCollection truth;
};

/// T_1 random; T_l = orth(T_{l-1} + t_s W_l) with W_l uniform on [0, 1].
SubspaceCollection generate_subspaces(const SyntheticSpec& spec, Rng& rng);

/// cluster_sizes[l] unit-norm points on truth[l] plus training noise.
Dataset generate_points(const SubspaceCollection& truth, const SyntheticSpec& spec, Rng& rng,
                        double sigma_sq);

/// Adds i.i.d. N(0, sigma_sq / m) entries.
Eigen::MatrixXd add_noise(const Eigen::MatrixXd& data, double sigma_sq, Rng& rng);

/// Training set (noise sigma_tr_sq) and test set (noise sigma_te_sq) drawn from
/// the same planted subspaces.
struct SyntheticPair {
  Dataset train;
  Dataset test;
};
SyntheticPair generate_synthetic(const SyntheticSpec& spec);

/// Uniform subsets without replacement of size round((1 - fraction) m), sorted.
/// Throws InsufficientObservations when that size is not above `min_observed`.
std::vector<std::vector<int>> generate_masks(int m, int N, double missing_fraction, Rng& rng,
                                             int min_observed = 0);

/// n draws from {0..m-1} with replacement (a multiset, unsorted).
std::vector<int> sample_with_replacement(int m, int n, Rng& rng);

void normalize_columns(Eigen::MatrixXd& data);

/// Headerless comma-separated rows. With `signals_in_rows` each row becomes a column.
Eigen::MatrixXd load_matrix_csv(const std::string& path, bool signals_in_rows = false);
std::vector<int> load_labels_csv(const std::string& path);
void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& matrix);

/// Non-overlapping patches in row-major tiling order, each flattened row-major.
Eigen::MatrixXd extract_patches(const Eigen::MatrixXd& image, int patch_h, int patch_w);
Eigen::MatrixXd assemble_patches(const Eigen::MatrixXd& patches, int image_h, int image_w, int patch_h,
                                 int patch_w);

}  // namespace mcuos
