#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mcuos/kernel_learning.hpp"
#include "mcuos/linear.hpp"
#include "mcuos/observed.hpp"

namespace mcuos {

/// ||x - x_hat||^2 / ||x||^2.
double relative_error(const Eigen::VectorXd& clean, const Eigen::VectorXd& estimate);

struct Reconstruction {
  Eigen::VectorXd estimate;
  int subspace = 0;
  double relative_error = 0.0;
};

/// Denoises z with a linear model. With complete training data the signal is
/// centered by the model mean and the subspace maximizing ||D^T (z - mean)||^2
/// is used; a model learned from partial data has no mean and projects z directly.
Reconstruction denoise_linear(const McUosModel& model, const Eigen::VectorXd& z, const Eigen::VectorXd& clean,
                              bool complete_training);

/// Pre-image of the kernel-subspace projection of z, scored against the clean signal.
Reconstruction denoise_kernel(const KernelModel& model, const ObservedSignal& z, const Eigen::VectorXd& clean);

/// Percentage of misassigned points under the best matching of cluster ids to
/// labels. Both sequences may use arbitrary integer ids; at most 8 distinct ids
/// (and at least L) are matched exhaustively.
double clustering_error(const std::vector<int>& assignments, const std::vector<int>& labels, int L);

struct ResultRecord {
  std::string run_id;
  std::string method;
  std::string metric;
  double lambda = 0.0;
  int L = 0;
  int s = 0;
  double missing_frac = 0.0;
  double sigma_tr_sq = 0.0;
  double sigma_te_sq = 0.0;
  std::uint64_t seed = 0;
  int trial = 0;  // kAggregateTrial for summary rows
  double value = 0.0;
};

inline constexpr int kAggregateTrial = -1;

struct Summary {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation (n - 1)
  int count = 0;
};

/// NaN entries are skipped.
Summary summarize(const std::vector<double>& values);

/// Appends `<metric>:mean`, `<metric>:std` and `<metric>:count` rows for every
/// group of records that differ only in trial and seed. Error records are not
/// aggregated. Summary rows carry `base_seed`.
std::vector<ResultRecord> aggregate(const std::vector<ResultRecord>& records, std::uint64_t base_seed);

inline constexpr const char* kCsvHeader =
    "run_id,method,metric,lambda,L,s,missing_frac,sigma_tr_sq,sigma_te_sq,seed,trial,value";

/// Writes `# `-prefixed comment lines, the header and one row per record.
/// Aggregate rows carry `all` in the trial column.
void write_records_csv(const std::string& path, const std::vector<ResultRecord>& records,
                       const std::vector<std::string>& comments);
void write_records_csv(std::ostream& out, const std::vector<ResultRecord>& records,
                       const std::vector<std::string>& comments);

}  // namespace mcuos
