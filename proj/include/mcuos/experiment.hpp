#pragma once

#include <vector>

#include <Eigen/Dense>

#include "mcuos/config.hpp"
#include "mcuos/evaluation.hpp"

namespace mcuos {

/// Signals read from the files named in a config.
struct FileData {
  Eigen::MatrixXd train;
  std::vector<int> labels;
  Eigen::MatrixXd test_clean;
};

/// Loads and checks the CSV inputs (IoError, ParseError, ShapeMismatch).
FileData load_file_data(const DataConfig& data);

/// Per-trial records in trial order followed by aggregate rows. Errors inside a
/// trial become `error:<Code>` records with a NaN value; loading errors throw.
/// `jobs` <= 0 uses one worker per processor.
std::vector<ResultRecord> run_experiment(const ExperimentConfig& config);

}  // namespace mcuos
