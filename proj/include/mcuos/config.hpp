#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mcuos/bounds.hpp"
#include "mcuos/datagen.hpp"
#include "mcuos/kernel.hpp"

namespace mcuos {

enum class Mode { SynthMcuos, SynthRmcuos, Mckuos, Rmckuos, Denoise, Cluster, BoundsCheck };
enum class Method { Micusal, Amicusal, Rmicusal, Mckusal, Rmckusal };

std::string_view to_string(Mode mode) noexcept;
std::string_view to_string(Method method) noexcept;
bool is_kernel_method(Method method) noexcept;
bool uses_partial_data(Method method) noexcept;

struct MethodConfig {
  Method method = Method::Micusal;
  std::vector<double> lambdas{2.0};
  int L = 5;
  int s = 13;
  int restarts = 1;
  int max_outer_iters = 100;
  double rel_tol = 1e-6;
  // missing-data linear learner
  double eta = 0.5;
  int inner_iters = 100;
  int reorth_every = 50;
  // adaptive learner
  int L_max = 8;
  int s_max = 20;
  int k1 = 6;
  int k2 = 10;
  double eps_min = 0.0;
  // kernel learners
  KernelSpec kernel = KernelSpec::gaussian(4.0);
  int inner_max_sweeps = 20;
  double delta_min = 1e-6;
};

struct DataConfig {
  std::string train;       // CSV of training signals; empty means synthetic data
  std::string labels;      // optional ground-truth labels for `train`
  std::string test_clean;  // clean test signals for denoising
  bool signals_in_rows = false;
  bool normalize = false;
  std::vector<double> missing_fracs{0.0};
};

struct BoundsConfig {
  int m = 100;
  std::vector<int> omega_sizes{25, 50};
  std::vector<double> deltas{0.05, 0.1};
  int trials = 10000;
  PairKind pairs = PairKind::Gaussian;
  double gaussian_c = 2.0;
  double poly_c = 1.0;
  int poly_d = 3;
};

/// A fully validated experiment description.
struct ExperimentConfig {
  Mode mode = Mode::SynthMcuos;
  std::string run_id;
  std::uint64_t seed = 0;
  int trials = 1;
  int jobs = 0;  // 0: one worker per processor
  std::string out;
  SyntheticSpec synthetic;
  std::vector<double> sigma_te_sq{0.1};
  DataConfig data;
  MethodConfig method;
  BoundsConfig bounds;

  /// Throws ConfigError naming the offending field.
  void validate() const;
  /// `section.key = value` lines for every setting, in a fixed order.
  std::vector<std::string> describe() const;
  bool uses_file_data() const { return !data.train.empty(); }
};

/// Parses INI text with sections [run], [synthetic], [data], [method] and
/// [bounds]. Unknown sections or keys are rejected; `run.mode` is required.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// Every accepted key with its default, for help output.
std::string config_reference();

}  // namespace mcuos
