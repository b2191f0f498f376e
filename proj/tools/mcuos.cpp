// Command-line front end: one subcommand per pipeline, driven by INI configs.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "mcuos/config.hpp"
#include "mcuos/datagen.hpp"
#include "mcuos/errors.hpp"
#include "mcuos/experiment.hpp"

namespace {

using mcuos::ErrorCode;
using mcuos::ExperimentConfig;
using mcuos::Mode;

int exit_code(ErrorCode code) {
  if (code == ErrorCode::ConfigError) return 2;
  return mcuos::is_data_error(code) ? 3 : 4;
}

std::string one_line(std::string text) {
  for (char& ch : text)
    if (ch == '\n' || ch == '\r') ch = ' ';
  return text;
}

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  std::optional<int> jobs;
  std::string out;
  std::vector<double> deltas;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("-c,--config", o.config, "INI experiment config")->required();
  cmd->add_option("--seed", o.seed, "override run.seed");
  cmd->add_option("--trials", o.trials, "override the trial count (bounds.trials for the bounds subcommand)");
  cmd->add_option("-j,--jobs", o.jobs, "worker threads (default: one per processor)");
  cmd->add_option("-o,--out", o.out, "output CSV (a directory for synth); default run.out or stdout");
}

ExperimentConfig resolve(const Overrides& o, bool bounds) {
  ExperimentConfig cfg = mcuos::load_config(o.config);
  if (o.seed) cfg.seed = *o.seed;
  if (o.trials) (bounds ? cfg.bounds.trials : cfg.trials) = *o.trials;
  if (o.jobs) cfg.jobs = *o.jobs;
  if (!o.out.empty()) cfg.out = o.out;
  if (!o.deltas.empty()) cfg.bounds.deltas = o.deltas;
  cfg.validate();
  return cfg;
}

void require_mode(const ExperimentConfig& cfg, std::initializer_list<Mode> modes, const char* command) {
  for (Mode m : modes)
    if (cfg.mode == m) return;
  mcuos::fail(ErrorCode::ConfigError,
              std::string("run.mode: ") + std::string(mcuos::to_string(cfg.mode)) + " cannot run under '" + command + "'");
}

void report(const ExperimentConfig& cfg, const std::vector<mcuos::ResultRecord>& records) {
  const auto comments = cfg.describe();
  if (cfg.out.empty()) {
    mcuos::write_records_csv(std::cout, records, comments);
  } else {
    mcuos::write_records_csv(cfg.out, records, comments);
  }
  int errors = 0;
  for (const auto& r : records) {
    if (r.metric.rfind("error:", 0) == 0) ++errors;
    if (r.trial == mcuos::kAggregateTrial && r.metric.size() > 5 &&
        r.metric.compare(r.metric.size() - 5, 5, ":mean") == 0)
      std::cerr << r.method << " lambda=" << r.lambda << " missing=" << r.missing_frac << " sigma_te=" << r.sigma_te_sq
                << ' ' << r.metric << " = " << r.value << '\n';
  }
  if (errors) std::cerr << "warning: " << errors << " run(s) failed; see error: rows\n";
}

void cmd_synth(const Overrides& o) {
  ExperimentConfig cfg = resolve(o, false);
  if (cfg.uses_file_data()) mcuos::fail(ErrorCode::ConfigError, "data.train: synth needs a synthetic data source");
  if (cfg.out.empty()) mcuos::fail(ErrorCode::ConfigError, "run.out: synth needs an output directory");
  std::filesystem::create_directories(cfg.out);
  mcuos::SyntheticSpec spec = cfg.synthetic;
  spec.rng_seed = mcuos::derive_seed(cfg.seed, {0});
  const auto pair = mcuos::generate_synthetic(spec);
  const std::filesystem::path dir(cfg.out);
  auto labels = [](const std::vector<int>& v) {
    Eigen::MatrixXd out(v.size(), 1);
    for (std::size_t i = 0; i < v.size(); ++i) out(i, 0) = v[i];
    return out;
  };
  mcuos::write_matrix_csv((dir / "train.csv").string(), pair.train.noisy);
  mcuos::write_matrix_csv((dir / "train_clean.csv").string(), pair.train.clean);
  mcuos::write_matrix_csv((dir / "train_labels.csv").string(), labels(pair.train.labels));
  mcuos::write_matrix_csv((dir / "test.csv").string(), pair.test.noisy);
  mcuos::write_matrix_csv((dir / "test_clean.csv").string(), pair.test.clean);
  mcuos::write_matrix_csv((dir / "test_labels.csv").string(), labels(pair.test.labels));
  for (std::size_t l = 0; l < pair.train.truth.size(); ++l)
    mcuos::write_matrix_csv((dir / ("truth_" + std::to_string(l) + ".csv")).string(), pair.train.truth[l].basis());
  std::cerr << "wrote " << pair.train.noisy.cols() << " training and " << pair.test.noisy.cols()
            << " test signals to " << cfg.out << '\n';
}

void cmd_run(const Overrides& o, std::initializer_list<Mode> modes, const char* command, bool bounds) {
  const ExperimentConfig cfg = resolve(o, bounds);
  require_mode(cfg, modes, command);
  report(cfg, mcuos::run_experiment(cfg));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Union-of-subspaces learning experiments"};
  app.require_subcommand(1);
  app.footer("Config keys and defaults:\n\n" + mcuos::config_reference() +
             "\nExit codes: 0 success, 2 config error, 3 data error, 4 numerical failure.");

  Overrides o;
  auto* synth = app.add_subcommand("synth", "write a synthetic training/test set as CSV files");
  auto* learn = app.add_subcommand("learn", "learn unions of subspaces (modes synth-mcuos, synth-rmcuos, mckuos, rmckuos)");
  auto* denoise = app.add_subcommand("denoise", "denoise test signals with a learned model (mode denoise)");
  auto* cluster = app.add_subcommand("cluster", "cluster training signals (mode cluster)");
  auto* bounds = app.add_subcommand("bounds", "Monte Carlo check of the missing-data kernel bounds (mode bounds-check)");
  for (auto* cmd : {synth, learn, denoise, cluster, bounds}) add_common(cmd, o);
  bounds->add_option("--delta", o.deltas, "override bounds.delta (repeatable)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: code=UsageError exit=2 message=" << one_line(e.what()) << '\n';
    return 2;
  }

  try {
    if (*synth) cmd_synth(o);
    if (*learn) cmd_run(o, {Mode::SynthMcuos, Mode::SynthRmcuos, Mode::Mckuos, Mode::Rmckuos}, "learn", false);
    if (*denoise) cmd_run(o, {Mode::Denoise}, "denoise", false);
    if (*cluster) cmd_run(o, {Mode::Cluster}, "cluster", false);
    if (*bounds) cmd_run(o, {Mode::BoundsCheck}, "bounds", true);
  } catch (const mcuos::Error& e) {
    const int code = exit_code(e.code());
    std::cerr << "error: code=" << mcuos::to_string(e.code()) << " exit=" << code << " message=" << one_line(e.what())
              << '\n';
    return code;
  } catch (const std::exception& e) {
    std::cerr << "error: code=IoError exit=3 message=" << one_line(e.what()) << '\n';
    return 3;
  }
  return 0;
}
