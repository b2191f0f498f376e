#include "mcuos/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <optional>
#include <thread>

#include "mcuos/bounds.hpp"
#include "mcuos/datagen.hpp"
#include "mcuos/errors.hpp"
#include "mcuos/kernel_learning.hpp"
#include "mcuos/linear.hpp"
#include "mcuos/missing.hpp"
#include "mcuos/preimage.hpp"

namespace mcuos {

FileData load_file_data(const DataConfig& data) {
  FileData out;
  out.train = load_matrix_csv(data.train, data.signals_in_rows);
  if (data.normalize) normalize_columns(out.train);
  if (!data.labels.empty()) {
    out.labels = load_labels_csv(data.labels);
    if (static_cast<Eigen::Index>(out.labels.size()) != out.train.cols())
      fail(ErrorCode::ShapeMismatch, "label count does not match the number of training signals");
  }
  if (!data.test_clean.empty()) {
    out.test_clean = load_matrix_csv(data.test_clean, data.signals_in_rows);
    if (data.normalize) normalize_columns(out.test_clean);
    if (out.test_clean.rows() != out.train.rows())
      fail(ErrorCode::ShapeMismatch, "test signals differ in length from training signals");
  }
  return out;
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct TrialData {
  Eigen::MatrixXd train;
  std::vector<int> labels;
  SubspaceCollection truth;
  Eigen::MatrixXd test_clean;
  double sigma_tr_sq = 0.0;
};

// Either kind of learned model, plus the assignments of the training signals.
struct Learned {
  std::optional<McUosModel> linear;
  std::optional<KernelModel> kernel;
  std::vector<int> assignments;
  double objective = 0.0;
};

class TrialRunner {
 public:
  TrialRunner(const ExperimentConfig& cfg, const FileData* files, int trial)
      : cfg_(cfg), trial_(trial), seed_(derive_seed(cfg.seed, {static_cast<std::uint64_t>(trial)})) {
    if (files) {
      data_.train = files->train;
      data_.labels = files->labels;
      data_.test_clean = files->test_clean;
    } else {
      SyntheticSpec spec = cfg.synthetic;
      spec.rng_seed = seed_;
      auto pair = generate_synthetic(spec);
      data_.train = std::move(pair.train.noisy);
      data_.labels = std::move(pair.train.labels);
      data_.truth = std::move(pair.train.truth);
      data_.test_clean = std::move(pair.test.clean);
      data_.sigma_tr_sq = spec.sigma_tr_sq;
    }
  }

  std::vector<ResultRecord> run() {
    const auto& fracs = cfg_.data.missing_fracs;
    for (std::size_t f = 0; f < fracs.size(); ++f)
      for (double lambda : cfg_.method.lambdas) {
        ResultRecord base = base_record(lambda, fracs[f]);
        try {
          const auto signals = observed_training(f);
          const Learned learned = learn(signals, lambda);
          score(learned, base);
        } catch (const Error& e) {
          base.metric = "error:" + std::string(to_string(e.code()));
          base.value = kNaN;
          records_.push_back(base);
        }
      }
    return std::move(records_);
  }

 private:
  ResultRecord base_record(double lambda, double frac) const {
    ResultRecord r;
    r.run_id = cfg_.run_id;
    r.method = std::string(to_string(cfg_.method.method));
    r.lambda = lambda;
    const bool adaptive = cfg_.method.method == Method::Amicusal;
    r.L = adaptive ? cfg_.method.L_max : cfg_.method.L;
    r.s = adaptive ? cfg_.method.s_max : cfg_.method.s;
    r.missing_frac = frac;
    r.sigma_tr_sq = data_.sigma_tr_sq;
    r.seed = seed_;
    r.trial = trial_;
    return r;
  }

  void emit(ResultRecord r, const std::string& metric, double value, double sigma_te = 0.0) {
    r.metric = metric;
    r.value = value;
    r.sigma_te_sq = sigma_te;
    records_.push_back(std::move(r));
  }

  std::vector<ObservedSignal> observed_training(std::size_t frac_index) const {
    const double frac = cfg_.data.missing_fracs[frac_index];
    if (!uses_partial_data(cfg_.method.method)) return {};
    if (frac == 0.0) return observe_all(data_.train);
    Rng rng(derive_seed(seed_, {2, frac_index}));
    const int min_observed = cfg_.method.method == Method::Rmicusal ? cfg_.method.s : 0;
    const auto masks = generate_masks(static_cast<int>(data_.train.rows()), static_cast<int>(data_.train.cols()),
                                      frac, rng, min_observed);
    return observe(data_.train, masks);
  }

  Learned learn(const std::vector<ObservedSignal>& signals, double lambda) const {
    const auto& me = cfg_.method;
    const std::uint64_t seed = derive_seed(seed_, {1});
    Learned out;
    switch (me.method) {
      case Method::Micusal: {
        MicusalParams p{me.L, me.s, lambda, me.max_outer_iters, me.rel_tol, me.restarts, seed};
        out.linear = micusal(data_.train, p);
        break;
      }
      case Method::Amicusal: {
        AmicusalParams p{me.L_max, me.s_max, lambda, me.k1, me.k2, me.eps_min, me.max_outer_iters, me.rel_tol,
                         me.restarts, seed};
        out.linear = amicusal(data_.train, p);
        break;
      }
      case Method::Rmicusal: {
        RmicusalParams p{me.L, me.s, lambda, me.eta, me.inner_iters, me.max_outer_iters, me.rel_tol, me.restarts,
                         me.reorth_every, seed};
        out.linear = rmicusal(signals, p);
        break;
      }
      case Method::Mckusal:
      case Method::Rmckusal: {
        KernelParams p{me.L, me.s, lambda, me.max_outer_iters, me.inner_max_sweeps, me.rel_tol, me.delta_min, seed};
        out.kernel = me.method == Method::Mckusal ? mckusal(data_.train, me.kernel, p)
                                                  : rmckusal(signals, me.kernel, p);
        break;
      }
    }
    if (out.linear) {
      out.assignments = out.linear->assignments;
      out.objective = out.linear->objective;
    } else {
      out.assignments = out.kernel->assignments;
      out.objective = out.kernel->objective;
    }
    return out;
  }

  void score(const Learned& learned, const ResultRecord& base) {
    const Mode mode = cfg_.mode;
    const bool synth = mode == Mode::SynthMcuos || mode == Mode::SynthRmcuos;
    if (mode != Mode::Denoise && mode != Mode::Cluster) emit(base, "objective", learned.objective);
    if (learned.linear && !data_.truth.empty() && synth) {
      const auto& subs = learned.linear->subspaces;
      if (cfg_.method.method == Method::Amicusal) {
        emit(base, "L_hat", static_cast<double>(subs.size()));
        emit(base, "s_hat", static_cast<double>(subs.front().dim()));
      }
      if (subs.size() == data_.truth.size() && subs.front().dim() == data_.truth.front().dim())
        emit(base, "d_avg", match_subspaces(subs, data_.truth).d_avg);
    }
    const bool wants_clustering = mode == Mode::Cluster || ((mode == Mode::Mckuos || mode == Mode::Rmckuos) &&
                                                            !data_.labels.empty());
    if (wants_clustering) {
      const int L = std::max(cfg_.method.L, static_cast<int>(learned.linear ? learned.linear->subspaces.size() : 0));
      emit(base, "clustering_error", clustering_error(learned.assignments, data_.labels, L));
    }
    if ((synth || mode == Mode::Denoise) && data_.test_clean.cols() > 0) denoise(learned, base);
  }

  void denoise(const Learned& learned, const ResultRecord& base) {
    const bool complete = !uses_partial_data(cfg_.method.method);
    for (std::size_t k = 0; k < cfg_.sigma_te_sq.size(); ++k) {
      const double sigma = cfg_.sigma_te_sq[k];
      Rng rng(derive_seed(seed_, {3, k}));
      const Eigen::MatrixXd noisy = add_noise(data_.test_clean, sigma, rng);
      double sum = 0.0;
      int ok = 0;
      int failures = 0;
      for (Eigen::Index j = 0; j < noisy.cols(); ++j) {
        try {
          const Reconstruction r =
              learned.linear ? denoise_linear(*learned.linear, noisy.col(j), data_.test_clean.col(j), complete)
                             : denoise_kernel(*learned.kernel, ObservedSignal::complete(noisy.col(j)),
                                              data_.test_clean.col(j));
          sum += r.relative_error;
          ++ok;
        } catch (const Error&) {
          ++failures;
        }
      }
      emit(base, "rel_error", ok ? sum / ok : kNaN, sigma);
      if (learned.kernel) emit(base, "preimage_failures", failures, sigma);
    }
  }

  const ExperimentConfig& cfg_;
  int trial_;
  std::uint64_t seed_;
  TrialData data_;
  std::vector<ResultRecord> records_;
};

std::vector<ResultRecord> bounds_job(const ExperimentConfig& cfg, std::size_t di, std::size_t oi) {
  BoundCheckParams p;
  p.m = cfg.bounds.m;
  p.omega_size = cfg.bounds.omega_sizes[oi];
  p.delta = cfg.bounds.deltas[di];
  p.trials = cfg.bounds.trials;
  p.pairs = cfg.bounds.pairs;
  p.gaussian_c = cfg.bounds.gaussian_c;
  p.poly_c = cfg.bounds.poly_c;
  p.poly_d = cfg.bounds.poly_d;
  p.rng_seed = derive_seed(cfg.seed, {di, oi});
  std::vector<ResultRecord> out;
  ResultRecord base;
  base.run_id = cfg.run_id;
  base.method = "bounds";
  base.seed = p.rng_seed;
  base.trial = 0;
  char delta[32];
  const auto end = std::to_chars(delta, delta + sizeof delta, p.delta).ptr;
  const std::string where = ":delta=" + std::string(delta, end) + ":omega=" + std::to_string(p.omega_size);
  for (const auto& report : check_all_bounds(p)) {
    const std::string kind(to_string(report.kind));
    for (auto [name, value] : {std::pair<const char*, double>{"violation_rate:", report.rate},
                               {"limit:", report.limit()},
                               {"mean_width:", report.mean_width},
                               {"passed:", report.passed() ? 1.0 : 0.0}}) {
      ResultRecord r = base;
      r.metric = name + kind + where;
      r.value = value;
      out.push_back(std::move(r));
    }
  }
  return out;
}

// Runs jobs 0..count-1 on a small pool; results land in per-job slots so the
// final order never depends on scheduling.
template <class Job>
std::vector<ResultRecord> run_pool(int count, int jobs, Job job) {
  const int workers = std::max(1, std::min(count, jobs > 0 ? jobs : static_cast<int>(std::thread::hardware_concurrency())));
  std::vector<std::vector<ResultRecord>> slots(count);
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (int i = next++; i < count; i = next++) {
      try {
        slots[i] = job(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  std::vector<ResultRecord> out;
  for (auto& slot : slots) std::move(slot.begin(), slot.end(), std::back_inserter(out));
  return out;
}

}  // namespace

std::vector<ResultRecord> run_experiment(const ExperimentConfig& config) {
  config.validate();
  std::vector<ResultRecord> records;
  if (config.mode == Mode::BoundsCheck) {
    const auto no = config.bounds.omega_sizes.size();
    const int count = static_cast<int>(config.bounds.deltas.size() * no);
    records = run_pool(count, config.jobs, [&](int i) { return bounds_job(config, i / no, i % no); });
    return records;
  }
  std::optional<FileData> files;
  if (config.uses_file_data()) files = load_file_data(config.data);
  records = run_pool(config.trials, config.jobs, [&](int trial) {
    return TrialRunner(config, files ? &*files : nullptr, trial).run();
  });
  auto summary = aggregate(records, config.seed);
  records.insert(records.end(), summary.begin(), summary.end());
  return records;
}

}  // namespace mcuos
