#include "mcuos/evaluation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <ostream>
#include <tuple>

#include "mcuos/errors.hpp"
#include "mcuos/preimage.hpp"

namespace mcuos {

double relative_error(const Eigen::VectorXd& clean, const Eigen::VectorXd& estimate) {
  if (clean.size() != estimate.size()) fail(ErrorCode::ShapeMismatch, "signal lengths differ");
  const double norm = clean.squaredNorm();
  if (norm == 0.0) fail(ErrorCode::InvalidArgument, "clean signal is zero");
  return (clean - estimate).squaredNorm() / norm;
}

Reconstruction denoise_linear(const McUosModel& model, const Eigen::VectorXd& z, const Eigen::VectorXd& clean,
                              bool complete_training) {
  check_collection(model.subspaces);
  const auto m = model.subspaces.front().ambient_dim();
  if (z.size() != m || clean.size() != m) fail(ErrorCode::ShapeMismatch, "signal length does not match the model");
  const bool centered = complete_training && model.mean.size() == m;
  const Eigen::VectorXd shifted = centered ? Eigen::VectorXd(z - model.mean) : z;

  Reconstruction out;
  double best = -1.0;
  Eigen::VectorXd best_coef;
  for (std::size_t l = 0; l < model.subspaces.size(); ++l) {
    Eigen::VectorXd coef = model.subspaces[l].basis().transpose() * shifted;
    const double energy = coef.squaredNorm();
    if (energy > best) {
      best = energy;
      best_coef = std::move(coef);
      out.subspace = static_cast<int>(l);
    }
  }
  out.estimate = model.subspaces[out.subspace].basis() * best_coef;
  if (centered) out.estimate += model.mean;
  out.relative_error = relative_error(clean, out.estimate);
  return out;
}

Reconstruction denoise_kernel(const KernelModel& model, const ObservedSignal& z, const Eigen::VectorXd& clean) {
  Reconstruction out;
  out.subspace = kernel_assign(model, z);
  out.estimate = preimage(model, z);
  out.relative_error = relative_error(clean, out.estimate);
  return out;
}

namespace {

std::vector<int> compact_ids(const std::vector<int>& ids, int& distinct) {
  std::vector<int> sorted = ids;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  distinct = static_cast<int>(sorted.size());
  std::vector<int> out(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i)
    out[i] = static_cast<int>(std::lower_bound(sorted.begin(), sorted.end(), ids[i]) - sorted.begin());
  return out;
}

}  // namespace

double clustering_error(const std::vector<int>& assignments, const std::vector<int>& labels, int L) {
  if (assignments.size() != labels.size()) fail(ErrorCode::ShapeMismatch, "assignments and labels differ in length");
  if (L < 1) fail(ErrorCode::InvalidArgument, "L must be positive");
  if (assignments.empty()) return 0.0;
  int na = 0;
  int nl = 0;
  const auto a = compact_ids(assignments, na);
  const auto b = compact_ids(labels, nl);
  const int k = std::max({L, na, nl});
  if (k > 8) fail(ErrorCode::InvalidArgument, "clustering error matches at most 8 clusters");

  Eigen::MatrixXi confusion = Eigen::MatrixXi::Zero(k, k);
  for (std::size_t i = 0; i < a.size(); ++i) ++confusion(a[i], b[i]);
  std::vector<int> perm(k);
  std::iota(perm.begin(), perm.end(), 0);
  int best = 0;
  do {
    int hits = 0;
    for (int c = 0; c < k; ++c) hits += confusion(c, perm[c]);
    best = std::max(best, hits);
  } while (std::next_permutation(perm.begin(), perm.end()));
  const double n = static_cast<double>(a.size());
  return 100.0 * (n - best) / n;
}

Summary summarize(const std::vector<double>& values) {
  Summary out;
  double sum = 0.0;
  for (double v : values)
    if (!std::isnan(v)) {
      sum += v;
      ++out.count;
    }
  if (out.count == 0) {
    out.mean = out.stddev = std::nan("");
    return out;
  }
  out.mean = sum / out.count;
  if (out.count < 2) return out;
  double ss = 0.0;
  for (double v : values)
    if (!std::isnan(v)) ss += (v - out.mean) * (v - out.mean);
  out.stddev = std::sqrt(ss / (out.count - 1));
  return out;
}

std::vector<ResultRecord> aggregate(const std::vector<ResultRecord>& records, std::uint64_t base_seed) {
  using Key = std::tuple<std::string, std::string, std::string, double, int, int, double, double, double>;
  std::map<Key, std::size_t> index;
  std::vector<std::pair<ResultRecord, std::vector<double>>> groups;
  for (const auto& r : records) {
    if (r.trial == kAggregateTrial || r.metric.rfind("error:", 0) == 0) continue;
    Key key{r.run_id, r.method, r.metric, r.lambda, r.L, r.s, r.missing_frac, r.sigma_tr_sq, r.sigma_te_sq};
    auto [it, fresh] = index.emplace(key, groups.size());
    if (fresh) groups.push_back({r, {}});
    groups[it->second].second.push_back(r.value);
  }
  std::vector<ResultRecord> out;
  for (const auto& [proto, values] : groups) {
    const Summary s = summarize(values);
    ResultRecord r = proto;
    r.seed = base_seed;
    r.trial = kAggregateTrial;
    for (auto [suffix, value] : {std::pair{":mean", s.mean}, {":std", s.stddev},
                                 {":count", static_cast<double>(s.count)}}) {
      r.metric = proto.metric + suffix;
      r.value = value;
      out.push_back(r);
    }
  }
  return out;
}

namespace {

std::string number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

void write_records_csv(std::ostream& out, const std::vector<ResultRecord>& records,
                       const std::vector<std::string>& comments) {
  for (const auto& c : comments) out << "# " << c << '\n';
  out << kCsvHeader << '\n';
  for (const auto& r : records) {
    out << r.run_id << ',' << r.method << ',' << r.metric << ',' << number(r.lambda) << ',' << r.L << ',' << r.s
        << ',' << number(r.missing_frac) << ',' << number(r.sigma_tr_sq) << ',' << number(r.sigma_te_sq) << ','
        << r.seed << ',';
    if (r.trial == kAggregateTrial)
      out << "all";
    else
      out << r.trial;
    out << ',' << number(r.value) << '\n';
  }
}

void write_records_csv(const std::string& path, const std::vector<ResultRecord>& records,
                       const std::vector<std::string>& comments) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::IoError, "cannot write " + path);
  write_records_csv(out, records, comments);
  if (!out) fail(ErrorCode::IoError, "write failed for " + path);
}

}  // namespace mcuos
