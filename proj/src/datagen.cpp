#include "mcuos/datagen.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "mcuos/errors.hpp"

namespace mcuos {

int SyntheticSpec::total_points() const {
  return std::accumulate(cluster_sizes.begin(), cluster_sizes.end(), 0);
}

void SyntheticSpec::validate() const {
  if (m < 1 || s < 1 || L < 1) fail(ErrorCode::InvalidArgument, "m, s and L must be positive");
  if (s >= m) fail(ErrorCode::InvalidArgument, "s must be below m");
  if (static_cast<int>(cluster_sizes.size()) != L)
    fail(ErrorCode::InvalidArgument, "one cluster size per subspace required");
  for (int n : cluster_sizes)
    if (n < 0) fail(ErrorCode::InvalidArgument, "cluster sizes must be nonnegative");
  if (!(t_s >= 0.0) || !(sigma_tr_sq >= 0.0) || !(sigma_te_sq >= 0.0))
    fail(ErrorCode::InvalidArgument, "t_s and noise variances must be nonnegative");
}

SubspaceCollection generate_subspaces(const SyntheticSpec& spec, Rng& rng) {
  spec.validate();
  SubspaceCollection out;
  out.push_back(random_subspace(spec.m, spec.s, rng));
  for (int l = 1; l < spec.L; ++l) {
    const Eigen::MatrixXd w = uniform_matrix(spec.m, spec.s, rng);
    out.push_back(orthonormalize(out.back().basis() + spec.t_s * w));
  }
  return out;
}

void normalize_columns(Eigen::MatrixXd& data) {
  for (Eigen::Index j = 0; j < data.cols(); ++j) {
    const double n = data.col(j).norm();
    if (n > 0.0) data.col(j) /= n;
  }
}

Eigen::MatrixXd add_noise(const Eigen::MatrixXd& data, double sigma_sq, Rng& rng) {
  if (!(sigma_sq >= 0.0)) fail(ErrorCode::InvalidArgument, "noise variance must be nonnegative");
  if (sigma_sq == 0.0) return data;
  const double scale = std::sqrt(sigma_sq / static_cast<double>(data.rows()));
  return data + scale * gaussian_matrix(data.rows(), data.cols(), rng);
}

Dataset generate_points(const SubspaceCollection& truth, const SyntheticSpec& spec, Rng& rng, double sigma_sq) {
  spec.validate();
  check_collection(truth);
  if (static_cast<int>(truth.size()) != spec.L || truth.front().ambient_dim() != spec.m ||
      truth.front().dim() != spec.s)
    fail(ErrorCode::ShapeMismatch, "ground truth does not match the synthetic spec");
  Dataset out;
  out.clean.resize(spec.m, spec.total_points());
  Eigen::Index col = 0;
  for (int l = 0; l < spec.L; ++l) {
    const int n = spec.cluster_sizes[l];
    out.clean.middleCols(col, n) = truth[l].basis() * gaussian_matrix(spec.s, n, rng);
    out.labels.insert(out.labels.end(), n, l);
    col += n;
  }
  normalize_columns(out.clean);
  out.noisy = add_noise(out.clean, sigma_sq, rng);
  out.truth = truth;
  return out;
}

SyntheticPair generate_synthetic(const SyntheticSpec& spec) {
  Rng rng(derive_seed(spec.rng_seed, {0}));
  const auto truth = generate_subspaces(spec, rng);
  SyntheticPair pair;
  pair.train = generate_points(truth, spec, rng, spec.sigma_tr_sq);
  pair.test = generate_points(truth, spec, rng, spec.sigma_te_sq);
  return pair;
}

std::vector<std::vector<int>> generate_masks(int m, int N, double missing_fraction, Rng& rng, int min_observed) {
  if (m < 1 || N < 0) fail(ErrorCode::InvalidArgument, "mask shape must be positive");
  if (!(missing_fraction >= 0.0 && missing_fraction < 1.0))
    fail(ErrorCode::InvalidArgument, "missing fraction must lie in [0, 1)");
  const int keep = static_cast<int>(std::lround((1.0 - missing_fraction) * m));
  if (keep <= min_observed || keep < 1)
    fail(ErrorCode::InsufficientObservations, "too few observed entries per signal");
  std::vector<int> all(m);
  std::iota(all.begin(), all.end(), 0);
  std::vector<std::vector<int>> masks;
  masks.reserve(N);
  for (int i = 0; i < N; ++i) {
    // Partial Fisher-Yates shuffle.
    for (int k = 0; k < keep; ++k) {
      std::uniform_int_distribution<int> pick(k, m - 1);
      std::swap(all[k], all[pick(rng)]);
    }
    std::vector<int> mask(all.begin(), all.begin() + keep);
    std::sort(mask.begin(), mask.end());
    masks.push_back(std::move(mask));
  }
  return masks;
}

std::vector<int> sample_with_replacement(int m, int n, Rng& rng) {
  if (m < 1 || n < 0) fail(ErrorCode::InvalidArgument, "sample sizes must be positive");
  std::uniform_int_distribution<int> pick(0, m - 1);
  std::vector<int> out(n);
  for (int& v : out) v = pick(rng);
  return out;
}

namespace {

std::vector<double> parse_row(const std::string& line, std::size_t line_no, const std::string& path) {
  std::vector<double> row;
  std::size_t pos = 0;
  while (pos <= line.size()) {
    std::size_t end = line.find(',', pos);
    if (end == std::string::npos) end = line.size();
    std::string field = line.substr(pos, end - pos);
    const auto first = field.find_first_not_of(" \t\r");
    const auto last = field.find_last_not_of(" \t\r");
    field = first == std::string::npos ? std::string() : field.substr(first, last - first + 1);
    double v = 0.0;
    const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
    if (field.empty() || res.ec != std::errc() || res.ptr != field.data() + field.size())
      fail(ErrorCode::ParseError, path + ":" + std::to_string(line_no) + ": bad number '" + field + "'");
    row.push_back(v);
    pos = end + 1;
  }
  return row;
}

// Empty lines and '#' comment lines carry no data.
bool blank(const std::string& line) {
  const auto first = line.find_first_not_of(" \t\r");
  return first == std::string::npos || line[first] == '#';
}

}  // namespace

Eigen::MatrixXd load_matrix_csv(const std::string& path, bool signals_in_rows) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    rows.push_back(parse_row(line, line_no, path));
    if (rows.back().size() != rows.front().size())
      fail(ErrorCode::ParseError, path + ":" + std::to_string(line_no) + ": ragged row");
  }
  if (rows.empty()) fail(ErrorCode::ParseError, path + ": no data rows");
  Eigen::MatrixXd out(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) out(i, j) = rows[i][j];
  if (signals_in_rows) return out.transpose();
  return out;
}

std::vector<int> load_labels_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path);
  std::vector<int> labels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    const auto row = parse_row(line, line_no, path);
    if (row.size() != 1 || row[0] != std::floor(row[0]))
      fail(ErrorCode::ParseError, path + ":" + std::to_string(line_no) + ": expected one integer label");
    labels.push_back(static_cast<int>(row[0]));
  }
  return labels;
}

void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& matrix) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::IoError, "cannot write " + path);
  out << std::setprecision(17);
  for (Eigen::Index i = 0; i < matrix.rows(); ++i) {
    for (Eigen::Index j = 0; j < matrix.cols(); ++j) out << (j ? "," : "") << matrix(i, j);
    out << '\n';
  }
  if (!out) fail(ErrorCode::IoError, "write failed for " + path);
}

Eigen::MatrixXd extract_patches(const Eigen::MatrixXd& image, int patch_h, int patch_w) {
  if (patch_h < 1 || patch_w < 1) fail(ErrorCode::InvalidArgument, "patch size must be positive");
  if (image.rows() % patch_h != 0 || image.cols() % patch_w != 0)
    fail(ErrorCode::TilingError, "patch size does not divide the image");
  const auto tiles_r = image.rows() / patch_h;
  const auto tiles_c = image.cols() / patch_w;
  Eigen::MatrixXd out(patch_h * patch_w, tiles_r * tiles_c);
  for (Eigen::Index tr = 0; tr < tiles_r; ++tr)
    for (Eigen::Index tc = 0; tc < tiles_c; ++tc) {
      const auto col = tr * tiles_c + tc;
      for (int r = 0; r < patch_h; ++r)
        for (int c = 0; c < patch_w; ++c) out(r * patch_w + c, col) = image(tr * patch_h + r, tc * patch_w + c);
    }
  return out;
}

Eigen::MatrixXd assemble_patches(const Eigen::MatrixXd& patches, int image_h, int image_w, int patch_h,
                                 int patch_w) {
  if (patch_h < 1 || patch_w < 1 || image_h < 1 || image_w < 1)
    fail(ErrorCode::InvalidArgument, "sizes must be positive");
  if (image_h % patch_h != 0 || image_w % patch_w != 0)
    fail(ErrorCode::TilingError, "patch size does not divide the image");
  const int tiles_r = image_h / patch_h;
  const int tiles_c = image_w / patch_w;
  if (patches.rows() != patch_h * patch_w || patches.cols() != tiles_r * tiles_c)
    fail(ErrorCode::ShapeMismatch, "patch matrix does not match the tiling");
  Eigen::MatrixXd image(image_h, image_w);
  for (int tr = 0; tr < tiles_r; ++tr)
    for (int tc = 0; tc < tiles_c; ++tc)
      for (int r = 0; r < patch_h; ++r)
        for (int c = 0; c < patch_w; ++c)
          image(tr * patch_h + r, tc * patch_w + c) = patches(r * patch_w + c, tr * tiles_c + tc);
  return image;
}

}  // namespace mcuos
