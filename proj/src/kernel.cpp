#include "mcuos/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mcuos/errors.hpp"

namespace mcuos {

KernelSpec KernelSpec::gaussian(double c) {
  KernelSpec spec{KernelKind::Gaussian, c, 1};
  spec.validate();
  return spec;
}

KernelSpec KernelSpec::polynomial(double c, int d) {
  KernelSpec spec{KernelKind::Polynomial, c, d};
  spec.validate();
  return spec;
}

void KernelSpec::validate() const {
  if (kind == KernelKind::Gaussian) {
    if (!(c > 0.0) || !std::isfinite(c)) fail(ErrorCode::InvalidArgument, "gaussian kernel needs c > 0");
  } else {
    if (!(c >= 0.0) || !std::isfinite(c)) fail(ErrorCode::InvalidArgument, "polynomial kernel needs c >= 0");
    if (d < 1) fail(ErrorCode::InvalidArgument, "polynomial kernel needs d >= 1");
  }
}

std::string KernelSpec::describe() const {
  std::ostringstream os;
  if (kind == KernelKind::Gaussian) os << "gaussian(c=" << c << ")";
  else os << "polynomial(c=" << c << ",d=" << d << ")";
  return os.str();
}

namespace {

double from_distance(const KernelSpec& spec, double dist_sq) { return std::exp(-dist_sq / spec.c); }

double from_inner(const KernelSpec& spec, double inner) {
  const double base = inner + spec.c;
  return spec.d == 1 ? base : std::pow(base, spec.d);
}

}  // namespace

double kernel_value(const KernelSpec& spec, const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size()) fail(ErrorCode::ShapeMismatch, "kernel arguments differ in length");
  if (spec.kind == KernelKind::Gaussian) return from_distance(spec, (a - b).squaredNorm());
  return from_inner(spec, a.dot(b));
}

GramMatrix gram(const KernelSpec& spec, const Eigen::MatrixXd& data) {
  spec.validate();
  if (!data.allFinite()) fail(ErrorCode::InvalidArgument, "data contains non-finite values");
  const auto n = data.cols();
  // Owned column copies make every entry bit-identical to kernel_value on the
  // same signals, whatever the alignment of `data`.
  std::vector<Eigen::VectorXd> cols(n);
  for (Eigen::Index i = 0; i < n; ++i) cols[i] = data.col(i);
  GramMatrix out;
  out.values.resize(n, n);
  if (spec.kind == KernelKind::Gaussian) {
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index i = j; i < n; ++i) {
        const double v = i == j ? 1.0 : kernel_value(spec, cols[i], cols[j]);
        out.values(i, j) = v;
        out.values(j, i) = v;
      }
  } else {
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index i = j; i < n; ++i) {
        const double v = kernel_value(spec, cols[i], cols[j]);
        out.values(i, j) = v;
        out.values(j, i) = v;
      }
  }
  return out;
}

CenteringStats centering_stats(const Eigen::MatrixXd& raw_gram) {
  CenteringStats stats;
  stats.row_means = raw_gram.rowwise().mean();
  stats.total_mean = stats.row_means.mean();
  return stats;
}

GramMatrix center(const GramMatrix& g) {
  const auto n = g.values.rows();
  if (g.values.cols() != n) fail(ErrorCode::ShapeMismatch, "Gram matrix must be square");
  const CenteringStats stats = centering_stats(g.values);
  GramMatrix out;
  out.values.resize(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = j; i < n; ++i) {
      const double v = g.values(i, j) - stats.row_means(i) - stats.row_means(j) + stats.total_mean;
      out.values(i, j) = v;
      out.values(j, i) = v;
    }
  out.centered = true;
  return out;
}

Eigen::VectorXd kernel_column(const KernelSpec& spec, const Eigen::MatrixXd& data, const Eigen::VectorXd& y) {
  if (y.size() != data.rows()) fail(ErrorCode::ShapeMismatch, "signal length differs from training dimension");
  Eigen::VectorXd k(data.cols());
  for (Eigen::Index i = 0; i < data.cols(); ++i) k(i) = kernel_value(spec, data.col(i), y);
  return k;
}

Eigen::VectorXd centered_cross(const Eigen::VectorXd& k_y, const CenteringStats& stats,
                               const std::vector<int>& cluster) {
  if (k_y.size() != stats.row_means.size()) fail(ErrorCode::ShapeMismatch, "kernel vector length mismatch");
  const double k_mean = k_y.mean();
  Eigen::VectorXd out(cluster.size());
  for (std::size_t q = 0; q < cluster.size(); ++q) {
    const int i = cluster[q];
    if (i < 0 || i >= k_y.size()) fail(ErrorCode::InvalidArgument, "cluster index out of range");
    out(q) = k_y(i) - k_mean - stats.row_means(i) + stats.total_mean;
  }
  return out;
}

double centered_self(double k_yy, const Eigen::VectorXd& k_y, const CenteringStats& stats) {
  return k_yy - 2.0 * k_y.mean() + stats.total_mean;
}

Eigen::VectorXd centered_cross_vector(const KernelSpec& spec, const Eigen::MatrixXd& data,
                                      const std::vector<int>& cluster, const Eigen::VectorXd& y) {
  if (cluster.empty()) fail(ErrorCode::InvalidArgument, "cluster must be nonempty");
  const GramMatrix g = gram(spec, data);
  return centered_cross(kernel_column(spec, data, y), centering_stats(g.values), cluster);
}

std::vector<int> overlap(const ObservedSignal& a, const ObservedSignal& b) {
  std::vector<int> out;
  const auto& x = a.omega();
  const auto& y = b.omega();
  std::size_t i = 0, j = 0;
  while (i < x.size() && j < y.size()) {
    if (x[i] < y[j]) ++i;
    else if (y[j] < x[i]) ++j;
    else {
      out.push_back(x[i]);
      ++i;
      ++j;
    }
  }
  return out;
}

double estimate_kernel_missing(const KernelSpec& spec, const ObservedSignal& a, const ObservedSignal& b) {
  spec.validate();
  if (a.ambient_dim() != b.ambient_dim()) fail(ErrorCode::ShapeMismatch, "signals differ in ambient dimension");
  const auto m = a.ambient_dim();
  if (a.is_complete() && b.is_complete()) return kernel_value(spec, a.values(), b.values());
  if (spec.kind == KernelKind::Polynomial && spec.d % 2 == 0)
    fail(ErrorCode::UnsupportedKernel, "polynomial kernel estimates from missing data need an odd degree");

  // Walk both sorted index lists once, accumulating over the overlap.
  const auto& x = a.omega();
  const auto& y = b.omega();
  std::size_t i = 0, j = 0;
  Eigen::Index shared = 0;
  double acc = 0.0;
  const bool gaussian = spec.kind == KernelKind::Gaussian;
  while (i < x.size() && j < y.size()) {
    if (x[i] < y[j]) ++i;
    else if (y[j] < x[i]) ++j;
    else {
      const double u = a.values()(i), v = b.values()(j);
      acc += gaussian ? (u - v) * (u - v) : u * v;
      ++shared;
      ++i;
      ++j;
    }
  }
  if (shared == 0) fail(ErrorCode::EmptyOverlap, "signals share no observed coordinate");
  const double scale = static_cast<double>(m) / static_cast<double>(shared);
  return gaussian ? from_distance(spec, scale * acc) : from_inner(spec, scale * acc);
}

EstimatedGram psd_repair(const Eigen::MatrixXd& g, double delta_min) {
  if (g.rows() != g.cols()) fail(ErrorCode::ShapeMismatch, "Gram matrix must be square");
  if (!(delta_min > 0.0)) fail(ErrorCode::InvalidArgument, "delta_min must be positive");
  if (!g.allFinite()) fail(ErrorCode::InvalidArgument, "Gram matrix contains non-finite values");
  EstimatedGram out;
  out.delta_min = delta_min;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(g);
  if (eig.info() != Eigen::Success) fail(ErrorCode::NumericalFailure, "eigendecomposition of the Gram matrix failed");
  Eigen::VectorXd lam = eig.eigenvalues();
  const double tol = kZeroEigenvalue * std::max(1.0, lam.cwiseAbs().maxCoeff());
  if (lam.size() == 0 || lam.minCoeff() >= -tol) {
    out.values = g;
    return out;
  }
  for (Eigen::Index k = 0; k < lam.size(); ++k) {
    if (std::abs(lam(k)) < tol)
      lam(k) = delta_min;
    else if (lam(k) < 0.0)
      lam(k) = -lam(k);
  }
  out.values = eig.eigenvectors() * lam.asDiagonal() * eig.eigenvectors().transpose();
  out.values = 0.5 * (out.values + out.values.transpose()).eval();
  out.psd_repaired = true;
  return out;
}

EstimatedGram estimated_gram_missing(const KernelSpec& spec, const std::vector<ObservedSignal>& data,
                                     double delta_min) {
  spec.validate();
  const auto n = static_cast<Eigen::Index>(data.size());
  if (n == 0) fail(ErrorCode::InsufficientData, "no training signals");
  Eigen::MatrixXd g(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = j; i < n; ++i) {
      double v;
      if (i == j && spec.kind == KernelKind::Gaussian) {
        v = 1.0;
      } else {
        try {
          v = estimate_kernel_missing(spec, data[i], data[j]);
        } catch (const Error& e) {
          if (e.code() != ErrorCode::EmptyOverlap) throw;
          fail(ErrorCode::EmptyOverlap,
               "signals " + std::to_string(i) + " and " + std::to_string(j) + " share no observed coordinate");
        }
      }
      g(i, j) = v;
      g(j, i) = v;
    }
  return psd_repair(g, delta_min);
}

Eigen::VectorXd estimated_kernel_column(const KernelSpec& spec, const std::vector<ObservedSignal>& data,
                                        const ObservedSignal& y) {
  Eigen::VectorXd k(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    try {
      k(i) = estimate_kernel_missing(spec, data[i], y);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::EmptyOverlap) throw;
      fail(ErrorCode::EmptyOverlap, "query shares no observed coordinate with training signal " + std::to_string(i));
    }
  }
  return k;
}

}  // namespace mcuos
