#include "mcuos/bounds.hpp"

#include <cmath>

#include "mcuos/datagen.hpp"
#include "mcuos/errors.hpp"
#include "mcuos/random.hpp"

namespace mcuos {

double coherence(const Eigen::VectorXd& z) {
  const double sq = z.squaredNorm();
  if (!(sq > 0.0)) fail(ErrorCode::InvalidArgument, "coherence of a zero vector is undefined");
  const double inf = z.cwiseAbs().maxCoeff();
  return static_cast<double>(z.size()) * inf * inf / sq;
}

std::string_view to_string(BoundKind kind) noexcept {
  switch (kind) {
    case BoundKind::SquaredDistance: return "squared_distance";
    case BoundKind::InnerProduct: return "inner_product";
    case BoundKind::GaussianKernel: return "gaussian_kernel";
    case BoundKind::PolynomialKernel: return "polynomial_kernel";
  }
  return "unknown";
}

double BoundReport::limit() const {
  const double p = 2.0 * params.delta;
  return p + 3.0 * std::sqrt(p * (1.0 - p) / params.trials);
}

namespace {

Eigen::VectorXd draw_unit(int m, PairKind kind, Rng& rng) {
  Eigen::VectorXd v(m);
  if (kind == PairKind::Gaussian) {
    v = gaussian_matrix(m, 1, rng);
  } else {
    std::bernoulli_distribution coin(0.5);
    for (int u = 0; u < m; ++u) v(u) = coin(rng) ? 1.0 : -1.0;
  }
  return v / v.norm();
}

double signed_pow(double x, int d) { return std::pow(x, d); }

double signed_root(double x, int d) {
  return x < 0.0 ? -std::pow(-x, 1.0 / d) : std::pow(x, 1.0 / d);
}

// Relative slack so that exact equality never registers as a violation.
bool within(double lo, double x, double hi) {
  const double eps = 1e-12 * (1.0 + std::abs(x));
  return lo - eps <= x && x <= hi + eps;
}

}  // namespace

BoundReport check_bound(BoundKind kind, const BoundCheckParams& p) {
  if (p.m < 2 || p.omega_size < 1 || p.trials < 1) fail(ErrorCode::InvalidArgument, "bad bound-check sizes");
  if (!(p.delta > 0.0 && p.delta < 0.5)) fail(ErrorCode::InvalidArgument, "delta must lie in (0, 0.5)");
  if (kind == BoundKind::PolynomialKernel && p.poly_d % 2 == 0)
    fail(ErrorCode::UnsupportedKernel, "the polynomial bound holds for odd degree only");
  BoundReport report{kind, p};
  Rng rng(derive_seed(p.rng_seed, {static_cast<std::uint64_t>(kind)}));
  const double m = p.m;
  const double n = p.omega_size;
  const double log_term = std::log(1.0 / p.delta);
  double width_sum = 0.0;
  for (int t = 0; t < p.trials; ++t) {
    const Eigen::VectorXd a = draw_unit(p.m, p.pairs, rng);
    const Eigen::VectorXd b = draw_unit(p.m, p.pairs, rng);
    const std::vector<int> omega = sample_with_replacement(p.m, p.omega_size, rng);
    bool ok = true;
    if (kind == BoundKind::SquaredDistance || kind == BoundKind::GaussianKernel) {
      const Eigen::VectorXd diff = a - b;
      const double mu = coherence(diff);
      const double alpha = std::sqrt(2.0 * mu * mu / n * log_term);
      width_sum += alpha;
      double est = 0.0;
      for (int u : omega) est += diff(u) * diff(u);
      est *= m / n;
      const double truth = diff.squaredNorm();
      if (kind == BoundKind::SquaredDistance) {
        ok = within((1.0 - alpha) * truth, est, (1.0 + alpha) * truth);
      } else {
        const double h = std::exp(-est / p.gaussian_c);
        const double kappa = std::exp(-truth / p.gaussian_c);
        // h^(1/(1-alpha)) stops being a lower bound once alpha >= 1; there
        // the inequality only says kappa >= 0.
        const double lo = alpha < 1.0 ? std::pow(h, 1.0 / (1.0 - alpha)) : 0.0;
        const double hi = std::pow(h, 1.0 / (1.0 + alpha));
        ok = within(lo, kappa, hi);
      }
    } else {
      const Eigen::VectorXd prod = a.cwiseProduct(b);
      const double inf = prod.cwiseAbs().maxCoeff();
      const double beta = std::sqrt(2.0 * m * m * inf * inf / n * log_term);
      width_sum += beta;
      double est = 0.0;
      for (int u : omega) est += prod(u);
      est *= m / n;
      const double truth = prod.sum();
      if (kind == BoundKind::InnerProduct) {
        ok = within(truth - beta, est, truth + beta);
      } else {
        const double h = signed_pow(est + p.poly_c, p.poly_d);
        const double kappa = signed_pow(truth + p.poly_c, p.poly_d);
        const double root = signed_root(h, p.poly_d);
        ok = within(signed_pow(root - beta, p.poly_d), kappa, signed_pow(root + beta, p.poly_d));
      }
    }
    if (!ok) ++report.violations;
  }
  report.rate = static_cast<double>(report.violations) / p.trials;
  report.mean_width = width_sum / p.trials;
  return report;
}

std::vector<BoundReport> check_all_bounds(const BoundCheckParams& params) {
  std::vector<BoundReport> out;
  for (BoundKind k : {BoundKind::SquaredDistance, BoundKind::InnerProduct, BoundKind::GaussianKernel,
                      BoundKind::PolynomialKernel})
    out.push_back(check_bound(k, params));
  return out;
}

}  // namespace mcuos
