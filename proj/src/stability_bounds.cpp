#include "sbc/stability_bounds.hpp"

#include "sbc/cluster_weights.hpp"
#include "sbc/kmm.hpp"

#include <cmath>
#include <stdexcept>

namespace sbc {

namespace {

void check_same_size(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size())
    throw std::invalid_argument("distance: support size mismatch");
}

}  // namespace

double l1_distance(const Eigen::VectorXd& w1, const Eigen::VectorXd& w2) {
  check_same_size(w1, w2);
  return (w1 - w2).lpNorm<1>();
}

double l2_distance(const Eigen::VectorXd& w1, const Eigen::VectorXd& w2) {
  check_same_size(w1, w2);
  return (w1 - w2).norm();
}

StabilityReport beta_coefficients(double sigma, double kappa, double lambda,
                                  double lambda_max) {
  if (!(sigma > 0.0) || !(kappa > 0.0) || !(lambda_max > 0.0))
    throw std::invalid_argument("beta_coefficients: arguments must be positive");
  if (!(lambda > 0.0))
    throw std::invalid_argument("beta_coefficients: lambda must be positive");
  StabilityReport report;
  report.sigma = sigma;
  report.kappa = kappa;
  report.lambda = lambda;
  report.lambda_max = lambda_max;
  report.beta_l1 = sigma * sigma * kappa * kappa / (2.0 * lambda);
  report.beta_l2 = sigma * sigma * kappa * std::sqrt(lambda_max) / (2.0 * lambda);
  return report;
}

std::pair<GapBoundReport, GapBoundReport> cluster_gap_bounds(
    double sigma, double kappa, double lambda, double lambda_max, double B,
    int m_distinct, double p0, double n, double m, double delta) {
  const StabilityReport beta = beta_coefficients(sigma, kappa, lambda, lambda_max);
  const double freq = frequency_bound(m_distinct, n, p0, delta);
  GapBoundReport l1{"cluster_l1", beta.beta_l1 * B * B * freq};
  GapBoundReport l2{"cluster_l2", beta.beta_l2 * B * B * freq / std::sqrt(m)};
  return {l1, l2};
}

GapBoundReport kmm_gap_bound(double sigma, double kappa, double lambda,
                             double lambda_max, double lambda_min, double b_prime,
                             double epsilon, double m, double n, double delta) {
  if (!(lambda_min > 0.0))
    throw std::invalid_argument("kmm_gap_bound: lambda_min must be positive");
  const StabilityReport beta = beta_coefficients(sigma, kappa, lambda, lambda_max);
  // half the l2 deviation bound times beta_l2
  const double deviation =
      kmm_l2_deviation_bound(epsilon, b_prime, m, n, kappa, lambda_min, delta) / 2.0;
  GapBoundReport report;
  report.method = (epsilon == 0.0) ? "kmm_eps0" : "kmm";
  report.value = 2.0 * beta.beta_l2 * deviation;
  return report;
}

CrossoverDiagnostic crossover_diagnostic(double lambda_min, double B,
                                         double m_distinct, double n) {
  if (!(lambda_min > 0.0) || !(B > 0.0) || !(m_distinct > 0.0) || !(n > 0.0))
    throw std::invalid_argument("crossover_diagnostic: arguments must be positive");
  CrossoverDiagnostic diag;
  diag.threshold = lambda_min * B * std::log(m_distinct);
  diag.n = n;
  const double rel = std::max(1.0, std::abs(diag.threshold));
  if (std::abs(n - diag.threshold) <= 1e-12 * rel)
    diag.regime = "boundary";
  else if (n > diag.threshold)
    diag.regime = "cluster-favorable";
  else
    diag.regime = "kmm-favorable";
  return diag;
}

}  // namespace sbc
