#pragma once

#include <Eigen/Dense>

#include <string>
#include <utility>

namespace sbc {

double l1_distance(const Eigen::VectorXd& w1, const Eigen::VectorXd& w2);
double l2_distance(const Eigen::VectorXd& w1, const Eigen::VectorXd& w2);

/// Distributional stability coefficients of a kernel-regularized learner.
struct StabilityReport {
  double beta_l1 = 0.0;      // sigma^2 kappa^2 / (2 lambda)
  double beta_l2 = 0.0;      // sigma^2 kappa sqrt(lambda_max) / (2 lambda)
  double sigma = 0.0;
  double kappa = 0.0;
  double lambda = 0.0;
  double lambda_max = 0.0;
};

StabilityReport beta_coefficients(double sigma, double kappa, double lambda,
                                  double lambda_max);

struct GapBoundReport {
  std::string method;  // cluster_l1 | cluster_l2 | kmm | kmm_eps0
  double value = 0.0;
};

// Generalization-gap bounds for the cluster-frequency estimate, l1 and l2 forms.
std::pair<GapBoundReport, GapBoundReport> cluster_gap_bounds(
    double sigma, double kappa, double lambda, double lambda_max, double B,
    int m_distinct, double p0, double n, double m, double delta);

// Generalization-gap bound for KMM reweighting; epsilon = 0 collapses to the
// cond(K)-based form.
GapBoundReport kmm_gap_bound(double sigma, double kappa, double lambda,
                             double lambda_max, double lambda_min, double b_prime,
                             double epsilon, double m, double n, double delta);

struct CrossoverDiagnostic {
  double threshold = 0.0;  // lambda_min * B * log(m')
  double n = 0.0;
  std::string regime;      // cluster-favorable | kmm-favorable | boundary
};

// Which estimator's bound converges faster at pool size n.
CrossoverDiagnostic crossover_diagnostic(double lambda_min, double B,
                                         double m_distinct, double n);

}  // namespace sbc
