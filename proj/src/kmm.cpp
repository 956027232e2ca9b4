#include "sbc/kmm.hpp"

#include <cmath>
#include <stdexcept>

namespace sbc {

namespace {

Vector clamp_box(const Vector& v, double b_prime) {
  return v.cwiseMax(0.0).cwiseMin(b_prime);
}

Vector project_slab(const Vector& v, double epsilon) {
  const double mean = v.mean();
  if (mean > 1.0 + epsilon) return v.array() - (mean - (1.0 + epsilon));
  if (mean < 1.0 - epsilon) return v.array() + ((1.0 - epsilon) - mean);
  return v;
}

}  // namespace

void KmmConfig::validate() const {
  if (!(b_prime >= 1.0))
    throw std::invalid_argument("KmmConfig: b_prime must be >= 1 so gamma = 1 is feasible");
  if (!(epsilon >= 0.0) || !(epsilon <= 0.5))
    throw std::invalid_argument("KmmConfig: epsilon must lie in [0, 1/2]");
  if (!(tolerance > 0.0))
    throw std::invalid_argument("KmmConfig: tolerance must be positive");
  if (max_iterations < 1)
    throw std::invalid_argument("KmmConfig: max_iterations must be positive");
}

double kmm_objective(const Vector& gamma, const Matrix& k_ss, const Matrix& k_su,
                     double k_uu_mean) {
  const Eigen::Index m = gamma.size();
  if (k_ss.rows() != m || k_ss.cols() != m || k_su.rows() != m)
    throw std::invalid_argument("kmm_objective: shape mismatch");
  const double n = static_cast<double>(k_su.cols());
  const double quad = gamma.dot(k_ss * gamma) / (static_cast<double>(m) * m);
  const double cross = 2.0 * gamma.dot(k_su.rowwise().sum()) / (m * n);
  return std::sqrt(std::max(0.0, quad - cross + k_uu_mean));
}

Vector project_feasible(const Vector& v, double b_prime, double epsilon) {
  // Dykstra's alternating projections between the box and the slab.
  Vector x = v;
  Vector p = Vector::Zero(v.size());
  Vector q = Vector::Zero(v.size());
  for (int it = 0; it < 10000; ++it) {
    Vector y = clamp_box(x + p, b_prime);
    p = x + p - y;
    Vector x_next = project_slab(y + q, epsilon);
    q = y + q - x_next;
    const double change = (x_next - x).cwiseAbs().maxCoeff();
    x = x_next;
    if (change < 1e-14) break;
  }
  return x;
}

KmmSolution solve_kmm(const Matrix& s_points, const Matrix& u_points,
                      const KernelSpec& kernel, const KmmConfig& config) {
  config.validate();
  const Eigen::Index m = s_points.rows();
  const Eigen::Index n = u_points.rows();
  if (m < 1 || n < 1) throw std::invalid_argument("solve_kmm: empty sample");
  if (s_points.cols() != u_points.cols())
    throw std::invalid_argument("solve_kmm: dimension mismatch");

  KernelMatrix k_ss = gram(kernel, s_points);
  // cross-term row means and the constant K_UU mean, accumulated in blocks
  Matrix k_su = cross_gram(kernel, s_points, u_points);
  Vector r = k_su.rowwise().mean();  // (1/n) K_SU 1
  double k_uu_mean = 0.0;
  {
    const Eigen::Index block = 512;
    for (Eigen::Index start = 0; start < n; start += block) {
      const Eigen::Index len = std::min(block, n - start);
      k_uu_mean += cross_gram(kernel, u_points.middleRows(start, len), u_points).sum();
    }
    k_uu_mean /= static_cast<double>(n) * static_cast<double>(n);
  }

  const double md = static_cast<double>(m);
  auto g_value = [&](const Vector& gamma) {
    const double quad = gamma.dot(k_ss.entries * gamma) / (md * md);
    const double cross = 2.0 * gamma.dot(r) / md;
    return std::sqrt(std::max(0.0, quad - cross + k_uu_mean));
  };

  const double lipschitz = 2.0 * k_ss.lambda_max / (md * md);
  const double step = 1.0 / lipschitz;

  Vector gamma = project_feasible(Vector::Ones(m), config.b_prime, config.epsilon);
  double g_prev = g_value(gamma);

  KmmSolution solution;
  solution.pd_warning = k_ss.lambda_min_raw < 1e-10;
  solution.converged = false;

  int it = 0;
  for (; it < config.max_iterations; ++it) {
    Vector grad = (2.0 / (md * md)) * (k_ss.entries * gamma) - (2.0 / md) * r;
    Vector next = project_feasible(gamma - step * grad, config.b_prime, config.epsilon);
    const double g_next = g_value(next);
    gamma = next;
    if (std::abs(g_prev - g_next) < config.tolerance) {
      g_prev = g_next;
      solution.converged = true;
      ++it;
      break;
    }
    g_prev = g_next;
  }

  solution.gamma_hat = gamma;
  solution.iterations = it;
  solution.objective = g_prev;
  solution.epsilon_prime = gamma.mean() - 1.0;
  solution.gamma_hat_prime = gamma / (1.0 + solution.epsilon_prime);
  return solution;
}

Vector normalized_weights(const KmmSolution& solution) {
  Vector w = solution.gamma_hat_prime / static_cast<double>(solution.gamma_hat_prime.size());
  const double total = w.sum();
  if (!(total > 0.0))
    throw std::runtime_error("normalized_weights: degenerate all-zero solution");
  return w / total;
}

double kmm_l2_deviation_bound(double epsilon, double b_prime, double m, double n,
                              double kappa, double lambda_min, double delta) {
  if (!(b_prime > 0.0) || !(m > 0.0) || !(n > 0.0) || !(kappa > 0.0))
    throw std::invalid_argument("kmm_l2_deviation_bound: arguments must be positive");
  if (!(lambda_min > 0.0))
    throw std::invalid_argument("kmm_l2_deviation_bound: kernel matrix must be strictly PD");
  if (!(epsilon >= 0.0))
    throw std::invalid_argument("kmm_l2_deviation_bound: epsilon must be non-negative");
  if (!(delta > 0.0) || delta > 2.0)
    throw std::invalid_argument("kmm_l2_deviation_bound: delta must lie in (0, 2]");
  const double tail = 1.0 + std::sqrt(2.0 * std::log(2.0 / delta));
  return 2.0 * epsilon * b_prime / std::sqrt(m) +
         (2.0 * std::sqrt(kappa) / std::sqrt(lambda_min)) *
             std::sqrt(b_prime * b_prime / m + 1.0 / n) * tail;
}

}  // namespace sbc
