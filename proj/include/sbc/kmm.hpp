#pragma once

#include "sbc/kernels.hpp"

namespace sbc {

struct KmmConfig {
  double b_prime = 1000.0;      // box bound B'
  double epsilon = 0.0;         // mean-slab tolerance, must be <= 1/2
  double tolerance = 1e-10;     // objective-change stopping tolerance
  int max_iterations = 50000;

  void validate() const;
};

struct KmmSolution {
  Vector gamma_hat;        // in [0, B']^m
  double epsilon_prime = 0.0;
  Vector gamma_hat_prime;  // gamma_hat / (1 + epsilon')
  double objective = 0.0;  // G(gamma_hat)
  int iterations = 0;
  bool converged = false;
  bool pd_warning = false;  // Gram matrix numerically rank-deficient
};

// RKHS distance between the reweighted training mean map and the pool mean
// map, via the kernel trick:
// G(gamma) = sqrt(gamma'K_SS gamma/m^2 - 2 gamma'K_SU 1/(mn) + k_uu_mean).
double kmm_objective(const Vector& gamma, const Matrix& k_ss, const Matrix& k_su,
                     double k_uu_mean);

// Projected gradient descent on G^2 with Dykstra projection onto
// box [0,B']^m intersected with the slab |mean(gamma) - 1| <= epsilon.
KmmSolution solve_kmm(const Matrix& s_points, const Matrix& u_points,
                      const KernelSpec& kernel, const KmmConfig& config);

// Normalized per-point weights gamma_hat_prime / m, summing to one.
Vector normalized_weights(const KmmSolution& solution);

// l2 deviation bound between the KMM distribution and the ideal one:
// 2 eps B'/sqrt(m) + (2 sqrt(kappa)/sqrt(lambda_min)) sqrt(B'^2/m + 1/n)
//   (1 + sqrt(2 log(2/delta))).
double kmm_l2_deviation_bound(double epsilon, double b_prime, double m, double n,
                              double kappa, double lambda_min, double delta);

// Exact Euclidean projection onto box [0,B'] intersected with the mean slab,
// exposed for the feasibility tests.
Vector project_feasible(const Vector& v, double b_prime, double epsilon);

}  // namespace sbc
