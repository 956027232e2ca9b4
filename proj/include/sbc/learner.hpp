#pragma once

#include "sbc/kernels.hpp"
#include "sbc/weighted_sample.hpp"

namespace sbc {

/// Kernel expansion h(x) = sum_i alpha_i K(x_i, x).
struct Hypothesis {
  Vector alpha;
  Matrix support;
  KernelSpec kernel;
  double lambda = 0.0;
};

// Minimizer of sum_i W_i (h(x_i) - y_i)^2 + lambda ||h||_K^2 in dual form:
// (diag(W) K + lambda I) alpha = diag(W) y, solved through the equivalent
// SPD system on the positive-weight subset.
Hypothesis fit(const Matrix& x, const Vector& y, const WeightDistribution& w,
               const KernelSpec& kernel, double lambda);

inline Hypothesis fit(const WeightedSample& sample, const KernelSpec& kernel,
                      double lambda) {
  sample.validate();
  return fit(sample.x, sample.y, WeightDistribution::from_raw(sample.weights),
             kernel, lambda);
}

double predict(const Hypothesis& h, const Vector& x);
Vector predict(const Hypothesis& h, const Matrix& xs);

// Quadratic cost (h(x) - y)^2.
double cost(const Hypothesis& h, const Vector& x, double y);

// Weighted objective F_W(alpha) = sum_i W_i (K alpha - y)_i^2 + lambda alpha' K alpha
// evaluated on the training Gram matrix; used by optimality checks.
double objective(const Matrix& k, const Vector& y, const WeightDistribution& w,
                 double lambda, const Vector& alpha);

}  // namespace sbc
