#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <utility>

namespace sbc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Gaussian kernel exp(-||x - x'||^2 / (2 sigma^2)). The only family
/// supported; K(x,x) = 1, so kappa = 1.
struct KernelSpec {
  double bandwidth = 1.0;
};

// sqrt(d/2), the conventional bandwidth for d-dimensional standardized data.
inline double default_bandwidth(int dim) {
  if (dim <= 0) throw std::invalid_argument("default_bandwidth: dim must be positive");
  return std::sqrt(static_cast<double>(dim) / 2.0);
}

struct KernelMatrix {
  Matrix entries;
  double lambda_max = 0.0;
  double lambda_min = 0.0;      // clamped at 1e-10 when computing cond
  double lambda_min_raw = 0.0;  // unclamped, for diagnostics
  double cond = 1.0;
};

double evaluate(const KernelSpec& spec, const Vector& x, const Vector& x2);

// Extreme eigenvalues of a symmetric matrix, relative tolerance 1e-8.
// Dense eigendecomposition up to 4096x4096, power iteration above.
std::pair<double, double> spectral_bounds(const Matrix& sym);

// m x m Gram matrix over the rows of `points`, spectral summaries filled in.
KernelMatrix gram(const KernelSpec& spec, const Matrix& points);

// Cross Gram matrix K(a_i, b_j) between two row sets.
Matrix cross_gram(const KernelSpec& spec, const Matrix& a, const Matrix& b);

}  // namespace sbc
