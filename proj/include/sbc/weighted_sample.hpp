#pragma once

#include <Eigen/Dense>

#include <stdexcept>

namespace sbc {

/// Labeled points with non-negative per-point weights. Rows of x are points.
struct WeightedSample {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  Eigen::VectorXd weights;

  void validate() const {
    if (x.rows() != y.size() || x.rows() != weights.size())
      throw std::invalid_argument("WeightedSample: inconsistent sizes");
    if ((weights.array() < 0.0).any())
      throw std::invalid_argument("WeightedSample: negative weight");
    if (!(weights.sum() > 0.0))
      throw std::invalid_argument("WeightedSample: all weights zero");
  }
};

/// Normalized weights over a sample: non-negative, summing to one.
struct WeightDistribution {
  Eigen::VectorXd mass;

  static WeightDistribution from_raw(const Eigen::VectorXd& raw) {
    if (raw.size() == 0) throw std::invalid_argument("WeightDistribution: empty");
    if ((raw.array() < 0.0).any())
      throw std::invalid_argument("WeightDistribution: negative weight");
    const double total = raw.sum();
    if (!(total > 0.0))
      throw std::invalid_argument("WeightDistribution: weights sum to zero");
    return {raw / total};
  }
};

}  // namespace sbc
