#pragma once

#include <Eigen/Dense>

#include <string>

namespace sbc {

/// Labeled pool: z-scored features (pool statistics), last CSV column is the
/// label, row order preserved.
struct Dataset {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  Eigen::VectorXd feature_mean;
  Eigen::VectorXd feature_std;  // 1.0 where a column is constant
};

Dataset load_dataset(const std::string& path);

// Parses CSV text (optional header, label in last column) and standardizes.
Dataset parse_dataset(const std::string& csv_text);

// Mean squared error divided by the (population) variance of the actual labels.
double nmse(const Eigen::VectorXd& actual, const Eigen::VectorXd& predicted);

}  // namespace sbc
