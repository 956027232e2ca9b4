#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace sbc {

/// Logistic selection model: P[s=1|x] = e^v/(1+e^v) with
/// v = 4 w.(x - center) / scale, w drawn uniformly from [-1,1]^d.
struct BiasModel {
  Eigen::VectorXd projection;
  Eigen::VectorXd center;
  double scale = 1.0;
};

struct BiasedDraw {
  std::vector<int> selected;       // indices into the pool
  Eigen::VectorXd probabilities;   // P[s=1|x] for every pool point
  std::uint64_t seed = 0;          // seed that produced the accepted draw
  int redraws = 0;
};

BiasModel make_model(const Eigen::MatrixXd& pool, std::uint64_t seed);

double selection_probability(const BiasModel& model, const Eigen::VectorXd& x);
Eigen::VectorXd selection_probabilities(const BiasModel& model,
                                        const Eigen::MatrixXd& pool);

// Independent Bernoulli inclusion per pool point. Draws with fewer than
// min_size selected points are redrawn with the next seed.
BiasedDraw draw(const Eigen::MatrixXd& pool, const BiasModel& model,
                std::uint64_t seed, int min_size = 10);

// Raw inverse-probability weights 1/P[s=1|x_i] over the selected points.
Eigen::VectorXd ideal_weights(const BiasedDraw& d);

}  // namespace sbc
