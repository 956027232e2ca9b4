#include "sbc/bias_sim.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace sbc {

namespace {

constexpr double kLogisticClamp = 40.0;

double logistic(double v) {
  v = std::max(-kLogisticClamp, std::min(kLogisticClamp, v));
  return 1.0 / (1.0 + std::exp(-v));
}

}  // namespace

BiasModel make_model(const Eigen::MatrixXd& pool, std::uint64_t seed) {
  const Eigen::Index n = pool.rows();
  const Eigen::Index d = pool.cols();
  if (n == 0 || d == 0) throw std::invalid_argument("make_model: empty pool");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);

  BiasModel model;
  model.center = pool.colwise().mean();

  constexpr int kMaxAttempts = 100;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    Eigen::VectorXd w(d);
    for (Eigen::Index j = 0; j < d; ++j) w[j] = unit(rng);
    Eigen::VectorXd proj = (pool.rowwise() - model.center.transpose()) * w;
    const double var = proj.squaredNorm() / static_cast<double>(n);
    if (var > 0.0) {
      model.projection = w;
      model.scale = std::sqrt(var);
      return model;
    }
  }
  throw std::runtime_error("make_model: pool has zero variance along every drawn projection");
}

double selection_probability(const BiasModel& model, const Eigen::VectorXd& x) {
  if (x.size() != model.projection.size())
    throw std::invalid_argument("selection_probability: dimension mismatch");
  const double v = 4.0 * model.projection.dot(x - model.center) / model.scale;
  return logistic(v);
}

Eigen::VectorXd selection_probabilities(const BiasModel& model,
                                        const Eigen::MatrixXd& pool) {
  Eigen::VectorXd p(pool.rows());
  for (Eigen::Index i = 0; i < pool.rows(); ++i)
    p[i] = selection_probability(model, pool.row(i));
  return p;
}

BiasedDraw draw(const Eigen::MatrixXd& pool, const BiasModel& model,
                std::uint64_t seed, int min_size) {
  BiasedDraw out;
  out.probabilities = selection_probabilities(model, pool);

  constexpr int kMaxRedraws = 1000;
  for (int redraw = 0; redraw <= kMaxRedraws; ++redraw) {
    const std::uint64_t s = seed + static_cast<std::uint64_t>(redraw);
    std::mt19937_64 rng(s);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::vector<int> selected;
    for (Eigen::Index i = 0; i < pool.rows(); ++i)
      if (uni(rng) < out.probabilities[i]) selected.push_back(static_cast<int>(i));
    if (static_cast<int>(selected.size()) >= min_size ||
        static_cast<Eigen::Index>(min_size) > pool.rows()) {
      out.selected = std::move(selected);
      out.seed = s;
      out.redraws = redraw;
      return out;
    }
  }
  throw std::runtime_error("draw: could not reach min_size selected points");
}

Eigen::VectorXd ideal_weights(const BiasedDraw& d) {
  Eigen::VectorXd w(static_cast<Eigen::Index>(d.selected.size()));
  for (Eigen::Index j = 0; j < w.size(); ++j) {
    const double p = d.probabilities[d.selected[static_cast<size_t>(j)]];
    if (!(p > 0.0))
      throw std::invalid_argument("ideal_weights: selected point has zero probability");
    w[j] = 1.0 / p;
  }
  return w;
}

}  // namespace sbc
