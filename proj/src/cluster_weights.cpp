#include "sbc/cluster_weights.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace sbc {

namespace {

double sse(const Eigen::VectorXd& y, const std::vector<int>& idx) {
  if (idx.empty()) return 0.0;
  double mean = 0.0;
  for (int i : idx) mean += y[i];
  mean /= static_cast<double>(idx.size());
  double out = 0.0;
  for (int i : idx) {
    const double d = y[i] - mean;
    out += d * d;
  }
  return out;
}

struct Split {
  bool found = false;
  int feature = -1;
  double threshold = 0.0;
  double children_sse = std::numeric_limits<double>::infinity();
};

Split best_split(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                 const std::vector<int>& idx, int min_leaf) {
  Split best;
  const int n = static_cast<int>(idx.size());
  if (n < 2 * min_leaf) return best;

  for (int f = 0; f < x.cols(); ++f) {
    std::vector<int> order = idx;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      if (x(a, f) != x(b, f)) return x(a, f) < x(b, f);
      return a < b;
    });

    // prefix sums over the sorted order for O(1) variance updates
    std::vector<double> psum(n + 1, 0.0), psq(n + 1, 0.0);
    for (int i = 0; i < n; ++i) {
      psum[i + 1] = psum[i] + y[order[i]];
      psq[i + 1] = psq[i] + y[order[i]] * y[order[i]];
    }

    for (int i = min_leaf; i <= n - min_leaf; ++i) {
      const double lo = x(order[i - 1], f), hi = x(order[i], f);
      if (lo == hi) continue;  // split would separate nothing
      const double threshold = 0.5 * (lo + hi);
      const double ls = psq[i] - psum[i] * psum[i] / i;
      const double rs = (psq[n] - psq[i]) -
                        (psum[n] - psum[i]) * (psum[n] - psum[i]) / (n - i);
      const double total = ls + rs;
      if (total < best.children_sse) {
        best.found = true;
        best.feature = f;
        best.threshold = threshold;
        best.children_sse = total;
      }
      // ties keep the earlier (lower feature, lower threshold) candidate
    }
  }
  return best;
}

int build(ClusterPartition& partition, const Eigen::MatrixXd& x,
          const Eigen::VectorXd& y, const std::vector<int>& idx, int min_leaf) {
  const int node_id = static_cast<int>(partition.nodes.size());
  partition.nodes.emplace_back();

  const double parent_sse = sse(y, idx);
  Split split = best_split(x, y, idx, min_leaf);

  // only accept splits that strictly reduce impurity
  if (!split.found || !(split.children_sse < parent_sse - 1e-12 * std::max(1.0, parent_sse))) {
    partition.nodes[node_id].leaf_id = partition.num_leaves++;
    return node_id;
  }

  std::vector<int> left_idx, right_idx;
  for (int i : idx) {
    if (x(i, split.feature) <= split.threshold)
      left_idx.push_back(i);
    else
      right_idx.push_back(i);
  }

  partition.nodes[node_id].feature = split.feature;
  partition.nodes[node_id].threshold = split.threshold;
  const int left = build(partition, x, y, left_idx, min_leaf);
  partition.nodes[node_id].left = left;
  const int right = build(partition, x, y, right_idx, min_leaf);
  partition.nodes[node_id].right = right;
  return node_id;
}

}  // namespace

ClusterPartition fit_tree(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                          int min_leaf) {
  if (x.rows() == 0) throw std::invalid_argument("fit_tree: empty sample");
  if (x.rows() != y.size())
    throw std::invalid_argument("fit_tree: inconsistent sizes");
  if (min_leaf < 1) throw std::invalid_argument("fit_tree: min_leaf must be positive");
  if (x.rows() < min_leaf)
    throw std::invalid_argument("fit_tree: sample smaller than min_leaf");

  ClusterPartition partition;
  std::vector<int> idx(static_cast<size_t>(x.rows()));
  std::iota(idx.begin(), idx.end(), 0);
  build(partition, x, y, idx, min_leaf);
  return partition;
}

int route(const ClusterPartition& partition, const Eigen::VectorXd& x) {
  if (partition.nodes.empty()) throw std::invalid_argument("route: empty tree");
  int node = 0;
  while (partition.nodes[node].feature >= 0) {
    const auto& nd = partition.nodes[node];
    const double v = x[nd.feature];
    if (std::isnan(v)) throw std::invalid_argument("route: NaN feature value");
    node = (v <= nd.threshold) ? nd.left : nd.right;
  }
  return partition.nodes[node].leaf_id;
}

void assign_counts(ClusterPartition& partition, const Eigen::MatrixXd& s_points,
                   const Eigen::MatrixXd& pool) {
  partition.s_count.assign(partition.num_leaves, 0);
  partition.u_count.assign(partition.num_leaves, 0);
  for (Eigen::Index i = 0; i < s_points.rows(); ++i)
    ++partition.s_count[route(partition, s_points.row(i))];
  for (Eigen::Index i = 0; i < pool.rows(); ++i)
    ++partition.u_count[route(partition, pool.row(i))];

  partition.c_max = 0;
  partition.q0 = std::numeric_limits<double>::infinity();
  for (int leaf = 0; leaf < partition.num_leaves; ++leaf) {
    partition.c_max = std::max(partition.c_max, partition.u_count[leaf]);
    if (partition.u_count[leaf] > 0)
      partition.q0 = std::min(partition.q0, static_cast<double>(partition.s_count[leaf]) /
                                                partition.u_count[leaf]);
  }
  if (!std::isfinite(partition.q0)) partition.q0 = 0.0;
  partition.counts_assigned = true;
}

Eigen::VectorXd weights(const ClusterPartition& partition,
                        const Eigen::MatrixXd& training) {
  if (!partition.counts_assigned)
    throw std::logic_error("weights: counts not assigned");
  Eigen::VectorXd w(training.rows());
  for (Eigen::Index i = 0; i < training.rows(); ++i) {
    const int leaf = route(partition, training.row(i));
    if (partition.s_count[leaf] < 1)
      throw std::runtime_error("weights: training point in a leaf with no S points");
    w[i] = static_cast<double>(partition.u_count[leaf]) / partition.s_count[leaf];
  }
  return w;
}

double frequency_bound(int m_distinct, double n, double p0, double delta) {
  if (m_distinct < 1 || !(n > 0.0))
    throw std::invalid_argument("frequency_bound: m' and n must be positive");
  if (!(p0 > 0.0) || p0 > 1.0)
    throw std::invalid_argument("frequency_bound: p0 must lie in (0, 1]");
  if (!(delta > 0.0) || !(delta < 1.0))
    throw std::invalid_argument("frequency_bound: delta must lie in (0, 1)");
  return std::sqrt((std::log(2.0 * m_distinct) + std::log(1.0 / delta)) / (p0 * n));
}

std::pair<double, double> cluster_distance_bounds(double B, int c_max, int k,
                                                  double q0, double n, double m,
                                                  double delta) {
  if (!(B > 0.0) || c_max < 1 || k < 1 || !(q0 > 0.0) || !(n > 0.0) || !(m > 0.0))
    throw std::invalid_argument("cluster_distance_bounds: arguments must be positive");
  if (!(delta > 0.0) || !(delta < 1.0))
    throw std::invalid_argument("cluster_distance_bounds: delta must lie in (0, 1)");
  const double log_term = std::log(2.0 * k) + std::log(1.0 / delta);
  const double l1 = B * B * std::sqrt(c_max * k * log_term / (q0 * n * m));
  const double l2 = B * B * std::sqrt(c_max * k * log_term / (q0 * n * m * m));
  return {l1, l2};
}

}  // namespace sbc
