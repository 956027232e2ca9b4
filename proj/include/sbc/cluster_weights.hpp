#pragma once

#include <Eigen/Dense>

#include <vector>

namespace sbc {

/// Regression-tree partition of the input space. Leaves are the clusters;
/// per-leaf S/U counts drive the frequency weights |C_i ∩ U| / |C_i ∩ S|.
struct ClusterPartition {
  struct Node {
    int feature = -1;        // -1 marks a leaf
    double threshold = 0.0;  // x[feature] <= threshold goes left
    int left = -1;
    int right = -1;
    int leaf_id = -1;
  };

  std::vector<Node> nodes;
  int num_leaves = 0;            // k
  std::vector<int> s_count;      // |C_i ∩ S| per leaf
  std::vector<int> u_count;      // |C_i ∩ U| per leaf
  int c_max = 0;                 // max_i |C_i ∩ U|
  double q0 = 0.0;               // min_i s_count/u_count over occupied leaves
  bool counts_assigned = false;
};

// CART-style greedy tree on the labeled biased sample: variance-impurity
// splits at midpoints of consecutive distinct feature values, both children
// must keep at least min_leaf sample points, ties broken by lowest feature
// index then lowest threshold.
ClusterPartition fit_tree(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                          int min_leaf = 4);

int route(const ClusterPartition& partition, const Eigen::VectorXd& x);

// Routes S and the pool U through the tree and fills the per-leaf counts.
void assign_counts(ClusterPartition& partition, const Eigen::MatrixXd& s_points,
                   const Eigen::MatrixXd& pool);

// Raw weight u_count/s_count of each training point's leaf.
Eigen::VectorXd weights(const ClusterPartition& partition,
                        const Eigen::MatrixXd& training);

// Uniform frequency convergence bound
// sqrt((log 2m' + log(1/delta)) / (p0 n)).
double frequency_bound(int m_distinct, double n, double p0, double delta);

// Cluster-granularity l1/l2 distance bounds between the ideal and the
// frequency-estimated weight distributions.
std::pair<double, double> cluster_distance_bounds(double B, int c_max, int k,
                                                  double q0, double n, double m,
                                                  double delta);

}  // namespace sbc
