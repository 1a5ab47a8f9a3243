#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace vrturn {

struct TreeNode {
  int feature = -1;  // -1 for leaves
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;
};

/// Binary regression tree; rows with x[feature] <= threshold go left.
struct RegressionTree {
  std::vector<TreeNode> nodes;

  int apply(const Eigen::MatrixXd& X, Eigen::Index row) const;
  double predict(const Eigen::MatrixXd& X, Eigen::Index row) const { return nodes[apply(X, row)].value; }
  std::size_t leaf_count() const;
};

struct TreeParams {
  int max_depth = 0;  // 0 = unlimited
  std::size_t min_samples_split = 2;
  std::size_t min_samples_leaf = 1;
  std::size_t max_features = 0;  // 0 = all
  std::uint64_t seed = 0;
};

/// Row order of every column sorted by (value, row). Built once per matrix
/// and shared by all trees grown on it.
struct PresortedColumns {
  explicit PresortedColumns(const Eigen::MatrixXd& X);
  std::vector<std::vector<int>> order;
};

/// Grows a tree minimizing weighted squared error of `target`; rows with
/// zero weight are ignored. Leaf value = weighted mean target. With a binary
/// target this is the Gini criterion.
///
/// When max_features limits the candidates, features are visited in an order
/// keyed by (seed, node id, feature_keys[f]) until max_features of them vary
/// inside the node. Equal-gain splits go to the lowest feature index, then
/// the lowest threshold.
RegressionTree build_tree(const Eigen::MatrixXd& X, const PresortedColumns& sorted, const std::vector<double>& target,
                          const std::vector<double>& weight, const std::vector<std::uint64_t>& feature_keys,
                          const TreeParams& params);

}  // namespace vrturn
