#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "etdann/matrix.hpp"

namespace etdann {

struct ForestConfig {
  std::size_t n_trees = 50;
  std::optional<std::size_t> max_depth;     // unlimited when empty
  std::size_t min_samples_split = 2;
  std::size_t min_samples_leaf = 1;
  std::optional<std::size_t> max_features;  // all features when empty
  bool bootstrap = true;
  std::uint64_t seed = 0;

  void validate() const;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;  // mean target of the node's training samples
  std::size_t n_samples = 0;

  bool is_leaf() const noexcept { return feature < 0; }
};

// CART regression tree stored as a flat node array; node 0 is the root.
// Samples with x[feature] <= threshold go left.
class RegressionTree {
 public:
  RegressionTree() = default;
  explicit RegressionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {}

  const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
  double predict(std::span<const double> row) const;
  std::size_t depth() const;

 private:
  std::vector<TreeNode> nodes_;
};

struct TreeParams {
  std::optional<std::size_t> max_depth;
  std::size_t min_samples_split = 2;
  std::size_t min_samples_leaf = 1;
  std::optional<std::size_t> max_features;
  std::uint64_t seed = 0;  // only used for feature subsampling
};

// Grows one tree on the rows listed in sample_rows (repeats allowed, as
// produced by a bootstrap draw).
//
// Split search: for every feature (ascending index) the candidate
// thresholds are midpoints between consecutive distinct sorted values; the
// split maximizing variance reduction wins. Gains within a relative 1e-10
// of the best are ties and keep the earlier candidate, i.e. the lowest
// feature index, then the lowest threshold. A node becomes a leaf when it
// is pure, too small, at max_depth, or has no split with positive gain.
RegressionTree fit_tree(const Matrix& x, std::span<const double> y,
                        std::span<const std::size_t> sample_rows, const TreeParams& params);

struct ForestModel {
  std::vector<RegressionTree> trees;
  ForestConfig config;
  std::size_t n_features = 0;
};

// Tree t is grown on a bootstrap draw from an Rng seeded with cfg.seed + t,
// so results do not depend on fitting order.
ForestModel fit_forest(const Matrix& x, const Vector& y, const ForestConfig& cfg);
Vector predict_forest(const ForestModel& model, const Matrix& x);

// Inspection dump, e.g. {"n_features":2,"trees":[{"nodes":[...]}]}. Not a
// stable interchange format.
std::string forest_to_json(const ForestModel& model);

std::uint64_t fingerprint(const ForestModel& model);

}  // namespace etdann
