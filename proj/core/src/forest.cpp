#include "etdann/forest.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <string>

#include <json.hpp>

#include "etdann/error.hpp"
#include "etdann/rng.hpp"

namespace etdann {

namespace {

constexpr double kTieTolerance = 1e-10;

struct SplitChoice {
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
  std::size_t split_pos = 0;  // offset within the node range where the right child starts
};

class TreeBuilder {
 public:
  TreeBuilder(const Matrix& x, std::span<const double> y, std::span<const std::size_t> rows,
              const TreeParams& params)
      : x_(x), params_(params), rng_(params.seed) {
    const std::size_t m = rows.size();
    const auto n_features = static_cast<std::size_t>(x.cols());
    rows_.assign(rows.begin(), rows.end());
    targets_.resize(m);
    for (std::size_t s = 0; s < m; ++s) targets_[s] = y[rows_[s]];
    order_.resize(n_features);
    for (std::size_t f = 0; f < n_features; ++f) {
      auto& ord = order_[f];
      ord.resize(m);
      std::iota(ord.begin(), ord.end(), 0u);
      std::sort(ord.begin(), ord.end(), [&](std::uint32_t a, std::uint32_t b) {
        const double va = value(a, f);
        const double vb = value(b, f);
        return va < vb || (va == vb && a < b);
      });
    }
    goes_left_.resize(m);
    scratch_.resize(m);
    features_.resize(n_features);
    std::iota(features_.begin(), features_.end(), std::size_t{0});
  }

  std::vector<TreeNode> build() {
    if (!rows_.empty()) grow(0, rows_.size(), 0);
    return std::move(nodes_);
  }

 private:
  double value(std::uint32_t slot, std::size_t feature) const {
    return x_(static_cast<Eigen::Index>(rows_[slot]), static_cast<Eigen::Index>(feature));
  }

  int grow(std::size_t begin, std::size_t end, std::size_t depth) {
    const std::size_t n = end - begin;
    const auto& any_order = order_.front();
    double mean = 0.0;
    double lo = targets_[any_order[begin]];
    double hi = lo;
    for (std::size_t i = begin; i < end; ++i) {
      const double t = targets_[any_order[i]];
      mean += t;
      lo = std::min(lo, t);
      hi = std::max(hi, t);
    }
    mean /= static_cast<double>(n);

    const int index = static_cast<int>(nodes_.size());
    nodes_.push_back(TreeNode{});
    nodes_[static_cast<std::size_t>(index)].value = mean;
    nodes_[static_cast<std::size_t>(index)].n_samples = n;

    const bool depth_reached = params_.max_depth && depth >= *params_.max_depth;
    if (lo == hi || n < params_.min_samples_split || n < 2 * params_.min_samples_leaf || depth_reached)
      return index;

    const SplitChoice best = find_split(begin, end, mean);
    if (best.feature < 0) return index;

    partition(begin, end, best);
    const std::size_t mid = begin + best.split_pos;
    const int left = grow(begin, mid, depth + 1);
    const int right = grow(mid, end, depth + 1);
    auto& node = nodes_[static_cast<std::size_t>(index)];
    node.feature = best.feature;
    node.threshold = best.threshold;
    node.left = left;
    node.right = right;
    return index;
  }

  SplitChoice find_split(std::size_t begin, std::size_t end, double mean) {
    const std::size_t n = end - begin;
    const std::size_t min_leaf = params_.min_samples_leaf;

    double parent_sse = 0.0;
    double centered_total = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      const double d = targets_[order_.front()[i]] - mean;
      parent_sse += d * d;
      centered_total += d;
    }
    const double tol = kTieTolerance * parent_sse;

    std::size_t n_candidates = features_.size();
    if (params_.max_features && *params_.max_features < features_.size()) {
      n_candidates = *params_.max_features;
      std::iota(features_.begin(), features_.end(), std::size_t{0});
      for (std::size_t i = 0; i < n_candidates; ++i) {
        const auto j = i + uniform_index(rng_, features_.size() - i);
        std::swap(features_[i], features_[j]);
      }
      std::sort(features_.begin(), features_.begin() + static_cast<std::ptrdiff_t>(n_candidates));
    }

    SplitChoice best;
    for (std::size_t c = 0; c < n_candidates; ++c) {
      const std::size_t f = features_[c];
      const auto& ord = order_[f];
      double left_sum = 0.0;
      for (std::size_t k = 1; k < n; ++k) {
        left_sum += targets_[ord[begin + k - 1]] - mean;
        if (k < min_leaf || n - k < min_leaf) continue;
        const double v_lo = value(ord[begin + k - 1], f);
        const double v_hi = value(ord[begin + k], f);
        if (!(v_lo < v_hi)) continue;
        const double nl = static_cast<double>(k);
        const double nr = static_cast<double>(n - k);
        const double right_sum = centered_total - left_sum;
        const double gain = left_sum * left_sum / nl + right_sum * right_sum / nr -
                            centered_total * centered_total / static_cast<double>(n);
        if (gain > tol && (best.feature < 0 || gain > best.gain + tol)) {
          double threshold = 0.5 * (v_lo + v_hi);
          if (!(threshold < v_hi)) threshold = v_lo;
          best = SplitChoice{static_cast<int>(f), threshold, gain, k};
        }
      }
    }
    return best;
  }

  void partition(std::size_t begin, std::size_t end, const SplitChoice& split) {
    const auto f = static_cast<std::size_t>(split.feature);
    for (std::size_t i = begin; i < end; ++i) {
      const auto slot = order_[f][i];
      goes_left_[slot] = value(slot, f) <= split.threshold ? 1 : 0;
    }
    for (auto& ord : order_) {
      std::size_t l = begin;
      std::size_t r = 0;
      for (std::size_t i = begin; i < end; ++i) {
        const auto slot = ord[i];
        if (goes_left_[slot]) {
          ord[l++] = slot;
        } else {
          scratch_[r++] = slot;
        }
      }
      std::copy(scratch_.begin(), scratch_.begin() + static_cast<std::ptrdiff_t>(r),
                ord.begin() + static_cast<std::ptrdiff_t>(l));
    }
  }

  const Matrix& x_;
  TreeParams params_;
  Rng rng_;
  std::vector<std::size_t> rows_;
  std::vector<double> targets_;
  std::vector<std::vector<std::uint32_t>> order_;
  std::vector<std::uint8_t> goes_left_;
  std::vector<std::uint32_t> scratch_;
  std::vector<std::size_t> features_;
  std::vector<TreeNode> nodes_;
};

void check_training_data(const Matrix& x, std::span<const double> y, std::size_t min_split) {
  if (x.rows() != static_cast<Eigen::Index>(y.size()))
    throw Error(ErrorCode::LengthMismatch, "x has " + std::to_string(x.rows()) + " rows, y has " +
                                               std::to_string(y.size()));
  if (x.cols() < 1) throw Error(ErrorCode::DimensionMismatch, "x has no columns");
  if (static_cast<std::size_t>(x.rows()) < min_split)
    throw Error(ErrorCode::TooFewSamples, std::to_string(x.rows()) + " rows < min_samples_split");
  if (!x.allFinite()) throw Error(ErrorCode::NonFiniteInput, "predictors");
  for (const double v : y)
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteInput, "target");
}

}  // namespace

void ForestConfig::validate() const {
  if (n_trees < 1) throw Error(ErrorCode::InvalidConfig, "n_trees must be >= 1");
  if (min_samples_split < 2) throw Error(ErrorCode::InvalidConfig, "min_samples_split must be >= 2");
  if (min_samples_leaf < 1) throw Error(ErrorCode::InvalidConfig, "min_samples_leaf must be >= 1");
  if (max_features && *max_features < 1) throw Error(ErrorCode::InvalidConfig, "max_features must be >= 1");
}

double RegressionTree::predict(std::span<const double> row) const {
  if (nodes_.empty()) throw Error(ErrorCode::NotFitted, "empty tree");
  std::size_t i = 0;
  while (!nodes_[i].is_leaf()) {
    const auto& node = nodes_[i];
    i = static_cast<std::size_t>(row[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left
                                                                                               : node.right);
  }
  return nodes_[i].value;
}

std::size_t RegressionTree::depth() const {
  if (nodes_.empty()) return 0;
  std::vector<std::pair<std::size_t, std::size_t>> stack{{0, 0}};
  std::size_t deepest = 0;
  while (!stack.empty()) {
    const auto [i, d] = stack.back();
    stack.pop_back();
    deepest = std::max(deepest, d);
    if (!nodes_[i].is_leaf()) {
      stack.emplace_back(static_cast<std::size_t>(nodes_[i].left), d + 1);
      stack.emplace_back(static_cast<std::size_t>(nodes_[i].right), d + 1);
    }
  }
  return deepest;
}

RegressionTree fit_tree(const Matrix& x, std::span<const double> y, std::span<const std::size_t> sample_rows,
                        const TreeParams& params) {
  check_training_data(x, y, 1);
  if (sample_rows.empty()) throw Error(ErrorCode::TooFewSamples, "no sample rows");
  for (const auto r : sample_rows)
    if (r >= y.size()) throw Error(ErrorCode::OutOfRange, "sample row " + std::to_string(r));
  TreeBuilder builder(x, y, sample_rows, params);
  return RegressionTree(builder.build());
}

ForestModel fit_forest(const Matrix& x, const Vector& y, const ForestConfig& cfg) {
  cfg.validate();
  check_training_data(x, as_span(y), cfg.min_samples_split);
  const auto n = static_cast<std::size_t>(x.rows());

  ForestModel model;
  model.config = cfg;
  model.n_features = static_cast<std::size_t>(x.cols());
  model.trees.reserve(cfg.n_trees);
  std::vector<std::size_t> rows(n);
  for (std::size_t t = 0; t < cfg.n_trees; ++t) {
    Rng rng(cfg.seed + t);
    if (cfg.bootstrap) {
      for (auto& r : rows) r = uniform_index(rng, n);
    } else {
      std::iota(rows.begin(), rows.end(), std::size_t{0});
    }
    TreeParams params{cfg.max_depth, cfg.min_samples_split, cfg.min_samples_leaf, cfg.max_features,
                      derive_seed(cfg.seed + t, 1)};
    model.trees.push_back(fit_tree(x, as_span(y), rows, params));
  }
  return model;
}

Vector predict_forest(const ForestModel& model, const Matrix& x) {
  if (model.trees.empty()) throw Error(ErrorCode::NotFitted, "forest has no trees");
  if (x.cols() != static_cast<Eigen::Index>(model.n_features))
    throw Error(ErrorCode::DimensionMismatch, "forest expects " + std::to_string(model.n_features) +
                                                  " features, got " + std::to_string(x.cols()));
  Vector out(x.rows());
  const double scale = 1.0 / static_cast<double>(model.trees.size());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const auto row = row_span(x, i);
    double acc = 0.0;
    for (const auto& tree : model.trees) acc += tree.predict(row);
    out(i) = acc * scale;
  }
  return out;
}

std::string forest_to_json(const ForestModel& model) {
  nlohmann::json doc;
  doc["n_features"] = model.n_features;
  doc["n_trees"] = model.trees.size();
  auto& trees = doc["trees"] = nlohmann::json::array();
  for (const auto& tree : model.trees) {
    auto nodes = nlohmann::json::array();
    for (const auto& node : tree.nodes()) {
      if (node.is_leaf()) {
        nodes.push_back({{"value", node.value}, {"n_samples", node.n_samples}});
      } else {
        nodes.push_back({{"feature", node.feature},
                         {"threshold", node.threshold},
                         {"left", node.left},
                         {"right", node.right},
                         {"value", node.value},
                         {"n_samples", node.n_samples}});
      }
    }
    trees.push_back({{"nodes", std::move(nodes)}});
  }
  return doc.dump();
}

std::uint64_t fingerprint(const ForestModel& model) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&h](const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) h = (h ^ p[i]) * 0x100000001b3ULL;
  };
  for (const auto& tree : model.trees)
    for (const auto& node : tree.nodes()) {
      feed(&node.feature, sizeof node.feature);
      feed(&node.threshold, sizeof node.threshold);
      feed(&node.value, sizeof node.value);
    }
  return h;
}

}  // namespace etdann
