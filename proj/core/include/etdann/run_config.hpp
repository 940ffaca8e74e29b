#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "etdann/dann.hpp"
#include "etdann/forest.hpp"

namespace etdann {

struct RunConfig {
  ForestConfig loo_forest;                                 // 50 trees
  ForestConfig pft_forest = [] { ForestConfig c; c.n_trees = 20; return c; }();
  DannConfig dann;
  std::size_t similarity_k = 10;
  std::uint64_t seed = 0;

  // Copy with each protocol's seed derived from the master seed.
  RunConfig seeded() const;
};

// Parses the run configuration JSON:
//   {"seed": 7,
//    "forest": {"n_trees": 50, "pft_n_trees": 20, "max_depth": null,
//               "min_samples_split": 2, "min_samples_leaf": 1,
//               "max_features": "all", "bootstrap": true},
//    "dann": {"feature_width": 64, "feature_depth": 2,
//             "regressor_widths": [32, 1], "classifier_widths": [32, 1],
//             "epochs": 50, "batch_size": 128, "lr": 0.001,
//             "domain_head": true, "fixed_lambda": null},
//    "similarity": {"k": 10}}
// Every key is optional; unknown keys and wrong types throw InvalidConfig.
RunConfig parse_run_config(const std::string& json_text);

}  // namespace etdann
