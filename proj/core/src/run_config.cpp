#include "etdann/run_config.hpp"

#include <set>

#include <json.hpp>

#include "etdann/error.hpp"
#include "etdann/rng.hpp"

namespace etdann {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw Error(ErrorCode::InvalidConfig, where + " must be an object");
  for (const auto& [key, value] : obj.items())
    if (!allowed.count(key)) throw Error(ErrorCode::InvalidConfig, "unknown key '" + where + key + "'");
}

std::size_t count(const json& v, const std::string& key) {
  if (!v.is_number_unsigned()) throw Error(ErrorCode::InvalidConfig, "'" + key + "' must be a non-negative integer");
  return v.get<std::size_t>();
}

std::vector<std::size_t> widths(const json& v, const std::string& key) {
  if (!v.is_array()) throw Error(ErrorCode::InvalidConfig, "'" + key + "' must be an array");
  std::vector<std::size_t> out;
  for (const auto& w : v) out.push_back(count(w, key));
  return out;
}

bool flag(const json& v, const std::string& key) {
  if (!v.is_boolean()) throw Error(ErrorCode::InvalidConfig, "'" + key + "' must be a boolean");
  return v.get<bool>();
}

double real(const json& v, const std::string& key) {
  if (!v.is_number()) throw Error(ErrorCode::InvalidConfig, "'" + key + "' must be a number");
  return v.get<double>();
}

}  // namespace

RunConfig RunConfig::seeded() const {
  RunConfig out = *this;
  out.loo_forest.seed = derive_seed(seed, 101);
  out.pft_forest.seed = derive_seed(seed, 102);
  out.dann.seed = derive_seed(seed, 103);
  return out;
}

RunConfig parse_run_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("invalid JSON: ") + e.what());
  }
  reject_unknown(doc, {"forest", "dann", "similarity", "seed"}, "");

  RunConfig cfg;
  if (doc.contains("seed")) cfg.seed = count(doc["seed"], "seed");

  if (doc.contains("forest")) {
    const auto& f = doc["forest"];
    reject_unknown(f, {"n_trees", "pft_n_trees", "max_depth", "min_samples_split", "min_samples_leaf",
                       "max_features", "bootstrap"},
                   "forest.");
    auto both = [&](auto&& apply) {
      apply(cfg.loo_forest);
      apply(cfg.pft_forest);
    };
    if (f.contains("n_trees")) cfg.loo_forest.n_trees = count(f["n_trees"], "forest.n_trees");
    if (f.contains("pft_n_trees")) cfg.pft_forest.n_trees = count(f["pft_n_trees"], "forest.pft_n_trees");
    if (f.contains("max_depth")) {
      const auto& v = f["max_depth"];
      const std::optional<std::size_t> depth =
          v.is_null() ? std::nullopt : std::optional<std::size_t>(count(v, "forest.max_depth"));
      both([&](ForestConfig& c) { c.max_depth = depth; });
    }
    if (f.contains("min_samples_split")) {
      const auto n = count(f["min_samples_split"], "forest.min_samples_split");
      both([&](ForestConfig& c) { c.min_samples_split = n; });
    }
    if (f.contains("min_samples_leaf")) {
      const auto n = count(f["min_samples_leaf"], "forest.min_samples_leaf");
      both([&](ForestConfig& c) { c.min_samples_leaf = n; });
    }
    if (f.contains("max_features")) {
      const auto& v = f["max_features"];
      std::optional<std::size_t> mf;
      if (v.is_string()) {
        if (v.get<std::string>() != "all")
          throw Error(ErrorCode::InvalidConfig, "'forest.max_features' must be an integer or \"all\"");
      } else {
        mf = count(v, "forest.max_features");
      }
      both([&](ForestConfig& c) { c.max_features = mf; });
    }
    if (f.contains("bootstrap")) {
      const bool b = flag(f["bootstrap"], "forest.bootstrap");
      both([&](ForestConfig& c) { c.bootstrap = b; });
    }
  }

  if (doc.contains("dann")) {
    const auto& d = doc["dann"];
    reject_unknown(d, {"feature_width", "feature_depth", "regressor_widths", "classifier_widths", "epochs",
                       "batch_size", "lr", "domain_head", "fixed_lambda"},
                   "dann.");
    auto& c = cfg.dann;
    if (d.contains("feature_width")) c.feature_width = count(d["feature_width"], "dann.feature_width");
    if (d.contains("feature_depth")) c.feature_depth = count(d["feature_depth"], "dann.feature_depth");
    if (d.contains("regressor_widths")) c.regressor_widths = widths(d["regressor_widths"], "dann.regressor_widths");
    if (d.contains("classifier_widths"))
      c.classifier_widths = widths(d["classifier_widths"], "dann.classifier_widths");
    if (d.contains("epochs")) c.epochs = count(d["epochs"], "dann.epochs");
    if (d.contains("batch_size")) c.batch_size = count(d["batch_size"], "dann.batch_size");
    if (d.contains("lr")) c.lr = real(d["lr"], "dann.lr");
    if (d.contains("domain_head")) c.domain_head = flag(d["domain_head"], "dann.domain_head");
    if (d.contains("fixed_lambda") && !d["fixed_lambda"].is_null())
      c.fixed_lambda = real(d["fixed_lambda"], "dann.fixed_lambda");
  }

  if (doc.contains("similarity")) {
    const auto& s = doc["similarity"];
    reject_unknown(s, {"k"}, "similarity.");
    if (s.contains("k")) cfg.similarity_k = count(s["k"], "similarity.k");
  }
  if (cfg.similarity_k < 1) throw Error(ErrorCode::InvalidConfig, "similarity.k must be >= 1");

  cfg.loo_forest.validate();
  cfg.pft_forest.validate();
  cfg.dann.validate();
  return cfg;
}

}  // namespace etdann
