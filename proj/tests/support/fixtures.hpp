#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "etdann/dataset.hpp"
#include "etdann/rng.hpp"
#include "etdann/synthgen.hpp"

namespace etdann::fixture {

// A site over the canonical schema with random dynamic columns and the
// given static values; the target is a smooth function of the dynamics.
inline SiteRecord random_site(const std::string& id, const std::string& pft, double mat, double map, double hc,
                              std::size_t days, std::uint64_t seed) {
  const auto schema = PredictorSchema::canonical();
  Rng rng(seed);
  Matrix rows(static_cast<Eigen::Index>(days), static_cast<Eigen::Index>(schema.size()));
  Vector target(static_cast<Eigen::Index>(days));
  for (std::size_t j = 0; j < schema.size(); ++j) {
    const auto& name = schema.names()[j];
    const double constant = name == "MAT" ? mat : name == "MAP" ? map : name == "Hc" ? hc : uniform(rng, 0.0, 1.0);
    for (std::size_t i = 0; i < days; ++i) {
      const auto r = static_cast<Eigen::Index>(i);
      rows(r, static_cast<Eigen::Index>(j)) = PredictorSchema::is_static(name) ? constant : uniform(rng, -1.0, 1.0);
    }
  }
  for (std::size_t i = 0; i < days; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    target(r) = 2.0 + rows(r, 0) + 0.5 * rows(r, 2);
  }
  return make_site(schema, id, pft, std::move(rows), std::move(target));
}

inline SynthConfig quiet_synth(std::size_t sites, std::uint64_t seed, std::size_t days = 120) {
  SynthConfig cfg;
  cfg.n_sites = sites;
  cfg.days_per_site = days;
  cfg.seed = seed;
  cfg.shift_strength = 0.0;
  cfg.noise_sd = 0.0;
  return cfg;
}

}  // namespace etdann::fixture
