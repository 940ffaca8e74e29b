#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "etdann/dataset.hpp"

namespace etdann {

struct SynthConfig {
  std::size_t n_sites = 20;
  std::size_t days_per_site = 365;
  std::uint64_t seed = 0;
  double shift_strength = 1.0;
  double noise_sd = 0.1;
  std::vector<std::pair<std::string, double>> pft_mix = {
      {"Forest", 0.4}, {"Grassland", 0.2}, {"Savannah", 0.15}, {"Wetland", 0.15}, {"Shrubland", 0.1}};

  // Throws InvalidConfig.
  void validate() const;
};

// Latent response of one generated site: ET = a * 4 * base + b + noise.
struct SiteResponse {
  std::string site_id;
  double a = 0.0;
  double b = 0.0;
};

struct SynthData {
  Dataset dataset;
  std::vector<SiteResponse> responses;
};

// Shared, site-invariant part of the ET response, in [0, 1.4) for the
// generated driver ranges.
double base_response(double ta, double vpd, double rsdn, double lai);

// Deterministic multi-site generator over the canonical schema. Site i is
// generated from its own Rng seeded with derive_seed(seed, i), so the output
// does not depend on generation order. The exact formulas are listed in
// README.md ("Synthetic data").
SynthData generate_with_truth(const SynthConfig& cfg);
Dataset generate(const SynthConfig& cfg);

// Number of sites per PFT: largest-remainder apportionment of n over mix.
std::vector<std::pair<std::string, std::size_t>> apportion(const SynthConfig& cfg);

// Between-site response heterogeneity: population variance across sites
// of the per-site least-squares slope of ET on base_response computed from
// the site's TA, VPD, RSDN and LAI columns.
double shift_diagnostic(const Dataset& dataset);

}  // namespace etdann
