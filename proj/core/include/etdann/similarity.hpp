#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "etdann/dataset.hpp"

namespace etdann {

struct DonorSelection {
  std::string target_site_id;
  std::vector<std::string> donor_site_ids;  // nearest first
  std::vector<double> distances;            // nearest first, parallel to donor_site_ids
  std::vector<std::size_t> donor_indices;   // positions in the Dataset
};

// MAT, MAP and Hc are z-scored over every site in the dataset (target
// included, population std); a coordinate with zero spread contributes
// nothing. Returns the k nearest sites of the target's PFT by Euclidean
// distance, or all of them when fewer than k exist. Distances within 1e-12
// of each other count as equal and are ordered by site_id.
//
// Throws UnknownSite and NoSameTypeDonors.
DonorSelection select_donors(const Dataset& dataset, std::string_view target, std::size_t k = 10);

// Normalized (MAT, MAP, Hc) coordinates of every site, in dataset order.
std::vector<std::array<double, 3>> similarity_coordinates(const Dataset& dataset);

}  // namespace etdann
