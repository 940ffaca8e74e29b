#include "etdann/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <tuple>

#include "etdann/error.hpp"

namespace etdann {

namespace {
constexpr double kTieTolerance = 1e-12;
}  // namespace

std::vector<std::array<double, 3>> similarity_coordinates(const Dataset& dataset) {
  const auto n = dataset.size();
  std::vector<std::array<double, 3>> coords(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = dataset.site(i);
    coords[i] = {s.mat, s.map, s.hc};
  }
  for (std::size_t d = 0; d < 3; ++d) {
    double mean = 0.0;
    for (const auto& c : coords) mean += c[d];
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (const auto& c : coords) var += (c[d] - mean) * (c[d] - mean);
    const double sd = std::sqrt(var / static_cast<double>(n));
    for (auto& c : coords) c[d] = sd > 1e-12 ? (c[d] - mean) / sd : 0.0;
  }
  return coords;
}

DonorSelection select_donors(const Dataset& dataset, std::string_view target, std::size_t k) {
  const auto target_idx = dataset.find(target);
  if (!target_idx) throw Error(ErrorCode::UnknownSite, "'" + std::string(target) + "'");
  if (k < 1) throw Error(ErrorCode::InvalidConfig, "k must be >= 1");
  const auto coords = similarity_coordinates(dataset);
  const auto& pft = dataset.site(*target_idx).pft;
  const auto& tc = coords[*target_idx];

  std::vector<std::tuple<double, std::string, std::size_t>> candidates;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    if (i == *target_idx || dataset.site(i).pft != pft) continue;
    const auto& c = coords[i];
    const double dist = std::sqrt((c[0] - tc[0]) * (c[0] - tc[0]) + (c[1] - tc[1]) * (c[1] - tc[1]) +
                                  (c[2] - tc[2]) * (c[2] - tc[2]));
    candidates.emplace_back(dist, dataset.site(i).site_id, i);
  }
  if (candidates.empty())
    throw Error(ErrorCode::NoSameTypeDonors, "no other '" + pft + "' site for '" + std::string(target) + "'");
  std::sort(candidates.begin(), candidates.end());
  // Mirror-image sites land an ulp or two apart after z-scoring; runs of
  // distances closer than kTieTolerance are ordered by site id.
  for (std::size_t lo = 0; lo < candidates.size();) {
    std::size_t hi = lo + 1;
    while (hi < candidates.size() && std::get<0>(candidates[hi]) - std::get<0>(candidates[hi - 1]) <= kTieTolerance)
      ++hi;
    std::sort(candidates.begin() + lo, candidates.begin() + hi,
              [](const auto& a, const auto& b) { return std::get<1>(a) < std::get<1>(b); });
    lo = hi;
  }

  DonorSelection out;
  out.target_site_id = std::string(target);
  const std::size_t take = std::min(k, candidates.size());
  for (std::size_t i = 0; i < take; ++i) {
    const auto& [dist, id, idx] = candidates[i];
    out.donor_site_ids.push_back(id);
    out.distances.push_back(dist);
    out.donor_indices.push_back(idx);
  }
  return out;
}

}  // namespace etdann
