#pragma once

#include <span>

namespace etdann {

// Kling-Gupta efficiency and its three components. Standard deviations are
// population (1/n) statistics.
struct KgeBreakdown {
  double kge = 0.0;
  double r = 0.0;      // Pearson correlation of sim and obs
  double alpha = 0.0;  // sigma_sim / sigma_obs
  double beta = 0.0;   // mu_sim / mu_obs
};

// Throws LengthMismatch, TooFewSamples (n < 2), NonFiniteInput,
// DegenerateObservations (sigma_obs or |mu_obs| <= 1e-12) and
// DegenerateSimulation (sigma_sim <= 1e-12).
KgeBreakdown kge(std::span<const double> sim, std::span<const double> obs);

double mse(std::span<const double> sim, std::span<const double> obs);

}  // namespace etdann
