#include "etdann/metrics.hpp"

#include <cmath>
#include <string>

#include "etdann/error.hpp"

namespace etdann {

namespace {

constexpr double kDegenerate = 1e-12;

void check_pair(std::span<const double> sim, std::span<const double> obs, std::size_t min_len) {
  if (sim.size() != obs.size())
    throw Error(ErrorCode::LengthMismatch,
                std::to_string(sim.size()) + " simulated vs " + std::to_string(obs.size()) + " observed");
  if (sim.size() < min_len)
    throw Error(ErrorCode::TooFewSamples, "need at least " + std::to_string(min_len) + " values");
  for (std::size_t i = 0; i < sim.size(); ++i)
    if (!std::isfinite(sim[i]) || !std::isfinite(obs[i]))
      throw Error(ErrorCode::NonFiniteInput, "index " + std::to_string(i));
}

}  // namespace

KgeBreakdown kge(std::span<const double> sim, std::span<const double> obs) {
  check_pair(sim, obs, 2);
  const double n = static_cast<double>(sim.size());
  double mu_sim = 0.0;
  double mu_obs = 0.0;
  for (std::size_t i = 0; i < sim.size(); ++i) {
    mu_sim += sim[i];
    mu_obs += obs[i];
  }
  mu_sim /= n;
  mu_obs /= n;
  double var_sim = 0.0;
  double var_obs = 0.0;
  double cov = 0.0;
  for (std::size_t i = 0; i < sim.size(); ++i) {
    const double ds = sim[i] - mu_sim;
    const double dob = obs[i] - mu_obs;
    var_sim += ds * ds;
    var_obs += dob * dob;
    cov += ds * dob;
  }
  const double sd_sim = std::sqrt(var_sim / n);
  const double sd_obs = std::sqrt(var_obs / n);
  if (sd_obs <= kDegenerate || std::abs(mu_obs) <= kDegenerate)
    throw Error(ErrorCode::DegenerateObservations, "observations are constant or zero-mean");
  if (sd_sim <= kDegenerate) throw Error(ErrorCode::DegenerateSimulation, "simulation is constant");

  KgeBreakdown out;
  out.r = (cov / n) / (sd_sim * sd_obs);
  out.alpha = sd_sim / sd_obs;
  out.beta = mu_sim / mu_obs;
  out.kge = 1.0 - std::sqrt((out.r - 1.0) * (out.r - 1.0) + (out.alpha - 1.0) * (out.alpha - 1.0) +
                            (out.beta - 1.0) * (out.beta - 1.0));
  return out;
}

double mse(std::span<const double> sim, std::span<const double> obs) {
  check_pair(sim, obs, 1);
  double acc = 0.0;
  for (std::size_t i = 0; i < sim.size(); ++i) {
    const double d = sim[i] - obs[i];
    acc += d * d;
  }
  return acc / static_cast<double>(sim.size());
}

}  // namespace etdann
