#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "etdann/dann.hpp"
#include "etdann/dataset.hpp"
#include "etdann/error.hpp"
#include "etdann/forest.hpp"
#include "etdann/metrics.hpp"

namespace etdann {

enum class ProtocolId { LooRf, PftSpecificRf, Dann };

std::string_view to_string(ProtocolId id);
// Accepts "LOO_RF"/"loo", "PFT_SPECIFIC_RF"/"pft", "DANN"/"dann".
std::optional<ProtocolId> parse_protocol(std::string_view text);

struct SiteResult {
  std::string site_id;
  std::string pft;
  ProtocolId protocol = ProtocolId::LooRf;
  std::optional<KgeBreakdown> breakdown;  // empty when the fold failed
  std::optional<ErrorCode> failure;       // DegenerateSimulation, DivergedTraining, ...
  std::size_t n_test_days = 0;
  double wall_time_s = 0.0;
  std::uint64_t model_fingerprint = 0;
  std::vector<std::string> training_sites;

  bool ok() const noexcept { return breakdown.has_value(); }
  std::optional<double> kge() const {
    return breakdown ? std::optional<double>(breakdown->kge) : std::nullopt;
  }
};

// Row-level provenance of one fold's training matrix.
struct FoldAudit {
  ProtocolId protocol = ProtocolId::LooRf;
  std::size_t test_site = 0;
  const std::vector<std::size_t>* row_site_tags = nullptr;
};

struct RunOptions {
  std::size_t workers = 1;
  // Check every training row's site tag against the held-out site and throw
  // FoldHygieneViolation on a match.
  bool audit_folds = false;
  // Called (possibly from worker threads) for every audited fold.
  std::function<void(const FoldAudit&)> on_fold;
  // Called with each DANN fold's training trace.
  std::function<void(std::size_t site, const TrainTrace&)> on_trace;
};

// Per-fold seeds are derive_seed(cfg.seed, site index), so results do not
// depend on the worker count. Results are sorted by site_id. Per-site
// failures (DegenerateSimulation, DegenerateObservations, DivergedTraining,
// NoSameTypeDonors) become FAILED results; other errors propagate.
std::vector<SiteResult> run_loo_rf(const Dataset& dataset, const ForestConfig& cfg, const RunOptions& options = {});
std::vector<SiteResult> run_pft_rf(const Dataset& dataset, const ForestConfig& cfg, std::size_t k = 10,
                                   const RunOptions& options = {});
std::vector<SiteResult> run_dann_protocol(const Dataset& dataset, const DannConfig& cfg,
                                          const RunOptions& options = {});

// Scores a prediction; exposed so protocol failures are mapped uniformly.
SiteResult score_site(const SiteRecord& site, ProtocolId protocol, const Vector& prediction);

// Runs fn(i) for i in [0, n) on up to `workers` threads; rethrows the first
// exception after all workers finish.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn);

}  // namespace etdann
