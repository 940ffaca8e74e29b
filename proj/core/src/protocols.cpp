#include "etdann/protocols.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <mutex>
#include <thread>

#include "etdann/rng.hpp"
#include "etdann/similarity.hpp"

namespace etdann {

namespace {

bool is_site_failure(ErrorCode code) {
  switch (code) {
    case ErrorCode::DegenerateSimulation:
    case ErrorCode::DegenerateObservations:
    case ErrorCode::DivergedTraining:
    case ErrorCode::NoSameTypeDonors:
      return true;
    default:
      return false;
  }
}

void audit(const RunOptions& options, ProtocolId protocol, std::size_t test_site, const FoldData& fold) {
  if (!options.audit_folds) return;
  if (std::find(fold.site_tags.begin(), fold.site_tags.end(), test_site) != fold.site_tags.end())
    throw Error(ErrorCode::FoldHygieneViolation,
                std::string(to_string(protocol)) + ": test site rows found in training matrix");
  if (options.on_fold) options.on_fold(FoldAudit{protocol, test_site, &fold.site_tags});
}

std::vector<std::string> site_names(const Dataset& d, const std::vector<std::size_t>& idx) {
  std::vector<std::string> out;
  out.reserve(idx.size());
  for (const auto i : idx) out.push_back(d.site(i).site_id);
  return out;
}

// Runs one fold per site and wraps timing, failure capture and ordering.
template <typename Fold>
std::vector<SiteResult> run_folds(const Dataset& dataset, ProtocolId protocol, const RunOptions& options,
                                  Fold&& fold) {
  std::vector<SiteResult> results(dataset.size());
  parallel_for(dataset.size(), options.workers, [&](std::size_t i) {
    const auto& site = dataset.site(i);
    const auto start = std::chrono::steady_clock::now();
    SiteResult result;
    try {
      result = fold(i);
    } catch (const Error& e) {
      if (!is_site_failure(e.code())) throw;
      result = SiteResult{};
      result.failure = e.code();
    }
    result.site_id = site.site_id;
    result.pft = site.pft;
    result.protocol = protocol;
    result.n_test_days = site.n_days();
    result.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    results[i] = std::move(result);
  });
  std::sort(results.begin(), results.end(),
            [](const SiteResult& a, const SiteResult& b) { return a.site_id < b.site_id; });
  return results;
}

std::vector<std::size_t> all_but(std::size_t n, std::size_t excluded) {
  std::vector<std::size_t> out;
  out.reserve(n - 1);
  for (std::size_t i = 0; i < n; ++i)
    if (i != excluded) out.push_back(i);
  return out;
}

}  // namespace

std::string_view to_string(ProtocolId id) {
  switch (id) {
    case ProtocolId::LooRf: return "LOO_RF";
    case ProtocolId::PftSpecificRf: return "PFT_SPECIFIC_RF";
    case ProtocolId::Dann: return "DANN";
  }
  return "UNKNOWN";
}

std::optional<ProtocolId> parse_protocol(std::string_view text) {
  if (text == "LOO_RF" || text == "loo") return ProtocolId::LooRf;
  if (text == "PFT_SPECIFIC_RF" || text == "pft") return ProtocolId::PftSpecificRf;
  if (text == "DANN" || text == "dann") return ProtocolId::Dann;
  return std::nullopt;
}

void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn) {
  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::jthread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          next = n;
        }
      }
    });
  }
  pool.clear();
  if (first_error) std::rethrow_exception(first_error);
}

SiteResult score_site(const SiteRecord& site, ProtocolId protocol, const Vector& prediction) {
  SiteResult result;
  result.site_id = site.site_id;
  result.pft = site.pft;
  result.protocol = protocol;
  result.n_test_days = site.n_days();
  result.breakdown = kge(as_span(prediction), as_span(site.target));
  return result;
}

std::vector<SiteResult> run_loo_rf(const Dataset& dataset, const ForestConfig& cfg, const RunOptions& options) {
  cfg.validate();
  return run_folds(dataset, ProtocolId::LooRf, options, [&](std::size_t i) {
    const auto train_sites = all_but(dataset.size(), i);
    const FoldData fold = gather_sites(dataset, train_sites);
    audit(options, ProtocolId::LooRf, i, fold);
    ForestConfig fold_cfg = cfg;
    fold_cfg.seed = derive_seed(cfg.seed, i);
    const ForestModel model = fit_forest(fold.x, fold.y, fold_cfg);
    const auto& site = dataset.site(i);
    SiteResult r;
    r.model_fingerprint = fingerprint(model);
    r.training_sites = site_names(dataset, train_sites);
    r.breakdown = score_site(site, ProtocolId::LooRf, predict_forest(model, site.rows)).breakdown;
    return r;
  });
}

std::vector<SiteResult> run_pft_rf(const Dataset& dataset, const ForestConfig& cfg, std::size_t k,
                                   const RunOptions& options) {
  cfg.validate();
  return run_folds(dataset, ProtocolId::PftSpecificRf, options, [&](std::size_t i) {
    const auto& site = dataset.site(i);
    const DonorSelection donors = select_donors(dataset, site.site_id, k);
    const FoldData fold = gather_sites(dataset, donors.donor_indices);
    audit(options, ProtocolId::PftSpecificRf, i, fold);
    SiteResult r;
    r.training_sites = donors.donor_site_ids;
    if (fold.x.rows() < static_cast<Eigen::Index>(cfg.min_samples_split))
      throw Error(ErrorCode::NoSameTypeDonors, "donor rows fewer than min_samples_split");
    ForestConfig fold_cfg = cfg;
    fold_cfg.seed = derive_seed(cfg.seed, i);
    const ForestModel model = fit_forest(fold.x, fold.y, fold_cfg);
    r.model_fingerprint = fingerprint(model);
    r.breakdown = score_site(site, ProtocolId::PftSpecificRf, predict_forest(model, site.rows)).breakdown;
    return r;
  });
}

std::vector<SiteResult> run_dann_protocol(const Dataset& dataset, const DannConfig& cfg,
                                          const RunOptions& options) {
  cfg.validate();
  return run_folds(dataset, ProtocolId::Dann, options, [&](std::size_t i) {
    const auto train_sites = all_but(dataset.size(), i);
    const FoldData fold = gather_sites(dataset, train_sites);
    audit(options, ProtocolId::Dann, i, fold);
    const auto& site = dataset.site(i);
    DannConfig fold_cfg = cfg;
    fold_cfg.seed = derive_seed(cfg.seed, i);
    // Only the held-out site's predictors enter training.
    const DannFit fit = train_dann(fold.x, fold.y, site.rows, fold_cfg);
    if (options.on_trace) options.on_trace(i, fit.trace);
    SiteResult r;
    r.model_fingerprint = fingerprint(fit.model);
    r.training_sites = site_names(dataset, train_sites);
    r.breakdown = score_site(site, ProtocolId::Dann, predict_dann(fit.model, site.rows)).breakdown;
    return r;
  });
}

}  // namespace etdann
