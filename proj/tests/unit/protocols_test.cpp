#include <gtest/gtest.h>

#include <algorithm>
#include <mutex>
#include <set>
#include <string>
#include <vector>

#include "etdann/error.hpp"
#include "etdann/protocols.hpp"
#include "etdann/similarity.hpp"
#include "etdann/synthgen.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

namespace etdann {
namespace {

DannConfig quick_dann(std::uint64_t seed) {
  DannConfig cfg;
  cfg.feature_width = 16;
  cfg.regressor_widths = {8, 1};
  cfg.classifier_widths = {8, 1};
  cfg.epochs = 4;
  cfg.batch_size = 32;
  cfg.seed = seed;
  return cfg;
}

ForestConfig quick_forest(std::uint64_t seed, std::size_t trees = 5) {
  ForestConfig cfg;
  cfg.n_trees = trees;
  cfg.seed = seed;
  return cfg;
}

std::vector<std::string> ids(const std::vector<SiteResult>& rs) {
  std::vector<std::string> out;
  for (const auto& r : rs) out.push_back(r.site_id);
  return out;
}

TEST(ProtocolNames, RoundTrip) {
  for (auto p : {ProtocolId::LooRf, ProtocolId::PftSpecificRf, ProtocolId::Dann})
    EXPECT_EQ(parse_protocol(to_string(p)), p);
  EXPECT_EQ(parse_protocol("loo"), ProtocolId::LooRf);
  EXPECT_EQ(parse_protocol("pft"), ProtocolId::PftSpecificRf);
  EXPECT_EQ(parse_protocol("dann"), ProtocolId::Dann);
  EXPECT_FALSE(parse_protocol("svm").has_value());
}

TEST(Protocols, EverySiteExactlyOnceSorted) {
  SynthConfig sc;
  sc.n_sites = 9;
  sc.days_per_site = 60;
  sc.seed = 3;
  const auto ds = generate(sc);
  std::vector<std::string> expected;
  for (const auto& s : ds.sites()) expected.push_back(s.site_id);
  std::sort(expected.begin(), expected.end());
  EXPECT_EQ(ids(run_loo_rf(ds, quick_forest(1))), expected);
  EXPECT_EQ(ids(run_pft_rf(ds, quick_forest(1))), expected);
  EXPECT_EQ(ids(run_dann_protocol(ds, quick_dann(1))), expected);
}

TEST(LooRf, DuplicatedSiteIsPredictedAlmostPerfectly) {
  const auto base = generate(fixture::quiet_synth(2, 8, 365));
  auto copy = base.site(0);
  copy.site_id = "TWIN";
  const Dataset ds(base.schema(), {base.site(0), copy});
  ForestConfig cfg;
  cfg.seed = 4;
  for (const auto& r : run_loo_rf(ds, cfg)) {
    ASSERT_TRUE(r.ok()) << r.site_id;
    EXPECT_GT(*r.kge(), 0.99) << r.site_id;
  }
}

TEST(LooRf, ConstantPredictionsBecomeFailedResults) {
  const auto schema = PredictorSchema::canonical();
  auto a = fixture::random_site("A", "Forest", 1, 500, 10, 30, 1);
  auto b = fixture::random_site("B", "Forest", 2, 600, 12, 30, 2);
  auto c = fixture::random_site("C", "Forest", 3, 700, 14, 30, 3);
  a.target.setConstant(1.5);
  b.target.setConstant(1.5);
  const Dataset ds(schema, {a, b, c});
  const auto rs = run_loo_rf(ds, quick_forest(2));
  ASSERT_EQ(rs.size(), 3u);
  EXPECT_EQ(rs[0].failure, ErrorCode::DegenerateObservations);
  EXPECT_EQ(rs[1].failure, ErrorCode::DegenerateObservations);
  EXPECT_FALSE(rs[2].ok());
  EXPECT_EQ(rs[2].failure, ErrorCode::DegenerateSimulation);
}

std::vector<SiteRecord> pft_sites(const std::string& pft, std::size_t n, std::uint64_t seed) {
  std::vector<SiteRecord> out;
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i)
    out.push_back(fixture::random_site(pft.substr(0, 1) + std::to_string(10 + i), pft, uniform(rng, -5, 25),
                                       uniform(rng, 200, 2500), uniform(rng, 0.3, 40), 20, rng()));
  return out;
}

TEST(PftRf, DonorCountsAtBoundaries) {
  auto sites = pft_sites("Forest", 11, 1);
  for (auto& s : pft_sites("Wetland", 5, 2)) sites.push_back(s);
  const Dataset ds(PredictorSchema::canonical(), sites);
  for (const auto& r : run_pft_rf(ds, quick_forest(3))) {
    ASSERT_TRUE(r.ok());
    EXPECT_EQ(r.training_sites.size(), r.pft == "Forest" ? 10u : 4u) << r.site_id;
    EXPECT_EQ(std::count(r.training_sites.begin(), r.training_sites.end(), r.site_id), 0);
  }
}

TEST(PftRf, DonorsMatchBruteForce) {
  SynthConfig sc;
  sc.n_sites = 30;
  sc.days_per_site = 20;
  sc.seed = 12;
  const auto ds = generate(sc);
  std::vector<oracle::BruteSite> brute;
  for (const auto& s : ds.sites()) brute.push_back({s.site_id, s.pft, s.mat, s.map, s.hc});
  for (const auto& r : run_pft_rf(ds, quick_forest(1, 2), 4)) {
    if (!r.ok()) continue;
    const auto want = oracle::brute_force_donors(brute, r.site_id, 4);
    ASSERT_EQ(r.training_sites.size(), want.size()) << r.site_id;
    for (std::size_t i = 0; i < want.size(); ++i) EXPECT_EQ(r.training_sites[i], want[i].first);
  }
}

TEST(PftRf, LonePftSiteFails) {
  auto sites = pft_sites("Forest", 3, 1);
  sites.push_back(fixture::random_site("LONE", "Wetland", 1, 500, 3, 20, 77));
  const Dataset ds(PredictorSchema::canonical(), sites);
  const auto rs = run_pft_rf(ds, quick_forest(1));
  const auto lone = std::find_if(rs.begin(), rs.end(), [](const SiteResult& r) { return r.site_id == "LONE"; });
  ASSERT_NE(lone, rs.end());
  EXPECT_EQ(lone->failure, ErrorCode::NoSameTypeDonors);
  EXPECT_EQ(std::count_if(rs.begin(), rs.end(), [](const SiteResult& r) { return r.ok(); }), 3);
}

TEST(Dann, EasyRegimeScoresHigh) {
  const auto ds = generate(fixture::quiet_synth(5, 6, 365));
  DannConfig cfg;
  cfg.seed = 10;
  for (const auto& r : run_dann_protocol(ds, cfg)) {
    ASSERT_TRUE(r.ok()) << r.site_id;
    EXPECT_GT(*r.kge(), 0.9) << r.site_id;
  }
}

TEST(Dann, HeldOutLabelsNeverReachTraining) {
  SynthConfig sc;
  sc.n_sites = 4;
  sc.days_per_site = 80;
  sc.shift_strength = 1.0;
  sc.seed = 9;
  const auto ds = generate(sc);
  auto sites = ds.sites();
  for (Eigen::Index i = 0; i < sites[2].target.size(); ++i) sites[2].target(i) = 10.0 + std::sin(0.3 * i);
  const Dataset corrupted(ds.schema(), sites);
  const auto a = run_dann_protocol(ds, quick_dann(5));
  const auto b = run_dann_protocol(corrupted, quick_dann(5));
  const auto& ra = a[2];
  const auto& rb = b[2];
  ASSERT_EQ(ra.site_id, sites[2].site_id);
  EXPECT_EQ(ra.model_fingerprint, rb.model_fingerprint);
  ASSERT_TRUE(ra.ok() && rb.ok());
  EXPECT_NE(*ra.kge(), *rb.kge());
  // Any other fold trains on site 2's labels and must change.
  EXPECT_NE(a[0].model_fingerprint, b[0].model_fingerprint);
}

bool same_results(const std::vector<SiteResult>& a, const std::vector<SiteResult>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].site_id != b[i].site_id || a[i].failure != b[i].failure ||
        a[i].model_fingerprint != b[i].model_fingerprint || a[i].kge() != b[i].kge())
      return false;
  }
  return true;
}

TEST(Protocols, ResultsIndependentOfWorkerCount) {
  SynthConfig sc;
  sc.n_sites = 8;
  sc.days_per_site = 70;
  sc.shift_strength = 1.0;
  sc.seed = 21;
  const auto ds = generate(sc);
  RunOptions one, four;
  four.workers = 4;
  EXPECT_TRUE(same_results(run_loo_rf(ds, quick_forest(7), one), run_loo_rf(ds, quick_forest(7), four)));
  EXPECT_TRUE(same_results(run_pft_rf(ds, quick_forest(7), 10, one), run_pft_rf(ds, quick_forest(7), 10, four)));
  EXPECT_TRUE(same_results(run_dann_protocol(ds, quick_dann(7), one), run_dann_protocol(ds, quick_dann(7), four)));
  EXPECT_TRUE(same_results(run_dann_protocol(ds, quick_dann(7), one), run_dann_protocol(ds, quick_dann(7), one)));
}

TEST(Protocols, AuditSeesNoTestRows) {
  SynthConfig sc;
  sc.n_sites = 6;
  sc.days_per_site = 70;
  sc.seed = 2;
  const auto ds = generate(sc);
  std::mutex mu;
  std::size_t folds = 0, rows = 0;
  RunOptions opts;
  opts.workers = 2;
  opts.audit_folds = true;
  opts.on_fold = [&](const FoldAudit& f) {
    std::lock_guard lock(mu);
    ++folds;
    for (auto tag : *f.row_site_tags) {
      EXPECT_NE(tag, f.test_site);
      ++rows;
    }
  };
  run_loo_rf(ds, quick_forest(1, 1), opts);
  run_pft_rf(ds, quick_forest(1, 1), 10, opts);
  run_dann_protocol(ds, quick_dann(1), opts);
  EXPECT_GE(folds, 2 * ds.size());
  EXPECT_GT(rows, 0u);
}

TEST(ParallelFor, RethrowsAfterAllWorkersFinish) {
  std::vector<int> hit(50, 0);
  EXPECT_THROW(parallel_for(50, 3,
                            [&](std::size_t i) {
                              hit[i] = 1;
                              if (i == 7) throw Error(ErrorCode::Io, "boom");
                            }),
               Error);
  std::vector<int> all(20, 0);
  parallel_for(20, 4, [&](std::size_t i) { all[i] += 1; });
  EXPECT_EQ(std::count(all.begin(), all.end(), 1), 20);
}

}  // namespace
}  // namespace etdann
