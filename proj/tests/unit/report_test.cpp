#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "etdann/error.hpp"
#include "etdann/report.hpp"
#include "etdann/run_config.hpp"

namespace etdann {
namespace {

SiteResult ok_result(const std::string& id, const std::string& pft, ProtocolId p, double kge) {
  SiteResult r;
  r.site_id = id;
  r.pft = pft;
  r.protocol = p;
  r.breakdown = KgeBreakdown{kge, 0.9, 1.1, 0.95};
  return r;
}

SiteResult failed_result(const std::string& id, const std::string& pft, ProtocolId p, ErrorCode code) {
  SiteResult r;
  r.site_id = id;
  r.pft = pft;
  r.protocol = p;
  r.failure = code;
  return r;
}

std::vector<SiteMeta> metas() {
  return {{"A", "Forest", 1.0, 500.0}, {"B", "Forest", 2.0, 600.0}, {"C", "Wetland", 3.0, 700.0}};
}

const ProtocolSummary* find(const RunReport& r, const std::string& pft, ProtocolId p) {
  for (const auto& s : r.summary)
    if (s.pft == pft && s.protocol == p) return &s;
  return nullptr;
}

TEST(Quantile, LinearInterpolationRule) {
  const std::vector<double> v{0.8, 0.2, 0.5};
  EXPECT_NEAR(quantile(v, 0.5), 0.5, 1e-15);
  EXPECT_NEAR(quantile(v, 0.25), 0.35, 1e-15);
  EXPECT_NEAR(quantile(v, 0.75), 0.65, 1e-15);
  EXPECT_EQ(quantile(v, 0.0), 0.2);
  EXPECT_EQ(quantile(v, 1.0), 0.8);
  EXPECT_EQ(quantile({4.0}, 0.3), 4.0);
  EXPECT_NEAR(quantile({1, 2, 3, 4}, 0.5), 2.5, 1e-15);
  EXPECT_THROW(quantile({}, 0.5), Error);
  EXPECT_THROW(quantile({1.0}, 1.5), Error);
}

TEST(Summarize, MedianAndQuartilesOfThreeSites) {
  const auto r = summarize({ok_result("A", "Forest", ProtocolId::LooRf, 0.2),
                            ok_result("B", "Forest", ProtocolId::LooRf, 0.8),
                            ok_result("C", "Wetland", ProtocolId::LooRf, 0.5)},
                           metas());
  const auto* all = find(r, std::string(kAllPfts), ProtocolId::LooRf);
  ASSERT_NE(all, nullptr);
  EXPECT_NEAR(*all->median, 0.5, 1e-15);
  EXPECT_NEAR(*all->q25, 0.35, 1e-15);
  EXPECT_NEAR(*all->q75, 0.65, 1e-15);
  EXPECT_EQ(all->n, 3u);
  const auto* forest = find(r, "Forest", ProtocolId::LooRf);
  ASSERT_NE(forest, nullptr);
  EXPECT_NEAR(*forest->median, 0.5, 1e-15);
  EXPECT_EQ(find(r, "Forest", ProtocolId::Dann), nullptr);
}

TEST(Summarize, FailuresExcludedAndCounted) {
  const auto r = summarize({ok_result("A", "Forest", ProtocolId::Dann, 0.4),
                            failed_result("B", "Forest", ProtocolId::Dann, ErrorCode::DivergedTraining),
                            failed_result("C", "Wetland", ProtocolId::Dann, ErrorCode::DegenerateSimulation)},
                           metas());
  const auto* forest = find(r, "Forest", ProtocolId::Dann);
  EXPECT_EQ(forest->n, 1u);
  EXPECT_EQ(forest->failures, 1u);
  EXPECT_EQ(*forest->median, 0.4);
  const auto* wetland = find(r, "Wetland", ProtocolId::Dann);
  EXPECT_EQ(wetland->n, 0u);
  EXPECT_EQ(wetland->failures, 1u);
  EXPECT_FALSE(wetland->median.has_value());
}

TEST(Summarize, IdenticalProtocolsHaveZeroDifferences) {
  std::vector<SiteResult> rs;
  for (auto p : {ProtocolId::LooRf, ProtocolId::PftSpecificRf, ProtocolId::Dann}) {
    rs.push_back(ok_result("A", "Forest", p, 0.3));
    rs.push_back(ok_result("B", "Forest", p, -0.1));
  }
  const auto r = summarize(rs, metas());
  ASSERT_EQ(r.pairwise.size(), 2u);
  for (const auto& row : r.pairwise) {
    EXPECT_EQ(*row.dann_minus_loo, 0.0);
    EXPECT_EQ(*row.dann_minus_pft, 0.0);
    EXPECT_EQ(*row.loo_minus_pft, 0.0);
  }
}

TEST(Summarize, DifferencesAreAntisymmetricAndCarryClimate) {
  const auto r = summarize({ok_result("A", "Forest", ProtocolId::LooRf, 0.1),
                            ok_result("A", "Forest", ProtocolId::Dann, 0.6),
                            ok_result("A", "Forest", ProtocolId::PftSpecificRf, -0.3),
                            ok_result("C", "Wetland", ProtocolId::LooRf, 0.2),
                            failed_result("C", "Wetland", ProtocolId::Dann, ErrorCode::DivergedTraining)},
                           metas());
  for (auto [a, b] : {std::pair{ProtocolId::Dann, ProtocolId::LooRf}, std::pair{ProtocolId::LooRf, ProtocolId::PftSpecificRf},
                      std::pair{ProtocolId::Dann, ProtocolId::PftSpecificRf}}) {
    const auto ab = kge_difference(r, "A", a, b);
    const auto ba = kge_difference(r, "A", b, a);
    ASSERT_TRUE(ab && ba);
    EXPECT_EQ(*ab, -*ba);
  }
  ASSERT_EQ(r.pairwise.size(), 2u);
  EXPECT_NEAR(*r.pairwise[0].dann_minus_loo, 0.5, 1e-15);
  EXPECT_NEAR(*r.pairwise[0].loo_minus_pft, 0.4, 1e-15);
  EXPECT_EQ(r.pairwise[0].mat, 1.0);
  EXPECT_EQ(r.pairwise[0].map, 500.0);
  EXPECT_FALSE(r.pairwise[1].dann_minus_loo.has_value());
  EXPECT_FALSE(kge_difference(r, "B", ProtocolId::Dann, ProtocolId::LooRf).has_value());
}

TEST(Summarize, ResultsSortedByProtocolThenSite) {
  const auto r = summarize({ok_result("B", "Forest", ProtocolId::Dann, 0.1), ok_result("A", "Forest", ProtocolId::Dann, 0.2),
                            ok_result("B", "Forest", ProtocolId::LooRf, 0.3)},
                           metas());
  EXPECT_EQ(r.results[0].protocol, ProtocolId::LooRf);
  EXPECT_EQ(r.results[1].site_id, "A");
  EXPECT_EQ(r.results[2].site_id, "B");
}

TEST(ReportFiles, WriteThenReadKeepsSummaries) {
  const auto dir = std::filesystem::temp_directory_path() / "etdann_report_test";
  std::filesystem::remove_all(dir);
  const auto r = summarize({ok_result("A", "Forest", ProtocolId::LooRf, 0.123456789012345),
                            ok_result("A", "Forest", ProtocolId::Dann, 0.5),
                            ok_result("B", "Forest", ProtocolId::LooRf, -0.25),
                            failed_result("B", "Forest", ProtocolId::Dann, ErrorCode::DegenerateSimulation)},
                           metas());
  write_report(r, dir);
  for (const char* f : {"site_results.csv", "summary.csv", "pairwise.csv", "pairwise_summary.csv"})
    EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
  std::ifstream in(dir / "site_results.csv");
  std::string header, line;
  std::getline(in, header);
  EXPECT_EQ(header, "site_id,pft,protocol,kge,r,alpha,beta,status");
  bool saw_failed = false;
  while (std::getline(in, line)) saw_failed = saw_failed || line.find("FAILED:DegenerateSimulation") != std::string::npos;
  EXPECT_TRUE(saw_failed);

  const auto back = read_report(dir);
  ASSERT_EQ(back.results.size(), r.results.size());
  for (std::size_t i = 0; i < r.results.size(); ++i) {
    EXPECT_EQ(back.results[i].kge(), r.results[i].kge());
    EXPECT_EQ(back.results[i].failure, r.results[i].failure);
  }
  ASSERT_EQ(back.pairwise.size(), r.pairwise.size());
  EXPECT_EQ(back.pairwise[0].mat, 1.0);
  std::ostringstream a, b;
  write_summary(r, a);
  write_summary(back, b);
  EXPECT_EQ(a.str(), b.str());
  std::filesystem::remove_all(dir);
}

TEST(ReportFiles, SummaryHeaderAndJson) {
  const auto r = summarize({ok_result("A", "Forest", ProtocolId::LooRf, 0.2)}, metas());
  std::ostringstream s, p;
  write_summary(r, s);
  write_pairwise(r, p);
  EXPECT_EQ(s.str().substr(0, s.str().find('\n')), "pft,protocol,median,q25,q75,n,failures");
  EXPECT_EQ(p.str().substr(0, p.str().find('\n')), "site_id,dann_minus_loo,dann_minus_pft,loo_minus_pft,mat,map");
  const auto doc = nlohmann::json::parse(report_to_json(r));
  EXPECT_EQ(doc["site_results"][0]["protocol"], "LOO_RF");
  EXPECT_EQ(doc["site_results"][0]["kge"], 0.2);
  EXPECT_TRUE(doc["pairwise"][0]["dann_minus_loo"].is_null());
}

TEST(ReportFiles, MissingDirectoryIsIo) {
  try {
    read_report("/nonexistent/report");
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Io);
  }
}

TEST(RunConfigParsing, DefaultsAndOverrides) {
  const auto d = parse_run_config("{}");
  EXPECT_EQ(d.loo_forest.n_trees, 50u);
  EXPECT_EQ(d.pft_forest.n_trees, 20u);
  EXPECT_EQ(d.dann.epochs, 50u);
  EXPECT_EQ(d.similarity_k, 10u);
  const auto c = parse_run_config(R"({"seed": 9,
      "forest": {"n_trees": 12, "pft_n_trees": 4, "max_depth": 6, "max_features": 3, "bootstrap": false},
      "dann": {"feature_width": 8, "regressor_widths": [4, 1], "epochs": 3, "lr": 0.01,
               "domain_head": false, "fixed_lambda": 0.5},
      "similarity": {"k": 3}})");
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.loo_forest.n_trees, 12u);
  EXPECT_EQ(c.pft_forest.n_trees, 4u);
  EXPECT_EQ(c.pft_forest.max_depth, 6u);
  EXPECT_EQ(c.loo_forest.max_features, 3u);
  EXPECT_FALSE(c.loo_forest.bootstrap);
  EXPECT_EQ(c.dann.feature_width, 8u);
  EXPECT_EQ(c.dann.regressor_widths, (std::vector<std::size_t>{4, 1}));
  EXPECT_DOUBLE_EQ(c.dann.lr, 0.01);
  EXPECT_FALSE(c.dann.domain_head);
  EXPECT_EQ(c.dann.fixed_lambda, 0.5);
  EXPECT_EQ(c.similarity_k, 3u);
  const auto seeded = c.seeded();
  EXPECT_NE(seeded.loo_forest.seed, seeded.dann.seed);
  EXPECT_EQ(seeded.loo_forest.seed, c.seeded().loo_forest.seed);
}

TEST(RunConfigParsing, RejectsUnknownKeysAndBadTypes) {
  for (const char* text : {R"({"forrest": {}})", R"({"forest": {"trees": 3}})", R"({"dann": {"epochs": "ten"}})",
                           R"({"dann": {"epochs": 0}})", R"({"similarity": {"k": 0}})", R"([1, 2])", "{not json",
                           R"({"forest": {"max_features": "sqrt"}})", R"({"seed": -1})"}) {
    try {
      parse_run_config(text);
      ADD_FAILURE() << text;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::InvalidConfig) << text;
    }
  }
}

}  // namespace
}  // namespace etdann
