#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <string>

#include "etdann/dataset.hpp"
#include "etdann/error.hpp"
#include "etdann/standardizer.hpp"
#include "etdann/synthgen.hpp"
#include "fixtures.hpp"

namespace etdann {
namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an etdann::Error";
  return ErrorCode::Io;
}

std::string header(const PredictorSchema& schema) {
  std::string h = "site_id,pft,date,ET";
  for (const auto& n : schema.names()) h += "," + n;
  return h + "\n";
}

std::string row(const std::string& site, const std::string& pft, int day, double et, const std::vector<double>& x) {
  std::ostringstream out;
  out << site << "," << pft << ",2001-01-" << (day + 1) << "," << et;
  for (double v : x) out << "," << v;
  out << "\n";
  return out.str();
}

std::vector<double> predictors(const PredictorSchema& schema, double dynamic, double mat) {
  std::vector<double> x;
  for (const auto& n : schema.names()) {
    if (n == "MAT") x.push_back(mat);
    else if (PredictorSchema::is_static(n)) x.push_back(1.0);
    else x.push_back(dynamic);
  }
  return x;
}

TEST(Schema, CanonicalHasSeventeenPredictors) {
  const auto s = PredictorSchema::canonical();
  EXPECT_EQ(s.size(), 17u);
  EXPECT_EQ(s.index_of("TA"), 0u);
  EXPECT_TRUE(s.index_of("sand_frac").has_value());
  EXPECT_FALSE(s.index_of("ET").has_value());
}

TEST(Schema, RejectsDuplicatesAndEmpty) {
  EXPECT_EQ(code_of([] { PredictorSchema({"TA", "TA"}); }), ErrorCode::InvalidSchema);
  EXPECT_EQ(code_of([] { PredictorSchema({}); }), ErrorCode::InvalidSchema);
}

TEST(LoadCsv, TwoWellFormedSites) {
  const auto schema = PredictorSchema::canonical();
  std::string text = header(schema);
  for (const char* site : {"A", "B"})
    for (int d = 0; d < 365; ++d) text += row(site, "Forest", d % 28, 1.0 + d * 0.01, predictors(schema, d * 0.1, 3.0));
  std::istringstream in(text);
  const auto ds = read_csv(in, schema);
  ASSERT_EQ(ds.size(), 2u);
  EXPECT_EQ(ds.site(0).n_days(), 365u);
  EXPECT_EQ(ds.site(1).n_days(), 365u);
  EXPECT_EQ(ds.site(1).site_id, "B");
  EXPECT_DOUBLE_EQ(ds.site(0).mat, 3.0);
}

TEST(LoadCsv, HeaderWithoutTaIsMalformed) {
  const auto schema = PredictorSchema::canonical();
  std::string h = header(schema);
  h.replace(h.find(",TA,"), 4, ",XX,");
  std::istringstream in(h + row("A", "Forest", 0, 1.0, predictors(schema, 0.0, 1.0)));
  EXPECT_EQ(code_of([&] { read_csv(in, schema); }), ErrorCode::MalformedCsv);
}

TEST(LoadCsv, SiteWithOneValidRowIsRejectedWithDiagnostic) {
  const auto schema = PredictorSchema::canonical();
  std::string text = header(schema);
  for (const char* site : {"A", "B"})
    for (int d = 0; d < 5; ++d) text += row(site, "Forest", d, 1.0 + d, predictors(schema, d, 2.0));
  text += row("X", "Forest", 0, 1.0, predictors(schema, 0.0, 2.0));
  auto bad = predictors(schema, 0.0, 2.0);
  std::string broken = row("X", "Forest", 1, 1.0, bad);
  broken.replace(broken.find(",2001-01-2,1,") + 13, 1, "NA");
  text += broken;
  std::istringstream in(text);
  LoadReport report;
  const auto ds = read_csv(in, schema, &report);
  EXPECT_EQ(ds.size(), 2u);
  ASSERT_EQ(report.rejected_sites.size(), 1u);
  EXPECT_EQ(report.rejected_sites[0], "X");
  EXPECT_EQ(report.dropped_rows.at("X"), 1u);
  EXPECT_FALSE(report.warnings().empty());
}

TEST(LoadCsv, OnlyInvalidSitesGivesEmptyDataset) {
  const auto schema = PredictorSchema::canonical();
  std::istringstream in(header(schema) + row("X", "Forest", 0, 1.0, predictors(schema, 0.0, 2.0)));
  EXPECT_EQ(code_of([&] { read_csv(in, schema); }), ErrorCode::EmptyDataset);
}

TEST(LoadCsv, MissingValuesDropRows) {
  const auto schema = PredictorSchema::canonical();
  std::string text = header(schema);
  for (const char* site : {"A", "B"})
    for (int d = 0; d < 4; ++d) text += row(site, "Forest", d, 1.0 + d, predictors(schema, d, 2.0));
  std::string missing = row("B", "Forest", 9, 1.0, predictors(schema, 0.0, 2.0));
  missing.replace(missing.find(",1,") + 1, 1, "");
  text += missing;
  std::istringstream in(text);
  LoadReport report;
  const auto ds = read_csv(in, schema, &report);
  EXPECT_EQ(ds.site(1).n_days(), 4u);
  EXPECT_EQ(report.dropped_rows.at("B"), 1u);
}

TEST(LoadCsv, WrongFieldCountIsMalformed) {
  const auto schema = PredictorSchema::canonical();
  std::istringstream in(header(schema) + "A,Forest,2001-01-01,1.0,2.0\n");
  EXPECT_EQ(code_of([&] { read_csv(in, schema); }), ErrorCode::MalformedCsv);
}

TEST(LoadCsv, SplitSiteBlocksAreDuplicates) {
  const auto schema = PredictorSchema::canonical();
  std::string text = header(schema);
  for (const char* site : {"A", "B", "A"})
    for (int d = 0; d < 3; ++d) text += row(site, "Forest", d, 1.0 + d, predictors(schema, d, 2.0));
  std::istringstream in(text);
  EXPECT_EQ(code_of([&] { read_csv(in, schema); }), ErrorCode::DuplicateSite);
}

TEST(LoadCsv, MissingFileIsIo) {
  EXPECT_EQ(code_of([] { load_csv("/nonexistent/nowhere.csv", PredictorSchema::canonical()); }), ErrorCode::Io);
}

TEST(LoadCsv, WriteThenReadIsBitIdentical) {
  SynthConfig cfg;
  cfg.n_sites = 6;
  cfg.days_per_site = 40;
  cfg.seed = 11;
  const auto original = generate(cfg);
  std::stringstream buffer;
  write_csv(original, buffer);
  const auto reloaded = read_csv(buffer, original.schema());
  ASSERT_EQ(reloaded.size(), original.size());
  for (std::size_t s = 0; s < original.size(); ++s) {
    const auto& a = original.site(s);
    const auto& b = reloaded.site(s);
    EXPECT_EQ(a.site_id, b.site_id);
    EXPECT_EQ(a.pft, b.pft);
    EXPECT_EQ(a.mat, b.mat);
    EXPECT_EQ(a.map, b.map);
    EXPECT_EQ(a.hc, b.hc);
    EXPECT_TRUE(a.rows == b.rows);
    EXPECT_TRUE(a.target == b.target);
  }
}

TEST(DatasetInvariants, DuplicateIdsRejected) {
  const auto s = PredictorSchema::canonical();
  std::vector<SiteRecord> sites{fixture::random_site("A", "Forest", 1, 500, 10, 5, 1),
                                fixture::random_site("A", "Forest", 2, 600, 12, 5, 2)};
  EXPECT_EQ(code_of([&] { Dataset(s, sites); }), ErrorCode::DuplicateSite);
}

TEST(DatasetInvariants, SingleSiteRejected) {
  const auto s = PredictorSchema::canonical();
  std::vector<SiteRecord> sites{fixture::random_site("A", "Forest", 1, 500, 10, 5, 1)};
  EXPECT_EQ(code_of([&] { Dataset(s, sites); }), ErrorCode::EmptyDataset);
}

TEST(DatasetInvariants, StaticColumnMustBeConstant) {
  const auto s = PredictorSchema::canonical();
  auto a = fixture::random_site("A", "Forest", 1, 500, 10, 5, 1);
  a.rows(3, static_cast<Eigen::Index>(s.require("G1"))) += 1.0;
  std::vector<SiteRecord> sites{a, fixture::random_site("B", "Forest", 2, 600, 12, 5, 2)};
  EXPECT_EQ(code_of([&] { Dataset(s, sites); }), ErrorCode::MalformedCsv);
}

TEST(DatasetInvariants, ScalarsMatchColumns) {
  SynthConfig cfg;
  cfg.n_sites = 8;
  cfg.days_per_site = 10;
  cfg.seed = 5;
  const auto ds = generate(cfg);
  const auto mat = static_cast<Eigen::Index>(ds.schema().require("MAT"));
  const auto map = static_cast<Eigen::Index>(ds.schema().require("MAP"));
  const auto hc = static_cast<Eigen::Index>(ds.schema().require("Hc"));
  for (const auto& site : ds.sites())
    for (Eigen::Index i = 0; i < site.rows.rows(); ++i) {
      EXPECT_EQ(site.rows(i, mat), site.mat);
      EXPECT_EQ(site.rows(i, map), site.map);
      EXPECT_EQ(site.rows(i, hc), site.hc);
    }
}

TEST(GatherSites, TagsEveryRow) {
  const auto s = PredictorSchema::canonical();
  Dataset ds(s, {fixture::random_site("A", "Forest", 1, 500, 10, 3, 1),
                 fixture::random_site("B", "Forest", 2, 600, 12, 4, 2),
                 fixture::random_site("C", "Forest", 3, 700, 14, 5, 3)});
  const auto fold = gather_sites(ds, {2, 0});
  EXPECT_EQ(fold.x.rows(), 8);
  EXPECT_EQ(fold.y.size(), 8);
  EXPECT_EQ(fold.site_tags, (std::vector<std::size_t>{2, 2, 2, 2, 2, 0, 0, 0}));
  EXPECT_TRUE(fold.x.row(5) == ds.site(0).rows.row(0));
}

Matrix column(std::initializer_list<double> v) {
  Matrix m(static_cast<Eigen::Index>(v.size()), 1);
  Eigen::Index i = 0;
  for (double x : v) m(i++, 0) = x;
  return m;
}

TEST(Standardizer, TwoPointColumn) {
  const auto s = fit_standardizer(column({1, 3}));
  EXPECT_DOUBLE_EQ(s.mean()(0), 2.0);
  EXPECT_DOUBLE_EQ(s.stddev()(0), 1.0);
}

TEST(Standardizer, PopulationStd) {
  const auto s = fit_standardizer(column({0, 0, 3, 3}));
  EXPECT_DOUBLE_EQ(s.mean()(0), 1.5);
  EXPECT_DOUBLE_EQ(s.stddev()(0), 1.5);
}

TEST(Standardizer, ConstantColumnIsZeroVariance) {
  EXPECT_EQ(code_of([] { fit_standardizer(column({5, 5, 5})); }), ErrorCode::ZeroVariance);
}

TEST(Standardizer, TooFewRows) {
  EXPECT_EQ(code_of([] { fit_standardizer(column({5})); }), ErrorCode::TooFewSamples);
}

TEST(Standardizer, TransformByHand) {
  const auto s = fit_standardizer(column({1, 3}));
  EXPECT_DOUBLE_EQ(standardize(s, column({5}))(0, 0), 3.0);
}

TEST(Standardizer, MeanRowMapsToZero) {
  Matrix x(3, 2);
  x << 1, 10, 2, 20, 6, 60;
  const auto s = fit_standardizer(x);
  Matrix m = s.mean().transpose();
  EXPECT_NEAR(s.transform(m).cwiseAbs().maxCoeff(), 0.0, 1e-15);
}

TEST(Standardizer, ErrorsBeforeFitAndOnWidth) {
  Standardizer s;
  EXPECT_EQ(code_of([&] { s.transform(column({1, 2})); }), ErrorCode::NotFitted);
  const auto fitted = fit_standardizer(column({1, 3}));
  EXPECT_EQ(code_of([&] { fitted.transform(Matrix::Zero(2, 2)); }), ErrorCode::DimensionMismatch);
}

// Property sweep over random matrices: the fitting data standardizes to
// mean 0 / std 1, refitting is idempotent, and inverse_transform undoes
// transform.
TEST(Standardizer, RandomMatrixProperties) {
  Rng rng(123);
  for (int trial = 0; trial < 50; ++trial) {
    const auto n = static_cast<Eigen::Index>(2 + uniform_index(rng, 60));
    const auto p = static_cast<Eigen::Index>(1 + uniform_index(rng, 6));
    Matrix x(n, p);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < p; ++j) x(i, j) = uniform(rng, -1e3, 1e3) * (j + 1);
    const auto s = fit_standardizer(x);
    const Matrix z = s.transform(x);
    const auto refit = fit_standardizer(z);
    for (Eigen::Index j = 0; j < p; ++j) {
      EXPECT_NEAR(refit.mean()(j), 0.0, 1e-9);
      EXPECT_NEAR(refit.stddev()(j), 1.0, 1e-9);
    }
    const Matrix back = s.inverse_transform(z);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < p; ++j)
        EXPECT_NEAR(back(i, j), x(i, j), 1e-9 * std::max(1.0, std::abs(x(i, j))));
  }
}

}  // namespace
}  // namespace etdann
