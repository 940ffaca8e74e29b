#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "etdann/dataset.hpp"
#include "etdann/protocols.hpp"

namespace etdann {

// Quantile with linear interpolation between order statistics: position
// h = (n - 1) p, value x[floor h] + (h - floor h)(x[floor h + 1] - x[floor h]).
// Throws TooFewSamples on an empty input and OutOfRange for p outside [0, 1].
double quantile(std::vector<double> values, double p);

struct SiteMeta {
  std::string site_id;
  std::string pft;
  double mat = 0.0;
  double map = 0.0;
};

std::vector<SiteMeta> site_meta(const Dataset& dataset);

// Pseudo-PFT holding every site.
inline constexpr std::string_view kAllPfts = "ALL";

struct ProtocolSummary {
  std::string pft;
  ProtocolId protocol = ProtocolId::LooRf;
  std::optional<double> median, q25, q75;  // empty when every site failed
  std::size_t n = 0;                       // non-failed sites
  std::size_t failures = 0;
};

enum class Comparison { DannMinusLoo, DannMinusPft, LooMinusPft };
std::string_view to_string(Comparison c);

struct PairwiseRow {
  std::string site_id;
  std::string pft;
  std::optional<double> dann_minus_loo;
  std::optional<double> dann_minus_pft;
  std::optional<double> loo_minus_pft;
  double mat = 0.0;
  double map = 0.0;
};

struct PairwiseSummary {
  std::string pft;
  Comparison comparison = Comparison::DannMinusLoo;
  double median = 0.0, q25 = 0.0, q75 = 0.0;
  std::size_t n = 0;
};

struct RunReport {
  std::vector<SiteResult> results;  // sorted by (protocol, site_id)
  std::vector<ProtocolSummary> summary;
  std::vector<PairwiseRow> pairwise;
  std::vector<PairwiseSummary> pairwise_summary;
};

// Per-PFT (plus ALL) medians and quartiles per protocol over non-failed
// sites, per-site pairwise KGE differences with MAT/MAP attached, and
// per-PFT medians of those differences. PFTs without results are absent.
RunReport summarize(std::vector<SiteResult> results, const std::vector<SiteMeta>& sites);
RunReport summarize(std::vector<SiteResult> results, const Dataset& dataset);

// KGE(a) - KGE(b) for one site; empty if either is missing or failed.
std::optional<double> kge_difference(const RunReport& report, std::string_view site_id, ProtocolId a,
                                     ProtocolId b);

// Writes site_results.csv, summary.csv, pairwise.csv and
// pairwise_summary.csv into dir (created if needed). Numbers use 17
// significant digits; missing values are empty cells.
void write_report(const RunReport& report, const std::filesystem::path& dir);
void write_site_results(const std::vector<SiteResult>& results, std::ostream& out);
void write_summary(const RunReport& report, std::ostream& out);
void write_pairwise(const RunReport& report, std::ostream& out);
void write_pairwise_summary(const RunReport& report, std::ostream& out);

// Reloads a report directory written by write_report (site_results.csv and
// pairwise.csv) and recomputes the summaries.
RunReport read_report(const std::filesystem::path& dir);

std::string report_to_json(const RunReport& report);

}  // namespace etdann
