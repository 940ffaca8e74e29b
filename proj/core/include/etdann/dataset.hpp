#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "etdann/matrix.hpp"

namespace etdann {

// Ordered, duplicate-free list of predictor column names.
class PredictorSchema {
 public:
  explicit PredictorSchema(std::vector<std::string> names);

  // The 17 predictors of the reference study, in canonical order.
  static PredictorSchema canonical();

  const std::vector<std::string>& names() const noexcept { return names_; }
  std::size_t size() const noexcept { return names_.size(); }
  std::optional<std::size_t> index_of(std::string_view name) const;
  std::size_t require(std::string_view name) const;

  // Multi-year / site-level predictors that must be constant within a site.
  static bool is_static(std::string_view name);

  bool operator==(const PredictorSchema&) const = default;

 private:
  std::vector<std::string> names_;
};

struct SiteRecord {
  std::string site_id;
  std::string pft;
  double mat = 0.0;  // degC
  double map = 0.0;  // mm / yr
  double hc = 0.0;   // m
  Matrix rows;       // n_days x n_predictors
  Vector target;     // daily ET

  std::size_t n_days() const noexcept { return static_cast<std::size_t>(rows.rows()); }
};

class Dataset {
 public:
  // Validates every invariant: unique ids, >= 2 sites, >= 2 days per site,
  // finite values, schema width, constant static columns and MAT/MAP/Hc
  // scalars matching their columns.
  Dataset(PredictorSchema schema, std::vector<SiteRecord> sites);

  const PredictorSchema& schema() const noexcept { return schema_; }
  const std::vector<SiteRecord>& sites() const noexcept { return sites_; }
  const SiteRecord& site(std::size_t i) const { return sites_.at(i); }
  std::size_t size() const noexcept { return sites_.size(); }
  std::optional<std::size_t> find(std::string_view site_id) const;
  std::size_t total_rows() const;

 private:
  PredictorSchema schema_;
  std::vector<SiteRecord> sites_;
};

// Builds a SiteRecord whose MAT/MAP/Hc scalars are read from the rows.
SiteRecord make_site(const PredictorSchema& schema, std::string site_id, std::string pft,
                     Matrix rows, Vector target);

struct LoadReport {
  std::map<std::string, std::size_t> dropped_rows;  // per site, rows with missing fields
  std::vector<std::string> rejected_sites;          // fewer than 2 valid rows
  std::vector<std::string> ignored_columns;
  std::vector<std::string> warnings() const;
};

// CSV contract: header with site_id, pft, date, ET and every schema predictor
// (any order, extra columns ignored). A site's rows must be contiguous.
Dataset load_csv(const std::filesystem::path& path, const PredictorSchema& schema,
                 LoadReport* report = nullptr);
Dataset read_csv(std::istream& in, const PredictorSchema& schema, LoadReport* report = nullptr);

// Values are printed with 17 significant digits so a reload is bit-exact.
// The date column is synthesized as consecutive days from 2000-01-01.
void write_csv(const Dataset& dataset, const std::filesystem::path& path);
void write_csv(const Dataset& dataset, std::ostream& out);

// Stacked rows of the given sites, with a parallel per-row site index tag.
struct FoldData {
  Matrix x;
  Vector y;
  std::vector<std::size_t> site_tags;
};
FoldData gather_sites(const Dataset& dataset, const std::vector<std::size_t>& site_indices);

}  // namespace etdann
