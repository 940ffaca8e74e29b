#include "etdann/dataset.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "etdann/error.hpp"

namespace etdann {

namespace {

constexpr std::array<std::string_view, 17> kCanonical = {
    "TA",     "TA_range", "VPD",  "WS",  "RSDN", "LAI", "SSM", "GSmax", "G1",
    "GPPsat", "Nmass",    "LAImax", "MAT", "MAP", "CSWI", "Hc", "sand_frac"};

constexpr std::array<std::string_view, 10> kStatic = {
    "GSmax", "G1", "GPPsat", "Nmass", "LAImax", "MAT", "MAP", "CSWI", "Hc", "sand_frac"};

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          current.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        current.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  if (quoted) throw Error(ErrorCode::MalformedCsv, "unterminated quoted field");
  fields.push_back(std::move(current));
  return fields;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::optional<double> parse_number(std::string_view text) {
  text = trim(text);
  if (text.empty()) return std::nullopt;
  if (text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
  if (!std::isfinite(value)) return std::nullopt;
  return value;
}

std::string format_double(double v) {
  std::array<char, 40> buf{};
  const int n = std::snprintf(buf.data(), buf.size(), "%.17g", v);
  return std::string(buf.data(), static_cast<std::size_t>(n));
}

std::string iso_date(std::size_t day_offset) {
  using namespace std::chrono;
  const year_month_day ymd{sys_days{year{2000} / January / 1} + days{static_cast<int>(day_offset)}};
  std::array<char, 16> buf{};
  std::snprintf(buf.data(), buf.size(), "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf.data();
}

struct PendingSite {
  std::string site_id;
  std::string pft;
  std::vector<std::vector<double>> rows;
  std::vector<double> target;
  std::size_t dropped = 0;
};

}  // namespace

PredictorSchema::PredictorSchema(std::vector<std::string> names) : names_(std::move(names)) {
  if (names_.empty()) throw Error(ErrorCode::InvalidSchema, "schema needs at least one predictor");
  std::unordered_set<std::string> seen;
  for (const auto& name : names_) {
    if (name.empty()) throw Error(ErrorCode::InvalidSchema, "empty predictor name");
    if (!seen.insert(name).second)
      throw Error(ErrorCode::InvalidSchema, "duplicate predictor '" + name + "'");
  }
}

PredictorSchema PredictorSchema::canonical() {
  return PredictorSchema(std::vector<std::string>(kCanonical.begin(), kCanonical.end()));
}

std::optional<std::size_t> PredictorSchema::index_of(std::string_view name) const {
  const auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - names_.begin());
}

std::size_t PredictorSchema::require(std::string_view name) const {
  const auto idx = index_of(name);
  if (!idx) throw Error(ErrorCode::InvalidSchema, "schema lacks predictor '" + std::string(name) + "'");
  return *idx;
}

bool PredictorSchema::is_static(std::string_view name) {
  return std::find(kStatic.begin(), kStatic.end(), name) != kStatic.end();
}

SiteRecord make_site(const PredictorSchema& schema, std::string site_id, std::string pft,
                     Matrix rows, Vector target) {
  SiteRecord site;
  site.site_id = std::move(site_id);
  site.pft = std::move(pft);
  if (rows.rows() > 0) {
    site.mat = rows(0, static_cast<Eigen::Index>(schema.require("MAT")));
    site.map = rows(0, static_cast<Eigen::Index>(schema.require("MAP")));
    site.hc = rows(0, static_cast<Eigen::Index>(schema.require("Hc")));
  }
  site.rows = std::move(rows);
  site.target = std::move(target);
  return site;
}

Dataset::Dataset(PredictorSchema schema, std::vector<SiteRecord> sites)
    : schema_(std::move(schema)), sites_(std::move(sites)) {
  if (sites_.size() < 2)
    throw Error(ErrorCode::EmptyDataset,
                "a dataset needs at least 2 sites, got " + std::to_string(sites_.size()));
  const auto mat_col = static_cast<Eigen::Index>(schema_.require("MAT"));
  const auto map_col = static_cast<Eigen::Index>(schema_.require("MAP"));
  const auto hc_col = static_cast<Eigen::Index>(schema_.require("Hc"));
  std::vector<Eigen::Index> static_cols;
  for (std::size_t j = 0; j < schema_.size(); ++j)
    if (PredictorSchema::is_static(schema_.names()[j])) static_cols.push_back(static_cast<Eigen::Index>(j));

  std::unordered_set<std::string> ids;
  for (const auto& site : sites_) {
    const std::string where = "site '" + site.site_id + "'";
    if (site.site_id.empty()) throw Error(ErrorCode::MalformedCsv, "empty site id");
    if (!ids.insert(site.site_id).second) throw Error(ErrorCode::DuplicateSite, where);
    if (site.rows.cols() != static_cast<Eigen::Index>(schema_.size()))
      throw Error(ErrorCode::DimensionMismatch, where + ": predictor columns do not match schema");
    if (site.rows.rows() != site.target.size())
      throw Error(ErrorCode::LengthMismatch, where + ": rows and target lengths differ");
    if (site.rows.rows() < 2) throw Error(ErrorCode::TooFewSamples, where + ": needs >= 2 days");
    if (!site.rows.allFinite() || !site.target.allFinite())
      throw Error(ErrorCode::NonFiniteInput, where);
    for (const auto col : static_cols) {
      const double first = site.rows(0, col);
      if ((site.rows.col(col).array() != first).any())
        throw Error(ErrorCode::MalformedCsv,
                    where + ": static predictor '" + schema_.names()[static_cast<std::size_t>(col)] +
                        "' varies within the site");
    }
    if (site.rows(0, mat_col) != site.mat || site.rows(0, map_col) != site.map ||
        site.rows(0, hc_col) != site.hc)
      throw Error(ErrorCode::MalformedCsv, where + ": MAT/MAP/Hc scalars disagree with rows");
  }
}

std::optional<std::size_t> Dataset::find(std::string_view site_id) const {
  for (std::size_t i = 0; i < sites_.size(); ++i)
    if (sites_[i].site_id == site_id) return i;
  return std::nullopt;
}

std::size_t Dataset::total_rows() const {
  std::size_t n = 0;
  for (const auto& s : sites_) n += s.n_days();
  return n;
}

std::vector<std::string> LoadReport::warnings() const {
  std::vector<std::string> out;
  for (const auto& col : ignored_columns) out.push_back("ignoring unknown column '" + col + "'");
  for (const auto& [site, n] : dropped_rows)
    if (n > 0) out.push_back("site '" + site + "': dropped " + std::to_string(n) + " incomplete rows");
  for (const auto& site : rejected_sites)
    out.push_back("site '" + site + "' rejected: fewer than 2 valid rows");
  return out;
}

Dataset read_csv(std::istream& in, const PredictorSchema& schema, LoadReport* report) {
  LoadReport local;
  LoadReport& rep = report ? *report : local;
  rep = LoadReport{};

  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::MalformedCsv, "missing header row");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  const auto header = split_csv_line(line);

  std::unordered_map<std::string, std::size_t> column_of;
  for (std::size_t i = 0; i < header.size(); ++i) {
    const std::string name(trim(header[i]));
    if (!column_of.emplace(name, i).second)
      throw Error(ErrorCode::MalformedCsv, "duplicate header column '" + name + "'");
  }
  auto required = [&](const std::string& name) {
    const auto it = column_of.find(name);
    if (it == column_of.end()) throw Error(ErrorCode::MalformedCsv, "header lacks column '" + name + "'");
    return it->second;
  };
  const std::size_t site_col = required("site_id");
  const std::size_t pft_col = required("pft");
  required("date");
  const std::size_t et_col = required("ET");
  std::vector<std::size_t> predictor_cols;
  for (const auto& name : schema.names()) predictor_cols.push_back(required(name));

  std::set<std::string> known{"site_id", "pft", "date", "ET"};
  known.insert(schema.names().begin(), schema.names().end());
  for (const auto& h : header) {
    const std::string name(trim(h));
    if (!known.count(name)) rep.ignored_columns.push_back(name);
  }

  std::vector<PendingSite> pending;
  std::unordered_set<std::string> closed;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size())
      throw Error(ErrorCode::MalformedCsv, "line " + std::to_string(line_no) + ": expected " +
                                               std::to_string(header.size()) + " fields, got " +
                                               std::to_string(fields.size()));
    const std::string site_id(trim(fields[site_col]));
    const std::string pft(trim(fields[pft_col]));
    if (site_id.empty())
      throw Error(ErrorCode::MalformedCsv, "line " + std::to_string(line_no) + ": empty site_id");

    if (pending.empty() || pending.back().site_id != site_id) {
      if (!pending.empty()) closed.insert(pending.back().site_id);
      if (closed.count(site_id))
        throw Error(ErrorCode::DuplicateSite,
                    "site '" + site_id + "' appears in non-contiguous blocks (line " +
                        std::to_string(line_no) + ")");
      pending.push_back(PendingSite{site_id, pft, {}, {}, 0});
    }
    PendingSite& site = pending.back();
    if (site.pft.empty()) site.pft = pft;
    if (!pft.empty() && pft != site.pft)
      throw Error(ErrorCode::MalformedCsv, "site '" + site_id + "' has inconsistent pft values");

    std::vector<double> values;
    values.reserve(predictor_cols.size());
    bool complete = true;
    const auto et = parse_number(fields[et_col]);
    if (!et) complete = false;
    for (const auto col : predictor_cols) {
      const auto v = parse_number(fields[col]);
      if (!v) {
        complete = false;
        break;
      }
      values.push_back(*v);
    }
    if (!complete) {
      ++site.dropped;
      continue;
    }
    site.rows.push_back(std::move(values));
    site.target.push_back(*et);
  }

  std::vector<SiteRecord> sites;
  for (auto& p : pending) {
    rep.dropped_rows[p.site_id] = p.dropped;
    if (p.rows.size() < 2) {
      rep.rejected_sites.push_back(p.site_id);
      continue;
    }
    if (p.pft.empty()) throw Error(ErrorCode::MalformedCsv, "site '" + p.site_id + "' has no pft");
    Matrix rows(static_cast<Eigen::Index>(p.rows.size()), static_cast<Eigen::Index>(schema.size()));
    for (std::size_t i = 0; i < p.rows.size(); ++i)
      for (std::size_t j = 0; j < schema.size(); ++j)
        rows(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = p.rows[i][j];
    Vector target = Eigen::Map<const Vector>(p.target.data(), static_cast<Eigen::Index>(p.target.size()));
    sites.push_back(make_site(schema, p.site_id, p.pft, std::move(rows), std::move(target)));
  }
  if (sites.empty()) {
    std::string msg = "no valid sites";
    if (!rep.rejected_sites.empty()) {
      msg += " (rejected:";
      for (const auto& s : rep.rejected_sites) msg += " " + s;
      msg += ")";
    }
    throw Error(ErrorCode::EmptyDataset, msg);
  }
  return Dataset(schema, std::move(sites));
}

Dataset load_csv(const std::filesystem::path& path, const PredictorSchema& schema, LoadReport* report) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "'");
  return read_csv(in, schema, report);
}

void write_csv(const Dataset& dataset, std::ostream& out) {
  out << "site_id,pft,date,ET";
  for (const auto& name : dataset.schema().names()) out << ',' << name;
  out << '\n';
  for (const auto& site : dataset.sites()) {
    for (Eigen::Index i = 0; i < site.rows.rows(); ++i) {
      out << site.site_id << ',' << site.pft << ',' << iso_date(static_cast<std::size_t>(i)) << ','
          << format_double(site.target(i));
      for (Eigen::Index j = 0; j < site.rows.cols(); ++j) out << ',' << format_double(site.rows(i, j));
      out << '\n';
    }
  }
}

void write_csv(const Dataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path.string() + "'");
  write_csv(dataset, out);
  if (!out) throw Error(ErrorCode::Io, "write failed for '" + path.string() + "'");
}

FoldData gather_sites(const Dataset& dataset, const std::vector<std::size_t>& site_indices) {
  Eigen::Index n = 0;
  for (const auto i : site_indices) n += static_cast<Eigen::Index>(dataset.site(i).n_days());
  FoldData fold;
  fold.x.resize(n, static_cast<Eigen::Index>(dataset.schema().size()));
  fold.y.resize(n);
  fold.site_tags.reserve(static_cast<std::size_t>(n));
  Eigen::Index offset = 0;
  for (const auto i : site_indices) {
    const auto& site = dataset.site(i);
    const auto rows = site.rows.rows();
    fold.x.middleRows(offset, rows) = site.rows;
    fold.y.segment(offset, rows) = site.target;
    fold.site_tags.insert(fold.site_tags.end(), static_cast<std::size_t>(rows), i);
    offset += rows;
  }
  return fold;
}

}  // namespace etdann
