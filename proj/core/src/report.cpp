#include "etdann/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "etdann/error.hpp"

namespace etdann {

namespace {

constexpr std::array<ProtocolId, 3> kProtocols = {ProtocolId::LooRf, ProtocolId::PftSpecificRf, ProtocolId::Dann};
constexpr std::array<Comparison, 3> kComparisons = {Comparison::DannMinusLoo, Comparison::DannMinusPft,
                                                    Comparison::LooMinusPft};

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string num(const std::optional<double>& v) { return v ? num(*v) : std::string(); }

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (const char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

std::optional<double> parse_opt(const std::string& s) {
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw Error(ErrorCode::MalformedCsv, "bad number '" + s + "'");
  return v;
}

std::optional<ErrorCode> parse_error_code(std::string_view name) {
  for (int c = 0; c <= static_cast<int>(ErrorCode::Io); ++c)
    if (to_string(static_cast<ErrorCode>(c)) == name) return static_cast<ErrorCode>(c);
  return std::nullopt;
}

std::string status_of(const SiteResult& r) {
  if (r.ok()) return "OK";
  return "FAILED:" + std::string(r.failure ? to_string(*r.failure) : "Unknown");
}

const SiteResult* find_result(const RunReport& report, std::string_view site, ProtocolId p) {
  for (const auto& r : report.results)
    if (r.protocol == p && r.site_id == site) return &r;
  return nullptr;
}

std::ifstream open(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + p.string() + "'");
  return in;
}

}  // namespace

double quantile(std::vector<double> values, double p) {
  if (values.empty()) throw Error(ErrorCode::TooFewSamples, "quantile of empty set");
  if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::OutOfRange, "quantile level outside [0, 1]");
  std::sort(values.begin(), values.end());
  const double h = static_cast<double>(values.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

std::vector<SiteMeta> site_meta(const Dataset& dataset) {
  std::vector<SiteMeta> out;
  for (const auto& s : dataset.sites()) out.push_back({s.site_id, s.pft, s.mat, s.map});
  return out;
}

std::string_view to_string(Comparison c) {
  switch (c) {
    case Comparison::DannMinusLoo: return "dann_minus_loo";
    case Comparison::DannMinusPft: return "dann_minus_pft";
    case Comparison::LooMinusPft: return "loo_minus_pft";
  }
  return "unknown";
}

std::optional<double> kge_difference(const RunReport& report, std::string_view site_id, ProtocolId a,
                                     ProtocolId b) {
  const auto* ra = find_result(report, site_id, a);
  const auto* rb = find_result(report, site_id, b);
  if (!ra || !rb || !ra->ok() || !rb->ok()) return std::nullopt;
  return ra->breakdown->kge - rb->breakdown->kge;
}

RunReport summarize(std::vector<SiteResult> results, const std::vector<SiteMeta>& sites) {
  RunReport report;
  std::sort(results.begin(), results.end(), [](const SiteResult& a, const SiteResult& b) {
    return std::tie(a.protocol, a.site_id) < std::tie(b.protocol, b.site_id);
  });
  report.results = std::move(results);

  std::set<std::string> pfts;
  for (const auto& r : report.results) pfts.insert(r.pft);
  std::vector<std::string> groups(pfts.begin(), pfts.end());
  groups.emplace_back(kAllPfts);

  for (const auto& group : groups) {
    const bool all = group == kAllPfts;
    for (const auto protocol : kProtocols) {
      std::vector<double> kges;
      std::size_t failures = 0;
      bool present = false;
      for (const auto& r : report.results) {
        if (r.protocol != protocol || (!all && r.pft != group)) continue;
        present = true;
        if (r.ok()) {
          kges.push_back(r.breakdown->kge);
        } else {
          ++failures;
        }
      }
      if (!present) continue;
      ProtocolSummary s;
      s.pft = group;
      s.protocol = protocol;
      s.n = kges.size();
      s.failures = failures;
      if (!kges.empty()) {
        s.median = quantile(kges, 0.5);
        s.q25 = quantile(kges, 0.25);
        s.q75 = quantile(kges, 0.75);
      }
      report.summary.push_back(std::move(s));
    }
  }

  std::vector<SiteMeta> ordered = sites;
  std::sort(ordered.begin(), ordered.end(), [](const SiteMeta& a, const SiteMeta& b) { return a.site_id < b.site_id; });
  for (const auto& meta : ordered) {
    bool any = false;
    for (const auto& r : report.results) any = any || r.site_id == meta.site_id;
    if (!any) continue;
    PairwiseRow row;
    row.site_id = meta.site_id;
    row.pft = meta.pft;
    row.mat = meta.mat;
    row.map = meta.map;
    row.dann_minus_loo = kge_difference(report, meta.site_id, ProtocolId::Dann, ProtocolId::LooRf);
    row.dann_minus_pft = kge_difference(report, meta.site_id, ProtocolId::Dann, ProtocolId::PftSpecificRf);
    row.loo_minus_pft = kge_difference(report, meta.site_id, ProtocolId::LooRf, ProtocolId::PftSpecificRf);
    report.pairwise.push_back(std::move(row));
  }

  for (const auto& group : groups) {
    const bool all = group == kAllPfts;
    for (const auto c : kComparisons) {
      std::vector<double> diffs;
      for (const auto& row : report.pairwise) {
        if (!all && row.pft != group) continue;
        const auto& v = c == Comparison::DannMinusLoo   ? row.dann_minus_loo
                        : c == Comparison::DannMinusPft ? row.dann_minus_pft
                                                        : row.loo_minus_pft;
        if (v) diffs.push_back(*v);
      }
      if (diffs.empty()) continue;
      report.pairwise_summary.push_back(
          {group, c, quantile(diffs, 0.5), quantile(diffs, 0.25), quantile(diffs, 0.75), diffs.size()});
    }
  }
  return report;
}

RunReport summarize(std::vector<SiteResult> results, const Dataset& dataset) {
  return summarize(std::move(results), site_meta(dataset));
}

void write_site_results(const std::vector<SiteResult>& results, std::ostream& out) {
  out << "site_id,pft,protocol,kge,r,alpha,beta,status\n";
  for (const auto& r : results) {
    out << r.site_id << ',' << r.pft << ',' << to_string(r.protocol) << ',';
    if (r.ok()) {
      out << num(r.breakdown->kge) << ',' << num(r.breakdown->r) << ',' << num(r.breakdown->alpha) << ','
          << num(r.breakdown->beta);
    } else {
      out << ",,,";
    }
    out << ',' << status_of(r) << '\n';
  }
}

void write_summary(const RunReport& report, std::ostream& out) {
  out << "pft,protocol,median,q25,q75,n,failures\n";
  for (const auto& s : report.summary)
    out << s.pft << ',' << to_string(s.protocol) << ',' << num(s.median) << ',' << num(s.q25) << ','
        << num(s.q75) << ',' << s.n << ',' << s.failures << '\n';
}

void write_pairwise(const RunReport& report, std::ostream& out) {
  out << "site_id,dann_minus_loo,dann_minus_pft,loo_minus_pft,mat,map\n";
  for (const auto& p : report.pairwise)
    out << p.site_id << ',' << num(p.dann_minus_loo) << ',' << num(p.dann_minus_pft) << ','
        << num(p.loo_minus_pft) << ',' << num(p.mat) << ',' << num(p.map) << '\n';
}

void write_pairwise_summary(const RunReport& report, std::ostream& out) {
  out << "pft,comparison,median,q25,q75,n\n";
  for (const auto& s : report.pairwise_summary)
    out << s.pft << ',' << to_string(s.comparison) << ',' << num(s.median) << ',' << num(s.q25) << ','
        << num(s.q75) << ',' << s.n << '\n';
}

void write_report(const RunReport& report, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create '" + dir.string() + "': " + ec.message());
  auto emit = [&](const char* name, auto&& writer) {
    std::ofstream out(dir / name);
    if (!out) throw Error(ErrorCode::Io, "cannot write '" + (dir / name).string() + "'");
    writer(out);
    if (!out) throw Error(ErrorCode::Io, "write failed for '" + (dir / name).string() + "'");
  };
  emit("site_results.csv", [&](std::ostream& o) { write_site_results(report.results, o); });
  emit("summary.csv", [&](std::ostream& o) { write_summary(report, o); });
  emit("pairwise.csv", [&](std::ostream& o) { write_pairwise(report, o); });
  emit("pairwise_summary.csv", [&](std::ostream& o) { write_pairwise_summary(report, o); });
}

RunReport read_report(const std::filesystem::path& dir) {
  std::vector<SiteResult> results;
  std::map<std::string, SiteMeta> meta;
  {
    auto in = open(dir / "site_results.csv");
    std::string line;
    std::getline(in, line);
    if (split(line) != std::vector<std::string>{"site_id", "pft", "protocol", "kge", "r", "alpha", "beta", "status"})
      throw Error(ErrorCode::MalformedCsv, "unexpected site_results.csv header");
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto f = split(line);
      if (f.size() != 8) throw Error(ErrorCode::MalformedCsv, "site_results.csv row: " + line);
      SiteResult r;
      r.site_id = f[0];
      r.pft = f[1];
      const auto protocol = parse_protocol(f[2]);
      if (!protocol) throw Error(ErrorCode::MalformedCsv, "unknown protocol '" + f[2] + "'");
      r.protocol = *protocol;
      if (f[7] == "OK") {
        r.breakdown = KgeBreakdown{*parse_opt(f[3]), *parse_opt(f[4]), *parse_opt(f[5]), *parse_opt(f[6])};
      } else if (f[7].rfind("FAILED:", 0) == 0) {
        r.failure = parse_error_code(std::string_view(f[7]).substr(7));
      } else {
        throw Error(ErrorCode::MalformedCsv, "bad status '" + f[7] + "'");
      }
      meta[r.site_id].site_id = r.site_id;
      meta[r.site_id].pft = r.pft;
      results.push_back(std::move(r));
    }
  }
  if (std::filesystem::exists(dir / "pairwise.csv")) {
    auto in = open(dir / "pairwise.csv");
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto f = split(line);
      if (f.size() != 6) throw Error(ErrorCode::MalformedCsv, "pairwise.csv row: " + line);
      auto it = meta.find(f[0]);
      if (it == meta.end()) continue;
      it->second.mat = parse_opt(f[4]).value_or(0.0);
      it->second.map = parse_opt(f[5]).value_or(0.0);
    }
  }
  std::vector<SiteMeta> sites;
  for (auto& [id, m] : meta) sites.push_back(std::move(m));
  return summarize(std::move(results), sites);
}

std::string report_to_json(const RunReport& report) {
  using nlohmann::json;
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  json doc;
  auto& sr = doc["site_results"] = json::array();
  for (const auto& r : report.results) {
    json j{{"site_id", r.site_id}, {"pft", r.pft}, {"protocol", to_string(r.protocol)}, {"status", status_of(r)}};
    if (r.ok()) {
      j["kge"] = r.breakdown->kge;
      j["r"] = r.breakdown->r;
      j["alpha"] = r.breakdown->alpha;
      j["beta"] = r.breakdown->beta;
    }
    sr.push_back(std::move(j));
  }
  auto& summary = doc["summary"] = json::array();
  for (const auto& s : report.summary)
    summary.push_back({{"pft", s.pft},
                       {"protocol", to_string(s.protocol)},
                       {"median", opt(s.median)},
                       {"q25", opt(s.q25)},
                       {"q75", opt(s.q75)},
                       {"n", s.n},
                       {"failures", s.failures}});
  auto& pairwise = doc["pairwise"] = json::array();
  for (const auto& p : report.pairwise)
    pairwise.push_back({{"site_id", p.site_id},
                        {"pft", p.pft},
                        {"dann_minus_loo", opt(p.dann_minus_loo)},
                        {"dann_minus_pft", opt(p.dann_minus_pft)},
                        {"loo_minus_pft", opt(p.loo_minus_pft)},
                        {"mat", p.mat},
                        {"map", p.map}});
  auto& ps = doc["pairwise_summary"] = json::array();
  for (const auto& s : report.pairwise_summary)
    ps.push_back({{"pft", s.pft},
                  {"comparison", to_string(s.comparison)},
                  {"median", s.median},
                  {"q25", s.q25},
                  {"q75", s.q75},
                  {"n", s.n}});
  return doc.dump(2);
}

}  // namespace etdann
