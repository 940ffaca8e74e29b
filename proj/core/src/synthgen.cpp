#include "etdann/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>
#include <string>

#include "etdann/error.hpp"
#include "etdann/rng.hpp"

namespace etdann {

namespace {

constexpr double kResponseCorrelation = 0.8;

// Standardizes a Uniform(lo, hi) draw with its population moments.
double z_uniform(double v, double lo, double hi) {
  return (v - 0.5 * (lo + hi)) / ((hi - lo) / std::sqrt(12.0));
}

std::string site_name(std::size_t i, std::size_t n) {
  const int width = n <= 1000 ? 3 : static_cast<int>(std::to_string(n - 1).size());
  char buf[32];
  std::snprintf(buf, sizeof buf, "S%0*zu", width, i);
  return buf;
}

struct Columns {
  std::size_t ta, ta_range, vpd, ws, rsdn, lai, ssm, gsmax, g1, gppsat, nmass, laimax, mat, map, cswi, hc, sand;
  explicit Columns(const PredictorSchema& s)
      : ta(s.require("TA")), ta_range(s.require("TA_range")), vpd(s.require("VPD")), ws(s.require("WS")),
        rsdn(s.require("RSDN")), lai(s.require("LAI")), ssm(s.require("SSM")), gsmax(s.require("GSmax")),
        g1(s.require("G1")), gppsat(s.require("GPPsat")), nmass(s.require("Nmass")),
        laimax(s.require("LAImax")), mat(s.require("MAT")), map(s.require("MAP")), cswi(s.require("CSWI")),
        hc(s.require("Hc")), sand(s.require("sand_frac")) {}
};

}  // namespace

void SynthConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::InvalidConfig, msg); };
  if (n_sites < 2) fail("n_sites must be >= 2");
  if (days_per_site < 2) fail("days_per_site must be >= 2");
  if (!(shift_strength >= 0.0) || !std::isfinite(shift_strength)) fail("shift_strength must be >= 0");
  if (!(noise_sd >= 0.0) || !std::isfinite(noise_sd)) fail("noise_sd must be >= 0");
  if (pft_mix.empty()) fail("pft_mix is empty");
  double total = 0.0;
  for (const auto& [name, p] : pft_mix) {
    if (name.empty()) fail("pft_mix has an empty PFT name");
    if (!(p >= 0.0)) fail("pft_mix proportions must be >= 0");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) fail("pft_mix proportions must sum to 1");
}

double base_response(double ta, double vpd, double rsdn, double lai) {
  const double light = rsdn * lai;
  return light / (light + 300.0) * (std::max(0.0, ta) / 25.0) * (1.0 / (1.0 + vpd));
}

std::vector<std::pair<std::string, std::size_t>> apportion(const SynthConfig& cfg) {
  cfg.validate();
  const double n = static_cast<double>(cfg.n_sites);
  std::vector<std::pair<std::string, std::size_t>> counts;
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < cfg.pft_mix.size(); ++i) {
    const double quota = n * cfg.pft_mix[i].second;
    const auto whole = static_cast<std::size_t>(std::floor(quota + 1e-9));
    counts.emplace_back(cfg.pft_mix[i].first, whole);
    remainders.emplace_back(quota - static_cast<double>(whole), i);
    assigned += whole;
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t k = 0; assigned < cfg.n_sites; ++k, ++assigned) ++counts[remainders[k % remainders.size()].second].second;
  return counts;
}

SynthData generate_with_truth(const SynthConfig& cfg) {
  cfg.validate();
  const PredictorSchema schema = PredictorSchema::canonical();
  const Columns col(schema);
  const auto width = static_cast<Eigen::Index>(schema.size());
  const auto days = static_cast<Eigen::Index>(cfg.days_per_site);

  std::vector<std::string> labels;
  for (const auto& [name, count] : apportion(cfg)) labels.insert(labels.end(), count, name);
  Rng label_rng(derive_seed(cfg.seed, 0xABCDEFULL));
  for (std::size_t i = labels.size(); i > 1; --i) std::swap(labels[i - 1], labels[uniform_index(label_rng, i)]);

  std::vector<SiteRecord> sites;
  std::vector<SiteResponse> responses;
  for (std::size_t s = 0; s < cfg.n_sites; ++s) {
    Rng rng(derive_seed(cfg.seed, s));
    const double mat = uniform(rng, -5.0, 25.0);
    const double map = uniform(rng, 200.0, 2500.0);
    const double hc = uniform(rng, 0.3, 40.0);
    const double z_mat = z_uniform(mat, -5.0, 25.0);
    const double z_map = z_uniform(map, 200.0, 2500.0);
    const double z_hc = z_uniform(hc, 0.3, 40.0);
    const double c1 = (z_mat + z_map + z_hc) / std::sqrt(3.0);
    const double c2 = (z_map - z_mat) / std::sqrt(2.0);
    const double rest = std::sqrt(1.0 - kResponseCorrelation * kResponseCorrelation);
    const double u1 = kResponseCorrelation * c1 + rest * standard_normal(rng);
    const double u2 = kResponseCorrelation * c2 + rest * standard_normal(rng);
    const double a = 1.0 + cfg.shift_strength * u1;
    const double b = cfg.shift_strength * u2;

    const double gsmax = uniform(rng, 2.0, 25.0);
    const double g1 = uniform(rng, 1.0, 8.0);
    const double gppsat = uniform(rng, 5.0, 40.0);
    const double nmass = uniform(rng, 0.8, 3.5);
    const double laimax = uniform(rng, 1.0, 7.0);
    const double cswi = uniform(rng, -30.0, 5.0);
    const double sand = uniform(rng, 0.05, 0.9);

    Matrix rows(days, width);
    Vector et(days);
    for (Eigen::Index t = 0; t < days; ++t) {
      const double season = std::sin(2.0 * std::numbers::pi * (static_cast<double>(t) - 80.0) / 365.0);
      // Daily drivers share one climate everywhere; sites differ only in
      // their static columns and their (a, b) response.
      const double ta = 12.0 + 12.0 * season + 2.0 * standard_normal(rng);
      const double ta_range = std::max(1.0, 9.0 + 3.0 * season + 1.5 * standard_normal(rng));
      const double rsdn = std::max(20.0, 190.0 + 110.0 * season + 35.0 * standard_normal(rng));
      const double lai = std::max(0.05, 2.0 + 1.5 * season + 0.15 * standard_normal(rng));
      const double vpd = std::max(0.05, 0.25 + 0.06 * std::max(0.0, ta) + 0.15 * standard_normal(rng));
      const double ws = std::max(0.2, 2.8 + 0.6 * season + 0.7 * standard_normal(rng));
      const double ssm = std::clamp(0.3 - 0.05 * season + 0.02 * standard_normal(rng), 0.02, 0.55);
      const double noise = cfg.noise_sd * standard_normal(rng);

      auto r = rows.row(t);
      r(static_cast<Eigen::Index>(col.ta)) = ta;
      r(static_cast<Eigen::Index>(col.ta_range)) = ta_range;
      r(static_cast<Eigen::Index>(col.vpd)) = vpd;
      r(static_cast<Eigen::Index>(col.ws)) = ws;
      r(static_cast<Eigen::Index>(col.rsdn)) = rsdn;
      r(static_cast<Eigen::Index>(col.lai)) = lai;
      r(static_cast<Eigen::Index>(col.ssm)) = ssm;
      r(static_cast<Eigen::Index>(col.gsmax)) = gsmax;
      r(static_cast<Eigen::Index>(col.g1)) = g1;
      r(static_cast<Eigen::Index>(col.gppsat)) = gppsat;
      r(static_cast<Eigen::Index>(col.nmass)) = nmass;
      r(static_cast<Eigen::Index>(col.laimax)) = laimax;
      r(static_cast<Eigen::Index>(col.mat)) = mat;
      r(static_cast<Eigen::Index>(col.map)) = map;
      r(static_cast<Eigen::Index>(col.cswi)) = cswi;
      r(static_cast<Eigen::Index>(col.hc)) = hc;
      r(static_cast<Eigen::Index>(col.sand)) = sand;
      et(t) = std::max(0.0, a * 4.0 * base_response(ta, vpd, rsdn, lai) + b + noise);
    }
    std::string id = site_name(s, cfg.n_sites);
    responses.push_back(SiteResponse{id, a, b});
    sites.push_back(make_site(schema, std::move(id), labels[s], std::move(rows), std::move(et)));
  }
  return SynthData{Dataset(schema, std::move(sites)), std::move(responses)};
}

Dataset generate(const SynthConfig& cfg) { return generate_with_truth(cfg).dataset; }

double shift_diagnostic(const Dataset& dataset) {
  const auto& schema = dataset.schema();
  const auto ta = static_cast<Eigen::Index>(schema.require("TA"));
  const auto vpd = static_cast<Eigen::Index>(schema.require("VPD"));
  const auto rsdn = static_cast<Eigen::Index>(schema.require("RSDN"));
  const auto lai = static_cast<Eigen::Index>(schema.require("LAI"));

  std::vector<double> slopes;
  for (const auto& site : dataset.sites()) {
    const Eigen::Index n = site.rows.rows();
    Vector base(n);
    for (Eigen::Index t = 0; t < n; ++t)
      base(t) = base_response(site.rows(t, ta), site.rows(t, vpd), site.rows(t, rsdn), site.rows(t, lai));
    const double mb = base.mean();
    const double my = site.target.mean();
    const double sxx = (base.array() - mb).square().sum();
    if (sxx < 1e-12) continue;
    const double sxy = ((base.array() - mb) * (site.target.array() - my)).sum();
    slopes.push_back(sxy / sxx);
  }
  if (slopes.size() < 2) return 0.0;
  const double mean = std::accumulate(slopes.begin(), slopes.end(), 0.0) / static_cast<double>(slopes.size());
  double var = 0.0;
  for (const double s : slopes) var += (s - mean) * (s - mean);
  return var / static_cast<double>(slopes.size());
}

}  // namespace etdann
