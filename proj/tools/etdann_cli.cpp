// etdann: synthetic data generation, cross-site protocol runs and report
// rendering.
//
//   etdann synth --sites 20 --days 365 --shift 1.5 --noise 0.1 --seed 7 --out data.csv
//   etdann run --data data.csv --protocols loo,pft,dann --config run.json --out report/
//   etdann report --in report/ --format csv|json
//
// Exit codes: 0 success, 1 other failure, 2 dataset error, 3 config error.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "etdann/etdann.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitDataset = 2;
constexpr int kExitConfig = 3;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

int exit_code_for(etdann::ErrorCode code) {
  using etdann::ErrorCode;
  switch (code) {
    case ErrorCode::InvalidConfig:
      return kExitConfig;
    case ErrorCode::MalformedCsv:
    case ErrorCode::EmptyDataset:
    case ErrorCode::DuplicateSite:
    case ErrorCode::InvalidSchema:
    case ErrorCode::ZeroVariance:
    case ErrorCode::TooFewSamples:
    case ErrorCode::NonFiniteInput:
    case ErrorCode::DimensionMismatch:
    case ErrorCode::LengthMismatch:
    case ErrorCode::UnknownSite:
    case ErrorCode::FoldHygieneViolation:
    case ErrorCode::Io:
      return kExitDataset;
    default:
      return kExitFailure;
  }
}

std::vector<etdann::ProtocolId> parse_protocol_list(const std::string& text) {
  std::vector<etdann::ProtocolId> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto p = etdann::parse_protocol(item);
    if (!p) throw ConfigError("unknown protocol '" + item + "' (expected loo, pft or dann)");
    if (std::find(out.begin(), out.end(), *p) == out.end()) out.push_back(*p);
  }
  if (out.empty()) throw ConfigError("no protocols selected");
  return out;
}

etdann::RunConfig load_config(const std::string& path) {
  if (path.empty()) return etdann::RunConfig{};
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return etdann::parse_run_config(buf.str());
}

struct SynthArgs {
  std::size_t sites = 20;
  std::size_t days = 365;
  double shift = 1.0;
  double noise = 0.1;
  std::uint64_t seed = 0;
  std::string out;
};

int run_synth(const SynthArgs& args) {
  etdann::SynthConfig cfg;
  cfg.n_sites = args.sites;
  cfg.days_per_site = args.days;
  cfg.shift_strength = args.shift;
  cfg.noise_sd = args.noise;
  cfg.seed = args.seed;
  try {
    cfg.validate();
  } catch (const etdann::Error& e) {
    throw ConfigError(e.what());
  }
  const auto data = etdann::generate(cfg);
  etdann::write_csv(data, args.out);
  std::cerr << "wrote " << data.size() << " sites x " << args.days << " days to " << args.out << "\n";
  return kExitOk;
}

struct RunArgs {
  std::string data;
  std::string protocols = "loo,pft,dann";
  std::string config;
  std::string out;
  std::size_t workers = 1;
  bool audit = false;
  bool traces = false;
};

int run_protocols(const RunArgs& args) {
  const auto protocols = parse_protocol_list(args.protocols);
  const etdann::RunConfig cfg = load_config(args.config).seeded();

  etdann::LoadReport load_report;
  const auto dataset = etdann::load_csv(args.data, etdann::PredictorSchema::canonical(), &load_report);
  for (const auto& w : load_report.warnings()) std::cerr << "warning: " << w << "\n";

  etdann::RunOptions options;
  options.workers = args.workers;
  options.audit_folds = args.audit;
  std::mutex trace_mutex;
  if (args.traces) {
    const auto dir = std::filesystem::path(args.out) / "traces";
    std::filesystem::create_directories(dir);
    options.on_trace = [&, dir](std::size_t site, const etdann::TrainTrace& trace) {
      std::lock_guard lock(trace_mutex);
      std::ofstream out(dir / (dataset.site(site).site_id + ".csv"));
      trace.write_csv(out);
    };
  }

  std::vector<etdann::SiteResult> results;
  for (const auto protocol : protocols) {
    const auto start = std::chrono::steady_clock::now();
    std::vector<etdann::SiteResult> part;
    switch (protocol) {
      case etdann::ProtocolId::LooRf:
        part = etdann::run_loo_rf(dataset, cfg.loo_forest, options);
        break;
      case etdann::ProtocolId::PftSpecificRf:
        part = etdann::run_pft_rf(dataset, cfg.pft_forest, cfg.similarity_k, options);
        break;
      case etdann::ProtocolId::Dann:
        part = etdann::run_dann_protocol(dataset, cfg.dann, options);
        break;
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cerr << etdann::to_string(protocol) << ": " << part.size() << " sites in " << secs << " s\n";
    results.insert(results.end(), part.begin(), part.end());
  }
  const auto report = etdann::summarize(std::move(results), dataset);
  etdann::write_report(report, args.out);

  etdann::write_summary(report, std::cout);
  return kExitOk;
}

struct ReportArgs {
  std::string in;
  std::string format = "csv";
};

int run_report(const ReportArgs& args) {
  const auto report = etdann::read_report(args.in);
  if (args.format == "json") {
    std::cout << etdann::report_to_json(report) << "\n";
  } else {
    etdann::write_summary(report, std::cout);
    std::cout << "\n";
    etdann::write_pairwise_summary(report, std::cout);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cross-site ET modeling: LOO random forest, PFT-specific random forest and DANN"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic multi-site dataset");
  synth_cmd->add_option("--sites", synth.sites, "Number of sites")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--days", synth.days, "Days per site")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--shift", synth.shift, "Between-site shift strength")->check(CLI::NonNegativeNumber);
  synth_cmd->add_option("--noise", synth.noise, "Observation noise sd")->check(CLI::NonNegativeNumber);
  synth_cmd->add_option("--seed", synth.seed, "Master seed");
  synth_cmd->add_option("--out", synth.out, "Output CSV")->required();

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Run evaluation protocols over a dataset");
  run_cmd->add_option("--data", run.data, "Input CSV")->required();
  run_cmd->add_option("--protocols", run.protocols, "Comma-separated subset of loo,pft,dann");
  run_cmd->add_option("--config", run.config, "Run configuration JSON");
  run_cmd->add_option("--out", run.out, "Output directory")->required();
  run_cmd->add_option("--workers", run.workers, "Concurrent folds")->check(CLI::PositiveNumber);
  run_cmd->add_flag("--audit", run.audit, "Verify no held-out rows reach any training matrix");
  run_cmd->add_flag("--traces", run.traces, "Also write per-site DANN training traces");

  ReportArgs report;
  auto* report_cmd = app.add_subcommand("report", "Render a report directory");
  report_cmd->add_option("--in", report.in, "Report directory")->required();
  report_cmd->add_option("--format", report.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*synth_cmd) return run_synth(synth);
    if (*run_cmd) return run_protocols(run);
    if (*report_cmd) return run_report(report);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const etdann::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitFailure;
}
