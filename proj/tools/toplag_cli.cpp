// toplag: thermal optimal path lead-lag analysis from the command line.
//
//   toplag top   --a A.csv --b B.csv [options] --out DIR   -> lag.csv, manifest.json
//   toplag xcorr --a A.csv --b B.csv [options] --out DIR   -> xcorr.csv, manifest.json
//   toplag synth --kind fixed_lag --n 200 --lag 10 --out DIR
//                                           -> a.csv, b.csv, true_lag.csv, manifest.json
//
// Exit status: 0 success, 1 data or I/O error, 2 invalid flags.

#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <openssl/evp.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "toplag/toplag.hpp"

#ifndef TOPLAG_VERSION
#define TOPLAG_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr int kExitData = 1;
constexpr int kExitUsage = 2;

struct InputOptions {
  std::string a, b;
  std::string date_col = "date";
  std::string value_col = "value";
  std::string freq = "none";
  std::string transform = "logret";
  bool no_standardize = false;
  std::string from, to;
};

struct TopOptions {
  InputOptions in;
  double temperature = toplag::kDefaultTemperature;
  int max_offset = toplag::kDefaultMaxOffset;
  std::string estimator = "forward";
  int bootstrap = 0;
  double lower_q = 0.05;
  double upper_q = 0.95;
  std::string tail = "magnitude";
  int block_length = 1;
  bool diagonal_surrogates = false;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  std::string out = ".";
};

struct XcorrOptions {
  InputOptions in;
  int tau_max = 12;
  int bootstrap = 1000;
  double lower_q = 0.05;
  double upper_q = 0.95;
  int block_length = 1;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  std::string out = ".";
};

struct SynthOptions {
  std::string kind = "fixed_lag";
  int n = 200;
  int lag = 0;
  int lag_end = 0;
  int switch_at = 0;
  double noise = 0.0;
  std::uint64_t seed = 0;
  bool no_standardize = false;
  std::string start_date = "2000-01-01";
  std::string out = ".";
};

// ---------------------------------------------------------------- formatting

std::string fmt(double v) {
  if (std::isnan(v)) return "NA";
  std::array<char, 32> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return ec == std::errc{} ? std::string(buf.data(), end) : "NA";
}

std::string fmt(std::optional<double> v) { return v ? fmt(*v) : "NA"; }

class CsvWriter {
 public:
  explicit CsvWriter(const fs::path& p) : out_(p, std::ios::binary) {
    if (!out_) throw toplag::data_error("cannot write '" + p.string() + "'");
  }
  template <typename... Cells>
  void row(const Cells&... cells) {
    bool first = true;
    ((out_ << (first ? "" : ",") << cells, first = false), ...);
    out_ << '\n';
  }
  void close() {
    out_.close();
    if (!out_) throw toplag::data_error("write failed");
  }

 private:
  std::ofstream out_;
};

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw toplag::data_error("cannot open '" + path + "'");
  const std::string data{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md.data(), &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string s;
  for (unsigned i = 0; i < len; ++i) {
    s += hex[md[i] >> 4];
    s += hex[md[i] & 15];
  }
  return s;
}

// ------------------------------------------------------------------ parsing

template <typename E>
E pick(const std::string& flag, const std::string& value, const std::map<std::string, E>& table) {
  const auto it = table.find(value);
  if (it != table.end()) return it->second;
  std::string names;
  for (const auto& [k, v] : table) names += (names.empty() ? "" : "|") + k;
  throw std::invalid_argument(flag + " must be one of " + names + ", got '" + value + "'");
}

std::optional<toplag::Date> parse_date_flag(const std::string& flag, const std::string& s) {
  if (s.empty()) return std::nullopt;
  auto d = toplag::Date::parse(s);
  if (!d) throw std::invalid_argument(flag + ": expected YYYY-MM-DD, got '" + s + "'");
  return d;
}

struct LoadPlan {
  toplag::Frequency freq;
  toplag::Transform transform;
  std::optional<toplag::Date> from, to;
};

LoadPlan plan(const InputOptions& in) {
  LoadPlan p{pick<toplag::Frequency>("--freq", in.freq,
                                     {{"none", toplag::Frequency::none},
                                      {"weekly", toplag::Frequency::weekly},
                                      {"monthly", toplag::Frequency::monthly}}),
             pick<toplag::Transform>("--transform", in.transform,
                                     {{"logret", toplag::Transform::log_return},
                                      {"diff", toplag::Transform::difference},
                                      {"none", toplag::Transform::none}}),
             parse_date_flag("--from", in.from), parse_date_flag("--to", in.to)};
  if (p.from && p.to && *p.to < *p.from) throw std::invalid_argument("--from is after --to");
  return p;
}

// Resample, then cut to the date range, then transform: sub-period returns
// match those of a file holding only the sub-period.
toplag::AlignedPair load_pair(const InputOptions& in, const LoadPlan& p) {
  auto prepare = [&](const std::string& path) {
    auto s = toplag::parse_csv(path, in.date_col, in.value_col);
    s.name = path;
    return toplag::filter_range(toplag::resample(s, p.freq), p.from, p.to);
  };
  return toplag::align_and_transform(prepare(in.a), prepare(in.b), p.transform,
                                     !in.no_standardize);
}

void add_input_flags(CLI::App* cmd, InputOptions& in) {
  cmd->add_option("--a", in.a, "First series CSV (the leader when lags are positive)")
      ->required();
  cmd->add_option("--b", in.b, "Second series CSV")->required();
  cmd->add_option("--date-col", in.date_col, "Date column name")->capture_default_str();
  cmd->add_option("--value-col", in.value_col, "Value column name")->capture_default_str();
  cmd->add_option("--freq", in.freq, "Resampling: none|weekly|monthly")->capture_default_str();
  cmd->add_option("--transform", in.transform, "logret|diff|none")->capture_default_str();
  cmd->add_flag("--no-standardize", in.no_standardize, "Skip scaling to zero mean, unit sd");
  cmd->add_option("--from", in.from, "First date kept (YYYY-MM-DD), applied after resampling");
  cmd->add_option("--to", in.to, "Last date kept (YYYY-MM-DD)");
}

ordered_json input_config(const InputOptions& in) {
  return {{"a", in.a},           {"b", in.b},
          {"date_col", in.date_col}, {"value_col", in.value_col},
          {"freq", in.freq},     {"transform", in.transform},
          {"standardize", !in.no_standardize},
          {"from", in.from},     {"to", in.to}};
}

// ----------------------------------------------------------------- manifest

struct Run {
  std::string command;
  ordered_json config;
  std::uint64_t seed = 0;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  ordered_json result = ordered_json::object();
  std::chrono::steady_clock::time_point started = std::chrono::steady_clock::now();
};

void write_manifest(const fs::path& dir, const Run& run) {
  ordered_json inputs = ordered_json::array();
  for (const auto& p : run.inputs) inputs.push_back({{"path", p}, {"sha256", sha256_file(p)}});
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - run.started).count();
  const ordered_json m = {{"tool", "toplag"},
                          {"version", TOPLAG_VERSION},
                          {"command", run.command},
                          {"config", run.config},
                          {"seed", run.seed},
                          {"rng_algorithm", toplag::kRngAlgorithm},
                          {"inputs", inputs},
                          {"outputs", run.outputs},
                          {"result", run.result},
                          {"wall_time_seconds", wall}};
  std::ofstream out(dir / "manifest.json", std::ios::binary);
  out << m.dump(2) << '\n';
  if (!out) throw toplag::data_error("cannot write manifest");
}

fs::path prepare_out(const std::string& out) {
  const fs::path dir(out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw toplag::data_error("cannot create '" + out + "': " + ec.message());
  return dir;
}

void check_threads(unsigned threads) {
  if (threads < 1) throw std::invalid_argument("--threads must be >= 1");
}

// ----------------------------------------------------------------- commands

void cmd_top(const TopOptions& o) {
  Run run;
  run.command = "top";
  run.seed = o.seed;
  run.config = {{"input", input_config(o.in)},
                {"temperature", o.temperature},
                {"max_offset", o.max_offset},
                {"estimator", o.estimator},
                {"bootstrap", o.bootstrap},
                {"lower_q", o.lower_q},
                {"upper_q", o.upper_q},
                {"tail", o.tail},
                {"block_length", o.block_length},
                {"diagonal_surrogates", o.diagonal_surrogates},
                {"threads", o.threads},
                {"out", o.out}};

  if (!(o.temperature > 0.0)) throw std::invalid_argument("temperature must be > 0");
  if (o.max_offset < 0) throw std::invalid_argument("--max-offset must be >= 0");
  if (o.bootstrap < 0) throw std::invalid_argument("--bootstrap must be >= 0");
  check_threads(o.threads);
  const auto estimator = pick<toplag::LagEstimator>(
      "--estimator", o.estimator,
      {{"forward", toplag::LagEstimator::forward},
       {"ensemble", toplag::LagEstimator::path_ensemble}});
  toplag::BootstrapConfig boot{.n_replicas = std::max(o.bootstrap, 1),
                               .lower_q = o.lower_q,
                               .upper_q = o.upper_q,
                               .seed = o.seed,
                               .temperature = o.temperature,
                               .max_offset = o.max_offset,
                               .tail = pick<toplag::Tail>("--tail", o.tail,
                                                          {{"magnitude", toplag::Tail::magnitude},
                                                           {"upper", toplag::Tail::upper},
                                                           {"lower", toplag::Tail::lower}}),
                               .block_length = o.block_length,
                               .surrogate_multistart = !o.diagonal_surrogates,
                               .estimator = estimator,
                               .threads = o.threads};
  boot.validate();
  const LoadPlan lp = plan(o.in);

  const auto pair = load_pair(o.in, lp);
  const auto path = toplag::multistart_search(
      pair, o.temperature, {.max_offset = o.max_offset, .threads = o.threads, .estimator = estimator});
  std::optional<toplag::BootstrapEnvelope> env;
  if (o.bootstrap > 0) env = toplag::bootstrap_envelope(pair, path, boot);

  const fs::path dir = prepare_out(o.out);
  CsvWriter csv(dir / "lag.csv");
  csv.row("t_index", "date", "x_mean", "L", "U", "p", "significant");
  for (std::size_t i = 0; i < path.lag.size(); ++i) {
    const auto& lp_i = path.lag[i];
    if (env) {
      const auto& e = env->points[i];
      csv.row(lp_i.t, lp_i.date, fmt(lp_i.x_mean), fmt(e.lower), fmt(e.upper), fmt(e.p),
              e.n_defined ? (e.significant ? "1" : "0") : "NA");
    } else {
      csv.row(lp_i.t, lp_i.date, fmt(lp_i.x_mean), "NA", "NA", "NA", "NA");
    }
  }
  csv.close();

  run.inputs = {o.in.a, o.in.b};
  run.outputs = {"lag.csv"};
  run.result = {{"n", pair.n()},
                {"first_date", pair.dates.front()},
                {"last_date", pair.dates.back()},
                {"start_offset", path.offsets.start},
                {"end_offset", path.offsets.end},
                {"energy", path.energy},
                {"candidates_evaluated", path.candidates_evaluated},
                {"candidates_collapsed", path.candidates_collapsed},
                {"replicas_used", env ? env->n_used : 0},
                {"replicas_dropped", env ? env->n_dropped : 0}};
  write_manifest(dir, run);
}

void cmd_xcorr(const XcorrOptions& o) {
  Run run;
  run.command = "xcorr";
  run.seed = o.seed;
  run.config = {{"input", input_config(o.in)},
                {"tau_max", o.tau_max},
                {"bootstrap", o.bootstrap},
                {"lower_q", o.lower_q},
                {"upper_q", o.upper_q},
                {"block_length", o.block_length},
                {"threads", o.threads},
                {"out", o.out}};

  if (o.bootstrap < 0) throw std::invalid_argument("--bootstrap must be >= 0");
  if (o.tau_max < 0) throw std::invalid_argument("--tau-max must be >= 0");
  check_threads(o.threads);
  const toplag::BootstrapConfig boot{.n_replicas = std::max(o.bootstrap, 1),
                                     .lower_q = o.lower_q,
                                     .upper_q = o.upper_q,
                                     .seed = o.seed,
                                     .block_length = o.block_length,
                                     .threads = o.threads};
  boot.validate();
  const LoadPlan lp = plan(o.in);

  const auto pair = load_pair(o.in, lp);
  toplag::XcorrResult r;
  if (o.bootstrap > 0) {
    r = toplag::xcorr_significance(pair, o.tau_max, boot);
  } else {
    r.tau_max = o.tau_max;
    for (const auto& l : toplag::lagged_xcorr(pair, o.tau_max))
      r.points.push_back({l.tau, l.c, NAN, NAN, false, l.n_overlap});
  }

  const fs::path dir = prepare_out(o.out);
  CsvWriter csv(dir / "xcorr.csv");
  csv.row("tau", "c", "lo", "hi", "significant", "n_overlap");
  for (const auto& p : r.points) {
    const bool has_band = o.bootstrap > 0 && !std::isnan(p.lo) && p.c;
    csv.row(p.tau, fmt(p.c), fmt(p.lo), fmt(p.hi), has_band ? (p.significant ? "1" : "0") : "NA",
            p.n_overlap);
  }
  csv.close();

  run.inputs = {o.in.a, o.in.b};
  run.outputs = {"xcorr.csv"};
  run.result = {{"n", pair.n()},
                {"first_date", pair.dates.front()},
                {"last_date", pair.dates.back()}};
  write_manifest(dir, run);
}

void cmd_synth(const SynthOptions& o) {
  Run run;
  run.command = "synth";
  run.seed = o.seed;
  run.config = {{"kind", o.kind},           {"n", o.n},
                {"lag", o.lag},             {"lag_end", o.lag_end},
                {"switch_at", o.switch_at}, {"noise", o.noise},
                {"standardize", !o.no_standardize},
                {"start_date", o.start_date}, {"out", o.out}};

  const auto kind = toplag::parse_synth_kind(o.kind);
  if (!kind)
    throw std::invalid_argument(
        "--kind must be one of fixed_lag|ramp_lag|regime_switch|independent_noise");
  const auto start = parse_date_flag("--start-date", o.start_date);
  if (!start) throw std::invalid_argument("--start-date is required");
  const toplag::SynthSpec spec{.kind = *kind,
                               .n = o.n,
                               .lag = o.lag,
                               .lag_end = o.lag_end,
                               .switch_at = o.switch_at,
                               .noise_sigma = o.noise,
                               .seed = o.seed,
                               .standardize = !o.no_standardize,
                               .first_date = *start};
  const auto syn = toplag::generate(spec);

  const fs::path dir = prepare_out(o.out);
  auto series = [&](const char* name, const std::vector<double>& v) {
    CsvWriter csv(dir / name);
    csv.row("date", "value");
    for (std::size_t i = 0; i < v.size(); ++i) csv.row(syn.pair.dates[i], fmt(v[i]));
    csv.close();
  };
  series("a.csv", syn.pair.x);
  series("b.csv", syn.pair.y);
  CsvWriter csv(dir / "true_lag.csv");
  csv.row("t_index", "date", "true_lag");
  for (std::size_t i = 0; i < syn.true_lag.size(); ++i)
    csv.row(i + 1, syn.pair.dates[i], syn.true_lag[i]);
  csv.close();

  run.outputs = {"a.csv", "b.csv", "true_lag.csv"};
  run.result = {{"n", syn.pair.n()}};
  write_manifest(dir, run);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Thermal optimal path lead-lag analysis", "toplag"};
  app.set_version_flag("--version", TOPLAG_VERSION);
  app.require_subcommand(1);

  TopOptions top;
  auto* top_cmd = app.add_subcommand("top", "Lead-lag curve with optional bootstrap envelope");
  add_input_flags(top_cmd, top.in);
  top_cmd->add_option("--temperature", top.temperature, "Temperature T")->capture_default_str();
  top_cmd->add_option("--max-offset", top.max_offset, "Anchor offsets searched in [-m, m]")
      ->capture_default_str();
  top_cmd->add_option("--estimator", top.estimator, "forward|ensemble")->capture_default_str();
  top_cmd->add_option("--bootstrap", top.bootstrap, "Surrogate replicas (0 = none)")
      ->capture_default_str();
  top_cmd->add_option("--lower-q", top.lower_q, "Lower envelope quantile")->capture_default_str();
  top_cmd->add_option("--upper-q", top.upper_q, "Upper envelope quantile")->capture_default_str();
  top_cmd->add_option("--tail", top.tail, "p-value tail: magnitude|upper|lower")
      ->capture_default_str();
  top_cmd->add_option("--block-length", top.block_length, "Permutation block length")
      ->capture_default_str();
  top_cmd->add_flag("--diagonal-surrogates", top.diagonal_surrogates,
                    "Surrogates use only the diagonal anchors");
  top_cmd->add_option("--seed", top.seed, "RNG seed")->capture_default_str();
  top_cmd->add_option("--threads", top.threads, "Worker threads")->capture_default_str();
  top_cmd->add_option("--out", top.out, "Output directory")->capture_default_str();

  XcorrOptions xc;
  auto* xc_cmd = app.add_subcommand("xcorr", "Lagged cross-correlation with permutation bands");
  add_input_flags(xc_cmd, xc.in);
  xc_cmd->add_option("--tau-max", xc.tau_max, "Largest |lag|")->capture_default_str();
  xc_cmd->add_option("--bootstrap", xc.bootstrap, "Surrogate replicas (0 = none)")
      ->capture_default_str();
  xc_cmd->add_option("--lower-q", xc.lower_q, "Lower band quantile")->capture_default_str();
  xc_cmd->add_option("--upper-q", xc.upper_q, "Upper band quantile")->capture_default_str();
  xc_cmd->add_option("--block-length", xc.block_length, "Permutation block length")
      ->capture_default_str();
  xc_cmd->add_option("--seed", xc.seed, "RNG seed")->capture_default_str();
  xc_cmd->add_option("--threads", xc.threads, "Worker threads")->capture_default_str();
  xc_cmd->add_option("--out", xc.out, "Output directory")->capture_default_str();

  SynthOptions sy;
  auto* sy_cmd = app.add_subcommand("synth", "Synthetic pair with a known lag schedule");
  sy_cmd->add_option("--kind", sy.kind, "fixed_lag|ramp_lag|regime_switch|independent_noise")
      ->capture_default_str();
  sy_cmd->add_option("--n", sy.n, "Length")->capture_default_str();
  sy_cmd->add_option("--lag", sy.lag, "Lag (first regime, ramp start)")->capture_default_str();
  sy_cmd->add_option("--lag-end", sy.lag_end, "Second regime lag / ramp end")
      ->capture_default_str();
  sy_cmd->add_option("--switch-at", sy.switch_at, "First sample of the second regime (0 = n/2+1)")
      ->capture_default_str();
  sy_cmd->add_option("--noise", sy.noise, "Noise standard deviation")->capture_default_str();
  sy_cmd->add_option("--seed", sy.seed, "RNG seed")->capture_default_str();
  sy_cmd->add_flag("--no-standardize", sy.no_standardize, "Keep raw scale");
  sy_cmd->add_option("--start-date", sy.start_date, "Date of the first sample")
      ->capture_default_str();
  sy_cmd->add_option("--out", sy.out, "Output directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (top_cmd->parsed()) cmd_top(top);
    if (xc_cmd->parsed()) cmd_xcorr(xc);
    if (sy_cmd->parsed()) cmd_synth(sy);
  } catch (const std::invalid_argument& e) {
    std::cerr << "toplag: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "toplag: " << e.what() << '\n';
    return kExitData;
  }
  return 0;
}
