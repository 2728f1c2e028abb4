#include "cli.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "smsim/analysis.hpp"
#include "smsim/engine.hpp"
#include "smsim/error.hpp"
#include "smsim/experiments.hpp"
#include "smsim/results_csv.hpp"

namespace smsim::cli {
namespace {

using Json = nlohmann::ordered_json;

// Validation failures map to exit 2, file problems to exit 3.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<double> parse_powers(const std::string& text) {
  std::vector<double> out;
  std::string_view rest = text;
  while (true) {
    const auto comma = rest.find(',');
    const auto field = rest.substr(0, comma);
    double v = 0.0;
    const auto [ptr, ec] =
        std::from_chars(field.data(), field.data() + field.size(), v);
    if (field.empty() || ec != std::errc{} ||
        ptr != field.data() + field.size()) {
      throw UsageError("--powers: '" + std::string(field) +
                       "' is not a number");
    }
    out.push_back(v);
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  return out;
}

MiningModel model_or_throw(const std::string& text) {
  const auto m = parse_model(text);
  if (!m) {
    throw UsageError("--model must be 'concurrent' or 'conventional'");
  }
  return *m;
}

Json optional_number(const std::optional<double>& v) {
  return v ? Json(*v) : Json(nullptr);
}

Json range_json(const std::optional<LatticeRange>& r) {
  if (!r) return nullptr;
  return Json::array({r->lo, r->hi});
}

Json witness_json(const std::optional<SweepStatistic>& s) {
  if (!s) return nullptr;
  Json j;
  j["powers"] = s->powers.powers;
  j["mean"] = s->mean;
  j["ci_half_width"] = s->ci_half_width;
  return j;
}

struct RunFlags {
  std::string model = "concurrent";
  std::string powers;
  double d = 0.5;
  std::int64_t timesteps = 200'000;
  std::uint64_t seed = kDefaultBaseSeed;
  bool no_flush = false;
  int selfish = -1;
};

int cmd_run(const RunFlags& f, std::ostream& out) {
  PowerConfiguration pc;
  pc.powers = parse_powers(f.powers);
  pc.difficulty = f.d;
  pc.selfish_count =
      f.selfish < 0 ? static_cast<int>(pc.powers.size()) - 1 : f.selfish;
  RunConfig rc;
  rc.model = model_or_throw(f.model);
  rc.timesteps = f.timesteps;
  rc.seed = f.seed;
  rc.flush_at_end = !f.no_flush;

  const RunOutcome o = run(rc, pc);

  Json j;
  j["model"] = to_string(rc.model);
  j["powers"] = pc.powers;
  j["d"] = pc.difficulty;
  j["selfish_count"] = pc.selfish_count;
  j["timesteps"] = rc.timesteps;
  j["seed"] = rc.seed;
  j["flush_at_end"] = rc.flush_at_end;
  j["winning_tip"] = o.winning_tip;
  j["chain_length"] = o.chain_length;
  j["blocks_mined"] = o.blocks_mined;
  j["blocks_per_miner"] = o.blocks_per_miner;
  j["rewards"] = o.rewards;
  out << j.dump(2) << '\n';
  return kExitOk;
}

struct SweepFlags {
  int selfish = 1;
  double granularity = 0.01;
  int reps = 100;
  std::int64_t timesteps = 200'000;
  double d = 0.5;
  std::string model = "concurrent";
  std::uint64_t seed = kDefaultBaseSeed;
  std::string out_path;
  bool equal_power = false;
  bool resume = false;
  bool canonical = false;
  bool no_flush = false;
  int workers = 1;
};

int cmd_sweep(const SweepFlags& f, std::ostream& out) {
  if (f.selfish < 1 || f.selfish > kCsvMaxMiners - 1) {
    throw UsageError("--selfish must be 1, 2 or 3");
  }
  GridSpec spec;
  spec.selfish_count = f.selfish;
  spec.granularity = f.granularity;
  spec.repetitions = f.reps;
  spec.timesteps = f.timesteps;
  spec.difficulty = f.d;
  spec.model = model_or_throw(f.model);
  spec.base_seed = f.seed;
  spec.canonical_only = f.canonical;
  spec.flush_at_end = !f.no_flush;
  if (spec.repetitions < 2) throw UsageError("--reps must be at least 2");
  if (spec.timesteps < 1) throw UsageError("--timesteps must be at least 1");
  if (!(spec.difficulty >= 0.0 && spec.difficulty <= 1.0)) {
    throw UsageError("--d must lie in [0, 1]");
  }

  const std::vector<LatticePoint> points =
      f.equal_power ? equal_power_points(spec) : grid_points(spec);

  std::set<std::string> done;
  const bool append = f.resume && std::filesystem::exists(f.out_path);
  if (append) {
    std::ifstream in(f.out_path);
    if (!in) throw IoError("cannot read " + f.out_path);
    for (const auto& s : read_results(in)) done.insert(result_key(s));
  }
  std::ofstream file(f.out_path, append ? std::ios::app : std::ios::trunc);
  if (!file) throw IoError("cannot write " + f.out_path);
  if (!append) file << kResultsHeader << '\n' << std::flush;

  std::size_t written = 0;
  SweepOptions options;
  options.workers = f.workers;
  options.skip = [&](const SweepStatistic& d) {
    return done.count(result_key(d)) > 0;
  };
  options.on_complete = [&](const SweepStatistic& s) {
    file << format_row(s) << '\n' << std::flush;
    ++written;
  };
  sweep_points(spec, points, options);
  if (!file) throw IoError("write to " + f.out_path + " failed");

  out << "wrote " << written << " rows, skipped " << points.size() - written
      << " completed points, to " << f.out_path << '\n';
  return kExitOk;
}

struct AnalyzeFlags {
  std::vector<std::string> inputs;
  std::string report = "all";
  std::string out_path;
  bool expand = false;
};

std::map<std::pair<std::string, int>, std::vector<SweepStatistic>> by_group(
    const std::vector<SweepStatistic>& stats) {
  std::map<std::pair<std::string, int>, std::vector<SweepStatistic>> g;
  for (const auto& s : stats) {
    if (s.selfish_count() < 1) continue;
    g[{std::string(to_string(s.model)), s.selfish_count()}].push_back(s);
  }
  return g;
}

Json threshold_json(const std::vector<SweepStatistic>& stats) {
  Json arr = Json::array();
  for (const auto& [id, members] : by_group(stats)) {
    const ThresholdReport t = threshold_bounds(members);
    Json j;
    j["model"] = id.first;
    j["k"] = id.second;
    j["lower_bound"] = optional_number(t.lower_bound);
    j["upper_bound"] = optional_number(t.upper_bound);
    j["lower_witness"] = witness_json(t.lower_witness);
    j["upper_witness"] = witness_json(t.upper_witness);
    arr.push_back(j);
  }
  return arr;
}

Json safety_json(const std::vector<SweepStatistic>& stats) {
  Json arr = Json::array();
  for (const auto& [id, members] : by_group(stats)) {
    const SafetyReport s = safety_bounds(members);
    Json j;
    j["model"] = id.first;
    j["k"] = id.second;
    j["lower_bound"] = optional_number(s.lower_bound);
    j["upper_bound"] = optional_number(s.upper_bound);
    j["lower_witness"] = witness_json(s.lower_witness);
    j["upper_witness"] = witness_json(s.upper_witness);
    arr.push_back(j);
  }
  return arr;
}

Json nash_json(const std::vector<SweepStatistic>& stats) {
  Json arr = Json::array();
  for (const auto& [id, members] : by_group(stats)) {
    if (id.second < 2) continue;
    const NashReport n = nash_classify(members);
    Json j;
    j["model"] = id.first;
    j["k"] = id.second;
    j["stable_range"] = range_json(n.stable_range);
    j["unstable_range"] = range_json(n.unstable_range);
    Json points = Json::array();
    for (const auto& p : n.points) {
      Json pj;
      pj["m"] = p.power;
      pj["class"] = to_string(p.classification);
      pj["R"] = p.stat.repetitions;
      std::vector<double> lows;
      for (MinerIndex i = 1; i <= p.stat.selfish_count(); ++i) {
        lows.push_back(p.stat.ci_lower(i));
      }
      pj["mean"] = p.stat.mean;
      pj["ci_lower"] = lows;
      points.push_back(pj);
    }
    j["points"] = points;
    arr.push_back(j);
  }
  if (arr.empty()) {
    throw Error(ErrorCode::kEmptyGrid,
                "nash report needs rows with two or more selfish miners");
  }
  return arr;
}

Json interp_json(const std::vector<SweepStatistic>& stats) {
  Json arr = Json::array();
  for (const auto& [id, members] : by_group(stats)) {
    if (id.second != 1) continue;
    const auto curve = threshold_curve(members);
    const ThresholdReport t = threshold_bounds(members);
    Json j;
    j["model"] = id.first;
    j["k"] = 1;
    j["lattice_threshold"] = optional_number(t.lower_bound);
    j["interpolated_threshold"] = interpolate_threshold(curve);
    arr.push_back(j);
  }
  if (arr.empty()) {
    throw Error(ErrorCode::kEmptyGrid,
                "interp report needs a one-selfish-miner sweep");
  }
  return arr;
}

std::string table1_csv(const std::vector<SweepStatistic>& stats) {
  std::ostringstream os;
  os << "m1,m2,m3_lo,m3_hi\n";
  for (const auto& r : min_power_table(stats)) {
    os << format_decimal(r.m1) << ',' << format_decimal(r.m2) << ','
       << format_decimal(r.m3.lo) << ',' << format_decimal(r.m3.hi) << '\n';
  }
  return os.str();
}

std::string summary_csv(const std::vector<SweepStatistic>& stats) {
  auto cell = [](const std::optional<double>& v) {
    return v ? format_decimal(*v) : std::string();
  };
  std::ostringstream os;
  os << "model,k,threshold_lower,threshold_upper,stable_nash_lo,"
        "stable_nash_hi,unstable_nash_lo,unstable_nash_hi,safety_lower,"
        "safety_upper\n";
  for (const auto& row : summarize(stats)) {
    std::optional<LatticeRange> stable, unstable;
    if (row.nash) {
      stable = row.nash->stable_range;
      unstable = row.nash->unstable_range;
    }
    auto lo = [](const std::optional<LatticeRange>& r) {
      return r ? std::optional<double>(r->lo) : std::nullopt;
    };
    auto hi = [](const std::optional<LatticeRange>& r) {
      return r ? std::optional<double>(r->hi) : std::nullopt;
    };
    os << to_string(row.model) << ',' << row.selfish_count << ','
       << cell(row.threshold.lower_bound) << ','
       << cell(row.threshold.upper_bound) << ',' << cell(lo(stable)) << ','
       << cell(hi(stable)) << ',' << cell(lo(unstable)) << ','
       << cell(hi(unstable)) << ',' << cell(row.safety.lower_bound) << ','
       << cell(row.safety.upper_bound) << '\n';
  }
  return os.str();
}

int cmd_analyze(const AnalyzeFlags& f, std::ostream& out) {
  std::vector<SweepStatistic> stats;
  for (const auto& path : f.inputs) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path);
    try {
      auto part = read_results(in);
      stats.insert(stats.end(), std::make_move_iterator(part.begin()),
                   std::make_move_iterator(part.end()));
    } catch (const Error& e) {
      throw UsageError(path + ": " + e.what());
    }
  }
  if (f.expand) stats = expand_symmetric(stats);

  std::string body;
  if (f.report == "thresholds") {
    body = threshold_json(stats).dump(2) + '\n';
  } else if (f.report == "safety") {
    body = safety_json(stats).dump(2) + '\n';
  } else if (f.report == "nash") {
    body = nash_json(stats).dump(2) + '\n';
  } else if (f.report == "interp") {
    body = interp_json(stats).dump(2) + '\n';
  } else if (f.report == "table1") {
    body = table1_csv(stats);
  } else {
    body = summary_csv(stats);
  }

  if (f.out_path.empty()) {
    out << body;
    return kExitOk;
  }
  std::ofstream file(f.out_path, std::ios::trunc);
  if (!file || !(file << body)) throw IoError("cannot write " + f.out_path);
  return kExitOk;
}

struct OracleFlags {
  double alpha = 0.0;
  double gamma = 0.0;
};

int cmd_oracle(const OracleFlags& f, std::ostream& out) {
  Json j;
  j["alpha"] = f.alpha;
  j["gamma"] = f.gamma;
  j["revenue"] = oracle_revenue(f.alpha, f.gamma);
  j["threshold"] = oracle_threshold(f.gamma);
  out << j.dump(2) << '\n';
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Multi-miner selfish mining simulator", "smsim"};
  app.require_subcommand(1);

  RunFlags run_flags;
  auto* run_cmd = app.add_subcommand("run", "Run one seeded simulation");
  run_cmd->add_option("--model", run_flags.model, "concurrent|conventional")
      ->capture_default_str();
  run_cmd->add_option("--powers", run_flags.powers,
                      "Relative powers m_1..m_N, comma separated; last is "
                      "the honest miner")
      ->required();
  run_cmd->add_option("--d", run_flags.d, "Difficulty in [0,1]")
      ->capture_default_str();
  run_cmd->add_option("--timesteps", run_flags.timesteps)->capture_default_str();
  run_cmd->add_option("--seed", run_flags.seed)->capture_default_str();
  run_cmd->add_option("--selfish-count", run_flags.selfish,
                      "Number of selfish miners (default N-1)");
  run_cmd->add_flag("--no-flush", run_flags.no_flush,
                    "Do not publish withheld blocks before accounting");

  SweepFlags sweep_flags;
  auto* sweep_cmd =
      app.add_subcommand("sweep", "Sweep the power lattice into a results CSV");
  sweep_cmd->add_option("--selfish", sweep_flags.selfish, "1, 2 or 3")
      ->required();
  sweep_cmd->add_option("--granularity", sweep_flags.granularity)
      ->capture_default_str();
  sweep_cmd->add_option("--reps", sweep_flags.reps)->capture_default_str();
  sweep_cmd->add_option("--timesteps", sweep_flags.timesteps)
      ->capture_default_str();
  sweep_cmd->add_option("--d", sweep_flags.d)->capture_default_str();
  sweep_cmd->add_option("--model", sweep_flags.model)->capture_default_str();
  sweep_cmd->add_option("--seed", sweep_flags.seed)->capture_default_str();
  sweep_cmd->add_option("--out", sweep_flags.out_path)->required();
  sweep_cmd->add_flag("--equal-power", sweep_flags.equal_power,
                      "Only m_1 = ... = m_k");
  sweep_cmd->add_flag("--resume", sweep_flags.resume,
                      "Append to --out, skipping points already present");
  sweep_cmd->add_flag("--canonical", sweep_flags.canonical,
                      "Only m_1 >= m_2 >= ... (expand at analysis time)");
  sweep_cmd->add_flag("--no-flush", sweep_flags.no_flush);
  sweep_cmd->add_option("--workers", sweep_flags.workers)
      ->capture_default_str()
      ->check(CLI::PositiveNumber);

  AnalyzeFlags analyze_flags;
  auto* analyze_cmd =
      app.add_subcommand("analyze", "Derive reports from results CSVs");
  analyze_cmd->add_option("--in", analyze_flags.inputs)->required();
  analyze_cmd->add_option("--report", analyze_flags.report)
      ->capture_default_str()
      ->check(CLI::IsMember(
          {"thresholds", "nash", "safety", "table1", "interp", "all"}));
  analyze_cmd->add_option("--out", analyze_flags.out_path,
                          "Output file (default: standard output)");
  analyze_cmd->add_flag("--expand-symmetric", analyze_flags.expand,
                        "Treat the input as a canonical-only grid");

  OracleFlags oracle_flags;
  auto* oracle_cmd = app.add_subcommand(
      "oracle", "Closed-form single-pool selfish mining revenue");
  oracle_cmd->add_option("--alpha", oracle_flags.alpha)->required();
  oracle_cmd->add_option("--gamma", oracle_flags.gamma)->capture_default_str();

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    if (*run_cmd) return cmd_run(run_flags, out);
    if (*sweep_cmd) return cmd_sweep(sweep_flags, out);
    if (*analyze_cmd) return cmd_analyze(analyze_flags, out);
    if (*oracle_cmd) return cmd_oracle(oracle_flags, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const Error& e) {
    err << "error: " << to_string(e.code()) << ": " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace smsim::cli
