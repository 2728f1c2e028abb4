#include "smsim/results_csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>

#include "smsim/error.hpp"

namespace smsim {
namespace {

constexpr std::size_t kColumns = 18;

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

[[noreturn]] void malformed(std::size_t line_number, const std::string& what) {
  throw Error(ErrorCode::kMalformedCsv,
              "line " + std::to_string(line_number) + ": " + what);
}

template <class T>
T parse_number(std::string_view field, std::size_t line_number,
               std::string_view column) {
  T value{};
  const auto* first = field.data();
  const auto* last = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (field.empty() || ec != std::errc{} || ptr != last) {
    malformed(line_number, "column " + std::string(column) + ": '" +
                               std::string(field) + "' is not a number");
  }
  return value;
}

std::string_view strip_cr(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

}  // namespace

std::string format_decimal(double value) {
  char buf[64];
  const int n = std::snprintf(buf, sizeof buf, "%.6f", value);
  std::string out(buf, static_cast<std::size_t>(n));
  if (out == "-0.000000") out = "0.000000";
  return out;
}

std::string result_key(const SweepStatistic& stat) {
  const int n = stat.miner_count();
  if (n > kCsvMaxMiners) {
    throw Error(ErrorCode::kInvalidPowerConfiguration,
                "results CSV holds at most 4 miners");
  }
  std::string row(to_string(stat.model));
  row += ',' + std::to_string(stat.selfish_count());
  for (int i = 0; i < kCsvMaxMiners; ++i) {
    row += ',';
    if (i < n) row += format_decimal(stat.powers.powers[i]);
  }
  row += ',' + format_decimal(stat.powers.difficulty);
  row += ',' + std::to_string(stat.timesteps);
  row += ',' + std::to_string(stat.repetitions);
  row += ',' + std::to_string(stat.seed);
  return row;
}

std::string format_row(const SweepStatistic& stat) {
  std::string row = result_key(stat);
  const int n = stat.miner_count();
  for (const auto* column : {&stat.mean, &stat.ci_half_width}) {
    for (int i = 0; i < kCsvMaxMiners; ++i) {
      row += ',';
      if (i < n) row += format_decimal((*column)[i]);
    }
  }
  return row;
}

SweepStatistic parse_row(std::string_view line, std::size_t line_number) {
  const auto fields = split(strip_cr(line));
  if (fields.size() != kColumns) {
    malformed(line_number, "expected " + std::to_string(kColumns) +
                               " columns, got " +
                               std::to_string(fields.size()));
  }
  SweepStatistic stat;
  const auto model = parse_model(fields[0]);
  if (!model) {
    malformed(line_number, "unknown model '" + std::string(fields[0]) + "'");
  }
  stat.model = *model;
  const int k = parse_number<int>(fields[1], line_number, "k");

  for (int i = 0; i < kCsvMaxMiners; ++i) {
    if (fields[2 + i].empty()) break;
    stat.powers.powers.push_back(
        parse_number<double>(fields[2 + i], line_number, "m"));
  }
  const int n = static_cast<int>(stat.powers.powers.size());
  for (int i = n; i < kCsvMaxMiners; ++i) {
    if (!fields[2 + i].empty()) {
      malformed(line_number, "power columns must be filled left to right");
    }
  }
  stat.powers.difficulty = parse_number<double>(fields[6], line_number, "d");
  stat.powers.selfish_count = k;
  // Six printed digits can leave the sum a few 1e-7 off; give the rounding
  // residue to the honest miner.
  if (n > 0) {
    double sum = 0.0;
    for (double m : stat.powers.powers) sum += m;
    if (std::abs(sum - 1.0) > kPowerSumTolerance &&
        std::abs(sum - 1.0) <= 1e-5) {
      stat.powers.powers.back() += 1.0 - sum;
    }
  }
  try {
    stat.powers.validate();
  } catch (const Error& e) {
    malformed(line_number, e.what());
  }
  stat.timesteps = parse_number<std::int64_t>(fields[7], line_number, "T");
  stat.repetitions = parse_number<int>(fields[8], line_number, "R");
  stat.seed = parse_number<std::uint64_t>(fields[9], line_number, "seed");

  for (int block = 0; block < 2; ++block) {
    auto& column = block == 0 ? stat.mean : stat.ci_half_width;
    const std::string_view name = block == 0 ? "mean" : "ci";
    for (int i = 0; i < kCsvMaxMiners; ++i) {
      const auto field = fields[10 + block * kCsvMaxMiners + i];
      if (i < n) {
        column.push_back(parse_number<double>(field, line_number, name));
      } else if (!field.empty()) {
        malformed(line_number, std::string(name) + " column for absent miner");
      }
    }
  }
  return stat;
}

std::vector<SweepStatistic> read_results(std::istream& in) {
  std::string line;
  std::size_t line_number = 0;
  bool header_seen = false;
  std::vector<SweepStatistic> out;
  while (std::getline(in, line)) {
    ++line_number;
    const std::string_view view = strip_cr(line);
    if (view.empty()) continue;
    if (!header_seen) {
      if (view != kResultsHeader) {
        malformed(line_number, "unexpected header");
      }
      header_seen = true;
      continue;
    }
    out.push_back(parse_row(view, line_number));
  }
  if (!header_seen) malformed(line_number + 1, "missing header");
  return out;
}

std::vector<SweepStatistic> read_results_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::kMalformedCsv, "cannot open " + path);
  }
  return read_results(in);
}

void write_results(std::ostream& out, std::span<const SweepStatistic> stats,
                   bool with_header) {
  if (with_header) out << kResultsHeader << '\n';
  for (const auto& s : stats) out << format_row(s) << '\n';
}

}  // namespace smsim
