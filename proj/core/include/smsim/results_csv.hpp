#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "smsim/experiments.hpp"

namespace smsim {

// One row per SweepStatistic.  Columns for miners beyond N are empty.
inline constexpr std::string_view kResultsHeader =
    "model,k,m1,m2,m3,m4,d,T,R,seed,mean_1,mean_2,mean_3,mean_4,"
    "ci_1,ci_2,ci_3,ci_4";
inline constexpr int kCsvMaxMiners = 4;

// Fixed-point, 6 fractional digits.
std::string format_decimal(double value);

std::string format_row(const SweepStatistic& stat);

// Identity of a row: everything except the measured columns.
std::string result_key(const SweepStatistic& stat);

// Throws kMalformedCsv with the line number in the message.
SweepStatistic parse_row(std::string_view line, std::size_t line_number);

// Reads a results file including its header.  Blank lines are ignored.
// Throws kMalformedCsv.
std::vector<SweepStatistic> read_results(std::istream& in);
std::vector<SweepStatistic> read_results_file(const std::string& path);

void write_results(std::ostream& out, std::span<const SweepStatistic> stats,
                   bool with_header = true);

}  // namespace smsim
