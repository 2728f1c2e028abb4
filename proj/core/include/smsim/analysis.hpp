#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "smsim/experiments.hpp"

namespace smsim {

// "Profiting" throughout means mean U_i > m_i strictly, on point estimates.

struct ThresholdReport {
  // Least m_1 for which some configuration profits miner 1.
  std::optional<double> lower_bound;
  // Least m such that every configuration with m_1 >= m profits miner 1.
  std::optional<double> upper_bound;
  std::optional<SweepStatistic> lower_witness;
  // The non-profiting configuration with the largest m_1, which pins the
  // upper bound from below.
  std::optional<SweepStatistic> upper_witness;
};

// Throws kEmptyGrid.
ThresholdReport threshold_bounds(std::span<const SweepStatistic> grid);

enum class NashClass { kNone, kStable, kUnstable };
std::string_view to_string(NashClass c);

struct LatticeRange {
  double lo = 0.0;
  double hi = 0.0;
  friend bool operator==(const LatticeRange&, const LatticeRange&) = default;
};

struct NashPoint {
  double power = 0.0;
  NashClass classification = NashClass::kNone;
  SweepStatistic stat;
};

struct NashReport {
  std::vector<NashPoint> points;
  // First maximal run of stable points.
  std::optional<LatticeRange> stable_range;
  // From the first unstable point after the stable run to the last unstable
  // point.
  std::optional<LatticeRange> unstable_range;
};

// Equilibrium when every selfish mean exceeds the common power m; stable when
// every CI lower bound does too.  Rows whose selfish powers are not all equal
// are ignored.  Throws kEmptyGrid.
NashClass classify_equal_power(const SweepStatistic& stat);
NashReport nash_classify(std::span<const SweepStatistic> scan);

struct SafetyReport {
  // Least honest power h with some configuration where no selfish miner
  // profits.
  std::optional<double> lower_bound;
  // Least h such that no configuration with honest power >= h profits any
  // selfish miner.
  std::optional<double> upper_bound;
  std::optional<SweepStatistic> lower_witness;
  // A profiting configuration with the largest honest power.
  std::optional<SweepStatistic> upper_witness;
};

// Throws kEmptyGrid.
SafetyReport safety_bounds(std::span<const SweepStatistic> grid);

struct MinPowerRow {
  double m1 = 0.0;
  double m2 = 0.0;
  LatticeRange m3;
};

// For the least profiting m_1 of a 3-selfish grid: each m_2 with the
// contiguous m_3 runs where miner 1 profits.  Throws kEmptyGrid.
std::vector<MinPowerRow> min_power_table(std::span<const SweepStatistic> grid);

struct CurvePoint {
  double power = 0.0;
  double mean = 0.0;
};

// (m_1, mean U_1) of a 1-selfish sweep, ascending.
std::vector<CurvePoint> threshold_curve(std::span<const SweepStatistic> grid);

// Root of f(m) = mean(m) - m from a monotone piecewise-cubic (Fritsch-Carlson)
// interpolant, in the first lattice cell where f goes from <= 0 to > 0.
// Throws kNoSignChange.
double interpolate_threshold(std::span<const CurvePoint> curve);

// Closed-form relative revenue of a single selfish pool with power alpha and
// tie-win share gamma against honest miners.  Throws kDomainError outside
// alpha in [0, 0.5), gamma in [0, 1].
double oracle_revenue(double alpha, double gamma);
// Power at which oracle_revenue(alpha, gamma) = alpha.
double oracle_threshold(double gamma);

// Adds every permutation of the selfish miners of each statistic that is not
// already present.  Turns a canonical-only grid into a full one.
std::vector<SweepStatistic> expand_symmetric(
    std::span<const SweepStatistic> stats);

// One summary line per (model, k) group: thresholds, equal-power equilibria
// and safety levels.
struct SummaryRow {
  MiningModel model = MiningModel::kConcurrent;
  int selfish_count = 0;
  ThresholdReport threshold;
  std::optional<NashReport> nash;
  SafetyReport safety;
};

std::vector<SummaryRow> summarize(std::span<const SweepStatistic> stats);

}  // namespace smsim
