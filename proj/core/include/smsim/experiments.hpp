#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "smsim/engine.hpp"

namespace smsim {

inline constexpr std::uint64_t kDefaultBaseSeed = 20190101;
inline constexpr double kCiMultiplier = 1.96;

// Mean reward and 95% CI half-width per miner over a set of seeded runs.
struct SweepStatistic {
  MiningModel model = MiningModel::kConcurrent;
  PowerConfiguration powers;
  std::int64_t timesteps = 0;
  int repetitions = 0;
  // Runs used seeds seed, seed+1, ..., seed+repetitions-1.
  std::uint64_t seed = 0;
  std::vector<double> mean;
  std::vector<double> ci_half_width;

  int selfish_count() const { return powers.selfish_count; }
  int miner_count() const { return powers.miner_count(); }
  double power(MinerIndex i) const { return powers.power(i); }
  double honest_power() const { return powers.powers.back(); }
  double mean_of(MinerIndex i) const { return mean[i - 1]; }
  double ci_lower(MinerIndex i) const {
    return mean[i - 1] - ci_half_width[i - 1];
  }
  // Strictly more than its fair share on the point estimate.
  bool profits(MinerIndex i) const { return mean_of(i) > power(i); }
  bool any_selfish_profits() const;
};

struct Moments {
  double mean = 0.0;
  double ci_half_width = 0.0;
};

// Sample mean and 1.96 * s / sqrt(n), s with n-1 degrees of freedom.
Moments sample_moments(const std::vector<double>& xs);

// R runs with seeds base_seed+0..base_seed+R-1.  Runs are spread over
// `workers` threads; the result does not depend on the worker count.
// Throws kInvalidRunConfig for R < 2.
SweepStatistic run_repetitions(const PowerConfiguration& powers,
                               const RunConfig& config, int repetitions,
                               std::uint64_t base_seed, int workers = 1);

struct GridSpec {
  int selfish_count = 1;
  double granularity = 0.01;
  std::int64_t timesteps = 200'000;
  int repetitions = 100;
  double difficulty = 0.5;
  MiningModel model = MiningModel::kConcurrent;
  std::uint64_t base_seed = kDefaultBaseSeed;
  bool flush_at_end = true;
  // Only m_1 >= m_2 >= ... >= m_k.  Selfish miners are exchangeable, so the
  // rest of the lattice follows by permutation (see expand_symmetric).
  bool canonical_only = false;

  // Number of lattice cells, 1 / granularity.  Throws kEmptyGrid when the
  // granularity does not divide [0, 1].
  int divisions() const;
};

// Selfish powers in lattice units; the honest miner takes the remainder.
struct LatticePoint {
  std::vector<int> units;
  friend bool operator==(const LatticePoint&, const LatticePoint&) = default;
};

// All points with every m_i > 0 and sum < 1.  Throws kEmptyGrid.
std::vector<LatticePoint> grid_points(const GridSpec& spec);
// Points with m_1 = ... = m_k and k*m < 1.  Throws kEmptyGrid (also for k < 2).
std::vector<LatticePoint> equal_power_points(const GridSpec& spec);

PowerConfiguration to_powers(const GridSpec& spec, const LatticePoint& point);

// Pure function of (base seed, k, lattice indices).
std::uint64_t point_seed(const GridSpec& spec, const LatticePoint& point);

// Statistic for a lattice point with everything but the measurements filled
// in; used to derive resume keys before running.
SweepStatistic describe_point(const GridSpec& spec, const LatticePoint& point);

struct SweepOptions {
  int workers = 1;
  // Return true to skip a point (e.g. already present in a results file).
  std::function<bool(const SweepStatistic& described)> skip;
  // Called once per finished point, serialized, in completion order.
  std::function<void(const SweepStatistic&)> on_complete;
};

// Runs every point; returns the finished statistics in lattice order.
std::vector<SweepStatistic> sweep_points(const GridSpec& spec,
                                         const std::vector<LatticePoint>& pts,
                                         const SweepOptions& options = {});

std::vector<SweepStatistic> sweep_grid(const GridSpec& spec,
                                       const SweepOptions& options = {});
std::vector<SweepStatistic> equal_power_scan(const GridSpec& spec,
                                             const SweepOptions& options = {});

}  // namespace smsim
