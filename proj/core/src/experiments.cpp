#include "smsim/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <numeric>
#include <optional>
#include <string>
#include <thread>

#include "smsim/error.hpp"
#include "smsim/rng.hpp"

namespace smsim {
namespace {

// Runs body(i) for i in [0, count) on up to `workers` threads.
template <class Body>
void parallel_for(std::size_t count, int workers, Body&& body) {
  const std::size_t threads =
      std::min<std::size_t>(count, static_cast<std::size_t>(std::max(1, workers)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
        next = count;
      }
    }
  };
  std::vector<std::jthread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

void enumerate(int k, int remaining, int max_part, std::vector<int>& prefix,
               bool canonical, std::vector<LatticePoint>& out) {
  if (static_cast<int>(prefix.size()) == k) {
    out.push_back(LatticePoint{prefix});
    return;
  }
  const int slots_left = k - static_cast<int>(prefix.size()) - 1;
  // Leave at least one unit per remaining selfish miner and one for honest.
  const int hi = std::min(max_part, remaining - slots_left - 1);
  for (int u = 1; u <= hi; ++u) {
    prefix.push_back(u);
    enumerate(k, remaining - u, canonical ? u : max_part, prefix, canonical,
              out);
    prefix.pop_back();
  }
}

}  // namespace

bool SweepStatistic::any_selfish_profits() const {
  for (MinerIndex i = 1; i <= selfish_count(); ++i) {
    if (profits(i)) return true;
  }
  return false;
}

Moments sample_moments(const std::vector<double>& xs) {
  Moments m;
  if (xs.empty()) return m;
  const double n = static_cast<double>(xs.size());
  m.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  if (xs.size() < 2) return m;
  double ss = 0.0;
  for (double x : xs) ss += (x - m.mean) * (x - m.mean);
  const double s = std::sqrt(ss / (n - 1.0));
  m.ci_half_width = kCiMultiplier * s / std::sqrt(n);
  return m;
}

SweepStatistic run_repetitions(const PowerConfiguration& powers,
                               const RunConfig& config, int repetitions,
                               std::uint64_t base_seed, int workers) {
  if (repetitions < 2) {
    throw Error(ErrorCode::kInvalidRunConfig,
                "at least 2 repetitions are needed for a confidence interval");
  }
  powers.validate();
  config.validate();

  const int n = powers.miner_count();
  std::vector<std::vector<double>> rewards(repetitions);
  parallel_for(static_cast<std::size_t>(repetitions), workers,
               [&](std::size_t r) {
                 RunConfig rc = config;
                 rc.seed = base_seed + r;
                 rewards[r] = run(rc, powers).rewards;
               });

  SweepStatistic stat;
  stat.model = config.model;
  stat.powers = powers;
  stat.timesteps = config.timesteps;
  stat.repetitions = repetitions;
  stat.seed = base_seed;
  stat.mean.resize(n);
  stat.ci_half_width.resize(n);
  std::vector<double> column(repetitions);
  for (int i = 0; i < n; ++i) {
    for (int r = 0; r < repetitions; ++r) column[r] = rewards[r][i];
    const Moments m = sample_moments(column);
    stat.mean[i] = m.mean;
    stat.ci_half_width[i] = m.ci_half_width;
  }
  return stat;
}

int GridSpec::divisions() const {
  if (!(granularity > 0.0 && granularity <= 1.0)) {
    throw Error(ErrorCode::kEmptyGrid, "granularity must be in (0, 1]");
  }
  const double cells = 1.0 / granularity;
  const long rounded = std::lround(cells);
  if (std::abs(cells - static_cast<double>(rounded)) > 1e-6) {
    throw Error(ErrorCode::kEmptyGrid,
                "granularity " + std::to_string(granularity) +
                    " does not divide [0, 1]");
  }
  return static_cast<int>(rounded);
}

std::vector<LatticePoint> grid_points(const GridSpec& spec) {
  if (spec.selfish_count < 1) {
    throw Error(ErrorCode::kEmptyGrid, "grid needs at least one selfish miner");
  }
  const int n = spec.divisions();
  std::vector<LatticePoint> out;
  std::vector<int> prefix;
  enumerate(spec.selfish_count, n, n, prefix, spec.canonical_only, out);
  if (out.empty()) {
    throw Error(ErrorCode::kEmptyGrid, "granularity too coarse for " +
                                           std::to_string(spec.selfish_count) +
                                           " selfish miners");
  }
  return out;
}

std::vector<LatticePoint> equal_power_points(const GridSpec& spec) {
  if (spec.selfish_count < 2) {
    throw Error(ErrorCode::kEmptyGrid,
                "equal-power scan needs at least two selfish miners");
  }
  const int n = spec.divisions();
  std::vector<LatticePoint> out;
  for (int u = 1; spec.selfish_count * u < n; ++u) {
    out.push_back(LatticePoint{std::vector<int>(spec.selfish_count, u)});
  }
  if (out.empty()) {
    throw Error(ErrorCode::kEmptyGrid, "no equal-power lattice points");
  }
  return out;
}

PowerConfiguration to_powers(const GridSpec& spec, const LatticePoint& point) {
  const int n = spec.divisions();
  PowerConfiguration pc;
  int used = 0;
  for (int u : point.units) {
    pc.powers.push_back(static_cast<double>(u) / n);
    used += u;
  }
  pc.powers.push_back(static_cast<double>(n - used) / n);
  pc.difficulty = spec.difficulty;
  pc.selfish_count = static_cast<int>(point.units.size());
  pc.validate();
  return pc;
}

std::uint64_t point_seed(const GridSpec& spec, const LatticePoint& point) {
  std::uint64_t h = hash_combine(spec.base_seed,
                                 static_cast<std::uint64_t>(spec.selfish_count));
  for (int u : point.units) {
    h = hash_combine(h, static_cast<std::uint64_t>(u));
  }
  // Keep room for seed + R without wrapping.
  return h >> 1;
}

SweepStatistic describe_point(const GridSpec& spec, const LatticePoint& point) {
  SweepStatistic stat;
  stat.model = spec.model;
  stat.powers = to_powers(spec, point);
  stat.timesteps = spec.timesteps;
  stat.repetitions = spec.repetitions;
  stat.seed = point_seed(spec, point);
  return stat;
}

std::vector<SweepStatistic> sweep_points(const GridSpec& spec,
                                         const std::vector<LatticePoint>& pts,
                                         const SweepOptions& options) {
  std::vector<std::size_t> todo;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (options.skip && options.skip(describe_point(spec, pts[i]))) continue;
    todo.push_back(i);
  }

  RunConfig rc;
  rc.model = spec.model;
  rc.timesteps = spec.timesteps;
  rc.flush_at_end = spec.flush_at_end;

  std::vector<std::optional<SweepStatistic>> done(pts.size());
  std::mutex sink_mu;
  parallel_for(todo.size(), options.workers, [&](std::size_t j) {
    const std::size_t i = todo[j];
    const SweepStatistic d = describe_point(spec, pts[i]);
    SweepStatistic stat =
        run_repetitions(d.powers, rc, spec.repetitions, d.seed, 1);
    std::lock_guard lock(sink_mu);
    if (options.on_complete) options.on_complete(stat);
    done[i] = std::move(stat);
  });

  std::vector<SweepStatistic> out;
  out.reserve(todo.size());
  for (auto& s : done) {
    if (s) out.push_back(std::move(*s));
  }
  return out;
}

std::vector<SweepStatistic> sweep_grid(const GridSpec& spec,
                                       const SweepOptions& options) {
  return sweep_points(spec, grid_points(spec), options);
}

std::vector<SweepStatistic> equal_power_scan(const GridSpec& spec,
                                             const SweepOptions& options) {
  return sweep_points(spec, equal_power_points(spec), options);
}

}  // namespace smsim
