#include "smsim/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <tuple>

#include "smsim/error.hpp"

namespace smsim {
namespace {

// Lattice values compared at 1e-6 resolution, matching the CSV precision.
using Key = long long;
Key key_of(double x) { return std::llround(x * 1e6); }
double value_of(Key k) { return static_cast<double>(k) / 1e6; }

std::vector<Key> power_key(const SweepStatistic& s) {
  std::vector<Key> out;
  out.reserve(s.powers.powers.size());
  for (double m : s.powers.powers) out.push_back(key_of(m));
  return out;
}

// Deterministic pick among several candidate configurations.
const SweepStatistic& first_by_powers(
    const std::vector<const SweepStatistic*>& candidates) {
  return **std::min_element(candidates.begin(), candidates.end(),
                            [](const SweepStatistic* a, const SweepStatistic* b) {
                              return power_key(*a) < power_key(*b);
                            });
}

std::vector<const SweepStatistic*> selfish_rows(
    std::span<const SweepStatistic> grid) {
  std::vector<const SweepStatistic*> rows;
  for (const auto& s : grid) {
    if (s.selfish_count() >= 1) rows.push_back(&s);
  }
  if (rows.empty()) {
    throw Error(ErrorCode::kEmptyGrid, "no configurations with selfish miners");
  }
  return rows;
}

struct Bounds {
  std::optional<Key> lower;
  std::optional<Key> upper;
  std::vector<const SweepStatistic*> lower_witnesses;
  std::vector<const SweepStatistic*> upper_witnesses;
};

// Groups rows by `coordinate`; "good" rows satisfy `good`.  lower = least
// coordinate with a good row; upper = least c such that every row with
// coordinate >= c is good.
template <class Coord, class Good>
Bounds scan_bounds(const std::vector<const SweepStatistic*>& rows,
                   Coord coordinate, Good good) {
  std::map<Key, std::vector<const SweepStatistic*>> groups;
  for (const auto* s : rows) groups[key_of(coordinate(*s))].push_back(s);

  Bounds b;
  for (const auto& [k, members] : groups) {
    std::vector<const SweepStatistic*> hits;
    for (const auto* s : members) {
      if (good(*s)) hits.push_back(s);
    }
    if (!hits.empty()) {
      b.lower = k;
      b.lower_witnesses = std::move(hits);
      break;
    }
  }

  std::optional<Key> last_bad;
  for (auto it = groups.rbegin(); it != groups.rend(); ++it) {
    std::vector<const SweepStatistic*> misses;
    for (const auto* s : it->second) {
      if (!good(*s)) misses.push_back(s);
    }
    if (!misses.empty()) {
      last_bad = it->first;
      b.upper_witnesses = std::move(misses);
      break;
    }
  }
  if (!last_bad) {
    b.upper = groups.begin()->first;
  } else {
    auto next = groups.upper_bound(*last_bad);
    if (next != groups.end()) b.upper = next->first;
  }
  return b;
}

// Fritsch-Carlson derivatives, with the three-point shape-preserving end
// conditions.
std::vector<double> pchip_slopes(const std::vector<double>& x,
                                 const std::vector<double>& y) {
  const std::size_t n = x.size();
  std::vector<double> h(n - 1), delta(n - 1), d(n, 0.0);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    h[k] = x[k + 1] - x[k];
    delta[k] = (y[k + 1] - y[k]) / h[k];
  }
  if (n == 2) {
    d[0] = d[1] = delta[0];
    return d;
  }
  for (std::size_t k = 1; k + 1 < n; ++k) {
    if (delta[k - 1] * delta[k] <= 0.0) continue;
    const double w1 = 2.0 * h[k] + h[k - 1];
    const double w2 = h[k] + 2.0 * h[k - 1];
    d[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
  }
  auto edge = [](double h0, double h1, double m0, double m1) {
    double e = ((2.0 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
    if (std::signbit(e) != std::signbit(m0) || m0 == 0.0) {
      e = 0.0;
    } else if (std::signbit(m0) != std::signbit(m1) &&
               std::abs(e) > 3.0 * std::abs(m0)) {
      e = 3.0 * m0;
    }
    return e;
  };
  d[0] = edge(h[0], h[1], delta[0], delta[1]);
  d[n - 1] = edge(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
  return d;
}

double hermite(double x0, double x1, double y0, double y1, double d0, double d1,
               double x) {
  const double h = x1 - x0;
  const double t = (x - x0) / h;
  const double t2 = t * t;
  const double t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * h * d0 +
         (-2 * t3 + 3 * t2) * y1 + (t3 - t2) * h * d1;
}

}  // namespace

ThresholdReport threshold_bounds(std::span<const SweepStatistic> grid) {
  const auto rows = selfish_rows(grid);
  const Bounds b = scan_bounds(
      rows, [](const SweepStatistic& s) { return s.power(1); },
      [](const SweepStatistic& s) { return s.profits(1); });
  ThresholdReport r;
  if (b.lower) {
    r.lower_bound = value_of(*b.lower);
    r.lower_witness = first_by_powers(b.lower_witnesses);
  }
  if (b.upper) r.upper_bound = value_of(*b.upper);
  if (!b.upper_witnesses.empty()) {
    r.upper_witness = first_by_powers(b.upper_witnesses);
  }
  return r;
}

std::string_view to_string(NashClass c) {
  switch (c) {
    case NashClass::kStable:
      return "stable";
    case NashClass::kUnstable:
      return "unstable";
    case NashClass::kNone:
      break;
  }
  return "none";
}

NashClass classify_equal_power(const SweepStatistic& stat) {
  const double m = stat.power(1);
  bool stable = true;
  for (MinerIndex i = 1; i <= stat.selfish_count(); ++i) {
    if (!(stat.mean_of(i) > m)) return NashClass::kNone;
    if (!(stat.ci_lower(i) > m)) stable = false;
  }
  return stable ? NashClass::kStable : NashClass::kUnstable;
}

NashReport nash_classify(std::span<const SweepStatistic> scan) {
  NashReport report;
  for (const auto& s : scan) {
    if (s.selfish_count() < 2) continue;
    const Key m = key_of(s.power(1));
    bool equal = true;
    for (MinerIndex i = 2; i <= s.selfish_count(); ++i) {
      equal = equal && key_of(s.power(i)) == m;
    }
    if (!equal) continue;
    report.points.push_back(NashPoint{s.power(1), classify_equal_power(s), s});
  }
  if (report.points.empty()) {
    throw Error(ErrorCode::kEmptyGrid,
                "no equal-power configurations with two or more selfish miners");
  }
  std::stable_sort(report.points.begin(), report.points.end(),
                   [](const NashPoint& a, const NashPoint& b) {
                     return key_of(a.power) < key_of(b.power);
                   });

  const auto& pts = report.points;
  std::size_t i = 0;
  while (i < pts.size() && pts[i].classification != NashClass::kStable) ++i;
  std::size_t after_stable = 0;
  if (i < pts.size()) {
    std::size_t j = i;
    while (j + 1 < pts.size() &&
           pts[j + 1].classification == NashClass::kStable) {
      ++j;
    }
    report.stable_range = LatticeRange{pts[i].power, pts[j].power};
    after_stable = j + 1;
  }
  std::optional<std::size_t> first_unstable;
  std::optional<std::size_t> last_unstable;
  for (std::size_t k = after_stable; k < pts.size(); ++k) {
    if (pts[k].classification == NashClass::kUnstable) {
      if (!first_unstable) first_unstable = k;
      last_unstable = k;
    }
  }
  if (first_unstable) {
    report.unstable_range =
        LatticeRange{pts[*first_unstable].power, pts[*last_unstable].power};
  }
  return report;
}

SafetyReport safety_bounds(std::span<const SweepStatistic> grid) {
  const auto rows = selfish_rows(grid);
  const Bounds b = scan_bounds(
      rows, [](const SweepStatistic& s) { return s.honest_power(); },
      [](const SweepStatistic& s) { return !s.any_selfish_profits(); });
  SafetyReport r;
  if (b.lower) {
    r.lower_bound = value_of(*b.lower);
    r.lower_witness = first_by_powers(b.lower_witnesses);
  }
  if (b.upper) r.upper_bound = value_of(*b.upper);
  if (!b.upper_witnesses.empty()) {
    r.upper_witness = first_by_powers(b.upper_witnesses);
  }
  return r;
}

std::vector<MinPowerRow> min_power_table(std::span<const SweepStatistic> grid) {
  std::vector<SweepStatistic> three;
  for (const auto& s : grid) {
    if (s.selfish_count() == 3) three.push_back(s);
  }
  if (three.empty()) {
    throw Error(ErrorCode::kEmptyGrid, "no 3-selfish-miner configurations");
  }
  const ThresholdReport t = threshold_bounds(three);
  std::vector<MinPowerRow> rows;
  if (!t.lower_bound) return rows;
  const Key m1 = key_of(*t.lower_bound);

  std::map<Key, std::map<Key, const SweepStatistic*>> by_m2;
  for (const auto& s : three) {
    if (key_of(s.power(1)) != m1) continue;
    by_m2[key_of(s.power(2))].emplace(key_of(s.power(3)), &s);
  }
  for (const auto& [m2, by_m3] : by_m2) {
    std::optional<Key> run_lo;
    Key run_hi = 0;
    auto close = [&] {
      if (run_lo) {
        rows.push_back(MinPowerRow{value_of(m1), value_of(m2),
                                   {value_of(*run_lo), value_of(run_hi)}});
        run_lo.reset();
      }
    };
    for (const auto& [m3, s] : by_m3) {
      if (s->profits(1)) {
        if (!run_lo) run_lo = m3;
        run_hi = m3;
      } else {
        close();
      }
    }
    close();
  }
  return rows;
}

std::vector<CurvePoint> threshold_curve(std::span<const SweepStatistic> grid) {
  std::map<Key, CurvePoint> points;
  for (const auto& s : grid) {
    if (s.selfish_count() != 1) continue;
    points.emplace(key_of(s.power(1)), CurvePoint{s.power(1), s.mean_of(1)});
  }
  std::vector<CurvePoint> out;
  for (const auto& [k, p] : points) out.push_back(p);
  return out;
}

double interpolate_threshold(std::span<const CurvePoint> curve) {
  std::vector<CurvePoint> pts(curve.begin(), curve.end());
  std::sort(pts.begin(), pts.end(), [](const CurvePoint& a, const CurvePoint& b) {
    return a.power < b.power;
  });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](const CurvePoint& a, const CurvePoint& b) {
                          return key_of(a.power) == key_of(b.power);
                        }),
            pts.end());
  if (pts.size() < 2) {
    throw Error(ErrorCode::kNoSignChange, "need at least two curve points");
  }
  std::vector<double> x, f;
  for (const auto& p : pts) {
    x.push_back(p.power);
    f.push_back(p.mean - p.power);
  }
  std::size_t cell = x.size();
  for (std::size_t k = 0; k + 1 < x.size(); ++k) {
    if (f[k] <= 0.0 && f[k + 1] > 0.0) {
      cell = k;
      break;
    }
  }
  if (cell == x.size()) {
    throw Error(ErrorCode::kNoSignChange,
                "mean reward never crosses the fair share from below");
  }
  if (f[cell] == 0.0) return x[cell];

  const auto d = pchip_slopes(x, f);
  double lo = x[cell];
  double hi = x[cell + 1];
  auto eval = [&](double at) {
    return hermite(x[cell], x[cell + 1], f[cell], f[cell + 1], d[cell],
                   d[cell + 1], at);
  };
  for (int iter = 0; iter < 200 && hi - lo > 1e-15; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (eval(mid) > 0.0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double oracle_revenue(double alpha, double gamma) {
  if (!(alpha >= 0.0 && alpha < 0.5)) {
    throw Error(ErrorCode::kDomainError, "alpha must lie in [0, 0.5)");
  }
  if (!(gamma >= 0.0 && gamma <= 1.0)) {
    throw Error(ErrorCode::kDomainError, "gamma must lie in [0, 1]");
  }
  const double a = alpha;
  const double num =
      a * (1 - a) * (1 - a) * (4 * a + gamma * (1 - 2 * a)) - a * a * a;
  const double den = 1 - a * (1 + (2 - a) * a);
  return num / den;
}

double oracle_threshold(double gamma) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) {
    throw Error(ErrorCode::kDomainError, "gamma must lie in [0, 1]");
  }
  return (1 - gamma) / (3 - 2 * gamma);
}

std::vector<SweepStatistic> expand_symmetric(
    std::span<const SweepStatistic> stats) {
  using Id = std::tuple<MiningModel, int, std::vector<Key>>;
  std::set<Id> seen;
  for (const auto& s : stats) {
    seen.emplace(s.model, s.selfish_count(), power_key(s));
  }
  std::vector<SweepStatistic> out(stats.begin(), stats.end());
  for (const auto& s : stats) {
    const int k = s.selfish_count();
    std::vector<int> perm(k);
    std::iota(perm.begin(), perm.end(), 0);
    while (std::next_permutation(perm.begin(), perm.end())) {
      SweepStatistic p = s;
      for (int j = 0; j < k; ++j) {
        p.powers.powers[j] = s.powers.powers[perm[j]];
        p.mean[j] = s.mean[perm[j]];
        p.ci_half_width[j] = s.ci_half_width[perm[j]];
      }
      if (seen.emplace(p.model, k, power_key(p)).second) {
        out.push_back(std::move(p));
      }
    }
  }
  return out;
}

std::vector<SummaryRow> summarize(std::span<const SweepStatistic> stats) {
  std::map<std::pair<int, int>, std::vector<SweepStatistic>> groups;
  for (const auto& s : stats) {
    if (s.selfish_count() < 1) continue;
    groups[{static_cast<int>(s.model), s.selfish_count()}].push_back(s);
  }
  if (groups.empty()) {
    throw Error(ErrorCode::kEmptyGrid, "no configurations with selfish miners");
  }
  std::vector<SummaryRow> out;
  for (const auto& [id, members] : groups) {
    SummaryRow row;
    row.model = static_cast<MiningModel>(id.first);
    row.selfish_count = id.second;
    row.threshold = threshold_bounds(members);
    row.safety = safety_bounds(members);
    if (row.selfish_count >= 2) {
      try {
        row.nash = nash_classify(members);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kEmptyGrid) throw;
      }
    }
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace smsim
