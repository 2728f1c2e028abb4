#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "smsim/chain.hpp"
#include "smsim/rng.hpp"
#include "smsim/strategies.hpp"

namespace smsim {

enum class MiningModel {
  // Every miner runs its own Bernoulli trial each timestep.
  kConcurrent,
  // Exactly one block per timestep, assigned to a miner by power.
  kConventional,
};

std::string_view to_string(MiningModel model);
std::optional<MiningModel> parse_model(std::string_view text);

inline constexpr double kPowerSumTolerance = 1e-9;

// Relative powers m_1..m_N and difficulty d.  Miners 1..selfish_count run the
// selfish strategy, the rest are honest; miner N is always honest.
struct PowerConfiguration {
  std::vector<double> powers;
  double difficulty = 0.5;
  int selfish_count = 0;

  // Miners 1..N-1 selfish, miner N honest.  Validates.
  static PowerConfiguration with_selfish(std::vector<double> powers,
                                         double difficulty);
  // Every miner honest.  Validates.
  static PowerConfiguration all_honest(std::vector<double> powers,
                                       double difficulty);

  // Throws kInvalidPowerConfiguration.
  void validate() const;

  int miner_count() const { return static_cast<int>(powers.size()); }
  MinerIndex honest_index() const { return miner_count(); }
  double power(MinerIndex i) const { return powers[i - 1]; }
  double success_probability(MinerIndex i) const {
    return powers[i - 1] * difficulty;
  }
  StrategyKind kind(MinerIndex i) const {
    return i <= selfish_count ? StrategyKind::kSelfish : StrategyKind::kHonest;
  }
};

struct RunConfig {
  MiningModel model = MiningModel::kConcurrent;
  std::int64_t timesteps = 200'000;
  std::uint64_t seed = 0;
  bool flush_at_end = true;

  // Throws kInvalidRunConfig.
  void validate() const;
};

struct RunOutcome {
  BlockId winning_tip = 0;
  Height chain_length = 0;
  // Index i-1 holds miner i.
  std::vector<std::uint64_t> blocks_per_miner;
  std::vector<double> rewards;
  std::uint64_t blocks_mined = 0;

  friend bool operator==(const RunOutcome&, const RunOutcome&) = default;
};

// Called once per broadcast message with the sender and its blocks.
using PublishObserver =
    std::function<void(MinerIndex sender, std::span<const BlockId> blocks)>;

// State of one seeded run.  Strictly sequential; independent runs share
// nothing.
class Simulation {
 public:
  Simulation(const PowerConfiguration& powers, const RunConfig& config);

  void set_publish_observer(PublishObserver observer) {
    observer_ = std::move(observer);
  }

  // One timestep of the configured model.
  void step();
  void step_concurrent();
  void step_conventional();

  // Phase A with a fixed set of successful miners (ascending index order),
  // then delivery to quiescence.
  void step_with_winners(std::span<const MinerIndex> winners);

  // Runs the remaining timesteps, flushes if configured, and accounts.
  RunOutcome run_to_completion();

  // Publishes every withheld private branch in one final round.
  void flush_all();

  RunOutcome outcome() const;

  const BlockTree& tree() const { return tree_; }
  const Strategy& miner(MinerIndex i) const { return miners_[i - 1]; }
  const PowerConfiguration& powers() const { return powers_; }
  std::int64_t timestep() const { return timestep_; }

 private:
  struct Message {
    MinerIndex sender;
    std::vector<BlockId> blocks;
  };

  void mine(MinerIndex i);
  void enqueue(MinerIndex sender, PublishAction&& action);
  void deliver();

  PowerConfiguration powers_;
  RunConfig config_;
  Rng rng_;
  BlockTree tree_;
  std::vector<Strategy> miners_;
  std::vector<double> cumulative_;
  std::vector<Message> pending_;
  std::vector<Message> next_;
  std::vector<std::size_t> order_;
  PublishObserver observer_;
  std::int64_t timestep_ = 0;
  std::uint64_t blocks_mined_ = 0;
  bool flushed_ = false;
};

// Executes one full run.  Throws kInvalidPowerConfiguration,
// kInvalidRunConfig.
RunOutcome run(const RunConfig& config, const PowerConfiguration& powers,
               PublishObserver observer = {});

}  // namespace smsim
