#include "smsim/engine.hpp"

#include <cmath>
#include <numeric>
#include <sstream>
#include <string>

#include "smsim/error.hpp"

namespace smsim {

std::string_view to_string(MiningModel model) {
  return model == MiningModel::kConcurrent ? "concurrent" : "conventional";
}

std::optional<MiningModel> parse_model(std::string_view text) {
  if (text == "concurrent") return MiningModel::kConcurrent;
  if (text == "conventional") return MiningModel::kConventional;
  return std::nullopt;
}

PowerConfiguration PowerConfiguration::with_selfish(std::vector<double> powers,
                                                    double difficulty) {
  PowerConfiguration pc;
  pc.selfish_count = static_cast<int>(powers.size()) - 1;
  pc.powers = std::move(powers);
  pc.difficulty = difficulty;
  pc.validate();
  return pc;
}

PowerConfiguration PowerConfiguration::all_honest(std::vector<double> powers,
                                                  double difficulty) {
  PowerConfiguration pc;
  pc.powers = std::move(powers);
  pc.difficulty = difficulty;
  pc.selfish_count = 0;
  pc.validate();
  return pc;
}

void PowerConfiguration::validate() const {
  auto fail = [](const std::string& msg) {
    throw Error(ErrorCode::kInvalidPowerConfiguration, msg);
  };
  if (powers.empty()) fail("power configuration has no miners");
  for (double m : powers) {
    if (!(m >= 0.0 && m <= 1.0)) {
      std::ostringstream os;
      os << "relative power " << m << " outside [0,1]";
      fail(os.str());
    }
  }
  const double sum = std::accumulate(powers.begin(), powers.end(), 0.0);
  if (std::abs(sum - 1.0) > kPowerSumTolerance) {
    std::ostringstream os;
    os.precision(12);
    os << "relative powers must satisfy sum(m) = 1, got " << sum;
    fail(os.str());
  }
  if (!(difficulty >= 0.0 && difficulty <= 1.0)) {
    std::ostringstream os;
    os << "difficulty d=" << difficulty << " outside [0,1]";
    fail(os.str());
  }
  if (selfish_count < 0 || selfish_count >= miner_count()) {
    fail("selfish_count must be in [0, N-1] so that miner N is honest");
  }
}

void RunConfig::validate() const {
  if (timesteps < 1) {
    throw Error(ErrorCode::kInvalidRunConfig, "timesteps must be >= 1");
  }
}

Simulation::Simulation(const PowerConfiguration& powers,
                       const RunConfig& config)
    : powers_(powers), config_(config), rng_(config.seed) {
  powers_.validate();
  config_.validate();

  // Expected block count, to avoid regrowing the tree mid-run.
  const double rate = config_.model == MiningModel::kConcurrent
                          ? powers_.difficulty
                          : 1.0;
  tree_.reserve(static_cast<std::size_t>(
      rate * static_cast<double>(config_.timesteps) * 1.1 + 16));
  const Block& genesis = tree_.insert(0, std::nullopt, kGenesisOwner);
  const int n = powers_.miner_count();
  miners_.reserve(n);
  for (MinerIndex i = 1; i <= n; ++i) {
    miners_.push_back(make_strategy(powers_.kind(i), genesis));
  }
  cumulative_.resize(n);
  std::partial_sum(powers_.powers.begin(), powers_.powers.end(),
                   cumulative_.begin());
}

void Simulation::step() {
  if (config_.model == MiningModel::kConcurrent) {
    step_concurrent();
  } else {
    step_conventional();
  }
}

void Simulation::step_concurrent() {
  const int n = powers_.miner_count();
  for (MinerIndex i = 1; i <= n; ++i) {
    if (rng_.bernoulli(powers_.success_probability(i))) {
      mine(i);
    }
  }
  deliver();
  ++timestep_;
}

void Simulation::step_conventional() {
  const double u = rng_.uniform01() * cumulative_.back();
  MinerIndex winner = powers_.miner_count();
  for (std::size_t i = 0; i < cumulative_.size(); ++i) {
    if (u < cumulative_[i]) {
      winner = static_cast<MinerIndex>(i + 1);
      break;
    }
  }
  mine(winner);
  deliver();
  ++timestep_;
}

void Simulation::step_with_winners(std::span<const MinerIndex> winners) {
  for (MinerIndex i : winners) {
    mine(i);
  }
  deliver();
  ++timestep_;
}

void Simulation::mine(MinerIndex i) {
  Strategy& s = miners_[i - 1];
  const Block& block = tree_.append(mining_base(s), i);
  ++blocks_mined_;
  enqueue(i, on_self_mined(s, block));
}

void Simulation::enqueue(MinerIndex sender, PublishAction&& action) {
  if (action.empty()) return;
  if (observer_) observer_(sender, action.blocks);
  // A sender's reactions within one round travel as one ordered message.
  if (!next_.empty() && next_.back().sender == sender) {
    auto& blocks = next_.back().blocks;
    blocks.insert(blocks.end(), action.blocks.begin(), action.blocks.end());
    return;
  }
  next_.push_back(Message{sender, std::move(action.blocks)});
}

void Simulation::deliver() {
  const int n = powers_.miner_count();
  while (!next_.empty()) {
    pending_.swap(next_);
    next_.clear();
    for (MinerIndex r = 1; r <= n; ++r) {
      order_.resize(pending_.size());
      std::iota(order_.begin(), order_.end(), std::size_t{0});
      if (order_.size() > 1) rng_.shuffle(std::span<std::size_t>(order_));
      Strategy& recipient = miners_[r - 1];
      for (std::size_t m : order_) {
        const Message& msg = pending_[m];
        if (msg.sender == r) continue;
        for (BlockId id : msg.blocks) {
          enqueue(r, on_received(recipient, tree_.at(id)));
        }
      }
    }
    pending_.clear();
  }
}

void Simulation::flush_all() {
  const int n = powers_.miner_count();
  for (MinerIndex i = 1; i <= n; ++i) {
    enqueue(i, flush(miners_[i - 1]));
  }
  deliver();
  flushed_ = true;
}

RunOutcome Simulation::run_to_completion() {
  while (timestep_ < config_.timesteps) {
    step();
  }
  if (config_.flush_at_end && !flushed_) {
    flush_all();
  }
  return outcome();
}

RunOutcome Simulation::outcome() const {
  const auto& honest = std::get<HonestMiner>(miners_.back());
  RunOutcome out;
  out.winning_tip = honest.adopted_tip().id;
  out.chain_length = honest.adopted_tip().height;
  out.blocks_mined = blocks_mined_;
  const int n = powers_.miner_count();
  out.blocks_per_miner.assign(n, 0);
  out.rewards.assign(n, 0.0);
  for (const auto& [owner, count] : tree_.owner_counts(out.winning_tip)) {
    out.blocks_per_miner[owner - 1] = count;
  }
  if (out.chain_length > 0) {
    for (int i = 0; i < n; ++i) {
      out.rewards[i] = static_cast<double>(out.blocks_per_miner[i]) /
                       static_cast<double>(out.chain_length);
    }
  }
  return out;
}

RunOutcome run(const RunConfig& config, const PowerConfiguration& powers,
               PublishObserver observer) {
  Simulation sim(powers, config);
  if (observer) sim.set_publish_observer(std::move(observer));
  return sim.run_to_completion();
}

}  // namespace smsim
