#pragma once

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

#include "smsim/chain.hpp"

namespace smsim {

// Blocks to broadcast, in parent order.
struct PublishAction {
  std::vector<BlockId> blocks;

  bool empty() const { return blocks.empty(); }
  friend bool operator==(const PublishAction&, const PublishAction&) = default;
};

struct TipRef {
  BlockId id = 0;
  Height height = 0;

  static TipRef of(const Block& b) { return {b.id, b.height}; }
  friend bool operator==(const TipRef&, const TipRef&) = default;
};

// Nakamoto miner: mines on the highest block it has seen, keeping the
// first-received block on equal height, and publishes every block at once.
class HonestMiner {
 public:
  explicit HonestMiner(const Block& genesis) : tip_(TipRef::of(genesis)) {}

  // Throws kParentMismatch unless block.parent is the adopted tip.
  PublishAction on_self_mined(const Block& block);
  void on_received(const Block& block);

  BlockId mining_base() const { return tip_.id; }
  TipRef adopted_tip() const { return tip_; }

 private:
  TipRef tip_;
};

// Eyal-Sirer selfish miner.
//
// The private branch holds this miner's own blocks since the fork point with
// the public chain, in parent order.  A prefix of it may already have been
// published (state 0' or a lead > 2 drip release); the branch length counts
// those blocks too, the lead is private height minus public height.
class SelfishMiner {
 public:
  explicit SelfishMiner(const Block& genesis)
      : public_(TipRef::of(genesis)), private_(TipRef::of(genesis)) {}

  // Throws kParentMismatch unless block.parent is the private tip.
  PublishAction on_self_mined(const Block& block);

  // `block` is a foreign block; its parent is known to this miner.
  PublishAction on_received(const Block& block);

  // Publishes whatever is still withheld and resets to the private tip.
  PublishAction flush();

  BlockId mining_base() const { return private_.id; }
  TipRef public_tip() const { return public_; }
  TipRef private_tip() const { return private_; }
  long lead() const {
    return static_cast<long>(private_.height) -
           static_cast<long>(public_.height);
  }
  std::size_t private_branch_len() const { return branch_.size(); }
  std::span<const BlockId> private_branch() const { return branch_; }
  std::span<const BlockId> unpublished() const {
    return std::span<const BlockId>(branch_).subspan(published_);
  }

 private:
  PublishAction publish_all();
  void reset_to(TipRef tip);

  TipRef public_;
  TipRef private_;
  std::vector<BlockId> branch_;
  std::size_t published_ = 0;
};

enum class StrategyKind { kHonest, kSelfish };

using Strategy = std::variant<HonestMiner, SelfishMiner>;

Strategy make_strategy(StrategyKind kind, const Block& genesis);
StrategyKind kind_of(const Strategy& s);
BlockId mining_base(const Strategy& s);
PublishAction on_self_mined(Strategy& s, const Block& block);
PublishAction on_received(Strategy& s, const Block& block);
PublishAction flush(Strategy& s);

}  // namespace smsim
