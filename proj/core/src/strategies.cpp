#include "smsim/strategies.hpp"

#include <string>

#include "smsim/error.hpp"

namespace smsim {
namespace {

void require_parent(const Block& block, BlockId expected) {
  if (block.parent != expected) {
    throw Error(ErrorCode::kParentMismatch,
                "block " + std::to_string(block.id) +
                    " was not mined on the miner's base " +
                    std::to_string(expected));
  }
}

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

}  // namespace

PublishAction HonestMiner::on_self_mined(const Block& block) {
  require_parent(block, tip_.id);
  tip_ = TipRef::of(block);
  return PublishAction{{block.id}};
}

void HonestMiner::on_received(const Block& block) {
  if (block.height > tip_.height) {
    tip_ = TipRef::of(block);
  }
}

PublishAction SelfishMiner::on_self_mined(const Block& block) {
  require_parent(block, private_.id);
  const long lead_before = lead();
  branch_.push_back(block.id);
  private_ = TipRef::of(block);

  // Tie race won: the second block on the branch settles it.
  if (lead_before == 0 && branch_.size() == 2) {
    return publish_all();
  }
  return {};
}

PublishAction SelfishMiner::on_received(const Block& block) {
  if (block.height <= public_.height) {
    return {};
  }
  const long lead_before = lead();
  public_ = TipRef::of(block);

  if (lead_before <= 0) {
    reset_to(public_);
    return {};
  }
  if (lead_before == 1) {
    // Match the new public block with the last private one: state 0'.
    if (published_ == branch_.size()) {
      return {};
    }
    PublishAction action{{branch_.back()}};
    published_ = branch_.size();
    return action;
  }
  if (lead_before == 2) {
    return publish_all();
  }
  PublishAction action{{branch_[published_]}};
  ++published_;
  return action;
}

PublishAction SelfishMiner::flush() { return publish_all(); }

PublishAction SelfishMiner::publish_all() {
  auto rest = unpublished();
  PublishAction action{{rest.begin(), rest.end()}};
  reset_to(private_);
  return action;
}

void SelfishMiner::reset_to(TipRef tip) {
  public_ = tip;
  private_ = tip;
  branch_.clear();
  published_ = 0;
}

Strategy make_strategy(StrategyKind kind, const Block& genesis) {
  if (kind == StrategyKind::kSelfish) {
    return SelfishMiner(genesis);
  }
  return HonestMiner(genesis);
}

StrategyKind kind_of(const Strategy& s) {
  return std::holds_alternative<SelfishMiner>(s) ? StrategyKind::kSelfish
                                                 : StrategyKind::kHonest;
}

BlockId mining_base(const Strategy& s) {
  return std::visit([](const auto& m) { return m.mining_base(); }, s);
}

PublishAction on_self_mined(Strategy& s, const Block& block) {
  return std::visit([&](auto& m) { return m.on_self_mined(block); }, s);
}

PublishAction on_received(Strategy& s, const Block& block) {
  return std::visit(
      Overloaded{[&](HonestMiner& m) {
                   m.on_received(block);
                   return PublishAction{};
                 },
                 [&](SelfishMiner& m) { return m.on_received(block); }},
      s);
}

PublishAction flush(Strategy& s) {
  return std::visit(Overloaded{[](HonestMiner&) { return PublishAction{}; },
                               [](SelfishMiner& m) { return m.flush(); }},
                    s);
}

}  // namespace smsim
