#include "smsim/strategies.hpp"

#include <random>
#include <set>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "smsim/engine.hpp"
#include "smsim/error.hpp"

namespace smsim {
namespace {

using Ids = std::vector<BlockId>;

class StrategyFixture : public ::testing::Test {
 protected:
  BlockTree tree = BlockTree::with_genesis();
  const Block& genesis() { return tree.at(0); }
  const Block& add(BlockId parent, MinerIndex owner) {
    return tree.append(parent, owner);
  }
  // Builds a foreign chain of `n` blocks on `base` and returns its tip.
  BlockId foreign_chain(BlockId base, int n, MinerIndex owner = 9) {
    for (int i = 0; i < n; ++i) base = add(base, owner).id;
    return base;
  }
};

using HonestTest = StrategyFixture;

TEST_F(HonestTest, AdoptsAndPublishesOwnBlocks) {
  HonestMiner h(genesis());
  const Block& b1 = add(0, 1);
  EXPECT_EQ(h.on_self_mined(b1).blocks, Ids{b1.id});
  EXPECT_EQ(h.mining_base(), b1.id);
  const Block& b2 = add(b1.id, 1);
  EXPECT_EQ(h.on_self_mined(b2).blocks, Ids{b2.id});
  EXPECT_EQ(h.adopted_tip(), TipRef::of(b2));
}

TEST_F(HonestTest, ParentMismatch) {
  HonestMiner h(genesis());
  const Block& b1 = add(0, 1);
  h.on_self_mined(b1);
  const Block& stray = add(0, 1);
  try {
    h.on_self_mined(stray);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kParentMismatch);
  }
  EXPECT_EQ(h.mining_base(), b1.id);
}

TEST_F(HonestTest, ReceivedHeightRules) {
  HonestMiner h(genesis());
  BlockId own = 0;
  for (int i = 0; i < 5; ++i) {
    own = add(own, 1).id;
    h.on_self_mined(tree.at(own));
  }
  const BlockId rival5 = foreign_chain(0, 5);
  h.on_received(tree.at(rival5));
  EXPECT_EQ(h.mining_base(), own);

  const BlockId stale = foreign_chain(0, 3);
  h.on_received(tree.at(stale));
  EXPECT_EQ(h.mining_base(), own);

  const BlockId higher = add(rival5, 9).id;
  h.on_received(tree.at(higher));
  EXPECT_EQ(h.mining_base(), higher);
  EXPECT_EQ(h.adopted_tip().height, 6u);
}

using SelfishTest = StrategyFixture;

TEST_F(SelfishTest, FirstBlockStaysPrivate) {
  SelfishMiner s(genesis());
  const Block& b = add(0, 1);
  EXPECT_TRUE(s.on_self_mined(b).empty());
  EXPECT_EQ(s.lead(), 1);
  EXPECT_EQ(s.public_tip().id, 0u);
  EXPECT_EQ(s.mining_base(), b.id);
}

TEST_F(SelfishTest, HonestBlockAtLeadZeroIsAdopted) {
  SelfishMiner s(genesis());
  const BlockId h = foreign_chain(0, 1);
  EXPECT_TRUE(s.on_received(tree.at(h)).empty());
  EXPECT_EQ(s.mining_base(), h);
  EXPECT_EQ(s.private_branch_len(), 0u);
  EXPECT_EQ(s.lead(), 0);
}

TEST_F(SelfishTest, LeadOneRaceThenWin) {
  SelfishMiner s(genesis());
  const Block& a = add(0, 1);
  s.on_self_mined(a);
  const BlockId h = foreign_chain(0, 1);
  EXPECT_EQ(s.on_received(tree.at(h)).blocks, Ids{a.id});
  // State 0': tied, still mining on the own block.
  EXPECT_EQ(s.lead(), 0);
  EXPECT_EQ(s.private_branch_len(), 1u);
  EXPECT_EQ(s.mining_base(), a.id);
  EXPECT_TRUE(s.unpublished().empty());

  const Block& b = add(a.id, 1);
  EXPECT_EQ(s.on_self_mined(b).blocks, Ids{b.id});
  EXPECT_EQ(s.private_branch_len(), 0u);
  EXPECT_EQ(s.public_tip().id, b.id);
  EXPECT_EQ(s.lead(), 0);
}

TEST_F(SelfishTest, LeadOneRaceLost) {
  SelfishMiner s(genesis());
  s.on_self_mined(add(0, 1));
  const BlockId h1 = foreign_chain(0, 1);
  s.on_received(tree.at(h1));
  const BlockId h2 = foreign_chain(h1, 1);
  EXPECT_TRUE(s.on_received(tree.at(h2)).empty());
  EXPECT_EQ(s.mining_base(), h2);
  EXPECT_EQ(s.private_branch_len(), 0u);
}

TEST_F(SelfishTest, LeadTwoPublishesAll) {
  SelfishMiner s(genesis());
  const Block& a = add(0, 1);
  s.on_self_mined(a);
  const Block& b = add(a.id, 1);
  s.on_self_mined(b);
  EXPECT_EQ(s.lead(), 2);
  const BlockId h = foreign_chain(0, 1);
  EXPECT_EQ(s.on_received(tree.at(h)).blocks, (Ids{a.id, b.id}));
  EXPECT_EQ(s.private_branch_len(), 0u);
  EXPECT_EQ(s.public_tip().id, b.id);
}

TEST_F(SelfishTest, LongLeadDripsOneBlockAtATime) {
  SelfishMiner s(genesis());
  Ids own;
  BlockId tip = 0;
  for (int i = 0; i < 3; ++i) {
    tip = add(tip, 1).id;
    own.push_back(tip);
    EXPECT_TRUE(s.on_self_mined(tree.at(tip)).empty());
  }
  EXPECT_EQ(s.lead(), 3);
  tip = add(tip, 1).id;
  own.push_back(tip);
  s.on_self_mined(tree.at(tip));
  EXPECT_EQ(s.lead(), 4);

  const BlockId h1 = foreign_chain(0, 1);
  EXPECT_EQ(s.on_received(tree.at(h1)).blocks, Ids{own[0]});
  EXPECT_EQ(s.lead(), 3);
  const BlockId h2 = foreign_chain(h1, 1);
  EXPECT_EQ(s.on_received(tree.at(h2)).blocks, Ids{own[1]});
  EXPECT_EQ(s.lead(), 2);
  const BlockId h3 = foreign_chain(h2, 1);
  EXPECT_EQ(s.on_received(tree.at(h3)).blocks, (Ids{own[2], own[3]}));
  EXPECT_EQ(s.private_branch_len(), 0u);
}

TEST_F(SelfishTest, StaleForeignBlockIgnored) {
  SelfishMiner s(genesis());
  const BlockId h1 = foreign_chain(0, 1);
  s.on_received(tree.at(h1));
  const Block& a = add(h1, 1);
  s.on_self_mined(a);
  const BlockId stale = foreign_chain(0, 1);
  EXPECT_TRUE(s.on_received(tree.at(stale)).empty());
  EXPECT_EQ(s.lead(), 1);
  EXPECT_EQ(s.public_tip().id, h1);
}

TEST_F(SelfishTest, FlushPublishesRemainderOnce) {
  SelfishMiner s(genesis());
  EXPECT_TRUE(s.flush().empty());
  Ids own;
  BlockId tip = 0;
  for (int i = 0; i < 3; ++i) {
    tip = add(tip, 1).id;
    own.push_back(tip);
    s.on_self_mined(tree.at(tip));
  }
  EXPECT_EQ(s.flush().blocks, own);
  EXPECT_TRUE(s.flush().empty());
  EXPECT_EQ(s.private_branch_len(), 0u);
  EXPECT_EQ(s.mining_base(), tip);
}

TEST_F(SelfishTest, ParentMismatch) {
  SelfishMiner s(genesis());
  s.on_self_mined(add(0, 1));
  try {
    s.on_self_mined(add(0, 1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kParentMismatch);
  }
}

TEST(StrategyVariantTest, Dispatch) {
  BlockTree tree = BlockTree::with_genesis();
  Strategy h = make_strategy(StrategyKind::kHonest, tree.at(0));
  Strategy s = make_strategy(StrategyKind::kSelfish, tree.at(0));
  EXPECT_EQ(kind_of(h), StrategyKind::kHonest);
  EXPECT_EQ(kind_of(s), StrategyKind::kSelfish);
  const Block& b = tree.append(0, 1);
  EXPECT_EQ(on_self_mined(h, b).blocks, Ids{b.id});
  EXPECT_TRUE(on_self_mined(s, b).empty());
  EXPECT_EQ(flush(s).blocks, Ids{b.id});
  EXPECT_TRUE(flush(h).empty());
}

// Drives the engine with a fixed event sequence ('S' = selfish miner 1 wins,
// 'H' = honest miner 2 wins) and compares every publication with the height
// oracle.
struct Replay {
  std::vector<std::vector<Height>> selfish_heights;
  std::vector<std::vector<Height>> honest_heights;
  std::set<BlockId> seen;
  bool duplicate = false;
  std::vector<std::size_t> withheld;
  std::vector<std::size_t> oracle_withheld;
};

Replay replay(const std::string& events) {
  const auto powers = PowerConfiguration::with_selfish({0.4, 0.6}, 0.5);
  RunConfig cfg;
  cfg.model = MiningModel::kConventional;
  cfg.timesteps = static_cast<std::int64_t>(events.size());
  Simulation sim(powers, cfg);
  Replay out;
  std::vector<Height> sh;
  std::vector<Height> hh;
  sim.set_publish_observer(
      [&](MinerIndex sender, std::span<const BlockId> blocks) {
        for (BlockId id : blocks) {
          if (!out.seen.insert(id).second) out.duplicate = true;
          (sender == 1 ? sh : hh).push_back(sim.tree().at(id).height);
        }
      });
  for (char e : events) {
    sh.clear();
    hh.clear();
    const MinerIndex w = e == 'S' ? 1 : 2;
    sim.step_with_winners(std::span<const MinerIndex>(&w, 1));
    out.selfish_heights.push_back(sh);
    out.honest_heights.push_back(hh);
    const auto& pool = std::get<SelfishMiner>(sim.miner(1));
    out.withheld.push_back(pool.unpublished().size());
  }
  return out;
}

void expect_matches_oracle(const std::string& events) {
  SCOPED_TRACE(events);
  const Replay r = replay(events);
  testing::SelfishHeightOracle oracle;
  for (std::size_t i = 0; i < events.size(); ++i) {
    std::vector<std::uint32_t> expect_pool;
    std::vector<std::uint32_t> expect_honest;
    if (events[i] == 'S') {
      expect_pool = oracle.pool_mines();
    } else {
      expect_honest = {oracle.honest_height() + 1};
      expect_pool = oracle.honest_mines();
    }
    ASSERT_EQ(r.selfish_heights[i], expect_pool) << "event " << i;
    ASSERT_EQ(r.honest_heights[i], expect_honest) << "event " << i;
    ASSERT_EQ(r.withheld[i], oracle.withheld()) << "event " << i;
  }
  EXPECT_FALSE(r.duplicate);
}

TEST(SelfishOracleTest, AllShortEventSequences) {
  const auto seqs = testing::all_event_sequences(5);
  EXPECT_EQ(seqs.size(), 62u);
  for (const auto& s : seqs) expect_matches_oracle(s);
}

TEST(SelfishOracleTest, RandomLongSequences) {
  std::mt19937_64 gen(7);
  for (int trial = 0; trial < 200; ++trial) {
    const double alpha = 0.2 + 0.05 * (trial % 6);
    std::bernoulli_distribution pool(alpha);
    std::string events;
    for (int i = 0; i < 200; ++i) events += pool(gen) ? 'S' : 'H';
    expect_matches_oracle(events);
  }
}

// Honest miners publish exactly one block per own success; with several
// selfish miners no block is published twice and withheld blocks are always
// the miner's own, in parent order.
TEST(StrategyProperty, MultiMinerPublicationDiscipline) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto powers =
        PowerConfiguration::with_selfish({0.25, 0.2, 0.15, 0.4}, 0.5);
    RunConfig cfg;
    cfg.seed = seed;
    cfg.timesteps = 2000;
    Simulation sim(powers, cfg);
    std::set<BlockId> published;
    std::size_t honest_published = 0;
    sim.set_publish_observer(
        [&](MinerIndex sender, std::span<const BlockId> blocks) {
          Height prev = 0;
          for (BlockId id : blocks) {
            EXPECT_TRUE(published.insert(id).second);
            const Block& b = sim.tree().at(id);
            EXPECT_EQ(b.owner, sender);
            if (prev != 0) {
              EXPECT_EQ(b.height, prev + 1);
            }
            prev = b.height;
          }
          if (sender == 4) {
            EXPECT_EQ(blocks.size(), 1u);
            ++honest_published;
          }
        });
    for (int t = 0; t < 2000; ++t) {
      sim.step();
      for (MinerIndex i = 1; i <= 3; ++i) {
        const auto& m = std::get<SelfishMiner>(sim.miner(i));
        const auto branch = m.private_branch();
        for (std::size_t j = 0; j < branch.size(); ++j) {
          const Block& b = sim.tree().at(branch[j]);
          ASSERT_EQ(b.owner, i);
          if (j > 0) {
            ASSERT_EQ(b.parent, branch[j - 1]);
          }
        }
        for (BlockId id : m.unpublished()) ASSERT_FALSE(published.count(id));
        for (std::size_t j = 0; j < branch.size() - m.unpublished().size();
             ++j) {
          ASSERT_TRUE(published.count(branch[j]));
        }
        if (branch.empty()) {
          ASSERT_EQ(m.lead(), 0);
        }
      }
    }
    std::size_t honest_mined = 0;
    for (BlockId id = 1; id < sim.tree().size(); ++id) {
      if (sim.tree().at(id).owner == 4) ++honest_mined;
    }
    EXPECT_EQ(honest_published, honest_mined);
  }
}

}  // namespace
}  // namespace smsim
