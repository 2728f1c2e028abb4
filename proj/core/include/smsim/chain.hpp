#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <vector>

namespace smsim {

using BlockId = std::uint32_t;
using Height = std::uint32_t;

// Miners are numbered 1..N; owner 0 marks the genesis block.
using MinerIndex = int;
inline constexpr MinerIndex kGenesisOwner = 0;

struct Block {
  BlockId id = 0;
  std::optional<BlockId> parent;
  MinerIndex owner = kGenesisOwner;
  Height height = 0;

  bool is_genesis() const { return !parent.has_value(); }
  friend bool operator==(const Block&, const Block&) = default;
};

// Append-only block tree.  Blocks carry no payload; reward accounting only
// needs ownership along a chain.
//
// Ids are expected to be dense (assigned by next_id()), storage is indexed by
// id.  Arbitrary ids are accepted but the backing vector grows to the largest
// id seen.
class BlockTree {
 public:
  BlockTree() = default;

  // Convenience: a tree holding only a genesis block with id 0.
  static BlockTree with_genesis();

  // Inserts a block, computing its height from the parent.  A block without
  // a parent is a genesis block and is only accepted into an empty tree.
  // Throws kDuplicateId, kUnknownParent.
  const Block& insert(BlockId id, std::optional<BlockId> parent,
                      MinerIndex owner);

  // Inserts a child of `parent` under the next free id.
  const Block& append(BlockId parent, MinerIndex owner) {
    return insert(next_id_, parent, owner);
  }

  bool contains(BlockId id) const {
    return id < present_.size() && present_[id];
  }

  // Throws kUnknownBlock.
  const Block& at(BlockId id) const;

  BlockId genesis() const;
  void reserve(std::size_t n) {
    blocks_.reserve(n);
    present_.reserve(n);
    children_.reserve(n);
  }

  bool empty() const { return size_ == 0; }
  std::size_t size() const { return size_; }
  BlockId next_id() const { return next_id_; }

  // Blocks with no children, ascending by id.
  std::vector<BlockId> tips() const;

  // Path from genesis (exclusive) to `tip` (inclusive), in parent order.
  // Throws kUnknownBlock.
  std::vector<Block> chain_to_genesis(BlockId tip) const;

  // Number of blocks owned by each miner along chain_to_genesis(tip).
  // Throws kUnknownBlock.
  std::map<MinerIndex, std::size_t> owner_counts(BlockId tip) const;

 private:
  std::vector<Block> blocks_;
  std::vector<std::uint8_t> present_;
  std::vector<std::uint32_t> children_;
  std::optional<BlockId> genesis_;
  std::size_t size_ = 0;
  BlockId next_id_ = 0;
};

}  // namespace smsim
