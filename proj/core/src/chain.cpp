#include "smsim/chain.hpp"

#include <algorithm>
#include <string>

#include "smsim/error.hpp"

namespace smsim {

BlockTree BlockTree::with_genesis() {
  BlockTree tree;
  tree.insert(0, std::nullopt, kGenesisOwner);
  return tree;
}

const Block& BlockTree::insert(BlockId id, std::optional<BlockId> parent,
                               MinerIndex owner) {
  if (contains(id)) {
    throw Error(ErrorCode::kDuplicateId,
                "block id " + std::to_string(id) + " already present");
  }
  Height height = 0;
  if (parent) {
    if (!contains(*parent)) {
      throw Error(ErrorCode::kUnknownParent,
                  "parent " + std::to_string(*parent) + " of block " +
                      std::to_string(id) + " is not in the tree");
    }
    height = blocks_[*parent].height + 1;
  } else if (!empty()) {
    throw Error(ErrorCode::kUnknownParent,
                "block " + std::to_string(id) +
                    " has no parent but the tree already has a genesis");
  }

  if (id == blocks_.size()) {
    blocks_.emplace_back();
    present_.push_back(0);
    children_.push_back(0);
  } else if (id > blocks_.size()) {
    const std::size_t n = static_cast<std::size_t>(id) + 1;
    blocks_.resize(n);
    present_.resize(n, 0);
    children_.resize(n, 0);
  }
  blocks_[id] = Block{id, parent, owner, height};
  present_[id] = 1;
  if (parent) {
    ++children_[*parent];
  } else {
    genesis_ = id;
  }
  ++size_;
  next_id_ = std::max<BlockId>(next_id_, id + 1);
  return blocks_[id];
}

const Block& BlockTree::at(BlockId id) const {
  if (!contains(id)) {
    throw Error(ErrorCode::kUnknownBlock,
                "block " + std::to_string(id) + " is not in the tree");
  }
  return blocks_[id];
}

BlockId BlockTree::genesis() const {
  if (!genesis_) {
    throw Error(ErrorCode::kUnknownBlock, "tree has no genesis block");
  }
  return *genesis_;
}

std::vector<BlockId> BlockTree::tips() const {
  std::vector<BlockId> out;
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    if (present_[i] && children_[i] == 0) {
      out.push_back(static_cast<BlockId>(i));
    }
  }
  return out;
}

std::vector<Block> BlockTree::chain_to_genesis(BlockId tip) const {
  const Block* cur = &at(tip);
  std::vector<Block> chain;
  chain.reserve(cur->height);
  while (cur->parent) {
    chain.push_back(*cur);
    cur = &blocks_[*cur->parent];
  }
  std::reverse(chain.begin(), chain.end());
  return chain;
}

std::map<MinerIndex, std::size_t> BlockTree::owner_counts(BlockId tip) const {
  std::map<MinerIndex, std::size_t> counts;
  const Block* cur = &at(tip);
  while (cur->parent) {
    ++counts[cur->owner];
    cur = &blocks_[*cur->parent];
  }
  return counts;
}

}  // namespace smsim
