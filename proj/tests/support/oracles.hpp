#pragma once

// Test-only reference models.  Nothing here calls into the library's
// strategy or analysis code.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace smsim::testing {

// One selfish pool against one honest miner, one block per event, written in
// terms of chain heights only.  Each event yields the heights the pool
// publishes.  Honest blocks extend the honest miner's own tip; the honest
// miner switches only to a strictly higher published block.
class SelfishHeightOracle {
 public:
  std::vector<std::uint32_t> pool_mines() {
    const long lead_before = lead();
    ++priv_;
    branch_.push_back(priv_);
    std::vector<std::uint32_t> out;
    if (lead_before == 0 && branch_.size() == 2) {
      out = release(branch_.size());
      pub_ = priv_;
      branch_.clear();
      released_ = 0;
    }
    honest_sees(out);
    return out;
  }

  std::vector<std::uint32_t> honest_mines() {
    ++honest_;
    std::vector<std::uint32_t> out;
    if (honest_ <= pub_) return out;
    const long lead_before = lead();
    pub_ = honest_;
    if (lead_before <= 0) {
      priv_ = pub_;
      branch_.clear();
      released_ = 0;
    } else if (lead_before == 1) {
      out.push_back(branch_.back());
      released_ = branch_.size();
    } else if (lead_before == 2) {
      out = release(branch_.size());
      pub_ = priv_;
      branch_.clear();
      released_ = 0;
    } else {
      out = release(released_ + 1);
    }
    honest_sees(out);
    return out;
  }

  long lead() const {
    return static_cast<long>(priv_) - static_cast<long>(pub_);
  }
  std::size_t branch_len() const { return branch_.size(); }
  std::size_t withheld() const { return branch_.size() - released_; }
  std::uint32_t honest_height() const { return honest_; }

 private:
  std::vector<std::uint32_t> release(std::size_t upto) {
    std::vector<std::uint32_t> out(branch_.begin() + released_,
                                   branch_.begin() + upto);
    released_ = upto;
    return out;
  }
  void honest_sees(const std::vector<std::uint32_t>& heights) {
    for (auto h : heights) honest_ = std::max(honest_, h);
  }

  std::uint32_t pub_ = 0;
  std::uint32_t priv_ = 0;
  std::uint32_t honest_ = 0;
  std::vector<std::uint32_t> branch_;
  std::size_t released_ = 0;
};

// Every string over {'S','H'} of length 1..max_len.
inline std::vector<std::string> all_event_sequences(int max_len) {
  std::vector<std::string> out;
  for (int len = 1; len <= max_len; ++len) {
    for (int mask = 0; mask < (1 << len); ++mask) {
      std::string s;
      for (int b = 0; b < len; ++b) s += (mask >> b) & 1 ? 'S' : 'H';
      out.push_back(s);
    }
  }
  return out;
}

// Relative pool revenue from the stationary distribution of the selfish
// mining Markov chain (states 0, 0', 1, 2, ..., truncated at max_lead),
// computed by power iteration.  Independent of the closed form.
inline double markov_revenue(double alpha, double gamma, int max_lead = 400) {
  // index 0 = state 0, index 1 = state 0', index k+1 = lead k (k >= 1)
  const int n = max_lead + 2;
  std::vector<double> pi(n, 0.0), next(n);
  pi[0] = 1.0;
  const double b = 1.0 - alpha;
  for (int iter = 0; iter < 200000; ++iter) {
    std::fill(next.begin(), next.end(), 0.0);
    next[2] += pi[0] * alpha;
    next[0] += pi[0] * b;
    next[0] += pi[1];
    next[3 % n] += pi[2] * alpha;
    next[1] += pi[2] * b;
    for (int k = 2; k <= max_lead; ++k) {
      const int idx = k + 1;
      next[std::min(idx + 1, n - 1)] += pi[idx] * alpha;
      next[k == 2 ? 0 : idx - 1] += pi[idx] * b;
    }
    double diff = 0.0;
    for (int i = 0; i < n; ++i) diff += std::abs(next[i] - pi[i]);
    pi.swap(next);
    if (diff < 1e-15) break;
  }
  double pool = 0.0;
  double others = 0.0;
  others += pi[0] * b;
  pool += pi[1] * alpha * 2;
  pool += pi[1] * b * gamma;
  others += pi[1] * b * gamma;
  others += pi[1] * b * (1 - gamma) * 2;
  pool += pi[3] * b * 2;
  for (int k = 3; k <= max_lead; ++k) pool += pi[k + 1] * b;
  return pool / (pool + others);
}

}  // namespace smsim::testing
