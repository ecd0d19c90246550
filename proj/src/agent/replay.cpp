#include "caac/agent/replay.hpp"

#include <algorithm>
#include <unordered_set>

#include "caac/errors.hpp"

namespace caac::agent {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw ArgumentError("ReplayBuffer: capacity must be >= 1");
}

void ReplayBuffer::push(Transition t) {
  if (items_.size() < capacity_) {
    items_.push_back(std::move(t));
    return;
  }
  items_[head_] = std::move(t);
  head_ = (head_ + 1) % capacity_;
}

const Transition& ReplayBuffer::at(std::size_t i) const {
  if (i >= items_.size()) throw ArgumentError("ReplayBuffer::at: index out of range");
  return items_[(head_ + i) % items_.size()];
}

std::vector<const Transition*> ReplayBuffer::sample(std::size_t batch_size,
                                                    std::mt19937_64& rng) const {
  const std::size_t n = items_.size();
  if (n < batch_size) {
    throw StateError("ReplayBuffer::sample: " + std::to_string(n) + " stored, " +
                     std::to_string(batch_size) + " requested");
  }
  // Floyd's algorithm, then a shuffle so the order is random as well.
  std::vector<std::size_t> picked;
  picked.reserve(batch_size);
  std::unordered_set<std::size_t> seen;
  for (std::size_t j = n - batch_size; j < n; ++j) {
    std::uniform_int_distribution<std::size_t> pick(0, j);
    std::size_t k = pick(rng);
    if (!seen.insert(k).second) {
      k = j;
      seen.insert(k);
    }
    picked.push_back(k);
  }
  std::shuffle(picked.begin(), picked.end(), rng);
  std::vector<const Transition*> out;
  out.reserve(batch_size);
  for (std::size_t k : picked) out.push_back(&items_[k]);
  return out;
}

Transition TransitionAssembler::build(const env::HoldingEnv& env, const env::Decision& d,
                                      const env::Decision* successor) const {
  const auto& graph = env.event_graph();
  Transition t;
  t.obs = d.obs;
  t.action = d.action;
  t.reward = *d.reward;
  t.next_obs = *d.next_obs;
  t.terminal = successor == nullptr;
  const auto sets = graph.neighbor_sets(d.bus_index, d.stop, d.time, d.next_time);
  t.up = make_side(sets.upstream, clip_);
  t.down = make_side(sets.downstream, clip_);
  t.joint_obs = d.joint_obs;
  t.joint_slot = d.joint_slot;
  if (successor != nullptr) {
    const auto next = graph.neighbor_sets(successor->bus_index, successor->stop, successor->time,
                                          successor->next_time);
    t.has_next_window = true;
    t.next_up = make_side(next.upstream, clip_);
    t.next_down = make_side(next.downstream, clip_);
    t.next_joint_obs = successor->joint_obs;
    t.next_joint_slot = successor->joint_slot;
  }
  return t;
}

void TransitionAssembler::poll(const env::HoldingEnv& env, ReplayBuffer& buffer) {
  const auto& decisions = env.decisions();
  for (; seen_ < decisions.size(); ++seen_) pending_.push_back(seen_);
  const double clock = env.clock();
  std::vector<std::size_t> still;
  for (std::size_t id : pending_) {
    const env::Decision& d = decisions[id];
    bool stored = false;
    if (d.finalized()) {
      if (d.terminal) {
        if (clock > d.next_time) {
          buffer.push(build(env, d, nullptr));
          stored = true;
        }
      } else if (d.successor) {
        const env::Decision& s = decisions[*d.successor];
        if (s.finalized() && clock > s.next_time) {
          buffer.push(build(env, d, &s));
          stored = true;
        }
      }
    }
    if (stored) {
      ++stored_;
    } else {
      still.push_back(id);
    }
  }
  pending_ = std::move(still);
}

void TransitionAssembler::flush(const env::HoldingEnv& env, ReplayBuffer& buffer) {
  const auto& decisions = env.decisions();
  for (; seen_ < decisions.size(); ++seen_) pending_.push_back(seen_);
  for (std::size_t id : pending_) {
    const env::Decision& d = decisions[id];
    if (!d.finalized()) continue;
    const env::Decision* s = nullptr;
    if (!d.terminal && d.successor && decisions[*d.successor].finalized()) {
      s = &decisions[*d.successor];
    }
    buffer.push(build(env, d, s));
    ++stored_;
  }
  pending_.clear();
}

}  // namespace caac::agent
