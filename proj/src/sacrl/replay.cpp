#include "prw/sacrl/replay.hpp"

#include <cmath>

#include "prw/common/error.hpp"

namespace prw::sacrl {

bool Transition::finite() const {
  auto ok = [](const auto& xs) {
    for (double x : xs) {
      if (!std::isfinite(x)) return false;
    }
    return true;
  };
  return ok(state) && ok(action) && ok(next_state) && std::isfinite(reward);
}

ReplayBuffer::ReplayBuffer(std::size_t capacity, std::uint64_t seed)
    : capacity_(capacity), rng_(seed) {
  if (capacity == 0) throw ConfigError("replay capacity must be positive");
  items_.reserve(std::min<std::size_t>(capacity, 1 << 16));
}

void ReplayBuffer::push(const Transition& t) {
  if (!t.finite()) throw ValidationError("non-finite transition");
  if (items_.size() < capacity_) {
    items_.push_back(t);
  } else {
    items_[cursor_] = t;
  }
  cursor_ = (cursor_ + 1) % capacity_;
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t batch) {
  if (items_.empty()) throw ContractError("sampling from an empty replay buffer");
  std::vector<std::size_t> idx(batch);
  for (auto& i : idx) i = static_cast<std::size_t>(rng_.below(items_.size()));
  return idx;
}

std::vector<Transition> ReplayBuffer::sample(std::size_t batch) {
  std::vector<Transition> out;
  out.reserve(batch);
  for (std::size_t i : sample_indices(batch)) out.push_back(items_[i]);
  return out;
}

}  // namespace prw::sacrl
