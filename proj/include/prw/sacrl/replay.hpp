#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "prw/common/rng.hpp"

namespace prw::sacrl {

inline constexpr std::size_t kStateDim = 9;
inline constexpr std::size_t kActionDim = 3;

using StateVec = std::array<double, kStateDim>;
using ActionVec = std::array<double, kActionDim>;

struct Transition {
  StateVec state{};
  ActionVec action{};
  double reward = 0.0;
  StateVec next_state{};
  // Terminal: the target does not bootstrap past this step. Time-limit
  // truncation is not terminal.
  bool done = false;

  bool finite() const;
  friend bool operator==(const Transition&, const Transition&) = default;
};

// Fixed-capacity ring buffer with its own sampling stream.
class ReplayBuffer {
 public:
  ReplayBuffer(std::size_t capacity, std::uint64_t seed);

  // Throws ValidationError for non-finite transitions.
  void push(const Transition& t);
  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  const Transition& at(std::size_t i) const { return items_.at(i); }

  // Uniform with replacement over stored items.
  std::vector<std::size_t> sample_indices(std::size_t batch);
  std::vector<Transition> sample(std::size_t batch);

 private:
  std::size_t capacity_;
  std::size_t cursor_ = 0;
  std::vector<Transition> items_;
  Rng rng_;
};

}  // namespace prw::sacrl
