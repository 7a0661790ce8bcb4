#pragma once

#include <array>
#include <cstddef>

#include "prw/physim/environment.hpp"

namespace prw::physim {

// Sliding history of the most recent kWindowLength wrenches.
class WrenchWindow {
 public:
  void push(const Wrench2& w);
  std::size_t size() const { return count_; }
  // i = 0 is the oldest retained entry.
  const Wrench2& at(std::size_t i) const;
  const Wrench2& latest() const;
  void clear() { count_ = 0; head_ = 0; }

  // Row-major kWindowLength x kWindowChannels, zero-padded on the old side.
  WrenchWindowRows rows() const;
  // Inverse of rows(): rebuilds a window from stored rows. Leading all-zero
  // rows are treated as padding.
  static WrenchWindow from_rows(const WrenchWindowRows& rows);

 private:
  std::array<Wrench2, kWindowLength> ring_{};
  std::size_t head_ = 0;   // next write slot
  std::size_t count_ = 0;
};

Observation sense(const Environment& env, const EnvState& state,
                  const WrenchWindow& history);

// Stateful rollout helper: current state plus its wrench history.
class Episode {
 public:
  Episode(const Environment& env, EnvState state, WrenchWindow window = {});

  const EnvState& state() const { return state_; }
  const WrenchWindow& window() const { return window_; }
  Observation observe() const { return sense(*env_, state_, window_); }
  // Steps and appends the resulting wrench to the history.
  const StepResult& step(const Action& action, double dt = kDefaultDt);
  const Wrench2& last_wrench() const { return last_.wrench; }

 private:
  const Environment* env_;
  EnvState state_;
  WrenchWindow window_;
  StepResult last_;
};

}  // namespace prw::physim
