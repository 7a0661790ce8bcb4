#include "prw/physim/sensing.hpp"

#include "prw/common/error.hpp"
#include "prw/physim/render.hpp"

namespace prw::physim {

void WrenchWindow::push(const Wrench2& w) {
  ring_[head_] = w;
  head_ = (head_ + 1) % kWindowLength;
  if (count_ < kWindowLength) ++count_;
}

const Wrench2& WrenchWindow::at(std::size_t i) const {
  if (i >= count_) throw ContractError("wrench window index out of range");
  const std::size_t oldest = (head_ + kWindowLength - count_) % kWindowLength;
  return ring_[(oldest + i) % kWindowLength];
}

const Wrench2& WrenchWindow::latest() const {
  static const Wrench2 kZero{};
  return count_ == 0 ? kZero : at(count_ - 1);
}

WrenchWindowRows WrenchWindow::rows() const {
  WrenchWindowRows out{};
  const std::size_t pad = kWindowLength - count_;
  for (std::size_t i = 0; i < count_; ++i) {
    const Wrench2& w = at(i);
    double* row = &out[(pad + i) * kWindowChannels];
    row[0] = w.fx;
    row[1] = w.fy;
    row[2] = w.torque;
  }
  return out;
}

WrenchWindow WrenchWindow::from_rows(const WrenchWindowRows& rows) {
  WrenchWindow w;
  std::size_t first = 0;
  auto zero_row = [&](std::size_t r) {
    for (std::size_t c = 0; c < kWindowChannels; ++c) {
      if (rows[r * kWindowChannels + c] != 0.0) return false;
    }
    return true;
  };
  while (first < kWindowLength && zero_row(first)) ++first;
  for (std::size_t r = first; r < kWindowLength; ++r) {
    const double* row = &rows[r * kWindowChannels];
    w.push({row[0], row[1], row[2]});
  }
  return w;
}

Observation sense(const Environment& env, const EnvState& state,
                  const WrenchWindow& history) {
  RenderedGrids grids = render(env, state);
  Observation obs;
  obs.grid_side = grids.side;
  obs.intensity = std::move(grids.intensity);
  obs.depth = std::move(grids.depth);
  obs.pose = env.gripper_pose(state);
  obs.velocity = env.gripper_velocity(state);
  obs.ft_window = history.rows();
  return obs;
}

Episode::Episode(const Environment& env, EnvState state, WrenchWindow window)
    : env_(&env), state_(std::move(state)), window_(window) {}

const StepResult& Episode::step(const Action& action, double dt) {
  last_ = env_->step(state_, action, dt);
  state_ = last_.state;
  window_.push(last_.wrench);
  return last_;
}

}  // namespace prw::physim
