#pragma once

#include <cstdint>
#include <vector>

#include "prw/gradnet/graph.hpp"

namespace prw::gradnet {

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  // Global gradient-norm clip; 0 disables.
  double clip_norm = 0.0;
};

// First and second moments, one tensor per parameter in set order.
struct AdamState {
  std::vector<Tensor> m;
  std::vector<Tensor> v;
  std::uint64_t step = 0;

  friend bool operator==(const AdamState&, const AdamState&) = default;
};

class Adam {
 public:
  Adam(ParameterSet& params, AdamConfig config = {});

  // Parameters without an entry in `grads` are left untouched.
  void step(const Gradients& grads);

  const AdamConfig& config() const { return config_; }
  void set_lr(double lr) { config_.lr = lr; }
  const AdamState& state() const { return state_; }
  void set_state(AdamState state);

 private:
  ParameterSet* params_;
  AdamConfig config_;
  AdamState state_;
};

double global_norm(const ParameterSet& params, const Gradients& grads);

// target <- tau * source + (1 - tau) * target.
void polyak_update(ParameterSet& target, const ParameterSet& source, double tau);

}  // namespace prw::gradnet
