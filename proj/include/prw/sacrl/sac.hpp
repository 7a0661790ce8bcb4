#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "prw/gradnet/adam.hpp"
#include "prw/gradnet/graph.hpp"
#include "prw/sacrl/replay.hpp"

namespace prw::sacrl {

inline constexpr double kLogStdMin = -10.0;
inline constexpr double kLogStdMax = 2.0;

struct SacHyper {
  double gamma = 0.99;
  double tau = 0.005;
  double alpha = 0.2;
  double lr = 3e-4;
  std::size_t batch_size = 64;
  std::size_t warmup_steps = 1000;
  std::size_t updates_per_step = 1;
  std::size_t hidden = 64;
  std::size_t buffer_capacity = 100000;

  // Throws ConfigError.
  void validate() const;
  friend bool operator==(const SacHyper&, const SacHyper&) = default;
};

// Fully connected ReLU network with a linear output layer.
class Mlp {
 public:
  Mlp(const std::string& prefix, const std::vector<std::size_t>& sizes, Rng& rng);

  gradnet::Value forward(gradnet::Graph& g, gradnet::Value x) const;
  gradnet::ParameterSet& params() { return params_; }
  const gradnet::ParameterSet& params() const { return params_; }

 private:
  gradnet::ParameterSet params_;
  std::size_t layers_ = 0;
};

// y = r + gamma (1 - done) (min_q_next - alpha logp_next).
double critic_target(double reward, bool done, double gamma, double min_q_next,
                     double alpha, double logp_next);

struct PolicySample {
  gradnet::Value action;    // [B, 3], tanh-squashed
  gradnet::Value log_prob;  // [B, 1]
  gradnet::Value mean;      // [B, 3], pre-squash
};

struct SacReport {
  double critic_loss = 0.0;  // mean of the two critic MSEs
  double actor_loss = 0.0;
  double mean_q = 0.0;
  double mean_log_prob = 0.0;
};

class SacAgent {
 public:
  SacAgent(SacHyper hyper, std::uint64_t seed);
  // Optimizers hold pointers into the networks.
  SacAgent(const SacAgent&) = delete;
  SacAgent& operator=(const SacAgent&) = delete;

  const SacHyper& hyper() const { return hyper_; }

  // Squashed-Gaussian policy head on a [B, 9] batch; noise is [B, 3].
  PolicySample sample_policy(gradnet::Graph& g, gradnet::Value states,
                             const gradnet::Tensor& noise) const;
  gradnet::Value q_value(gradnet::Graph& g, const Mlp& q, gradnet::Value states,
                         gradnet::Value actions) const;

  // Stochastic unless deterministic (tanh of the mean).
  ActionVec act(const StateVec& state, bool deterministic = false);

  // One critic step, one actor step, then Polyak targets. Throws
  // NumericError on NaN/Inf.
  SacReport update(const std::vector<Transition>& batch);

  // Critic targets for a batch with explicit next-action noise.
  std::vector<double> targets(const std::vector<Transition>& batch,
                              const gradnet::Tensor& noise) const;

  Mlp& policy() { return policy_; }
  Mlp& q1() { return q1_; }
  Mlp& q2() { return q2_; }
  Mlp& q1_target() { return q1_target_; }
  Mlp& q2_target() { return q2_target_; }
  const Mlp& policy() const { return policy_; }

 private:
  gradnet::Tensor draw_noise(std::size_t rows);

  SacHyper hyper_;
  Rng init_rng_;
  Mlp policy_, q1_, q2_, q1_target_, q2_target_;
  gradnet::Adam policy_opt_, q1_opt_, q2_opt_;
  Rng noise_rng_;
};

gradnet::Tensor stack_states(const std::vector<Transition>& batch, bool next);
gradnet::Tensor stack_actions(const std::vector<Transition>& batch);

}  // namespace prw::sacrl
