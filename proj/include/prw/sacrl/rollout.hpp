#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "prw/physim/sensing.hpp"
#include "prw/rewardfn/reward.hpp"
#include "prw/sacrl/sac.hpp"

namespace prw::sacrl {

enum class RewardSource : std::uint32_t { kDense = 1, kHandcrafted = 2, kSparse = 3 };

std::string_view to_string(RewardSource s);
// Accepts "dense" / "handcrafted" / "sparse"; throws ConfigError otherwise.
RewardSource parse_reward_source(std::string_view name);

// -||x - x_g|| over the environment's task coordinates.
double handcrafted_reward(const physim::Environment& env, const physim::EnvState& state);
double sparse_reward(const physim::Environment& env, const physim::EnvState& state);

// Wrench features are scaled so contact forces land in O(1).
inline constexpr double kWrenchFeatureScale = 0.05;

// Gripper pose, gripper velocity, latest wrench.
StateVec state_features(const physim::Environment& env, const physim::EnvState& state,
                        const physim::Wrench2& latest);

// Reward evaluation bound to one source. Dense sources need a RewardModel
// that outlives the evaluator.
class RewardFn {
 public:
  RewardFn(RewardSource source, const rewardfn::RewardModel* dense);
  RewardSource source() const { return source_; }
  // Resets the difference-mode baseline at the episode start.
  void begin(const physim::Environment& env, const physim::Episode& episode);
  // Reward for arriving at the episode's current state.
  double operator()(const physim::Environment& env, const physim::Episode& episode);

 private:
  RewardSource source_;
  const rewardfn::RewardModel* dense_;
  double last_progress_ = 0.0;
};

struct RolloutConfig {
  std::size_t horizon = 300;
  double dt = physim::kDefaultDt;
  // Off: episodes always run the full horizon and success is recorded on the
  // first goal state. On: the first goal state is terminal.
  bool terminate_on_success = false;
};

struct EpisodeStats {
  double ret = 0.0;
  bool success = false;
  std::size_t length = 0;
  // Set when the physics step failed and the episode was cut short.
  std::optional<std::string> physics_error;
};

struct EpisodeResult {
  std::vector<Transition> transitions;
  std::vector<double> rewards;
  EpisodeStats stats;
};

using PolicyFn = std::function<ActionVec(const StateVec&)>;

// Reaching the horizon is never terminal.
EpisodeResult rollout_episode(const physim::Environment& env, const physim::EnvState& start,
                              const PolicyFn& policy, RewardFn& reward,
                              const RolloutConfig& config);

struct RunConfig {
  RewardSource source = RewardSource::kDense;
  std::uint64_t seed = 0;
  std::size_t episodes = 500;
  RolloutConfig rollout;
  SacHyper hyper;
};

struct EpisodeRecord {
  std::size_t episode = 0;  // 1-based
  double ret = 0.0;
  bool success = false;
  std::size_t length = 0;
  RewardSource source = RewardSource::kDense;
  std::uint64_t seed = 0;
  friend bool operator==(const EpisodeRecord&, const EpisodeRecord&) = default;
};

struct RunResult {
  std::vector<EpisodeRecord> episodes;
  std::optional<std::string> error;
};

// Start-state seed for an episode; depends only on the run seed so every
// reward source sees the same sequence of starts.
std::uint64_t episode_env_seed(std::uint64_t run_seed, std::size_t episode);

// Updates run after each episode, updates_per_step per collected step, once
// the warmup budget of uniform random steps is spent.
RunResult train_sac(const physim::Environment& env, const RunConfig& config,
                    const rewardfn::RewardModel* dense,
                    const std::function<void(const EpisodeRecord&)>& on_episode = {});

// Schema: episode,return,success,length,source,seed
std::string benchmark_csv(const std::vector<EpisodeRecord>& records);
std::vector<EpisodeRecord> parse_benchmark_csv(const std::string& text);

}  // namespace prw::sacrl
