#include "prw/sacrl/rollout.hpp"

#include <cmath>
#include <sstream>

#include <fmt/format.h>

#include "prw/common/error.hpp"

namespace prw::sacrl {

std::string_view to_string(RewardSource s) {
  switch (s) {
    case RewardSource::kDense:
      return "dense";
    case RewardSource::kHandcrafted:
      return "handcrafted";
    case RewardSource::kSparse:
      return "sparse";
  }
  throw ContractError("unknown reward source");
}

RewardSource parse_reward_source(std::string_view name) {
  if (name == "dense") return RewardSource::kDense;
  if (name == "handcrafted") return RewardSource::kHandcrafted;
  if (name == "sparse") return RewardSource::kSparse;
  throw ConfigError("unknown reward source '" + std::string(name) + "'");
}

double handcrafted_reward(const physim::Environment& env, const physim::EnvState& state) {
  const physim::TaskCoordinates tc = env.task_coordinates(state);
  double s = 0.0;
  for (std::size_t i = 0; i < tc.current.size(); ++i) {
    const double d = tc.current[i] - tc.goal[i];
    s += d * d;
  }
  return -std::sqrt(s);
}

double sparse_reward(const physim::Environment& env, const physim::EnvState& state) {
  return env.success(state) ? 1.0 : 0.0;
}

StateVec state_features(const physim::Environment& env, const physim::EnvState& state,
                        const physim::Wrench2& latest) {
  const physim::Pose2 p = env.gripper_pose(state);
  const physim::Twist2 v = env.gripper_velocity(state);
  return {p.x,
          p.y,
          p.angle,
          v.vx,
          v.vy,
          v.omega,
          kWrenchFeatureScale * latest.fx,
          kWrenchFeatureScale * latest.fy,
          kWrenchFeatureScale * latest.torque};
}

RewardFn::RewardFn(RewardSource source, const rewardfn::RewardModel* dense)
    : source_(source), dense_(dense) {
  if (source == RewardSource::kDense && dense == nullptr) {
    throw ConfigError("dense reward source needs a reward model");
  }
}

void RewardFn::begin(const physim::Environment&, const physim::Episode& episode) {
  if (source_ == RewardSource::kDense && dense_->options().difference) {
    last_progress_ = dense_->progress(episode.observe());
  }
}

double RewardFn::operator()(const physim::Environment& env, const physim::Episode& episode) {
  switch (source_) {
    case RewardSource::kDense: {
      const double p = dense_->progress(episode.observe());
      const double r = dense_->reward_from_progress(last_progress_, p);
      last_progress_ = p;
      return r;
    }
    case RewardSource::kHandcrafted:
      return handcrafted_reward(env, episode.state());
    case RewardSource::kSparse:
      return sparse_reward(env, episode.state());
  }
  throw ContractError("unknown reward source");
}

EpisodeResult rollout_episode(const physim::Environment& env, const physim::EnvState& start,
                              const PolicyFn& policy, RewardFn& reward,
                              const RolloutConfig& config) {
  if (config.horizon == 0) throw ConfigError("rollout horizon must be positive");
  physim::Episode episode(env, start);
  reward.begin(env, episode);
  EpisodeResult result;
  StateVec s = state_features(env, episode.state(), physim::Wrench2{});
  for (std::size_t t = 0; t < config.horizon; ++t) {
    const ActionVec a = policy(s);
    Transition tr;
    tr.state = s;
    tr.action = a;
    try {
      episode.step(physim::Action::from_array(a), config.dt);
    } catch (const std::exception& e) {
      // The failed step is not stored: there is no valid successor state.
      result.stats.physics_error = fmt::format("step {}: {}", t, e.what());
      if (!result.transitions.empty()) result.transitions.back().done = true;
      break;
    }
    tr.next_state = state_features(env, episode.state(), episode.last_wrench());
    tr.reward = reward(env, episode);
    const bool success = env.success(episode.state());
    tr.done = success && config.terminate_on_success;
    result.transitions.push_back(tr);
    result.rewards.push_back(tr.reward);
    result.stats.ret += tr.reward;
    result.stats.length = t + 1;
    s = tr.next_state;
    if (success) {
      result.stats.success = true;
      if (config.terminate_on_success) break;
    }
  }
  return result;
}

std::uint64_t episode_env_seed(std::uint64_t run_seed, std::size_t episode) {
  return derive_seed(derive_seed(run_seed, 0xE9), episode);
}

RunResult train_sac(const physim::Environment& env, const RunConfig& config,
                    const rewardfn::RewardModel* dense,
                    const std::function<void(const EpisodeRecord&)>& on_episode) {
  config.hyper.validate();
  SacAgent agent(config.hyper, derive_seed(config.seed, 1));
  ReplayBuffer buffer(config.hyper.buffer_capacity, derive_seed(config.seed, 2));
  Rng explore(derive_seed(config.seed, 3));
  RewardFn reward(config.source, dense);

  RunResult run;
  std::size_t total_steps = 0;
  const PolicyFn policy = [&](const StateVec& s) {
    ActionVec a{};
    if (total_steps < config.hyper.warmup_steps) {
      for (double& x : a) x = explore.uniform(-1.0, 1.0);
    } else {
      a = agent.act(s);
    }
    ++total_steps;
    return a;
  };

  for (std::size_t ep = 1; ep <= config.episodes; ++ep) {
    const physim::EnvState start = env.initial_state(episode_env_seed(config.seed, ep));
    EpisodeResult res = rollout_episode(env, start, policy, reward, config.rollout);
    for (const Transition& t : res.transitions) buffer.push(t);

    EpisodeRecord rec{ep, res.stats.ret, res.stats.success, res.stats.length, config.source,
                      config.seed};
    run.episodes.push_back(rec);
    if (on_episode) on_episode(rec);

    if (total_steps >= config.hyper.warmup_steps && buffer.size() > 0) {
      const std::size_t updates = res.transitions.size() * config.hyper.updates_per_step;
      try {
        for (std::size_t u = 0; u < updates; ++u) {
          agent.update(buffer.sample(config.hyper.batch_size));
        }
      } catch (const NumericError& e) {
        run.error = fmt::format("episode {}: {}", ep, e.what());
        break;
      }
    }
  }
  return run;
}

std::string benchmark_csv(const std::vector<EpisodeRecord>& records) {
  std::string out = "episode,return,success,length,source,seed\n";
  for (const EpisodeRecord& r : records) {
    out += fmt::format("{},{:.17g},{},{},{},{}\n", r.episode, r.ret, r.success ? 1 : 0,
                       r.length, to_string(r.source), r.seed);
  }
  return out;
}

std::vector<EpisodeRecord> parse_benchmark_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "episode,return,success,length,source,seed") {
    throw ValidationError("benchmark CSV header mismatch");
  }
  std::vector<EpisodeRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) f.push_back(cell);
    if (f.size() != 6) throw ValidationError("benchmark CSV row needs 6 fields: " + line);
    try {
      EpisodeRecord r;
      r.episode = std::stoull(f[0]);
      r.ret = std::stod(f[1]);
      if (f[2] != "0" && f[2] != "1") throw ValidationError("success must be 0 or 1");
      r.success = f[2] == "1";
      r.length = std::stoull(f[3]);
      r.source = parse_reward_source(f[4]);
      r.seed = std::stoull(f[5]);
      out.push_back(r);
    } catch (const std::logic_error&) {
      throw ValidationError("malformed benchmark CSV row: " + line);
    }
  }
  return out;
}

}  // namespace prw::sacrl
