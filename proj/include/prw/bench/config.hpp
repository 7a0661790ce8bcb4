#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "prw/physim/types.hpp"
#include "prw/replearn/train.hpp"
#include "prw/rewardfn/reward.hpp"
#include "prw/sacrl/rollout.hpp"
#include "prw/tvfs/sampler.hpp"

namespace prw::bench {

// Minimal TOML subset: [section] headers, key = value lines, # comments,
// values that are booleans, integers, floats, double-quoted strings, or flat
// arrays of those. Layout in docs/formats.md.
using TomlScalar = std::variant<bool, std::int64_t, double, std::string>;
using TomlArray = std::vector<TomlScalar>;
using TomlValue = std::variant<bool, std::int64_t, double, std::string, TomlArray>;
using TomlSection = std::map<std::string, TomlValue>;
using TomlDocument = std::map<std::string, TomlSection>;

// Throws ConfigError naming the offending line.
TomlDocument parse_toml(std::string_view text);

struct ExperimentConfig {
  physim::EnvKind env = physim::EnvKind::kBlockInsertion;
  std::uint64_t global_seed = 1;
  std::uint64_t demo_seed = 7;
  std::size_t demo_horizon = 500;
  std::filesystem::path output_dir = "runs/default";
  std::size_t workers = 1;

  // Sampling seed is derived from global_seed.
  tvfs::SamplingConfig sampling;
  double theta_min = tvfs::VarianceSchedule{}.theta_min;
  double theta_max = tvfs::VarianceSchedule{}.theta_max;

  // "default" or "small".
  std::string model = "default";
  // Shuffle seed is derived from global_seed.
  replearn::TrainConfig train;

  rewardfn::RewardOptions reward;

  sacrl::SacHyper sac;
  std::vector<sacrl::RewardSource> sources{sacrl::RewardSource::kDense,
                                           sacrl::RewardSource::kHandcrafted,
                                           sacrl::RewardSource::kSparse};
  std::vector<std::uint64_t> rl_seeds{0, 1, 2};
  std::size_t episodes = 500;
  std::size_t horizon = 300;
  // End episodes at the first goal state instead of running the full horizon.
  bool terminate_on_success = false;
  std::size_t smoothing_window = 20;

  // Throws ConfigError.
  void validate() const;
  replearn::ReprConfig repr_config() const;
  tvfs::SamplingConfig sampling_config() const;
  tvfs::VarianceSchedule schedule(std::int64_t horizon) const;
  replearn::TrainConfig train_config() const;
  std::uint64_t repr_init_seed() const;
  // Seed of the RL run for one entry of rl_seeds.
  std::uint64_t rl_run_seed(std::uint64_t seed) const;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

// Unknown sections or keys and type mismatches throw ConfigError. Missing
// keys keep their defaults.
ExperimentConfig config_from_toml(std::string_view text);
std::string config_to_toml(const ExperimentConfig& config);
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace prw::bench
