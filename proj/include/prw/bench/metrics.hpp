#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "prw/physim/demo.hpp"
#include "prw/rewardfn/reward.hpp"
#include "prw/sacrl/rollout.hpp"

namespace prw::bench {

struct RunAggregates {
  std::size_t episodes = 0;
  // 1-based episode of the first success; empty if none.
  std::optional<std::size_t> first_success;
  // Over the final max(1, episodes / 5) episodes.
  double final_success_rate = 0.0;
  // Mean of the smoothed success-rate curve.
  double auc = 0.0;
  friend bool operator==(const RunAggregates&, const RunAggregates&) = default;
};

// Trailing-window success rate; early episodes average what is available.
std::vector<double> smoothed_success(const std::vector<sacrl::EpisodeRecord>& records,
                                     std::size_t window);
RunAggregates compute_aggregates(const std::vector<sacrl::EpisodeRecord>& records,
                                 std::size_t window);

struct RunEntry {
  sacrl::RewardSource source = sacrl::RewardSource::kDense;
  std::uint64_t seed = 0;
  std::vector<sacrl::EpisodeRecord> episodes;
  std::optional<std::string> error;
  RunAggregates aggregates;
};

struct RunMetrics {
  std::size_t smoothing_window = 20;
  std::vector<RunEntry> runs;

  const RunEntry* find(sacrl::RewardSource source, std::uint64_t seed) const;
};

// Schema: source,seed,episodes,first_success,final_success_rate,auc,error
std::string metrics_csv(const RunMetrics& metrics);

// Per-seed outcome of dense against sparse on the two gated measures.
struct SeedComparison {
  std::uint64_t seed = 0;
  bool earlier_first_success = false;  // dense strictly earlier; never beats never-succeeding
  bool final_rate_not_lower = false;
};
std::vector<SeedComparison> compare_sources(const RunMetrics& metrics, sacrl::RewardSource a,
                                            sacrl::RewardSource b);

// Schema: t,p,handcrafted,sparse; one row per recorded state.
std::string rewards_csv(const physim::Environment& env, const rewardfn::RewardModel& reward,
                        const physim::Demonstration& trajectory);

// Schema: episode,mean,min,max over seeds of the smoothed success rate,
// truncated to the shortest run.
std::string success_curve_csv(const RunMetrics& metrics, sacrl::RewardSource source);

// Writes success_<source>.csv for every source present in `metrics`.
void export_curves(const std::filesystem::path& dir, const RunMetrics& metrics);

}  // namespace prw::bench
