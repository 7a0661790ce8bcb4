#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "prw/bench/config.hpp"
#include "prw/bench/metrics.hpp"

namespace prw::bench {

// A pipeline stage failed; artifacts of earlier stages are left in place.
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& what)
      : std::runtime_error("stage '" + stage + "' failed: " + what), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

using LogFn = std::function<void(const std::string&)>;

// Stage building blocks, also used by the CLI subcommands.
physim::Demonstration make_demo(const ExperimentConfig& c);
tvfs::PairDataset make_dataset(const ExperimentConfig& c, const physim::Demonstration& demo,
                               const Digest& demo_hash);
replearn::ReprModel train_representation(const ExperimentConfig& c,
                                         const tvfs::PairDataset& ds,
                                         std::vector<replearn::LossBreakdown>* history,
                                         const LogFn& log = {});
rewardfn::RewardModel make_reward_model(const ExperimentConfig& c, replearn::ReprModel model,
                                        const physim::Demonstration& demo);
// Held-out expert run (demo seed + 1) and the scripted retreat.
physim::Demonstration expert_trajectory(const ExperimentConfig& c);
physim::Demonstration retreat_trajectory(const ExperimentConfig& c);

// Trains every (source, seed) pair. A failing run is recorded and the rest
// proceed. Results do not depend on `workers`.
RunMetrics run_benchmark(const ExperimentConfig& c, const rewardfn::RewardModel& reward,
                         const LogFn& log = {});

std::string run_log_name(sacrl::RewardSource source, std::uint64_t seed);
// Writes logs/<run>.csv and metrics.csv under `dir`.
void write_benchmark(const std::filesystem::path& dir, const RunMetrics& metrics);
// Rebuilds metrics from the per-run logs; errors come from metrics.csv.
RunMetrics load_benchmark(const std::filesystem::path& dir, const ExperimentConfig& c);

// Stage bookkeeping in <dir>/provenance.json.
struct StageRecord {
  std::string input_hash;                      // hex
  std::map<std::string, std::string> outputs;  // relative path -> sha256 hex
};
using Manifest = std::map<std::string, StageRecord>;
Manifest load_manifest(const std::filesystem::path& dir);
void save_manifest(const std::filesystem::path& dir, const Manifest& m);

inline const std::vector<std::string>& stage_names() {
  static const std::vector<std::string> names{"demo", "sample", "train-repr", "bundle-reward",
                                              "bench", "export"};
  return names;
}

struct PipelineOptions {
  // Skip stages whose recorded inputs and outputs still match.
  bool resume = true;
  // Stop after this stage (inclusive).
  std::optional<std::string> stop_after;
  LogFn log;
};

struct PipelineResult {
  std::vector<std::string> executed;
  std::vector<std::string> skipped;
};

// demo -> sample -> train-repr -> bundle-reward -> bench -> export under
// config.output_dir. Throws StageError on failure and ProvenanceError when a
// recorded artifact no longer matches its hash.
PipelineResult run_pipeline(const ExperimentConfig& config, const PipelineOptions& options = {});

}  // namespace prw::bench
