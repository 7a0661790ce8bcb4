#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "prw/common/hash.hpp"
#include "prw/physim/demo.hpp"
#include "prw/tvfs/schedule.hpp"

namespace prw::tvfs {

struct SamplingConfig {
  std::int64_t interval = 50;  // I
  std::int64_t branches = 5;   // N
  std::int64_t steps = 10;     // K
  std::uint64_t seed = 0;
  SampleOptions sample;

  void validate() const;
  friend bool operator==(const SamplingConfig& a, const SamplingConfig& b) {
    return a.interval == b.interval && a.branches == b.branches && a.steps == b.steps &&
           a.seed == b.seed && a.sample.scale_lo == b.sample.scale_lo &&
           a.sample.scale_hi == b.sample.scale_hi &&
           a.sample.fallback_radius == b.sample.fallback_radius;
  }
};

struct SeedPoint {
  std::uint32_t index = 0;  // i in Q_i
  std::int64_t t = 0;       // demo timestep
  physim::EnvState state;
  physim::WrenchWindowRows window{};
};

// Seeds at t = 0, I, 2I, ... <= T.
std::vector<SeedPoint> select_seeds(const physim::Demonstration& demo, std::int64_t interval);

enum class PairSource : std::uint8_t { kDemo = 0, kBranch = 1 };

inline constexpr std::uint32_t kNoIndex = 0xFFFFFFFFu;

struct PairRecord {
  PairSource source = PairSource::kDemo;
  std::uint32_t seed_index = kNoIndex;    // kNoIndex for demo pairs
  std::uint32_t branch_index = kNoIndex;  // kNoIndex for demo pairs
  std::int64_t t = 0;            // demo time whose action was followed or perturbed
  std::uint32_t branch_step = 0;  // j within the branch (0 for demo pairs)
  double theta = 0.0;
  bool fallback = false;
  physim::Action demo_action;
  physim::Action unclamped;  // equals demo_action for demo pairs
  physim::Action applied;
  physim::EnvState state;    // state producing obs_t
  physim::Observation obs_t;
  physim::Observation obs_next;

  friend bool operator==(const PairRecord&, const PairRecord&) = default;
};

struct Incident {
  std::uint32_t seed_index = 0;
  std::uint32_t branch_index = 0;
  std::uint32_t branch_step = 0;
  std::string message;
  friend bool operator==(const Incident&, const Incident&) = default;
};

struct PairDataset {
  Digest demo_hash{};
  SamplingConfig config;
  VarianceSchedule schedule;
  physim::EnvKind kind = physim::EnvKind::kBlockInsertion;
  std::int64_t demo_length = 0;  // T
  std::int64_t seed_count = 0;   // M + 1
  std::vector<PairRecord> records;
  std::vector<Incident> incidents;

  // T + (M+1) N K minus steps lost to truncated branches.
  std::int64_t expected_count() const;
  friend bool operator==(const PairDataset&, const PairDataset&) = default;
};

struct RolloutOptions {
  double dt = physim::kDefaultDt;
  // Worker threads for branches; results are identical for any value.
  unsigned workers = 1;
};

// Demo trunk pairs first (t = 0..T-1), then branches ordered by (seed, branch,
// step). Branch (i, n) draws from stream derive_seed(config.seed, i N + n).
PairDataset rollout_branches(const physim::Environment& env,
                             const physim::Demonstration& demo,
                             const std::vector<SeedPoint>& seeds,
                             const SamplingConfig& config, const VarianceSchedule& sched,
                             const Digest& demo_hash, const RolloutOptions& options = {});

// Fraction of branch records whose unclamped action lies in the theta cone.
// Zero-action fallbacks are excluded from the denominator.
struct ConstraintScan {
  std::size_t checked = 0;
  std::size_t satisfied = 0;
  std::size_t fallbacks = 0;
};
ConstraintScan scan_constraints(const PairDataset& ds);

// PRPD file (layout in docs/formats.md).
Bytes encode_dataset(const PairDataset& ds);
PairDataset decode_dataset(std::span<const std::uint8_t> bytes);
void save_dataset(const std::filesystem::path& path, const PairDataset& ds);
PairDataset load_dataset(const std::filesystem::path& path);

}  // namespace prw::tvfs
