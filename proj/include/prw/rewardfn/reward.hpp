#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <vector>

#include "prw/common/binary_io.hpp"
#include "prw/common/hash.hpp"
#include "prw/physim/demo.hpp"
#include "prw/replearn/model.hpp"

namespace prw::rewardfn {

enum class DistanceKind : std::uint32_t { kEuclidean = 1 };

inline constexpr double kMinDenominator = 1e-6;

struct RewardOptions {
  // r = p(s_{t+1}) - p(s_t) instead of p(s_{t+1}).
  bool difference = false;
  // Goal reference averaged over this many final demo frames.
  std::size_t goal_frames = 1;
  DistanceKind distance = DistanceKind::kEuclidean;

  friend bool operator==(const RewardOptions&, const RewardOptions&) = default;
};

struct References {
  std::vector<double> h0;
  std::vector<double> hg;
  friend bool operator==(const References&, const References&) = default;
};

double euclidean(std::span<const double> a, std::span<const double> b);

// p = 1 - d(h, hg) / d(h0, hg), unclamped. Throws ValidationError when the
// references are closer than kMinDenominator.
double progress_from_embeddings(std::span<const double> h, std::span<const double> h0,
                                std::span<const double> hg);

// Throws ValidationError for a failed demo, non-finite references or a
// degenerate denominator.
References make_refs(const replearn::ReprModel& model, const physim::Demonstration& demo,
                     std::size_t goal_frames = 1);

// Frozen encoder plus reference embeddings. Immutable after construction, so
// one instance may be shared by concurrent rollout workers.
class RewardModel {
 public:
  RewardModel(replearn::ReprModel model, References refs, RewardOptions options = {});

  const replearn::ReprModel& model() const { return *model_; }
  const References& references() const { return refs_; }
  const RewardOptions& options() const { return options_; }
  double denominator() const { return denominator_; }

  std::vector<double> embed(const physim::Observation& obs) const;
  double progress(const physim::Observation& obs) const;
  double progress(std::span<const double> h) const;
  // Reward paid for arriving at a state with progress p_next from p_prev.
  double reward_from_progress(double p_prev, double p_next) const {
    return options_.difference ? p_next - p_prev : p_next;
  }
  double dense_reward(const physim::Observation& obs,
                      const physim::Observation& obs_next) const;

 private:
  std::shared_ptr<const replearn::ReprModel> model_;
  References refs_;
  RewardOptions options_;
  double denominator_ = 0.0;
};

// PRRB single-file bundle: model config, checkpoint, references, options and
// the provenance hash of the inputs it was built from.
struct RewardBundle {
  RewardModel model;
  Digest provenance{};
};

Bytes encode_bundle(const RewardModel& model, const Digest& provenance);
RewardBundle decode_bundle(std::span<const std::uint8_t> bytes);
void save_bundle(const std::filesystem::path& path, const RewardModel& model,
                 const Digest& provenance);
RewardBundle load_bundle(const std::filesystem::path& path);

}  // namespace prw::rewardfn
