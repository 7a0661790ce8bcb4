#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "prw/gradnet/adam.hpp"
#include "prw/replearn/loss.hpp"
#include "prw/tvfs/sampler.hpp"

namespace prw::replearn {

struct TrainConfig {
  std::int64_t iterations = 5000;
  std::size_t batch_size = 32;
  double lr = 1e-4;
  double lambda = 10.0;
  std::uint64_t shuffle_seed = 0;
  std::int64_t checkpoint_every = 1000;  // 0 disables
  bool stop_gradient_target = false;

  void validate() const;
  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

struct TrainHooks {
  // Called after every iteration with its (pre-update) loss.
  std::function<void(std::int64_t, const LossBreakdown&)> on_iteration;
  // Called at the checkpoint cadence and after the last iteration.
  std::function<void(std::int64_t, const ReprModel&)> on_checkpoint;
};

struct TrainResult {
  std::vector<LossBreakdown> history;  // one entry per completed iteration
  std::int64_t completed = 0;
  // Set when a non-finite value stopped training; the model then holds the
  // last checkpointed parameters.
  std::optional<std::string> aborted;
};

// Shuffled mini-batch Adam over all pairs of the dataset.
TrainResult train(ReprModel& model, const tvfs::PairDataset& dataset, const TrainConfig& config,
                  const TrainHooks& hooks = {});

// iteration,l,l_recon,l_temporal
void write_loss_csv(const std::filesystem::path& path, const std::vector<LossBreakdown>& history);

// Trailing moving average with window w (shorter at the start).
std::vector<double> trailing_mean(const std::vector<double>& values, std::size_t w);

}  // namespace prw::replearn
