#include "prw/replearn/train.hpp"

#include <fmt/format.h>

#include <numeric>

#include "prw/common/binary_io.hpp"
#include "prw/common/error.hpp"

namespace prw::replearn {

namespace gn = gradnet;

void TrainConfig::validate() const {
  if (iterations < 0) throw ConfigError("iterations must be >= 0");
  if (batch_size < 1) throw ConfigError("batch size must be >= 1");
  if (!(lr > 0.0)) throw ConfigError("learning rate must be positive");
  if (!(lambda >= 0.0)) throw ConfigError("lambda must be >= 0");
  if (checkpoint_every < 0) throw ConfigError("checkpoint cadence must be >= 0");
}

TrainResult train(ReprModel& model, const tvfs::PairDataset& dataset, const TrainConfig& config,
                  const TrainHooks& hooks) {
  config.validate();
  TrainResult result;
  if (config.iterations == 0) return result;
  if (dataset.records.empty()) throw ValidationError("train: empty dataset");

  std::vector<PreparedObs> first, second;
  first.reserve(dataset.records.size());
  second.reserve(dataset.records.size());
  for (const tvfs::PairRecord& rec : dataset.records) {
    first.push_back(prepare(model.config(), rec.obs_t));
    second.push_back(prepare(model.config(), rec.obs_next));
  }

  gn::Adam opt(model.params(), {.lr = config.lr});
  gn::ParameterSet last_good = model.params();
  Rng rng(derive_seed(config.shuffle_seed, 0x7A1));
  std::vector<std::size_t> order(first.size());
  std::iota(order.begin(), order.end(), 0);
  std::size_t cursor = order.size();  // forces a shuffle on first use

  const LossOptions loss_options{config.lambda, config.stop_gradient_target};
  std::vector<const PreparedObs*> a(config.batch_size), b(config.batch_size);
  for (std::int64_t it = 0; it < config.iterations; ++it) {
    for (std::size_t k = 0; k < config.batch_size; ++k) {
      if (cursor == order.size()) {
        for (std::size_t i = order.size(); i > 1; --i) {
          std::swap(order[i - 1], order[rng.below(i)]);
        }
        cursor = 0;
      }
      const std::size_t idx = order[cursor++];
      a[k] = &first[idx];
      b[k] = &second[idx];
    }
    try {
      gn::Graph g;
      const LossNodes nodes = hybrid_loss_nodes(g, model, a, b, loss_options);
      const LossBreakdown lb = read_breakdown(g, nodes, config.lambda);
      opt.step(g.backward(nodes.total));
      for (const gn::Parameter& p : model.params()) {
        if (!p.value.all_finite()) throw NumericError("parameter " + p.name + " became non-finite");
      }
      result.history.push_back(lb);
      result.completed = it + 1;
      if (hooks.on_iteration) hooks.on_iteration(it, lb);
    } catch (const NumericError& e) {
      model.params().assign_values(last_good);
      result.aborted = fmt::format("iteration {}: {}", it, e.what());
      return result;
    }
    const bool last = it + 1 == config.iterations;
    if ((config.checkpoint_every > 0 && (it + 1) % config.checkpoint_every == 0) || last) {
      last_good.assign_values(model.params());
      if (hooks.on_checkpoint) hooks.on_checkpoint(it + 1, model);
    }
  }
  return result;
}

void write_loss_csv(const std::filesystem::path& path, const std::vector<LossBreakdown>& history) {
  std::string out = "iteration,l,l_recon,l_temporal\n";
  for (std::size_t i = 0; i < history.size(); ++i) {
    const LossBreakdown& b = history[i];
    out += fmt::format("{},{:.17g},{:.17g},{:.17g}\n", i, b.total, b.recon, b.temporal);
  }
  write_text_file(path, out);
}

std::vector<double> trailing_mean(const std::vector<double>& values, std::size_t w) {
  std::vector<double> out(values.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    acc += values[i];
    if (i >= w) acc -= values[i - w];
    out[i] = acc / static_cast<double>(std::min(i + 1, w));
  }
  return out;
}

}  // namespace prw::replearn
