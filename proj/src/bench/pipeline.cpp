#include "prw/bench/pipeline.hpp"

#include <atomic>
#include <mutex>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "prw/common/error.hpp"
#include "prw/gradnet/checkpoint.hpp"

namespace prw::bench {

namespace fs = std::filesystem;

namespace {

constexpr const char* kDemoFile = "demo.prld";
constexpr const char* kPairsFile = "pairs.prpd";
constexpr const char* kReprConfigFile = "repr.json";
constexpr const char* kCheckpointFile = "repr.prck";
constexpr const char* kTrainingLog = "training.csv";
constexpr const char* kBundleFile = "reward.prrb";
constexpr const char* kMetricsFile = "metrics.csv";
constexpr const char* kManifestFile = "provenance.json";

void emit(const LogFn& log, const std::string& msg) {
  if (log) log(msg);
}

Digest file_hash(const fs::path& path) { return sha256(read_file(path)); }

// Body of one [section] of the serialized config.
std::string section_text(const ExperimentConfig& c, const std::string& name) {
  const std::string toml = config_to_toml(c);
  const std::string header = "[" + name + "]\n";
  const auto start = toml.find(header);
  if (start == std::string::npos) throw ContractError("no config section " + name);
  const auto end = toml.find("\n[", start + header.size());
  return toml.substr(start, end == std::string::npos ? std::string::npos : end - start);
}

Digest stage_input(const std::string& stage, std::initializer_list<std::string> parts) {
  HashBuilder h;
  h.add("prw-stage:" + stage);
  for (const std::string& p : parts) {
    h.add(fmt::format("{}:", p.size()));
    h.add(p);
  }
  return h.finish();
}

}  // namespace

physim::Demonstration make_demo(const ExperimentConfig& c) {
  const physim::Environment env = physim::Environment::make(c.env);
  return physim::record_demo(env, c.demo_seed, physim::default_plan(c.env),
                             {.horizon = c.demo_horizon, .stop_on_success = false});
}

tvfs::PairDataset make_dataset(const ExperimentConfig& c, const physim::Demonstration& demo,
                               const Digest& demo_hash) {
  const physim::Environment env = physim::Environment::make(demo.kind);
  const tvfs::SamplingConfig sc = c.sampling_config();
  return tvfs::rollout_branches(env, demo, tvfs::select_seeds(demo, sc.interval), sc,
                                c.schedule(static_cast<std::int64_t>(demo.horizon())),
                                demo_hash,
                                {.workers = static_cast<unsigned>(c.workers)});
}

replearn::ReprModel train_representation(const ExperimentConfig& c,
                                         const tvfs::PairDataset& ds,
                                         std::vector<replearn::LossBreakdown>* history,
                                         const LogFn& log) {
  replearn::ReprModel model(c.repr_config(), c.repr_init_seed());
  const replearn::TrainConfig tc = c.train_config();
  replearn::TrainHooks hooks;
  hooks.on_iteration = [&](std::int64_t it, const replearn::LossBreakdown& b) {
    if (it % 250 == 0 || it + 1 == tc.iterations) {
      emit(log, fmt::format("train-repr: iteration {} l={:.5f} l_recon={:.5f} l_temporal={:.5f}",
                            it, b.total, b.recon, b.temporal));
    }
  };
  replearn::TrainResult r = replearn::train(model, ds, tc, hooks);
  if (r.aborted) throw NumericError("representation training aborted: " + *r.aborted);
  if (history != nullptr) *history = std::move(r.history);
  return model;
}

rewardfn::RewardModel make_reward_model(const ExperimentConfig& c, replearn::ReprModel model,
                                        const physim::Demonstration& demo) {
  const rewardfn::References refs = rewardfn::make_refs(model, demo, c.reward.goal_frames);
  return rewardfn::RewardModel(std::move(model), refs, c.reward);
}

physim::Demonstration expert_trajectory(const ExperimentConfig& c) {
  const physim::Environment env = physim::Environment::make(c.env);
  return physim::record_demo(env, c.demo_seed + 1, physim::default_plan(c.env),
                             {.horizon = c.demo_horizon, .stop_on_success = true});
}

physim::Demonstration retreat_trajectory(const ExperimentConfig& c) {
  const physim::Environment env = physim::Environment::make(c.env);
  return physim::record_demo(env, c.demo_seed + 1, physim::retreat_plan(c.env),
                             {.horizon = c.horizon, .stop_on_success = false});
}

std::string run_log_name(sacrl::RewardSource source, std::uint64_t seed) {
  return fmt::format("{}_seed{}.csv", sacrl::to_string(source), seed);
}

RunMetrics run_benchmark(const ExperimentConfig& c, const rewardfn::RewardModel& reward,
                         const LogFn& log) {
  c.validate();
  const physim::Environment env = physim::Environment::make(c.env);
  RunMetrics metrics;
  metrics.smoothing_window = c.smoothing_window;
  for (auto src : c.sources) {
    for (auto seed : c.rl_seeds) {
      RunEntry e;
      e.source = src;
      e.seed = seed;
      metrics.runs.push_back(std::move(e));
    }
  }
  std::mutex log_mutex;
  auto run_one = [&](RunEntry& e) {
    sacrl::RunConfig rc;
    rc.source = e.source;
    rc.seed = c.rl_run_seed(e.seed);
    rc.episodes = c.episodes;
    rc.rollout.horizon = c.horizon;
    rc.rollout.terminate_on_success = c.terminate_on_success;
    rc.hyper = c.sac;
    std::size_t successes = 0;
    const std::string name = fmt::format("{}/seed{}", sacrl::to_string(e.source), e.seed);
    try {
      sacrl::RunResult r = sacrl::train_sac(env, rc, &reward, [&](const sacrl::EpisodeRecord& rec) {
        successes += rec.success ? 1 : 0;
        if (rec.episode % 50 == 0 && log) {
          const std::lock_guard lock(log_mutex);
          log(fmt::format("bench: {} episode {} successes {}", name, rec.episode, successes));
        }
      });
      e.episodes = std::move(r.episodes);
      e.error = std::move(r.error);
    } catch (const std::exception& ex) {
      e.error = ex.what();
    }
    // The CSV seed column records the configured seed, not the derived one.
    for (auto& rec : e.episodes) rec.seed = e.seed;
    e.aggregates = compute_aggregates(e.episodes, c.smoothing_window);
  };
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < metrics.runs.size(); i = next++) run_one(metrics.runs[i]);
  };
  const std::size_t n_workers = std::min(c.workers, metrics.runs.size());
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  }
  return metrics;
}

void write_benchmark(const fs::path& dir, const RunMetrics& m) {
  for (const RunEntry& e : m.runs) {
    write_text_file(dir / "logs" / run_log_name(e.source, e.seed),
                    sacrl::benchmark_csv(e.episodes));
  }
  write_text_file(dir / kMetricsFile, metrics_csv(m));
}

RunMetrics load_benchmark(const fs::path& dir, const ExperimentConfig& c) {
  RunMetrics m;
  m.smoothing_window = c.smoothing_window;
  std::map<std::pair<std::string, std::uint64_t>, std::string> errors;
  {
    std::istringstream in(read_text_file(dir / kMetricsFile));
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
      std::vector<std::string> f;
      std::istringstream ls(line);
      std::string cell;
      while (std::getline(ls, cell, ',')) f.push_back(cell);
      if (f.size() == 7 && !f[6].empty()) errors[{f[0], std::stoull(f[1])}] = f[6];
    }
  }
  for (auto src : c.sources) {
    for (auto seed : c.rl_seeds) {
      RunEntry e;
      e.source = src;
      e.seed = seed;
      e.episodes = sacrl::parse_benchmark_csv(read_text_file(dir / "logs" / run_log_name(src, seed)));
      const auto it = errors.find({std::string(sacrl::to_string(src)), seed});
      if (it != errors.end()) e.error = it->second;
      e.aggregates = compute_aggregates(e.episodes, c.smoothing_window);
      m.runs.push_back(std::move(e));
    }
  }
  return m;
}

Manifest load_manifest(const fs::path& dir) {
  Manifest m;
  const fs::path path = dir / kManifestFile;
  if (!fs::exists(path)) return m;
  try {
    const auto j = nlohmann::json::parse(read_text_file(path));
    for (const auto& [stage, rec] : j.at("stages").items()) {
      StageRecord r;
      r.input_hash = rec.at("input").get<std::string>();
      r.outputs = rec.at("outputs").get<std::map<std::string, std::string>>();
      m[stage] = std::move(r);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("malformed " + path.string() + ": " + e.what());
  }
  return m;
}

void save_manifest(const fs::path& dir, const Manifest& m) {
  nlohmann::json stages = nlohmann::json::object();
  for (const auto& [stage, rec] : m) {
    stages[stage] = {{"input", rec.input_hash}, {"outputs", rec.outputs}};
  }
  const nlohmann::json j = {{"stages", stages}};
  write_text_file(dir / kManifestFile, j.dump(2) + "\n");
}

PipelineResult run_pipeline(const ExperimentConfig& c, const PipelineOptions& options) {
  c.validate();
  if (options.stop_after) {
    const auto& names = stage_names();
    if (std::find(names.begin(), names.end(), *options.stop_after) == names.end()) {
      throw ConfigError("unknown stage '" + *options.stop_after + "'");
    }
  }
  const fs::path dir = c.output_dir;
  fs::create_directories(dir);
  write_text_file(dir / "config.toml", config_to_toml(c));
  Manifest manifest = options.resume ? load_manifest(dir) : Manifest{};
  PipelineResult result;
  bool stopped = false;

  auto output_hash = [&](const std::string& stage, const std::string& file) {
    return from_hex(manifest.at(stage).outputs.at(file));
  };

  // Runs `body` unless a matching record exists. Returns false once the
  // requested stop stage has completed.
  auto stage = [&](const std::string& name, const Digest& input,
                   const std::vector<std::string>& outputs, const std::function<void()>& body) {
    if (stopped) return;
    const std::string input_hex = to_hex(input);
    const auto rec = manifest.find(name);
    bool reuse = options.resume && rec != manifest.end() && rec->second.input_hash == input_hex;
    if (reuse) {
      for (const auto& [file, hash] : rec->second.outputs) {
        if (!fs::exists(dir / file)) {
          reuse = false;
          break;
        }
        if (to_hex(file_hash(dir / file)) != hash) {
          throw ProvenanceError("artifact " + file + " of stage '" + name +
                                "' does not match its recorded hash");
        }
      }
    }
    if (reuse) {
      emit(options.log, "stage " + name + ": up to date, skipped");
      result.skipped.push_back(name);
    } else {
      emit(options.log, "stage " + name + ": running");
      try {
        body();
      } catch (const ProvenanceError&) {
        throw;
      } catch (const std::exception& e) {
        throw StageError(name, e.what());
      }
      StageRecord r;
      r.input_hash = input_hex;
      for (const std::string& file : outputs) r.outputs[file] = to_hex(file_hash(dir / file));
      manifest[name] = std::move(r);
      save_manifest(dir, manifest);
      result.executed.push_back(name);
    }
    if (options.stop_after && *options.stop_after == name) stopped = true;
  };

  const std::string env_name(physim::to_string(c.env));

  stage("demo",
        stage_input("demo", {env_name, std::to_string(c.demo_seed),
                             std::to_string(c.demo_horizon)}),
        {kDemoFile}, [&] {
          const physim::Demonstration demo = make_demo(c);
          if (!demo.success) throw ValidationError("demonstration did not reach the goal");
          physim::save_demo(dir / kDemoFile, demo);
        });
  if (stopped) return result;

  const Digest demo_hash = output_hash("demo", kDemoFile);
  stage("sample",
        stage_input("sample", {section_text(c, "sampling"), std::to_string(c.global_seed),
                               to_hex(demo_hash)}),
        {kPairsFile}, [&] {
          const physim::Demonstration demo = physim::load_demo(dir / kDemoFile);
          const tvfs::PairDataset ds = make_dataset(c, demo, demo_hash);
          emit(options.log, fmt::format("sample: {} pairs, {} incidents", ds.records.size(),
                                        ds.incidents.size()));
          tvfs::save_dataset(dir / kPairsFile, ds);
        });
  if (stopped) return result;

  stage("train-repr",
        stage_input("train-repr", {section_text(c, "representation"),
                                   std::to_string(c.global_seed),
                                   to_hex(output_hash("sample", kPairsFile))}),
        {kReprConfigFile, kCheckpointFile, kTrainingLog}, [&] {
          const tvfs::PairDataset ds = tvfs::load_dataset(dir / kPairsFile);
          if (ds.demo_hash != demo_hash) {
            throw ProvenanceError("pair dataset was sampled from a different demonstration");
          }
          std::vector<replearn::LossBreakdown> history;
          const replearn::ReprModel model = train_representation(c, ds, &history, options.log);
          write_text_file(dir / kReprConfigFile, replearn::to_json(model.config()) + "\n");
          gradnet::save_checkpoint(dir / kCheckpointFile, model.params());
          replearn::write_loss_csv(dir / kTrainingLog, history);
        });
  if (stopped) return result;

  const Digest bundle_input =
      stage_input("bundle-reward", {section_text(c, "reward"),
                                    to_hex(output_hash("train-repr", kReprConfigFile)),
                                    to_hex(output_hash("train-repr", kCheckpointFile)),
                                    to_hex(demo_hash)});
  stage("bundle-reward", bundle_input, {kBundleFile}, [&] {
    replearn::ReprModel model(
        replearn::repr_config_from_json(read_text_file(dir / kReprConfigFile)), 0);
    gradnet::load_checkpoint_into(model.params(), dir / kCheckpointFile);
    const physim::Demonstration demo = physim::load_demo(dir / kDemoFile);
    rewardfn::save_bundle(dir / kBundleFile, make_reward_model(c, std::move(model), demo),
                          bundle_input);
  });
  if (stopped) return result;

  std::vector<std::string> bench_outputs{kMetricsFile};
  for (auto src : c.sources) {
    for (auto seed : c.rl_seeds) bench_outputs.push_back("logs/" + run_log_name(src, seed));
  }
  const Digest bundle_hash = output_hash("bundle-reward", kBundleFile);
  auto load_checked_bundle = [&] {
    rewardfn::RewardBundle b = rewardfn::load_bundle(dir / kBundleFile);
    if (b.provenance != bundle_input) {
      throw ProvenanceError("reward bundle provenance does not match its inputs");
    }
    return b;
  };
  stage("bench",
        stage_input("bench", {section_text(c, "rl"), std::to_string(c.global_seed), env_name,
                              to_hex(bundle_hash)}),
        bench_outputs, [&] {
          const rewardfn::RewardBundle b = load_checked_bundle();
          write_benchmark(dir, run_benchmark(c, b.model, options.log));
        });
  if (stopped) return result;

  const std::vector<std::string> curve_files = [&] {
    std::vector<std::string> v{"curves/rewards_expert.csv", "curves/rewards_retreat.csv"};
    for (auto src : c.sources) v.push_back(fmt::format("curves/success_{}.csv", sacrl::to_string(src)));
    return v;
  }();
  stage("export",
        stage_input("export", {to_hex(output_hash("bench", kMetricsFile)), to_hex(bundle_hash),
                               std::to_string(c.demo_seed), std::to_string(c.demo_horizon),
                               std::to_string(c.horizon), env_name}),
        curve_files, [&] {
          const rewardfn::RewardBundle b = load_checked_bundle();
          const physim::Environment env = physim::Environment::make(c.env);
          const RunMetrics m = load_benchmark(dir, c);
          if (metrics_csv(m) != read_text_file(dir / kMetricsFile)) {
            throw ProvenanceError("metrics.csv disagrees with the per-run logs");
          }
          export_curves(dir / "curves", m);
          write_text_file(dir / "curves/rewards_expert.csv",
                          rewards_csv(env, b.model, expert_trajectory(c)));
          write_text_file(dir / "curves/rewards_retreat.csv",
                          rewards_csv(env, b.model, retreat_trajectory(c)));
        });
  return result;
}

}  // namespace prw::bench
