// Command-line entry point. Stage subcommands run the pipeline up to and
// including that stage, reusing artifacts already present in the output
// directory.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "prw/bench/pipeline.hpp"
#include "prw/common/error.hpp"

namespace {

using prw::bench::ExperimentConfig;

struct CommonArgs {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonArgs& a, const std::string& seed_help) {
  cmd->add_option("--config", a.config, "TOML experiment config")->check(CLI::ExistingFile);
  cmd->add_option("--out", a.out, "Output directory (overrides experiment.output_dir)");
  cmd->add_option("--seed", a.seed, seed_help);
}

ExperimentConfig base_config(const CommonArgs& a) {
  ExperimentConfig c = a.config.empty() ? ExperimentConfig{} : prw::bench::load_config(a.config);
  if (!a.out.empty()) c.output_dir = a.out;
  return c;
}

void log_line(const std::string& msg) {
  std::cerr << msg << '\n';
}

int run_stage(ExperimentConfig c, const std::string& stage, bool resume) {
  c.validate();
  prw::bench::PipelineOptions opt;
  opt.resume = resume;
  opt.stop_after = stage;
  opt.log = log_line;
  const auto r = prw::bench::run_pipeline(c, opt);
  std::cout << fmt::format("{}: ran {} stage(s), reused {}; artifacts in {}\n", stage,
                           r.executed.size(), r.skipped.size(), c.output_dir.string());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Progress-reward pipeline: demonstrations, sampling, representation "
               "training, reward bundling and SAC benchmarking."};
  app.require_subcommand(1);
  app.fallthrough(false);

  CommonArgs demo_a, sample_a, repr_a, bundle_a, eval_a, rl_a, bench_a, export_a;
  std::string env_name;
  std::optional<std::size_t> demo_horizon;
  std::optional<std::int64_t> iterations;
  std::optional<std::size_t> episodes, workers;
  std::string bundle_path, trajectory_path, trajectory_kind = "expert", csv_path;
  std::string source_name = "dense";
  bool no_resume = false;

  auto* demo = app.add_subcommand("demo", "Record the scripted demonstration");
  add_common(demo, demo_a, "Demonstration seed");
  demo->add_option("--env", env_name, "block-insertion or latch-door");
  demo->add_option("--horizon", demo_horizon, "Demonstration length in steps");

  auto* sample = app.add_subcommand("sample", "Build the pair dataset from the demonstration");
  add_common(sample, sample_a, "Global seed");

  auto* repr = app.add_subcommand("train-repr", "Train the representation model");
  add_common(repr, repr_a, "Global seed");
  repr->add_option("--iterations", iterations, "Training iterations");

  auto* bundle = app.add_subcommand("bundle-reward", "Package the reward model bundle");
  add_common(bundle, bundle_a, "Global seed");

  auto* eval = app.add_subcommand("eval-reward", "Write per-step rewards along a trajectory");
  add_common(eval, eval_a, "Seed of the scripted trajectory (default: demo seed + 1)");
  eval->add_option("--bundle", bundle_path, "Reward bundle (default: <out>/reward.prrb)");
  eval->add_option("--trajectory", trajectory_path, "Demonstration file to evaluate");
  eval->add_option("--kind", trajectory_kind, "Scripted trajectory: expert or retreat")
      ->check(CLI::IsMember({"expert", "retreat"}));
  eval->add_option("--csv", csv_path, "Output CSV (default: stdout)");

  auto* rl = app.add_subcommand("train-rl", "Train one SAC run");
  add_common(rl, rl_a, "RL seed index");
  rl->add_option("--source", source_name, "dense, handcrafted or sparse");
  rl->add_option("--bundle", bundle_path, "Reward bundle (default: <out>/reward.prrb)");
  rl->add_option("--episodes", episodes, "Episodes");

  auto* bench = app.add_subcommand("bench", "Run the pipeline through the SAC benchmark");
  add_common(bench, bench_a, "Global seed");
  bench->add_option("--episodes", episodes, "Episodes per run");
  bench->add_option("--workers", workers, "Concurrent runs");

  auto* exp = app.add_subcommand("export", "Run the full pipeline and write plot data");
  add_common(exp, export_a, "Global seed");

  for (auto* cmd : {demo, sample, repr, bundle, bench, exp}) {
    cmd->add_flag("--no-resume", no_resume, "Re-run stages even when artifacts match");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return 1;
  }

  try {
    const bool resume = !no_resume;
    if (demo->parsed()) {
      ExperimentConfig c = base_config(demo_a);
      if (!env_name.empty()) c.env = prw::physim::parse_env_kind(env_name);
      if (demo_a.seed) c.demo_seed = *demo_a.seed;
      if (demo_horizon) c.demo_horizon = *demo_horizon;
      return run_stage(c, "demo", resume);
    }
    auto global = [](const CommonArgs& a) {
      ExperimentConfig c = base_config(a);
      if (a.seed) c.global_seed = *a.seed;
      return c;
    };
    if (sample->parsed()) return run_stage(global(sample_a), "sample", resume);
    if (repr->parsed()) {
      ExperimentConfig c = global(repr_a);
      if (iterations) c.train.iterations = *iterations;
      return run_stage(c, "train-repr", resume);
    }
    if (bundle->parsed()) return run_stage(global(bundle_a), "bundle-reward", resume);
    if (bench->parsed()) {
      ExperimentConfig c = global(bench_a);
      if (episodes) c.episodes = *episodes;
      if (workers) c.workers = *workers;
      return run_stage(c, "bench", resume);
    }
    if (exp->parsed()) return run_stage(global(export_a), "export", resume);

    if (eval->parsed()) {
      ExperimentConfig c = base_config(eval_a);
      c.validate();
      const auto b = prw::rewardfn::load_bundle(
          bundle_path.empty() ? c.output_dir / "reward.prrb" : std::filesystem::path(bundle_path));
      prw::physim::Demonstration traj;
      if (!trajectory_path.empty()) {
        traj = prw::physim::load_demo(trajectory_path);
      } else {
        if (eval_a.seed) c.demo_seed = *eval_a.seed - 1;
        traj = trajectory_kind == "retreat" ? prw::bench::retreat_trajectory(c)
                                            : prw::bench::expert_trajectory(c);
      }
      const auto env = prw::physim::Environment::make(traj.kind);
      const std::string csv = prw::bench::rewards_csv(env, b.model, traj);
      if (csv_path.empty()) {
        std::cout << csv;
      } else {
        prw::write_text_file(csv_path, csv);
      }
      return 0;
    }

    if (rl->parsed()) {
      ExperimentConfig c = base_config(rl_a);
      c.validate();
      prw::sacrl::RunConfig rc;
      rc.source = prw::sacrl::parse_reward_source(source_name);
      const std::uint64_t seed = rl_a.seed.value_or(0);
      rc.seed = c.rl_run_seed(seed);
      rc.episodes = episodes.value_or(c.episodes);
      rc.rollout.horizon = c.horizon;
      rc.rollout.terminate_on_success = c.terminate_on_success;
      rc.hyper = c.sac;
      std::optional<prw::rewardfn::RewardBundle> b;
      if (rc.source == prw::sacrl::RewardSource::kDense) {
        b = prw::rewardfn::load_bundle(bundle_path.empty() ? c.output_dir / "reward.prrb"
                                                           : std::filesystem::path(bundle_path));
      }
      const auto env = prw::physim::Environment::make(c.env);
      auto r = prw::sacrl::train_sac(env, rc, b ? &b->model : nullptr,
                                     [](const prw::sacrl::EpisodeRecord& e) {
                                       if (e.episode % 50 == 0) {
                                         log_line(fmt::format("episode {} return {:.3f}",
                                                              e.episode, e.ret));
                                       }
                                     });
      for (auto& e : r.episodes) e.seed = seed;
      const auto path = c.output_dir / "logs" / prw::bench::run_log_name(rc.source, seed);
      prw::write_text_file(path, prw::sacrl::benchmark_csv(r.episodes));
      if (r.error) {
        std::cerr << "run stopped: " << *r.error << '\n';
        return 2;
      }
      std::cout << "wrote " << path.string() << '\n';
      return 0;
    }
  } catch (const std::invalid_argument& e) {
    // ValidationError and ConfigError.
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
