#include "prw/tvfs/sampler.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "prw/common/error.hpp"

namespace prw::tvfs {

using physim::Action;
using physim::Demonstration;
using physim::Environment;

void SamplingConfig::validate() const {
  if (interval < 1 || branches < 1 || steps < 1) {
    throw ConfigError("sampling needs I >= 1, N >= 1, K >= 1");
  }
  if (!(sample.scale_lo > 0.0) || !(sample.scale_hi >= sample.scale_lo)) {
    throw ConfigError("sampling scale range must satisfy 0 < lo <= hi");
  }
  if (!(sample.fallback_radius >= 0.0)) {
    throw ConfigError("fallback radius must be >= 0");
  }
}

std::vector<SeedPoint> select_seeds(const Demonstration& demo, std::int64_t interval) {
  if (demo.steps.empty()) throw ValidationError("select_seeds: empty demonstration");
  if (interval < 1) throw ConfigError("select_seeds: interval must be >= 1");
  const auto T = static_cast<std::int64_t>(demo.horizon());
  std::vector<SeedPoint> out;
  for (std::int64_t t = 0; t <= T; t += interval) {
    const auto& step = demo.steps[static_cast<std::size_t>(t)];
    out.push_back({static_cast<std::uint32_t>(out.size()), t, step.state, step.obs.ft_window});
  }
  return out;
}

std::int64_t PairDataset::expected_count() const {
  std::int64_t lost = 0;
  for (const Incident& inc : incidents) lost += config.steps - inc.branch_step;
  return demo_length + seed_count * config.branches * config.steps - lost;
}

namespace {

struct BranchResult {
  std::vector<PairRecord> records;
  std::optional<Incident> incident;
};

BranchResult run_branch(const Environment& env, const Demonstration& demo,
                        const SeedPoint& seed, std::uint32_t branch,
                        const SamplingConfig& config, const VarianceSchedule& sched,
                        double dt) {
  BranchResult out;
  const auto T = static_cast<std::int64_t>(demo.horizon());
  Rng rng(derive_seed(config.seed, static_cast<std::uint64_t>(seed.index) *
                                       static_cast<std::uint64_t>(config.branches) +
                                       branch));
  std::uint32_t j = 0;
  try {
    physim::Episode ep(env, seed.state, physim::WrenchWindow::from_rows(seed.window));
    for (; j < static_cast<std::uint32_t>(config.steps); ++j) {
      const std::int64_t t = seed.t + j;
      // Past the last action, the final demo action is reused.
      const std::int64_t ta = std::min(t, T - 1);
      const Action demo_action =
          ta >= 0 ? *demo.steps[static_cast<std::size_t>(ta)].action : Action{};
      const double theta = sched.eval(std::min(t, T));
      const SampledAction s = sample_action(demo_action, theta, rng, config.sample);
      PairRecord rec;
      rec.source = PairSource::kBranch;
      rec.seed_index = seed.index;
      rec.branch_index = branch;
      rec.t = t;
      rec.branch_step = j;
      rec.theta = theta;
      rec.fallback = s.fallback;
      rec.demo_action = demo_action;
      rec.unclamped = s.unclamped;
      rec.applied = s.action;
      rec.state = ep.state();
      rec.obs_t = ep.observe();
      ep.step(s.action, dt);
      rec.obs_next = ep.observe();
      out.records.push_back(std::move(rec));
    }
  } catch (const std::exception& e) {
    // Physics and restoration failures truncate the branch only.
    out.incident = Incident{seed.index, branch, j, e.what()};
  }
  return out;
}

}  // namespace

PairDataset rollout_branches(const Environment& env, const Demonstration& demo,
                             const std::vector<SeedPoint>& seeds,
                             const SamplingConfig& config, const VarianceSchedule& sched,
                             const Digest& demo_hash, const RolloutOptions& options) {
  config.validate();
  sched.validate();
  if (demo.steps.size() < 2) throw ValidationError("rollout_branches: demo has no actions");
  if (demo.kind != env.kind()) throw ValidationError("rollout_branches: env kind mismatch");
  const auto T = static_cast<std::int64_t>(demo.horizon());
  if (sched.horizon != T) {
    throw ConfigError("schedule horizon " + std::to_string(sched.horizon) +
                      " differs from demo length " + std::to_string(T));
  }
  PairDataset ds;
  ds.demo_hash = demo_hash;
  ds.config = config;
  ds.schedule = sched;
  ds.kind = demo.kind;
  ds.demo_length = T;
  ds.seed_count = static_cast<std::int64_t>(seeds.size());

  for (std::int64_t t = 0; t < T; ++t) {
    const auto& cur = demo.steps[static_cast<std::size_t>(t)];
    const auto& nxt = demo.steps[static_cast<std::size_t>(t + 1)];
    PairRecord rec;
    rec.t = t;
    rec.theta = sched.eval(t);
    rec.demo_action = *cur.action;
    rec.unclamped = *cur.action;
    rec.applied = *cur.action;
    rec.state = cur.state;
    rec.obs_t = cur.obs;
    rec.obs_next = nxt.obs;
    ds.records.push_back(std::move(rec));
  }

  const auto N = static_cast<std::size_t>(config.branches);
  const std::size_t jobs = seeds.size() * N;
  std::vector<BranchResult> results(jobs);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < jobs; k = next++) {
      results[k] = run_branch(env, demo, seeds[k / N], static_cast<std::uint32_t>(k % N),
                              config, sched, options.dt);
    }
  };
  const unsigned nthreads = std::max(1u, std::min<unsigned>(options.workers,
                                                            static_cast<unsigned>(jobs)));
  if (nthreads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < nthreads; ++i) pool.emplace_back(worker);
  }
  for (BranchResult& r : results) {
    for (PairRecord& rec : r.records) ds.records.push_back(std::move(rec));
    if (r.incident) ds.incidents.push_back(std::move(*r.incident));
  }
  return ds;
}

ConstraintScan scan_constraints(const PairDataset& ds) {
  ConstraintScan scan;
  for (const PairRecord& rec : ds.records) {
    if (rec.source != PairSource::kBranch) continue;
    if (rec.fallback) {
      ++scan.fallbacks;
      continue;
    }
    ++scan.checked;
    const double c =
        cosine_similarity(rec.unclamped.as_array(), rec.demo_action.as_array());
    // Rounding slack for draws at the cone boundary.
    if (c >= std::cos(rec.theta) - 1e-12) ++scan.satisfied;
  }
  return scan;
}

namespace {

constexpr std::uint32_t kDatasetVersion = 1;

void put_action(ByteWriter& w, const Action& a) { w.put_f64s(a.as_array()); }

Action get_action(ByteReader& r) {
  std::array<double, 3> a{};
  r.get_f64s(a);
  return Action::from_array(a);
}

}  // namespace

Bytes encode_dataset(const PairDataset& ds) {
  ByteWriter w;
  w.put_magic("PRPD");
  w.put<std::uint32_t>(kDatasetVersion);
  w.put_raw(ds.demo_hash);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(ds.kind));
  w.put<std::int64_t>(ds.demo_length);
  w.put<std::int64_t>(ds.seed_count);
  w.put<std::int64_t>(ds.config.interval);
  w.put<std::int64_t>(ds.config.branches);
  w.put<std::int64_t>(ds.config.steps);
  w.put<std::uint64_t>(ds.config.seed);
  w.put<double>(ds.config.sample.scale_lo);
  w.put<double>(ds.config.sample.scale_hi);
  w.put<double>(ds.config.sample.fallback_radius);
  w.put<double>(ds.schedule.theta_min);
  w.put<double>(ds.schedule.theta_max);
  w.put<std::int64_t>(ds.schedule.horizon);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(ds.schedule.kernel));
  w.put<std::uint64_t>(ds.records.size());
  w.put<std::uint64_t>(ds.incidents.size());
  for (const PairRecord& rec : ds.records) {
    w.put<std::uint8_t>(static_cast<std::uint8_t>(rec.source));
    w.put<std::uint8_t>(rec.fallback ? 1 : 0);
    w.put<std::uint32_t>(rec.seed_index);
    w.put<std::uint32_t>(rec.branch_index);
    w.put<std::int64_t>(rec.t);
    w.put<std::uint32_t>(rec.branch_step);
    w.put<double>(rec.theta);
    put_action(w, rec.demo_action);
    put_action(w, rec.unclamped);
    put_action(w, rec.applied);
    physim::put_state(w, rec.state);
    physim::put_observation(w, rec.obs_t);
    physim::put_observation(w, rec.obs_next);
  }
  for (const Incident& inc : ds.incidents) {
    w.put<std::uint32_t>(inc.seed_index);
    w.put<std::uint32_t>(inc.branch_index);
    w.put<std::uint32_t>(inc.branch_step);
    w.put_string(inc.message);
  }
  return w.take();
}

PairDataset decode_dataset(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  r.expect_magic("PRPD");
  const auto version = r.get<std::uint32_t>();
  if (version != kDatasetVersion) {
    throw ValidationError("unsupported dataset version " + std::to_string(version));
  }
  PairDataset ds;
  const auto hash = r.get_raw(ds.demo_hash.size());
  std::copy(hash.begin(), hash.end(), ds.demo_hash.begin());
  const auto kind = r.get<std::uint32_t>();
  if (kind != 1 && kind != 2) throw ValidationError("bad env kind in dataset");
  ds.kind = static_cast<physim::EnvKind>(kind);
  ds.demo_length = r.get<std::int64_t>();
  ds.seed_count = r.get<std::int64_t>();
  ds.config.interval = r.get<std::int64_t>();
  ds.config.branches = r.get<std::int64_t>();
  ds.config.steps = r.get<std::int64_t>();
  ds.config.seed = r.get<std::uint64_t>();
  ds.config.sample.scale_lo = r.get<double>();
  ds.config.sample.scale_hi = r.get<double>();
  ds.config.sample.fallback_radius = r.get<double>();
  ds.schedule.theta_min = r.get<double>();
  ds.schedule.theta_max = r.get<double>();
  ds.schedule.horizon = r.get<std::int64_t>();
  ds.schedule.kernel = static_cast<KernelKind>(r.get<std::uint32_t>());
  const auto nrec = r.get<std::uint64_t>();
  const auto ninc = r.get<std::uint64_t>();
  if (nrec > bytes.size() || ninc > bytes.size()) {
    throw ValidationError("dataset counts exceed file size");
  }
  ds.records.reserve(nrec);
  for (std::uint64_t k = 0; k < nrec; ++k) {
    PairRecord rec;
    const auto src = r.get<std::uint8_t>();
    if (src > 1) throw ValidationError("bad pair source tag");
    rec.source = static_cast<PairSource>(src);
    rec.fallback = r.get<std::uint8_t>() != 0;
    rec.seed_index = r.get<std::uint32_t>();
    rec.branch_index = r.get<std::uint32_t>();
    rec.t = r.get<std::int64_t>();
    rec.branch_step = r.get<std::uint32_t>();
    rec.theta = r.get<double>();
    rec.demo_action = get_action(r);
    rec.unclamped = get_action(r);
    rec.applied = get_action(r);
    rec.state = physim::get_state(r);
    rec.obs_t = physim::get_observation(r);
    rec.obs_next = physim::get_observation(r);
    ds.records.push_back(std::move(rec));
  }
  for (std::uint64_t k = 0; k < ninc; ++k) {
    Incident inc;
    inc.seed_index = r.get<std::uint32_t>();
    inc.branch_index = r.get<std::uint32_t>();
    inc.branch_step = r.get<std::uint32_t>();
    inc.message = r.get_string();
    ds.incidents.push_back(std::move(inc));
  }
  if (!r.at_end()) throw ValidationError("trailing bytes after dataset");
  return ds;
}

void save_dataset(const std::filesystem::path& path, const PairDataset& ds) {
  write_file(path, encode_dataset(ds));
}

PairDataset load_dataset(const std::filesystem::path& path) {
  const Bytes bytes = read_file(path);
  return decode_dataset(bytes);
}

}  // namespace prw::tvfs
