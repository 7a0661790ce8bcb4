#include "prw/bench/metrics.hpp"

#include <algorithm>
#include <set>

#include <fmt/format.h>

#include "prw/common/binary_io.hpp"
#include "prw/common/error.hpp"

namespace prw::bench {

std::vector<double> smoothed_success(const std::vector<sacrl::EpisodeRecord>& records,
                                     std::size_t window) {
  if (window == 0) throw ContractError("smoothing window must be positive");
  std::vector<double> out(records.size());
  std::size_t in_window = 0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    in_window += records[i].success ? 1 : 0;
    if (i >= window && records[i - window].success) --in_window;
    const std::size_t n = std::min(i + 1, window);
    out[i] = static_cast<double>(in_window) / static_cast<double>(n);
  }
  return out;
}

RunAggregates compute_aggregates(const std::vector<sacrl::EpisodeRecord>& records,
                                 std::size_t window) {
  RunAggregates a;
  a.episodes = records.size();
  if (records.empty()) return a;
  for (const auto& r : records) {
    if (r.success) {
      a.first_success = r.episode;
      break;
    }
  }
  const std::size_t tail = std::max<std::size_t>(1, records.size() / 5);
  std::size_t hits = 0;
  for (std::size_t i = records.size() - tail; i < records.size(); ++i) {
    hits += records[i].success ? 1 : 0;
  }
  a.final_success_rate = static_cast<double>(hits) / static_cast<double>(tail);
  const auto curve = smoothed_success(records, window);
  double s = 0.0;
  for (double v : curve) s += v;
  a.auc = s / static_cast<double>(curve.size());
  return a;
}

const RunEntry* RunMetrics::find(sacrl::RewardSource source, std::uint64_t seed) const {
  for (const RunEntry& r : runs) {
    if (r.source == source && r.seed == seed) return &r;
  }
  return nullptr;
}

std::string metrics_csv(const RunMetrics& m) {
  std::string out = "source,seed,episodes,first_success,final_success_rate,auc,error\n";
  for (const RunEntry& r : m.runs) {
    const RunAggregates& a = r.aggregates;
    std::string error = r.error.value_or("");
    std::replace(error.begin(), error.end(), ',', ';');
    std::replace(error.begin(), error.end(), '\n', ' ');
    out += fmt::format("{},{},{},{},{:.17g},{:.17g},{}\n", sacrl::to_string(r.source), r.seed,
                       a.episodes, a.first_success ? std::to_string(*a.first_success) : "",
                       a.final_success_rate, a.auc, error);
  }
  return out;
}

std::vector<SeedComparison> compare_sources(const RunMetrics& m, sacrl::RewardSource a,
                                            sacrl::RewardSource b) {
  std::vector<SeedComparison> out;
  for (const RunEntry& ra : m.runs) {
    if (ra.source != a) continue;
    const RunEntry* rb = m.find(b, ra.seed);
    if (rb == nullptr) continue;
    SeedComparison c;
    c.seed = ra.seed;
    const auto& fa = ra.aggregates.first_success;
    const auto& fb = rb->aggregates.first_success;
    c.earlier_first_success = fa.has_value() && (!fb.has_value() || *fa < *fb);
    c.final_rate_not_lower =
        ra.aggregates.final_success_rate >= rb->aggregates.final_success_rate;
    out.push_back(c);
  }
  return out;
}

std::string rewards_csv(const physim::Environment& env, const rewardfn::RewardModel& reward,
                        const physim::Demonstration& trajectory) {
  std::string out = "t,p,handcrafted,sparse\n";
  for (std::size_t t = 0; t < trajectory.steps.size(); ++t) {
    const auto& step = trajectory.steps[t];
    out += fmt::format("{},{:.17g},{:.17g},{}\n", t, reward.progress(step.obs),
                       sacrl::handcrafted_reward(env, step.state),
                       sacrl::sparse_reward(env, step.state) > 0.0 ? 1 : 0);
  }
  return out;
}

std::string success_curve_csv(const RunMetrics& m, sacrl::RewardSource source) {
  std::vector<std::vector<double>> curves;
  for (const RunEntry& r : m.runs) {
    if (r.source == source && !r.episodes.empty()) {
      curves.push_back(smoothed_success(r.episodes, m.smoothing_window));
    }
  }
  std::string out = "episode,mean,min,max\n";
  if (curves.empty()) return out;
  std::size_t len = curves.front().size();
  for (const auto& c : curves) len = std::min(len, c.size());
  for (std::size_t i = 0; i < len; ++i) {
    double s = 0.0, lo = curves[0][i], hi = curves[0][i];
    for (const auto& c : curves) {
      s += c[i];
      lo = std::min(lo, c[i]);
      hi = std::max(hi, c[i]);
    }
    out += fmt::format("{},{:.17g},{:.17g},{:.17g}\n", i + 1,
                       s / static_cast<double>(curves.size()), lo, hi);
  }
  return out;
}

void export_curves(const std::filesystem::path& dir, const RunMetrics& m) {
  if (m.runs.empty()) throw ValidationError("no runs to export");
  std::filesystem::create_directories(dir);
  std::set<sacrl::RewardSource> sources;
  for (const RunEntry& r : m.runs) sources.insert(r.source);
  for (auto s : sources) {
    write_text_file(dir / fmt::format("success_{}.csv", sacrl::to_string(s)),
                    success_curve_csv(m, s));
  }
}

}  // namespace prw::bench
