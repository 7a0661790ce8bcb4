// End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
// exits non-zero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numbers>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "finite_diff.hpp"
#include "polygon_oracle.hpp"
#include "prw/bench/pipeline.hpp"
#include "prw/common/binary_io.hpp"
#include "prw/gradnet/checkpoint.hpp"
#include "prw/gradnet/ops.hpp"
#include "prw/physim/render.hpp"
#include "random_tensor.hpp"

using namespace prw;
namespace fs = std::filesystem;
namespace gn = prw::gradnet;
using prw::testing::check_gradients;
using prw::testing::random_tensor;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void log_line(const std::string& msg) { std::cerr << "  " << msg << '\n'; }

// ---------------------------------------------------------------- oracles

// Average ranks, ties share the mean of their positions (1-based).
std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
    i = j + 1;
  }
  return r;
}

// Pearson correlation of the ranks.
double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  const auto rx = ranks(x), ry = ranks(y);
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += rx[i];
    my += ry[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

gn::Tensor naive_conv2d(const gn::Tensor& x, const gn::Tensor& k, const gn::Tensor& b,
                        std::size_t s) {
  const std::size_t C = x.dim(0), H = x.dim(1), W = x.dim(2);
  const std::size_t O = k.dim(0), kk = k.dim(2);
  const std::size_t Ho = (H - kk) / s + 1, Wo = (W - kk) / s + 1;
  gn::Tensor y({O, Ho, Wo});
  for (std::size_t o = 0; o < O; ++o)
    for (std::size_t i = 0; i < Ho; ++i)
      for (std::size_t j = 0; j < Wo; ++j) {
        double acc = b[o];
        for (std::size_t c = 0; c < C; ++c)
          for (std::size_t p = 0; p < kk; ++p)
            for (std::size_t q = 0; q < kk; ++q)
              acc += k[((o * C + c) * kk + p) * kk + q] * x[(c * H + i * s + p) * W + j * s + q];
        y[(o * Ho + i) * Wo + j] = acc;
      }
  return y;
}

// Scatter form: every input cell adds its kernel-weighted copy to the output.
gn::Tensor naive_conv_transpose2d(const gn::Tensor& x, const gn::Tensor& k, const gn::Tensor& b,
                                  std::size_t s) {
  const std::size_t C = x.dim(0), H = x.dim(1), W = x.dim(2);
  const std::size_t O = k.dim(1), kk = k.dim(2);
  const std::size_t Ho = (H - 1) * s + kk, Wo = (W - 1) * s + kk;
  gn::Tensor y({O, Ho, Wo});
  for (std::size_t o = 0; o < O; ++o)
    for (std::size_t i = 0; i < Ho; ++i)
      for (std::size_t j = 0; j < Wo; ++j) y[(o * Ho + i) * Wo + j] = b[o];
  for (std::size_t c = 0; c < C; ++c)
    for (std::size_t i = 0; i < H; ++i)
      for (std::size_t j = 0; j < W; ++j)
        for (std::size_t o = 0; o < O; ++o)
          for (std::size_t p = 0; p < kk; ++p)
            for (std::size_t q = 0; q < kk; ++q)
              y[(o * Ho + i * s + p) * Wo + j * s + q] +=
                  x[(c * H + i) * W + j] * k[((c * O + o) * kk + p) * kk + q];
  return y;
}

// y[o, t] = b[o] + sum_{c, m} k[o, c, m] x[c, t - (K-1-m) d], zero before t = 0.
gn::Tensor naive_causal_conv1d(const gn::Tensor& x, const gn::Tensor& k, const gn::Tensor& b,
                               std::size_t d) {
  const std::size_t C = x.dim(0), T = x.dim(1), O = k.dim(0), K = k.dim(2);
  gn::Tensor y({O, T});
  for (std::size_t o = 0; o < O; ++o)
    for (std::size_t t = 0; t < T; ++t) {
      double acc = b[o];
      for (std::size_t c = 0; c < C; ++c)
        for (std::size_t m = 0; m < K; ++m) {
          const std::size_t back = (K - 1 - m) * d;
          if (back <= t) acc += k[(o * C + c) * K + m] * x[c * T + t - back];
        }
      y[o * T + t] = acc;
    }
  return y;
}

double max_abs_diff(const gn::Tensor& a, const gn::Tensor& b) {
  if (a.shape() != b.shape()) return INFINITY;
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// ------------------------------------------------------------- criteria

Outcome gradient_suite() {
  const auto t0 = Clock::now();
  Rng rng(101);
  double worst = 0.0;
  std::string worst_name;
  std::size_t checked = 0;
  auto record = [&](const std::string& name, gn::ParameterSet& ps,
                    const std::function<gn::Value(gn::Graph&)>& f) {
    const auto r = check_gradients(ps, f);
    checked += r.checked;
    if (r.max_rel_error >= worst) {
      worst = r.max_rel_error;
      worst_name = name;
    }
  };
  using Unary = std::function<gn::Value(gn::Graph&, gn::Value)>;
  const std::vector<std::pair<std::string, Unary>> unary{
      {"relu", [](gn::Graph& g, gn::Value a) { return gn::relu(g, a); }},
      {"tanh", [](gn::Graph& g, gn::Value a) { return gn::tanh(g, a); }},
      {"sigmoid", [](gn::Graph& g, gn::Value a) { return gn::sigmoid(g, a); }},
      {"exp", [](gn::Graph& g, gn::Value a) { return gn::exp(g, a); }},
      {"log", [](gn::Graph& g, gn::Value a) { return gn::log(g, gn::add_scalar(g, a, 2.0)); }},
      {"square", [](gn::Graph& g, gn::Value a) { return gn::square(g, a); }},
      {"scale", [](gn::Graph& g, gn::Value a) { return gn::scale(g, a, -1.7); }},
      {"add_scalar", [](gn::Graph& g, gn::Value a) { return gn::add_scalar(g, a, 0.3); }},
      {"clamp", [](gn::Graph& g, gn::Value a) { return gn::clamp(g, a, -0.5, 0.5); }},
      {"sum_last", [](gn::Graph& g, gn::Value a) { return gn::sum_last(g, a); }},
      {"mean", [](gn::Graph& g, gn::Value a) { return gn::mean(g, a); }},
      {"reshape", [](gn::Graph& g, gn::Value a) { return gn::reshape(g, a, {4, 3}); }},
      {"slice_last", [](gn::Graph& g, gn::Value a) { return gn::slice_last(g, a, 1, 5); }},
      {"l2_normalize",
       [](gn::Graph& g, gn::Value a) { return gn::l2_normalize(g, gn::reshape(g, a, {12})); }},
  };
  for (const auto& [name, op] : unary) {
    gn::ParameterSet ps;
    ps.add("a", random_tensor({2, 6}, rng));
    // Keep away from kinks and clamp edges where central differences straddle.
    for (double& v : ps[0].value.values()) {
      if (std::abs(v) < 0.05) v += 0.1;
      if (std::abs(std::abs(v) - 0.5) < 0.05) v *= 0.8;
    }
    const gn::Tensor w = random_tensor({12}, rng);
    record(name, ps, [&, op = op](gn::Graph& g) {
      const auto y = op(g, g.parameter(ps[0]));
      const auto flat = gn::reshape(g, gn::square(g, y), {g.value(y).size()});
      const std::size_t n = g.value(y).size();
      const auto ww = g.constant(gn::Tensor(
          {n}, std::vector<double>(w.values().begin(), w.values().begin() + n)));
      return gn::sum(g, gn::mul(g, flat, ww));
    });
  }
  using Binary = std::function<gn::Value(gn::Graph&, gn::Value, gn::Value)>;
  const std::vector<std::pair<std::string, Binary>> binary{
      {"add", [](gn::Graph& g, gn::Value a, gn::Value b) { return gn::add(g, a, b); }},
      {"sub", [](gn::Graph& g, gn::Value a, gn::Value b) { return gn::sub(g, a, b); }},
      {"mul", [](gn::Graph& g, gn::Value a, gn::Value b) { return gn::mul(g, a, b); }},
      {"minimum", [](gn::Graph& g, gn::Value a, gn::Value b) { return gn::minimum(g, a, b); }},
      {"mse", [](gn::Graph& g, gn::Value a, gn::Value b) { return gn::mse(g, a, b); }},
      {"concat_last",
       [](gn::Graph& g, gn::Value a, gn::Value b) { return gn::concat_last(g, {a, b}); }},
  };
  for (const auto& [name, op] : binary) {
    gn::ParameterSet ps;
    ps.add("a", random_tensor({3, 4}, rng));
    ps.add("b", random_tensor({3, 4}, rng));
    for (std::size_t i = 0; i < 12; ++i) {
      if (std::abs(ps[0].value[i] - ps[1].value[i]) < 0.05) ps[1].value[i] += 0.2;
    }
    record(name, ps, [&, op = op](gn::Graph& g) {
      return gn::sum(g, gn::square(g, op(g, g.parameter(ps[0]), g.parameter(ps[1]))));
    });
  }
  {
    gn::ParameterSet ps;
    ps.add("x", random_tensor({2, 5}, rng));
    ps.add("w", random_tensor({3, 5}, rng));
    ps.add("b", random_tensor({3}, rng));
    record("dense", ps, [&](gn::Graph& g) {
      return gn::sum(g, gn::square(g, gn::dense(g, g.parameter(ps[0]), g.parameter(ps[1]),
                                                g.parameter(ps[2]))));
    });
  }
  for (std::size_t stride : {1u, 2u}) {
    gn::ParameterSet ps;
    ps.add("x", random_tensor({2, 7, 7}, rng));
    ps.add("k", random_tensor({3, 2, 3, 3}, rng));
    ps.add("b", random_tensor({3}, rng));
    record(fmt::format("conv2d/s{}", stride), ps, [&](gn::Graph& g) {
      return gn::sum(g, gn::square(g, gn::conv2d(g, g.parameter(ps[0]), g.parameter(ps[1]),
                                                 g.parameter(ps[2]), stride)));
    });
    gn::ParameterSet pt;
    pt.add("x", random_tensor({3, 3, 3}, rng));
    pt.add("k", random_tensor({3, 2, 2, 2}, rng));
    pt.add("b", random_tensor({2}, rng));
    record(fmt::format("conv_transpose2d/s{}", stride), pt, [&](gn::Graph& g) {
      return gn::sum(g, gn::square(g, gn::conv_transpose2d(g, g.parameter(pt[0]),
                                                           g.parameter(pt[1]),
                                                           g.parameter(pt[2]), stride)));
    });
  }
  for (std::size_t dil : {1u, 3u}) {
    gn::ParameterSet ps;
    ps.add("x", random_tensor({3, 10}, rng));
    ps.add("k", random_tensor({2, 3, 2}, rng));
    ps.add("b", random_tensor({2}, rng));
    record(fmt::format("causal_conv1d/d{}", dil), ps, [&](gn::Graph& g) {
      return gn::sum(g, gn::square(g, gn::causal_conv1d(g, g.parameter(ps[0]),
                                                        g.parameter(ps[1]),
                                                        g.parameter(ps[2]), dil)));
    });
  }
  {
    // Full hybrid loss on the tiny model. Biases are moved off zero so no
    // ReLU input sits exactly on its kink.
    replearn::ReprModel model(replearn::ReprConfig::tiny(), 31);
    Rng brng(32);
    for (gn::Parameter& p : model.params()) {
      if (p.name.size() > 2 && p.name.compare(p.name.size() - 2, 2, ".b") == 0) {
        for (double& v : p.value.values()) v = brng.uniform(0.05, 0.3);
      }
    }
    auto obs = [&] {
      physim::Observation o;
      o.grid_side = 8;
      o.intensity.resize(64);
      o.depth.resize(64);
      for (double& v : o.intensity) v = rng.uniform();
      for (double& v : o.depth) v = rng.uniform();
      o.velocity = {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
      for (std::size_t r = 0; r < physim::kWindowLength; ++r)
        for (std::size_t c = 0; c < 3; ++c) o.ft_window[r * 6 + c] = rng.uniform(-20, 20);
      return replearn::prepare(model.config(), o);
    };
    const auto a = obs(), b = obs(), c = obs();
    const replearn::PreparedObs* first[] = {&a, &b};
    const replearn::PreparedObs* second[] = {&b, &c};
    record("hybrid_loss", model.params(), [&](gn::Graph& g) {
      return replearn::hybrid_loss_nodes(g, model, first, second, {.lambda = 10.0}).total;
    });
  }
  const double secs = seconds_since(t0);
  return {worst < 1e-3 && secs < 120.0,
          fmt::format("max relative error {:.3g} ({}) over {} entries in {:.1f} s "
                      "(need < 1e-3, < 120 s)",
                      worst, worst_name, checked, secs)};
}

Outcome tvfs_counts(const fs::path& run) {
  const tvfs::PairDataset ds = tvfs::load_dataset(run / "pairs.prpd");
  std::size_t branch = 0, inside = 0;
  for (const tvfs::PairRecord& r : ds.records) {
    if (r.source != tvfs::PairSource::kBranch) continue;
    ++branch;
    const auto u = r.unclamped.as_array(), d = r.demo_action.as_array();
    double ud = 0, uu = 0, dd = 0;
    for (int i = 0; i < 3; ++i) {
      ud += u[i] * d[i];
      uu += u[i] * u[i];
      dd += d[i] * d[i];
    }
    const double T = static_cast<double>(ds.demo_length);
    // Branch steps past the end of the demonstration use the final angle.
    const double tau = std::min(static_cast<double>(r.t), T) / T;
    const double theta = ds.schedule.theta_min +
                         (ds.schedule.theta_max - ds.schedule.theta_min) * 4.0 * tau * (1.0 - tau);
    if (ud / std::sqrt(uu * dd) >= std::cos(theta) - 1e-12) ++inside;
  }
  const auto& s = ds.schedule;
  const bool ends = s.eval(0) == std::numbers::pi / 12 && s.eval(s.horizon) == std::numbers::pi / 12 &&
                    s.eval(s.horizon / 2) == std::numbers::pi / 4;
  const bool pass = ds.demo_length == 500 && ds.records.size() == 1050 && branch == 550 &&
                    inside == branch && ends;
  return {pass, fmt::format("T={} pairs={} (need 1050), cone compliance {}/{}, "
                            "theta(0)={:.17g} theta(T/2)={:.17g} theta(T)={:.17g}",
                            ds.demo_length, ds.records.size(), inside, branch, s.eval(0),
                            s.eval(s.horizon / 2), s.eval(s.horizon))};
}

Outcome loss_identity(const fs::path& run, std::int64_t expected_iterations) {
  std::istringstream in(read_text_file(run / "training.csv"));
  std::string line;
  std::getline(in, line);
  double worst = 0.0;
  std::int64_t rows = 0;
  while (std::getline(in, line)) {
    double it, l, lr, lt;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf", &it, &l, &lr, &lt) != 4) {
      return {false, "unparseable training.csv line: " + line};
    }
    worst = std::max(worst, std::abs(l - (lr + 10.0 * lt)));
    ++rows;
  }
  return {rows == expected_iterations && worst <= 1e-12,
          fmt::format("{} iterations, max |l - (l_recon + 10 l_temporal)| = {:.3g} (need <= 1e-12)",
                      rows, worst)};
}

Outcome normalization(const fs::path& run, const rewardfn::RewardBundle& bundle,
                      const physim::Demonstration& heldout) {
  const tvfs::PairDataset ds = tvfs::load_dataset(run / "pairs.prpd");
  const replearn::ReprModel& trained = bundle.model.model();
  double worst = 0.0;
  std::size_t n = 0;
  auto check = [&](const physim::Observation& o) {
    const auto e = trained.encode_dynamic(o);
    double s = 0;
    for (double v : e) s += v * v;
    worst = std::max(worst, std::abs(std::sqrt(s) - 1.0));
    ++n;
  };
  for (const auto& r : ds.records) {
    check(r.obs_t);
    check(r.obs_next);
  }
  for (const auto& st : heldout.steps) check(st.obs);
  return {worst <= 1e-6, fmt::format("{} dynamic embeddings, max | ||e|| - 1 | = {:.3g} "
                                     "(need <= 1e-6)",
                                     n, worst)};
}

Outcome endpoints(const rewardfn::RewardBundle& bundle, const physim::Demonstration& demo) {
  const auto& rm = bundle.model;
  const double p0 = rm.progress(demo.steps.front().obs);
  const double pg = rm.progress(demo.steps.back().obs);
  const auto& h0 = rm.references().h0;
  const auto& hg = rm.references().hg;
  std::vector<double> far(h0.size());
  for (std::size_t i = 0; i < far.size(); ++i) far[i] = hg[i] + 2.0 * (h0[i] - hg[i]);
  const double pf = rm.progress(far);
  return {p0 == 0.0 && pg == 1.0 && std::abs(pf + 1.0) <= 1e-12,
          fmt::format("p(initial)={:.17g} p(goal)={:.17g} (need exactly 0 and 1), "
                      "p(twice the distance)={:.17g} (need -1 within 1e-12)",
                      p0, pg, pf)};
}

Outcome reward_trend(const rewardfn::RewardBundle& bundle, const physim::Demonstration& heldout,
                     const physim::Demonstration& retreat, std::int64_t iterations,
                     double train_seconds) {
  std::vector<double> t, p;
  for (std::size_t i = 0; i < heldout.steps.size(); ++i) {
    t.push_back(static_cast<double>(i));
    p.push_back(bundle.model.progress(heldout.steps[i].obs));
  }
  const double rho = spearman(t, p);
  const double r0 = bundle.model.progress(retreat.steps.front().obs);
  const double r1 = bundle.model.progress(retreat.steps.back().obs);
  const bool pass = heldout.success && rho >= 0.7 && r1 < r0 && iterations <= 5000 &&
                    train_seconds < 1800.0;
  return {pass, fmt::format("held-out seed {} ({} steps): Spearman {:.4f} (need >= 0.7); "
                            "move-away p {:.4f} -> {:.4f} (need a drop); "
                            "{} iterations in {:.0f} s (need <= 5000, < 1800 s)",
                            heldout.seed, heldout.horizon(), rho, r0, r1, iterations,
                            train_seconds)};
}

Outcome benchmark_trend(const bench::RunMetrics& m, std::size_t episodes, double bench_seconds) {
  using sacrl::RewardSource;
  std::string detail;
  for (const auto& r : m.runs) {
    const auto& a = r.aggregates;
    detail += fmt::format("\n    {:<11} seed {}: first success {:>4}, final-20% rate {:.3f}, "
                          "auc {:.3f}{}",
                          sacrl::to_string(r.source), r.seed,
                          a.first_success ? std::to_string(*a.first_success) : "none",
                          a.final_success_rate, a.auc, r.error ? " error: " + *r.error : "");
  }
  const auto cmp = bench::compare_sources(m, RewardSource::kDense, RewardSource::kSparse);
  std::size_t earlier = 0, not_lower = 0;
  for (const auto& c : cmp) {
    earlier += c.earlier_first_success ? 1 : 0;
    not_lower += c.final_rate_not_lower ? 1 : 0;
  }
  bool full = cmp.size() == 3;
  for (const auto& r : m.runs) full = full && r.episodes.size() == episodes && !r.error;
  const bool pass = full && earlier >= 2 && not_lower >= 2 && bench_seconds < 4 * 3600.0;
  return {pass, fmt::format("dense first success strictly earlier than sparse in {}/3 seeds, "
                            "final-20% rate >= sparse in {}/3 seeds (need >= 2 each); "
                            "{} runs x {} episodes in {:.0f} s (need < 14400 s){}",
                            earlier, not_lower, m.runs.size(), episodes, bench_seconds, detail)};
}

Outcome determinism(const fs::path& work) {
  auto reduced = [&](const std::string& name) {
    bench::ExperimentConfig c;
    c.output_dir = work / name;
    c.train.iterations = 200;
    c.episodes = 10;
    c.horizon = 100;
    c.sac.warmup_steps = 300;
    return c;
  };
  for (const char* name : {"det_a", "det_b"}) {
    fs::remove_all(work / name);
    bench::run_pipeline(reduced(name), {.resume = false, .stop_after = {}, .log = {}});
  }
  std::vector<std::string> files{"demo.prld", "pairs.prpd", "repr.prck", "training.csv",
                                 "reward.prrb", "metrics.csv"};
  for (const auto& r : bench::load_benchmark(work / "det_a", reduced("det_a")).runs) {
    files.push_back("logs/" + bench::run_log_name(r.source, r.seed));
  }
  std::size_t same = 0;
  std::string differing;
  for (const auto& f : files) {
    if (read_file(work / "det_a" / f) == read_file(work / "det_b" / f)) {
      ++same;
    } else {
      differing += " " + f;
    }
  }
  return {same == files.size(),
          fmt::format("two pipeline runs, global seed 1 (200 iterations, 9 runs x 10 episodes): "
                      "{}/{} artifacts byte-identical{}",
                      same, files.size(), differing.empty() ? "" : "; differ:" + differing)};
}

Outcome physics_oracles() {
  Rng rng(909);
  double conv_err = 0.0;
  for (std::size_t stride : {1u, 2u}) {
    const auto x = random_tensor({3, 11, 11}, rng);
    const auto k = random_tensor({4, 3, 3, 3}, rng);
    const auto b = random_tensor({4}, rng);
    gn::Graph g;
    const auto y = g.value(gn::conv2d(g, g.constant(x), g.constant(k), g.constant(b), stride));
    conv_err = std::max(conv_err, max_abs_diff(y, naive_conv2d(x, k, b, stride)));
    const auto xt = random_tensor({3, 4, 4}, rng);
    const auto kt = random_tensor({3, 2, 2, 2}, rng);
    const auto bt = random_tensor({2}, rng);
    gn::Graph gt;
    const auto yt = gt.value(
        gn::conv_transpose2d(gt, gt.constant(xt), gt.constant(kt), gt.constant(bt), stride));
    conv_err = std::max(conv_err, max_abs_diff(yt, naive_conv_transpose2d(xt, kt, bt, stride)));
  }
  for (std::size_t d : {1u, 2u, 4u}) {
    const auto x = random_tensor({3, 16}, rng);
    const auto k = random_tensor({5, 3, 2}, rng);
    const auto b = random_tensor({5}, rng);
    gn::Graph g;
    const auto y = g.value(gn::causal_conv1d(g, g.constant(x), g.constant(k), g.constant(b), d));
    conv_err = std::max(conv_err, max_abs_diff(y, naive_causal_conv1d(x, k, b, d)));
  }

  // Every cell's intensity equals its covered-subsample fraction under the
  // crossing-number test, for scenes drawn from the block environment.
  const auto env = physim::Environment::make(physim::EnvKind::kBlockInsertion);
  const auto& cam = env.camera();
  std::size_t raster_cells = 0, raster_bad = 0;
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    physim::EnvState s = env.initial_state(seed);
    s.poses[0].angle = rng.uniform(-0.8, 0.8);
    const auto bodies = env.render_bodies(s);
    const std::vector<physim::RenderBody> one{bodies.front()};
    const auto grid = physim::render_bodies(one, cam);
    const std::size_t n = cam.side, ss = cam.supersample;
    const double cw = (cam.x_max - cam.x_min) / static_cast<double>(n);
    const double ch = (cam.y_max - cam.y_min) / static_cast<double>(n);
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < n; ++c) {
        double covered = 0.0;
        for (std::size_t j = 0; j < ss; ++j)
          for (std::size_t i = 0; i < ss; ++i) {
            const double x = cam.x_min + cw * (static_cast<double>(c) +
                                               (static_cast<double>(i) + 0.5) / ss);
            const double y = cam.y_max - ch * (static_cast<double>(r) +
                                               (static_cast<double>(j) + 0.5) / ss);
            if (prw::testing::crossing_number_inside(one[0].polygon, x, y)) {
              covered += one[0].intensity;
            }
          }
        const double expect = covered * (1.0 / static_cast<double>(ss * ss));
        ++raster_cells;
        if (grid.intensity[r * n + c] != expect) ++raster_bad;
      }
  }

  const physim::ContactParams cp;
  std::size_t penalty_bad = 0;
  const std::vector<std::array<double, 3>> cases{
      {0.01, 0.0, cp.stiffness * 0.01},
      {0.02, 0.1, cp.stiffness * 0.02 + cp.damping * 0.1},
      {0.005, -0.2, std::max(0.0, cp.stiffness * 0.005 + cp.damping * -0.2)},
      {0.0, 0.0, 0.0},
      {0.03, -10.0, 0.0}};
  for (const auto& [pen, rate, expect] : cases) {
    if (physim::penalty_normal_force(pen, rate, cp) != expect) ++penalty_bad;
  }
  const bool pass = conv_err <= 1e-12 && raster_bad == 0 && penalty_bad == 0;
  return {pass, fmt::format("conv max |lib - reference| = {:.3g} (need <= 1e-12); raster "
                            "mismatches {}/{} cells; penalty mismatches {}/{}",
                            conv_err, raster_bad, raster_cells, penalty_bad, cases.size())};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance run"};
  fs::path work = "acceptance_work";
  std::vector<int> only;
  bool reuse = false;
  app.add_option("--work", work, "Scratch directory for pipeline runs");
  app.add_option("--only", only, "Run only these criteria (1-9)");
  app.add_flag("--reuse", reuse, "Reuse a completed full run in <work>/full");
  CLI11_PARSE(app, argc, argv);
  const std::set<int> selected(only.begin(), only.end());
  auto want = [&](int k) { return selected.empty() || selected.count(k) != 0; };

  std::map<int, Outcome> results;
  auto run = [&](int k, const std::function<Outcome()>& f) {
    if (!want(k)) return;
    try {
      results[k] = f();
    } catch (const std::exception& e) {
      results[k] = {false, std::string("error: ") + e.what()};
    }
  };

  run(1, gradient_suite);
  run(9, physics_oracles);

  const bool needs_full = want(2) || want(3) || want(4) || want(5) || want(6) || want(7);
  if (needs_full) {
    // Default configuration: block insertion, 5000 iterations, 3 sources x
    // 3 seeds x 500 episodes.
    bench::ExperimentConfig c;
    c.output_dir = work / "full";
    if (!reuse) fs::remove_all(c.output_dir);
    bench::PipelineOptions opt;
    opt.log = log_line;
    double train_seconds = 0.0, bench_seconds = 0.0;
    try {
      opt.stop_after = "sample";
      bench::run_pipeline(c, opt);
      auto t0 = Clock::now();
      opt.stop_after = "train-repr";
      const auto tr = bench::run_pipeline(c, opt);
      train_seconds = seconds_since(t0);
      opt.stop_after = "bundle-reward";
      bench::run_pipeline(c, opt);
      const bool bench_wanted = want(7);
      if (bench_wanted) {
        t0 = Clock::now();
        opt.stop_after.reset();
        bench::run_pipeline(c, opt);
        bench_seconds = seconds_since(t0);
      }
      if (reuse && tr.executed.empty()) {
        std::cerr << "  reused training; runtime figures refer to this invocation only\n";
      }
      const auto bundle = rewardfn::load_bundle(c.output_dir / "reward.prrb");
      const auto demo = physim::load_demo(c.output_dir / "demo.prld");
      const auto heldout = bench::expert_trajectory(c);
      const auto retreat = bench::retreat_trajectory(c);
      run(2, [&] { return tvfs_counts(c.output_dir); });
      run(3, [&] { return loss_identity(c.output_dir, c.train.iterations); });
      run(4, [&] { return normalization(c.output_dir, bundle, heldout); });
      run(5, [&] { return endpoints(bundle, demo); });
      run(6, [&] {
        return reward_trend(bundle, heldout, retreat, c.train.iterations, train_seconds);
      });
      run(7, [&] {
        return benchmark_trend(bench::load_benchmark(c.output_dir, c), c.episodes,
                               bench_seconds);
      });
    } catch (const std::exception& e) {
      for (int k = 2; k <= 7; ++k) {
        if (want(k) && results.count(k) == 0) results[k] = {false, std::string("error: ") + e.what()};
      }
    }
  }
  run(8, [&] { return determinism(work); });

  const std::map<int, std::string> names{
      {1, "gradient suite"},        {2, "sampling counts and cone"},
      {3, "loss identity"},         {4, "dynamic embedding norm"},
      {5, "progress endpoints"},    {6, "reward trend"},
      {7, "benchmark trend"},       {8, "determinism"},
      {9, "physics and render oracles"}};
  bool all = true;
  for (const auto& [k, r] : results) {
    std::cout << fmt::format("[{}] criterion {} {}: {}\n", r.pass ? "PASS" : "FAIL", k,
                             names.at(k), r.detail);
    all = all && r.pass;
  }
  return all ? 0 : 1;
}
