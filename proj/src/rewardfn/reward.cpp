#include "prw/rewardfn/reward.hpp"

#include <cmath>
#include <string>

#include "prw/common/error.hpp"
#include "prw/gradnet/checkpoint.hpp"

namespace prw::rewardfn {

namespace {

constexpr std::uint32_t kBundleVersion = 1;

bool all_finite(const std::vector<double>& v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

double checked_denominator(const References& refs) {
  if (refs.h0.empty() || refs.h0.size() != refs.hg.size()) {
    throw ValidationError("reference embeddings are empty or of different length");
  }
  if (!all_finite(refs.h0) || !all_finite(refs.hg)) {
    throw ValidationError("reference embeddings are not finite");
  }
  const double d = euclidean(refs.h0, refs.hg);
  if (!(d > kMinDenominator)) {
    throw ValidationError("reference embeddings coincide (distance " + std::to_string(d) +
                          ")");
  }
  return d;
}

void put_vector(ByteWriter& w, const std::vector<double>& v) {
  w.put<std::uint64_t>(v.size());
  w.put_f64s(v);
}

std::vector<double> get_vector(ByteReader& r) {
  const auto n = r.get<std::uint64_t>();
  if (n > r.remaining() / sizeof(double)) throw ValidationError("truncated bundle");
  std::vector<double> v(n);
  r.get_f64s(v);
  return v;
}

}  // namespace

double euclidean(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ContractError("distance between vectors of different length");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

double progress_from_embeddings(std::span<const double> h, std::span<const double> h0,
                                std::span<const double> hg) {
  const double denom = euclidean(h0, hg);
  if (!(denom > kMinDenominator)) throw ValidationError("degenerate progress denominator");
  return 1.0 - euclidean(h, hg) / denom;
}

References make_refs(const replearn::ReprModel& model, const physim::Demonstration& demo,
                     std::size_t goal_frames) {
  if (!demo.success) throw ValidationError("reference demo did not reach the goal");
  if (demo.steps.empty()) throw ValidationError("reference demo is empty");
  if (goal_frames == 0 || goal_frames > demo.steps.size()) {
    throw ValidationError("goal_frames must be in [1, demo length]");
  }
  References refs;
  refs.h0 = model.encode_static(demo.steps.front().obs);
  if (goal_frames == 1) {
    refs.hg = model.encode_static(demo.steps.back().obs);
  } else {
    refs.hg.assign(refs.h0.size(), 0.0);
    for (std::size_t k = demo.steps.size() - goal_frames; k < demo.steps.size(); ++k) {
      const auto h = model.encode_static(demo.steps[k].obs);
      for (std::size_t i = 0; i < h.size(); ++i) refs.hg[i] += h[i];
    }
    for (double& x : refs.hg) x /= static_cast<double>(goal_frames);
  }
  checked_denominator(refs);
  return refs;
}

RewardModel::RewardModel(replearn::ReprModel model, References refs, RewardOptions options)
    : model_(std::make_shared<const replearn::ReprModel>(std::move(model))),
      refs_(std::move(refs)),
      options_(options) {
  if (options_.distance != DistanceKind::kEuclidean) {
    throw ConfigError("unsupported distance kind");
  }
  if (options_.goal_frames == 0) throw ConfigError("goal_frames must be >= 1");
  denominator_ = checked_denominator(refs_);
  if (refs_.h0.size() != model_->config().embed_dim) {
    throw ValidationError("reference length does not match the embedding width");
  }
}

std::vector<double> RewardModel::embed(const physim::Observation& obs) const {
  return model_->encode_static(obs);
}

double RewardModel::progress(std::span<const double> h) const {
  return 1.0 - euclidean(h, refs_.hg) / denominator_;
}

double RewardModel::progress(const physim::Observation& obs) const {
  return progress(embed(obs));
}

double RewardModel::dense_reward(const physim::Observation& obs,
                                 const physim::Observation& obs_next) const {
  const double p_next = progress(obs_next);
  if (!options_.difference) return p_next;
  return reward_from_progress(progress(obs), p_next);
}

Bytes encode_bundle(const RewardModel& model, const Digest& provenance) {
  ByteWriter w;
  w.put_magic("PRRB");
  w.put<std::uint32_t>(kBundleVersion);
  w.put_raw(provenance);
  w.put_string(replearn::to_json(model.model().config()));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(model.options().distance));
  w.put<std::uint8_t>(model.options().difference ? 1 : 0);
  w.put<std::uint64_t>(model.options().goal_frames);
  put_vector(w, model.references().h0);
  put_vector(w, model.references().hg);
  const Bytes ck = gradnet::encode_checkpoint(model.model().params());
  w.put<std::uint64_t>(ck.size());
  w.put_raw(ck);
  return w.take();
}

RewardBundle decode_bundle(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  r.expect_magic("PRRB");
  const auto version = r.get<std::uint32_t>();
  if (version != kBundleVersion) {
    throw ValidationError("unsupported bundle version " + std::to_string(version));
  }
  Digest provenance{};
  const auto hash = r.get_raw(provenance.size());
  std::copy(hash.begin(), hash.end(), provenance.begin());
  const replearn::ReprConfig config = replearn::repr_config_from_json(r.get_string());
  RewardOptions options;
  const auto distance = r.get<std::uint32_t>();
  if (distance != static_cast<std::uint32_t>(DistanceKind::kEuclidean)) {
    throw ValidationError("unknown distance kind in bundle");
  }
  const auto difference = r.get<std::uint8_t>();
  if (difference > 1) throw ValidationError("bad difference flag in bundle");
  options.difference = difference == 1;
  options.goal_frames = r.get<std::uint64_t>();
  References refs;
  refs.h0 = get_vector(r);
  refs.hg = get_vector(r);
  const auto ck_len = r.get<std::uint64_t>();
  if (ck_len > r.remaining()) throw ValidationError("truncated bundle checkpoint");
  const auto ck = r.get_raw(ck_len);
  if (!r.at_end()) throw ValidationError("trailing bytes after bundle");
  replearn::ReprModel model(config, 0);
  gradnet::load_checkpoint_into(model.params(), ck);
  return {RewardModel(std::move(model), std::move(refs), options), provenance};
}

void save_bundle(const std::filesystem::path& path, const RewardModel& model,
                 const Digest& provenance) {
  write_file(path, encode_bundle(model, provenance));
}

RewardBundle load_bundle(const std::filesystem::path& path) {
  return decode_bundle(read_file(path));
}

}  // namespace prw::rewardfn
