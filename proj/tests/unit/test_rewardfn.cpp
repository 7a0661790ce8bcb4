#include <gtest/gtest.h>

#include <cmath>
#include <thread>

#include "prw/common/error.hpp"
#include "prw/rewardfn/reward.hpp"

using namespace prw;
using namespace prw::rewardfn;
using physim::EnvKind;
using replearn::ReprConfig;
using replearn::ReprModel;

namespace {

const physim::Environment& block_env() {
  static const physim::Environment env = physim::Environment::make(EnvKind::kBlockInsertion);
  return env;
}

const physim::Demonstration& demo() {
  static const physim::Demonstration d =
      physim::record_demo(block_env(), 7, physim::default_plan(EnvKind::kBlockInsertion));
  return d;
}

const ReprModel& model() {
  static const ReprModel m(ReprConfig{}, 3);
  return m;
}

RewardModel reward_model(RewardOptions options = {}) {
  return RewardModel(model(), make_refs(model(), demo(), options.goal_frames), options);
}

std::vector<double> affine(const std::vector<double>& v, double scale,
                           const std::vector<double>& shift) {
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = scale * v[i] + shift[i];
  return out;
}

}  // namespace

TEST(Progress, ClosedFormExamples) {
  const std::vector<double> h0{3.0, 4.0}, hg{0.0, 0.0};
  EXPECT_EQ(progress_from_embeddings(h0, h0, hg), 0.0);
  EXPECT_EQ(progress_from_embeddings(hg, h0, hg), 1.0);
  // Twice as far from the goal as h0.
  EXPECT_EQ(progress_from_embeddings(std::vector<double>{6.0, 8.0}, h0, hg), -1.0);
  EXPECT_EQ(progress_from_embeddings(std::vector<double>{-6.0, -8.0}, h0, hg), -1.0);
  EXPECT_EQ(progress_from_embeddings(std::vector<double>{1.5, 2.0}, h0, hg), 0.5);
}

TEST(Progress, DegenerateDenominatorRejected) {
  const std::vector<double> h{1.0, 1.0};
  EXPECT_THROW(progress_from_embeddings(h, h, h), ValidationError);
  const std::vector<double> near{1.0, 1.0 + 1e-7};
  EXPECT_THROW(progress_from_embeddings(h, h, near), ValidationError);
}

TEST(Progress, TranslationAndScaleInvariance) {
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> h(64), h0(64), hg(64), shift(64);
    for (std::size_t i = 0; i < 64; ++i) {
      h[i] = rng.uniform(-2, 2);
      h0[i] = rng.uniform(-2, 2);
      hg[i] = rng.uniform(-2, 2);
      shift[i] = rng.uniform(-50, 50);
    }
    const double p = progress_from_embeddings(h, h0, hg);
    const std::vector<double> zero(64, 0.0);
    EXPECT_NEAR(progress_from_embeddings(affine(h, 1.0, shift), affine(h0, 1.0, shift),
                                         affine(hg, 1.0, shift)),
                p, 1e-10);
    const double c = rng.uniform(0.01, 100.0);
    EXPECT_NEAR(progress_from_embeddings(affine(h, c, zero), affine(h0, c, zero),
                                         affine(hg, c, zero)),
                p, 1e-10);
  }
}

TEST(MakeRefs, EndpointsOfDemo) {
  ASSERT_TRUE(demo().success);
  const References refs = make_refs(model(), demo());
  EXPECT_EQ(refs.h0, model().encode_static(demo().steps.front().obs));
  EXPECT_EQ(refs.hg, model().encode_static(demo().steps.back().obs));
  EXPECT_EQ(refs.h0.size(), 64u);
  EXPECT_GT(euclidean(refs.h0, refs.hg), kMinDenominator);
  EXPECT_EQ(make_refs(model(), demo()), refs);
}

TEST(MakeRefs, FailedDemoRejected) {
  physim::Demonstration failed = demo();
  failed.success = false;
  EXPECT_THROW(make_refs(model(), failed), ValidationError);
}

TEST(MakeRefs, DegenerateDemoRejected) {
  physim::Demonstration still = demo();
  still.steps.back().obs = still.steps.front().obs;
  EXPECT_THROW(make_refs(model(), still), ValidationError);
}

TEST(MakeRefs, GoalAveraging) {
  const References refs = make_refs(model(), demo(), 5);
  std::vector<double> mean(64, 0.0);
  const auto& steps = demo().steps;
  for (std::size_t k = steps.size() - 5; k < steps.size(); ++k) {
    const auto h = model().encode_static(steps[k].obs);
    for (std::size_t i = 0; i < 64; ++i) mean[i] += h[i] / 5.0;
  }
  for (std::size_t i = 0; i < 64; ++i) EXPECT_NEAR(refs.hg[i], mean[i], 1e-12);
  EXPECT_THROW(make_refs(model(), demo(), 0), ValidationError);
}

TEST(RewardModel, EndpointIdentitiesAreExact) {
  const RewardModel rm = reward_model();
  EXPECT_EQ(rm.progress(demo().steps.front().obs), 0.0);
  EXPECT_EQ(rm.progress(demo().steps.back().obs), 1.0);
  EXPECT_EQ(rm.dense_reward(demo().steps.front().obs, demo().steps.back().obs), 1.0);
}

TEST(RewardModel, SyntheticTwiceAsFar) {
  const RewardModel rm = reward_model();
  const auto& r = rm.references();
  std::vector<double> h(64);
  for (std::size_t i = 0; i < 64; ++i) h[i] = r.hg[i] + 2.0 * (r.h0[i] - r.hg[i]);
  EXPECT_NEAR(rm.progress(h), -1.0, 1e-12);
}

TEST(RewardModel, DifferenceMode) {
  const RewardModel rm = reward_model({.difference = true});
  const auto& obs = demo().steps[10].obs;
  EXPECT_EQ(rm.dense_reward(obs, obs), 0.0);
  EXPECT_EQ(rm.dense_reward(demo().steps.front().obs, demo().steps.back().obs), 1.0);
  EXPECT_EQ(rm.reward_from_progress(0.25, 0.75), 0.5);
  const RewardModel direct = reward_model();
  EXPECT_EQ(direct.reward_from_progress(0.25, 0.75), 0.75);
}

TEST(RewardModel, RejectsMismatchedReferences) {
  References refs{{1.0, 2.0}, {3.0, 4.0}};
  EXPECT_THROW(RewardModel(model(), refs), ValidationError);
  References same{std::vector<double>(64, 1.0), std::vector<double>(64, 1.0)};
  EXPECT_THROW(RewardModel(model(), same), ValidationError);
  References nan{std::vector<double>(64, 1.0), std::vector<double>(64, NAN)};
  EXPECT_THROW(RewardModel(model(), nan), ValidationError);
}

TEST(RewardModel, ConcurrentEvaluationMatchesSerial) {
  const RewardModel rm = reward_model();
  const auto& steps = demo().steps;
  std::vector<double> serial(steps.size());
  for (std::size_t k = 0; k < steps.size(); ++k) serial[k] = rm.progress(steps[k].obs);
  std::vector<double> parallel(steps.size());
  {
    std::vector<std::jthread> workers;
    for (std::size_t w = 0; w < 3; ++w) {
      workers.emplace_back([&, w] {
        for (std::size_t k = w; k < steps.size(); k += 3) parallel[k] = rm.progress(steps[k].obs);
      });
    }
  }
  EXPECT_EQ(parallel, serial);
}

TEST(Bundle, RoundTripPreservesRewards) {
  const RewardModel rm = reward_model({.difference = true, .goal_frames = 3});
  Digest prov{};
  prov[0] = 0xAB;
  prov[31] = 0x01;
  const Bytes bytes = encode_bundle(rm, prov);
  const RewardBundle back = decode_bundle(bytes);
  EXPECT_EQ(back.provenance, prov);
  EXPECT_EQ(back.model.options(), rm.options());
  EXPECT_EQ(back.model.references(), rm.references());
  EXPECT_TRUE(back.model.model().params() == rm.model().params());
  EXPECT_EQ(back.model.model().config(), rm.model().config());
  for (std::size_t k = 0; k < demo().steps.size(); k += 37) {
    EXPECT_EQ(back.model.progress(demo().steps[k].obs), rm.progress(demo().steps[k].obs));
  }
  EXPECT_EQ(encode_bundle(back.model, back.provenance), bytes);
}

TEST(Bundle, CorruptionRejected) {
  const Bytes bytes = encode_bundle(reward_model(), Digest{});
  Bytes bad_magic = bytes;
  bad_magic[0] = 'X';
  EXPECT_THROW(decode_bundle(bad_magic), ValidationError);
  const Bytes truncated(bytes.begin(), bytes.end() - 9);
  EXPECT_THROW(decode_bundle(truncated), ValidationError);
  Bytes trailing = bytes;
  trailing.push_back(0);
  EXPECT_THROW(decode_bundle(trailing), ValidationError);
}
