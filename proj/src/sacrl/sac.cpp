#include "prw/sacrl/sac.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "prw/common/error.hpp"
#include "prw/gradnet/ops.hpp"

namespace prw::sacrl {

namespace gn = prw::gradnet;

namespace {

// Keeps log(1 - tanh^2) finite at saturation.
constexpr double kSquashEps = 1e-6;

}  // namespace

void SacHyper::validate() const {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("gamma must be in [0, 1]");
  if (!(tau > 0.0 && tau <= 1.0)) throw ConfigError("tau must be in (0, 1]");
  if (!(alpha >= 0.0)) throw ConfigError("alpha must be >= 0");
  if (!(lr > 0.0)) throw ConfigError("lr must be positive");
  if (batch_size == 0) throw ConfigError("batch_size must be >= 1");
  if (hidden == 0) throw ConfigError("hidden must be >= 1");
  if (buffer_capacity == 0) throw ConfigError("buffer_capacity must be >= 1");
  if (updates_per_step == 0) throw ConfigError("updates_per_step must be >= 1");
}

Mlp::Mlp(const std::string& prefix, const std::vector<std::size_t>& sizes, Rng& rng) {
  if (sizes.size() < 2) throw ConfigError("mlp needs at least one layer");
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const std::size_t in = sizes[l], out = sizes[l + 1];
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    gn::Tensor w({out, in});
    for (double& v : w.values()) v = rng.uniform(-bound, bound);
    gn::Tensor b({out});
    for (double& v : b.values()) v = rng.uniform(-bound, bound);
    const std::string name = prefix + ".l" + std::to_string(l);
    params_.add(name + ".w", std::move(w));
    params_.add(name + ".b", std::move(b));
  }
  layers_ = sizes.size() - 1;
}

gn::Value Mlp::forward(gn::Graph& g, gn::Value x) const {
  gn::Value h = x;
  for (std::size_t l = 0; l < layers_; ++l) {
    h = gn::dense(g, h, g.parameter(params_[2 * l]), g.parameter(params_[2 * l + 1]));
    if (l + 1 < layers_) h = gn::relu(g, h);
  }
  return h;
}

double critic_target(double reward, bool done, double gamma, double min_q_next, double alpha,
                     double logp_next) {
  if (done) return reward;
  return reward + gamma * (min_q_next - alpha * logp_next);
}

gn::Tensor stack_states(const std::vector<Transition>& batch, bool next) {
  gn::Tensor t({batch.size(), kStateDim});
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const StateVec& s = next ? batch[i].next_state : batch[i].state;
    std::copy(s.begin(), s.end(), t.data() + i * kStateDim);
  }
  return t;
}

gn::Tensor stack_actions(const std::vector<Transition>& batch) {
  gn::Tensor t({batch.size(), kActionDim});
  for (std::size_t i = 0; i < batch.size(); ++i) {
    std::copy(batch[i].action.begin(), batch[i].action.end(), t.data() + i * kActionDim);
  }
  return t;
}

SacAgent::SacAgent(SacHyper hyper, std::uint64_t seed)
    : hyper_((hyper.validate(), hyper)),
      init_rng_(derive_seed(seed, 0x5AC0)),
      policy_("pi", {kStateDim, hyper_.hidden, hyper_.hidden, 2 * kActionDim}, init_rng_),
      q1_("q1", {kStateDim + kActionDim, hyper_.hidden, hyper_.hidden, 1}, init_rng_),
      q2_("q2", {kStateDim + kActionDim, hyper_.hidden, hyper_.hidden, 1}, init_rng_),
      q1_target_(q1_),
      q2_target_(q2_),
      policy_opt_(policy_.params(), {.lr = hyper_.lr}),
      q1_opt_(q1_.params(), {.lr = hyper_.lr}),
      q2_opt_(q2_.params(), {.lr = hyper_.lr}),
      noise_rng_(derive_seed(seed, 0x5AC1)) {}

PolicySample SacAgent::sample_policy(gn::Graph& g, gn::Value states,
                                     const gn::Tensor& noise) const {
  const gn::Value out = policy_.forward(g, states);
  const gn::Value mean = gn::slice_last(g, out, 0, kActionDim);
  const gn::Value log_std =
      gn::clamp(g, gn::slice_last(g, out, kActionDim, 2 * kActionDim), kLogStdMin, kLogStdMax);
  const gn::Value eps = g.constant(noise);
  const gn::Value u = gn::add(g, mean, gn::mul(g, gn::exp(g, log_std), eps));
  const gn::Value action = gn::tanh(g, u);

  gn::Tensor gauss_const(noise.shape());
  const double half_log_2pi = 0.5 * std::log(2.0 * std::numbers::pi);
  for (std::size_t i = 0; i < noise.size(); ++i) {
    gauss_const[i] = -0.5 * noise[i] * noise[i] - half_log_2pi;
  }
  const gn::Value gauss = gn::sub(g, g.constant(std::move(gauss_const)), log_std);
  const gn::Value squash = gn::log(
      g, gn::add_scalar(g, gn::scale(g, gn::square(g, action), -1.0), 1.0 + kSquashEps));
  const gn::Value log_prob = gn::sum_last(g, gn::sub(g, gauss, squash));
  return {action, log_prob, mean};
}

gn::Value SacAgent::q_value(gn::Graph& g, const Mlp& q, gn::Value states,
                            gn::Value actions) const {
  return q.forward(g, gn::concat_last(g, {states, actions}));
}

gn::Tensor SacAgent::draw_noise(std::size_t rows) {
  gn::Tensor t({rows, kActionDim});
  for (double& v : t.values()) v = noise_rng_.normal();
  return t;
}

ActionVec SacAgent::act(const StateVec& state, bool deterministic) {
  gn::Graph g;
  const gn::Value s =
      g.constant(gn::Tensor({1, kStateDim}, std::vector<double>(state.begin(), state.end())));
  const gn::Tensor noise = deterministic ? gn::Tensor({1, kActionDim}) : draw_noise(1);
  const PolicySample ps = sample_policy(g, s, noise);
  const gn::Tensor& a = g.value(ps.action);
  ActionVec out{};
  for (std::size_t i = 0; i < kActionDim; ++i) out[i] = std::clamp(a[i], -1.0, 1.0);
  return out;
}

std::vector<double> SacAgent::targets(const std::vector<Transition>& batch,
                                      const gn::Tensor& noise) const {
  gn::Graph g;
  const gn::Value sp = g.constant(stack_states(batch, true));
  const PolicySample next = sample_policy(g, sp, noise);
  const gn::Tensor& q1 = g.value(q_value(g, q1_target_, sp, next.action));
  const gn::Tensor& q2 = g.value(q_value(g, q2_target_, sp, next.action));
  const gn::Tensor& logp = g.value(next.log_prob);
  std::vector<double> y(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    y[i] = critic_target(batch[i].reward, batch[i].done, hyper_.gamma, std::min(q1[i], q2[i]),
                         hyper_.alpha, logp[i]);
  }
  return y;
}

SacReport SacAgent::update(const std::vector<Transition>& batch) {
  if (batch.empty()) throw ContractError("empty SAC batch");
  const std::size_t n = batch.size();
  SacReport report;

  const std::vector<double> y = targets(batch, draw_noise(n));
  {
    gn::Graph g;
    const gn::Value s = g.constant(stack_states(batch, false));
    const gn::Value a = g.constant(stack_actions(batch));
    const gn::Value target = g.constant(gn::Tensor({n, 1}, y));
    const gn::Value q1 = q_value(g, q1_, s, a);
    const gn::Value q2 = q_value(g, q2_, s, a);
    const gn::Value l1 = gn::mse(g, q1, target);
    const gn::Value l2 = gn::mse(g, q2, target);
    const gn::Gradients grads = g.backward(gn::add(g, l1, l2));
    report.critic_loss = 0.5 * (g.value(l1).item() + g.value(l2).item());
    report.mean_q = g.value(gn::mean(g, q1)).item();
    q1_opt_.step(grads);
    q2_opt_.step(grads);
  }
  {
    gn::Graph g;
    const gn::Value s = g.constant(stack_states(batch, false));
    const PolicySample ps = sample_policy(g, s, draw_noise(n));
    const gn::Value min_q = gn::minimum(g, q_value(g, q1_, s, ps.action),
                                        q_value(g, q2_, s, ps.action));
    const gn::Value loss =
        gn::mean(g, gn::sub(g, gn::scale(g, ps.log_prob, hyper_.alpha), min_q));
    const gn::Gradients grads = g.backward(loss);
    report.actor_loss = g.value(loss).item();
    report.mean_log_prob = g.value(gn::mean(g, ps.log_prob)).item();
    policy_opt_.step(grads);
  }
  gn::polyak_update(q1_target_.params(), q1_.params(), hyper_.tau);
  gn::polyak_update(q2_target_.params(), q2_.params(), hyper_.tau);
  if (!std::isfinite(report.critic_loss) || !std::isfinite(report.actor_loss)) {
    throw NumericError("non-finite SAC loss");
  }
  return report;
}

}  // namespace prw::sacrl
