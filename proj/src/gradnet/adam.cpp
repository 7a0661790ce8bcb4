#include "prw/gradnet/adam.hpp"

#include <cmath>

#include "prw/common/error.hpp"

namespace prw::gradnet {

Adam::Adam(ParameterSet& params, AdamConfig config)
    : params_(&params), config_(config) {
  if (!(config.lr > 0.0) || config.beta1 < 0.0 || config.beta1 >= 1.0 ||
      config.beta2 < 0.0 || config.beta2 >= 1.0 || !(config.eps > 0.0)) {
    throw ConfigError("invalid Adam hyperparameters");
  }
  for (const Parameter& p : params) {
    state_.m.emplace_back(p.value.shape());
    state_.v.emplace_back(p.value.shape());
  }
}

void Adam::set_state(AdamState state) {
  if (state.m.size() != params_->size() || state.v.size() != params_->size()) {
    throw ValidationError("optimizer state does not match parameter set");
  }
  for (std::size_t i = 0; i < params_->size(); ++i) {
    const Shape& s = (*params_)[i].value.shape();
    if (state.m[i].shape() != s || state.v[i].shape() != s) {
      throw ValidationError("optimizer state shape mismatch for " + (*params_)[i].name);
    }
  }
  state_ = std::move(state);
}

void Adam::step(const Gradients& grads) {
  if (state_.m.size() != params_->size()) {
    throw ContractError("parameter set changed after optimizer construction");
  }
  double clip = 1.0;
  if (config_.clip_norm > 0.0) {
    const double n = global_norm(*params_, grads);
    if (n > config_.clip_norm) clip = config_.clip_norm / n;
  }
  ++state_.step;
  const double t = static_cast<double>(state_.step);
  const double c1 = 1.0 - std::pow(config_.beta1, t);
  const double c2 = 1.0 - std::pow(config_.beta2, t);
  for (std::size_t k = 0; k < params_->size(); ++k) {
    Parameter& p = (*params_)[k];
    const Tensor* gt = grads.find(p);
    if (gt == nullptr) continue;
    Tensor& m = state_.m[k];
    Tensor& v = state_.v[k];
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double gi = clip * (*gt)[i];
      m[i] = config_.beta1 * m[i] + (1.0 - config_.beta1) * gi;
      v[i] = config_.beta2 * v[i] + (1.0 - config_.beta2) * gi * gi;
      const double mh = m[i] / c1;
      const double vh = v[i] / c2;
      p.value[i] -= config_.lr * mh / (std::sqrt(vh) + config_.eps);
    }
  }
}

double global_norm(const ParameterSet& params, const Gradients& grads) {
  double ss = 0.0;
  for (const Parameter& p : params) {
    if (const Tensor* g = grads.find(p)) {
      for (double x : g->values()) ss += x * x;
    }
  }
  return std::sqrt(ss);
}

void polyak_update(ParameterSet& target, const ParameterSet& source, double tau) {
  if (target.size() != source.size()) {
    throw ContractError("polyak_update: parameter sets differ in size");
  }
  for (std::size_t k = 0; k < target.size(); ++k) {
    Tensor& t = target[k].value;
    const Tensor& s = source[k].value;
    if (t.shape() != s.shape()) {
      throw ContractError("polyak_update: shape mismatch for " + target[k].name);
    }
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = tau * s[i] + (1.0 - tau) * t[i];
  }
}

}  // namespace prw::gradnet
