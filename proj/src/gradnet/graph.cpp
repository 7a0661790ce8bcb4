#include "prw/gradnet/graph.hpp"

#include <optional>

#include "prw/common/error.hpp"

namespace prw::gradnet {

std::size_t ParameterSet::add(std::string name, Tensor init) {
  if (find(name) != nullptr) throw ContractError("duplicate parameter " + name);
  params_.push_back({std::move(name), std::move(init)});
  return params_.size() - 1;
}

const Parameter* ParameterSet::find(const std::string& name) const {
  for (const auto& p : params_) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

std::size_t ParameterSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.size();
  return n;
}

void ParameterSet::assign_values(const ParameterSet& other) {
  if (other.size() != size()) throw ContractError("parameter count mismatch");
  for (std::size_t i = 0; i < size(); ++i) {
    if (params_[i].name != other[i].name ||
        params_[i].value.shape() != other[i].value.shape()) {
      throw ContractError("parameter mismatch at " + params_[i].name);
    }
    params_[i].value = other[i].value;
  }
}

bool operator==(const ParameterSet& a, const ParameterSet& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].name != b[i].name || !(a[i].value == b[i].value)) return false;
  }
  return true;
}

const Tensor* Gradients::find(const Parameter& p) const {
  auto it = entries_.find(&p);
  return it == entries_.end() ? nullptr : &it->second;
}

Tensor& Gradients::slot(const Parameter& p) {
  auto it = entries_.find(&p);
  if (it == entries_.end()) {
    it = entries_.emplace(&p, Tensor(p.value.shape())).first;
  }
  return it->second;
}

void Gradients::add(const Parameter& p, const Tensor& g, double scale) {
  Tensor& dst = slot(p);
  if (dst.shape() != g.shape()) throw ContractError("gradient shape mismatch");
  for (std::size_t i = 0; i < g.size(); ++i) dst[i] += scale * g[i];
}

void Gradients::accumulate(const Gradients& other, double scale) {
  for (const auto& [param, g] : other.entries_) add(*param, g, scale);
}

void Gradients::scale(double s) {
  for (auto& [param, g] : entries_) {
    for (double& v : g.values()) v *= s;
  }
}

Value Graph::constant(Tensor t) {
  if (!t.all_finite()) throw NumericError("non-finite constant fed to graph");
  nodes_.push_back({"constant", std::move(t), {}, nullptr, nullptr, false});
  return {static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Value Graph::parameter(const Parameter& p) {
  if (auto it = param_nodes_.find(&p); it != param_nodes_.end()) {
    return {it->second};
  }
  if (!p.value.all_finite()) {
    throw NumericError("parameter '" + p.name + "' holds non-finite values");
  }
  nodes_.push_back({"param:" + p.name, Tensor(), {}, nullptr, &p, true});
  const auto id = static_cast<std::uint32_t>(nodes_.size() - 1);
  param_nodes_.emplace(&p, id);
  return {id};
}

Value Graph::record(const char* op, Tensor output, std::vector<Value> inputs,
                    BackwardFn backward) {
  const auto id = static_cast<std::uint32_t>(nodes_.size());
  if (!output.all_finite()) {
    throw NumericError(std::string("non-finite value produced by op '") + op +
                       "' (node " + std::to_string(id) + ")");
  }
  Node node{op, std::move(output), {}, std::move(backward), nullptr, false};
  node.inputs.reserve(inputs.size());
  for (Value v : inputs) {
    if (!v.valid() || v.id >= nodes_.size()) {
      throw ContractError(std::string("op '") + op + "' given an invalid input");
    }
    node.inputs.push_back(v.id);
    node.requires_grad = node.requires_grad || nodes_[v.id].requires_grad;
  }
  nodes_.push_back(std::move(node));
  return {id};
}

Gradients Graph::backward(Value loss, double seed) const {
  const Node& root = nodes_.at(loss.id);
  const Tensor& root_value = node_value(root);
  if (root_value.size() != 1 || root_value.rank() != 0) {
    throw ContractError("backward requires a scalar loss, got shape " +
                        shape_str(root_value.shape()));
  }
  Gradients out;
  if (!root.requires_grad) return out;

  std::vector<std::optional<Tensor>> grads(loss.id + 1);
  grads[loss.id] = Tensor::scalar(seed);

  std::vector<const Tensor*> in_values;
  std::vector<Tensor*> in_grads;
  for (std::uint32_t id = loss.id + 1; id-- > 0;) {
    if (!grads[id]) continue;
    const Node& node = nodes_[id];
    const Tensor& g = *grads[id];
    if (node.param != nullptr) {
      out.add(*node.param, g);
      continue;
    }
    if (!node.backward) continue;
    in_values.clear();
    in_grads.clear();
    for (std::uint32_t in : node.inputs) {
      const Tensor& in_value = node_value(nodes_[in]);
      in_values.push_back(&in_value);
      if (nodes_[in].requires_grad) {
        if (!grads[in]) grads[in] = Tensor(in_value.shape());
        in_grads.push_back(&*grads[in]);
      } else {
        in_grads.push_back(nullptr);
      }
    }
    node.backward({in_values, node.value, g, in_grads});
    for (Tensor* ig : in_grads) {
      if (ig != nullptr && !ig->all_finite()) {
        throw NumericError("non-finite gradient from op '" + node.op +
                           "' (node " + std::to_string(id) + ")");
      }
    }
    grads[id].reset();
  }
  return out;
}

}  // namespace prw::gradnet
