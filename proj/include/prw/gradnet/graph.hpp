#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "prw/gradnet/tensor.hpp"

namespace prw::gradnet {

struct Parameter {
  std::string name;
  Tensor value;
};

// Named parameters with stable addresses, kept in insertion order.
class ParameterSet {
 public:
  ParameterSet() = default;
  ParameterSet(const ParameterSet&) = default;
  ParameterSet& operator=(const ParameterSet&) = default;
  ParameterSet(ParameterSet&&) = default;
  ParameterSet& operator=(ParameterSet&&) = default;

  // Returns the index of the new parameter. Names must be unique.
  std::size_t add(std::string name, Tensor init);

  std::size_t size() const { return params_.size(); }
  Parameter& operator[](std::size_t i) { return params_.at(i); }
  const Parameter& operator[](std::size_t i) const { return params_.at(i); }
  const Parameter* find(const std::string& name) const;

  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

  std::size_t scalar_count() const;
  // Copies values from a set with identical names and shapes.
  void assign_values(const ParameterSet& other);

  friend bool operator==(const ParameterSet& a, const ParameterSet& b);

 private:
  std::deque<Parameter> params_;
};

// Per-parameter gradient accumulators, keyed by parameter identity.
class Gradients {
 public:
  const Tensor* find(const Parameter& p) const;
  // Zero-initialised on first access.
  Tensor& slot(const Parameter& p);
  void add(const Parameter& p, const Tensor& g, double scale = 1.0);
  // this += scale * other, parameter by parameter.
  void accumulate(const Gradients& other, double scale = 1.0);
  void scale(double s);
  std::size_t size() const { return entries_.size(); }

 private:
  std::unordered_map<const Parameter*, Tensor> entries_;
};

struct Value {
  static constexpr std::uint32_t kInvalid = 0xFFFFFFFFu;
  std::uint32_t id = kInvalid;
  bool valid() const { return id != kInvalid; }
};

struct BackwardArgs {
  std::span<const Tensor* const> inputs;
  const Tensor& output;
  const Tensor& grad_output;
  // Null where the input does not require a gradient. Rules accumulate (+=).
  std::span<Tensor* const> grad_inputs;
};

using BackwardFn = std::function<void(const BackwardArgs&)>;

// Tape of operations in creation order, which is a topological order.
class Graph {
 public:
  Value constant(Tensor t);
  // One node per parameter per graph; repeated calls return the same node.
  Value parameter(const Parameter& p);

  // Records an operation node. Throws NumericError naming the op if the
  // output holds NaN/Inf.
  Value record(const char* op, Tensor output, std::vector<Value> inputs,
               BackwardFn backward);

  const Tensor& value(Value v) const { return node_value(nodes_.at(v.id)); }
  const Shape& shape(Value v) const { return value(v).shape(); }
  bool requires_grad(Value v) const { return nodes_.at(v.id).requires_grad; }
  const std::string& op_name(Value v) const { return nodes_.at(v.id).op; }
  std::size_t node_count() const { return nodes_.size(); }

  // Reverse sweep from a scalar loss; returns d(seed * loss)/d(parameter)
  // for every parameter reachable from the loss.
  Gradients backward(Value loss, double seed = 1.0) const;

 private:
  struct Node {
    std::string op;
    Tensor value;
    std::vector<std::uint32_t> inputs;
    BackwardFn backward;
    const Parameter* param = nullptr;  // parameter leaves read param->value
    bool requires_grad = false;
  };

  static const Tensor& node_value(const Node& n) {
    return n.param != nullptr ? n.param->value : n.value;
  }

  // deque keeps references returned by value() valid as the tape grows.
  std::deque<Node> nodes_;
  std::unordered_map<const Parameter*, std::uint32_t> param_nodes_;
};

}  // namespace prw::gradnet
