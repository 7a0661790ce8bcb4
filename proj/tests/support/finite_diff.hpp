#pragma once

#include <algorithm>
#include <cmath>
#include <functional>

#include "prw/gradnet/graph.hpp"

namespace prw::testing {

struct GradCheck {
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  std::size_t checked = 0;
};

// Compares analytic parameter gradients of `loss_fn` against central
// differences. Relative error uses max(|a|, |n|, floor) in the denominator so
// entries with near-zero gradients are compared on an absolute scale.
inline GradCheck check_gradients(
    gradnet::ParameterSet& params,
    const std::function<gradnet::Value(gradnet::Graph&)>& loss_fn, double h = 1e-4,
    double floor = 1e-6) {
  gradnet::Graph g;
  const gradnet::Value loss = loss_fn(g);
  const gradnet::Gradients grads = g.backward(loss);
  auto eval = [&] {
    gradnet::Graph g2;
    return g2.value(loss_fn(g2)).item();
  };
  GradCheck out;
  for (gradnet::Parameter& p : params) {
    const gradnet::Tensor* analytic = grads.find(p);
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double saved = p.value[i];
      p.value[i] = saved + h;
      const double up = eval();
      p.value[i] = saved - h;
      const double down = eval();
      p.value[i] = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double a = analytic != nullptr ? (*analytic)[i] : 0.0;
      const double abs_err = std::abs(a - numeric);
      const double denom = std::max({std::abs(a), std::abs(numeric), floor});
      out.max_abs_error = std::max(out.max_abs_error, abs_err);
      out.max_rel_error = std::max(out.max_rel_error, abs_err / denom);
      ++out.checked;
    }
  }
  return out;
}

}  // namespace prw::testing
