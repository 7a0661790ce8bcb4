#include <algorithm>
#include <cmath>

#include "prw/common/error.hpp"
#include "prw/gradnet/ops.hpp"

namespace prw::gradnet {
namespace {

void require_same_shape(const Graph& g, Value a, Value b, const char* op) {
  if (g.shape(a) != g.shape(b)) {
    throw ContractError(std::string(op) + ": shape mismatch " +
                        shape_str(g.shape(a)) + " vs " + shape_str(g.shape(b)));
  }
}

// Unary op with derivative expressed through input x and output y.
template <class F, class D>
Value unary(Graph& g, Value a, const char* op, F f, D dfdx) {
  const Tensor& x = g.value(a);
  Tensor y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = f(x[i]);
  return g.record(op, std::move(y), {a}, [dfdx](const BackwardArgs& args) {
    Tensor* gx = args.grad_inputs[0];
    if (gx == nullptr) return;
    const Tensor& x = *args.inputs[0];
    for (std::size_t i = 0; i < x.size(); ++i) {
      (*gx)[i] += args.grad_output[i] * dfdx(x[i], args.output[i]);
    }
  });
}

}  // namespace

Value add(Graph& g, Value a, Value b) {
  require_same_shape(g, a, b, "add");
  const Tensor& x = g.value(a);
  const Tensor& y = g.value(b);
  Tensor out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + y[i];
  return g.record("add", std::move(out), {a, b}, [](const BackwardArgs& args) {
    for (Tensor* gi : args.grad_inputs) {
      if (gi == nullptr) continue;
      for (std::size_t i = 0; i < gi->size(); ++i) (*gi)[i] += args.grad_output[i];
    }
  });
}

Value sub(Graph& g, Value a, Value b) {
  require_same_shape(g, a, b, "sub");
  const Tensor& x = g.value(a);
  const Tensor& y = g.value(b);
  Tensor out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] - y[i];
  return g.record("sub", std::move(out), {a, b}, [](const BackwardArgs& args) {
    const Tensor& go = args.grad_output;
    if (Tensor* ga = args.grad_inputs[0]) {
      for (std::size_t i = 0; i < go.size(); ++i) (*ga)[i] += go[i];
    }
    if (Tensor* gb = args.grad_inputs[1]) {
      for (std::size_t i = 0; i < go.size(); ++i) (*gb)[i] -= go[i];
    }
  });
}

Value mul(Graph& g, Value a, Value b) {
  require_same_shape(g, a, b, "mul");
  const Tensor& x = g.value(a);
  const Tensor& y = g.value(b);
  Tensor out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] * y[i];
  return g.record("mul", std::move(out), {a, b}, [](const BackwardArgs& args) {
    const Tensor& go = args.grad_output;
    const Tensor& x = *args.inputs[0];
    const Tensor& y = *args.inputs[1];
    if (Tensor* ga = args.grad_inputs[0]) {
      for (std::size_t i = 0; i < go.size(); ++i) (*ga)[i] += go[i] * y[i];
    }
    if (Tensor* gb = args.grad_inputs[1]) {
      for (std::size_t i = 0; i < go.size(); ++i) (*gb)[i] += go[i] * x[i];
    }
  });
}

Value minimum(Graph& g, Value a, Value b) {
  require_same_shape(g, a, b, "minimum");
  const Tensor& x = g.value(a);
  const Tensor& y = g.value(b);
  Tensor out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = std::min(x[i], y[i]);
  // Ties route the gradient to the first operand.
  return g.record("minimum", std::move(out), {a, b}, [](const BackwardArgs& args) {
    const Tensor& go = args.grad_output;
    const Tensor& x = *args.inputs[0];
    const Tensor& y = *args.inputs[1];
    for (std::size_t i = 0; i < go.size(); ++i) {
      Tensor* dst = x[i] <= y[i] ? args.grad_inputs[0] : args.grad_inputs[1];
      if (dst != nullptr) (*dst)[i] += go[i];
    }
  });
}

Value scale(Graph& g, Value a, double c) {
  return unary(g, a, "scale", [c](double x) { return c * x; },
               [c](double, double) { return c; });
}

Value add_scalar(Graph& g, Value a, double c) {
  return unary(g, a, "add_scalar", [c](double x) { return x + c; },
               [](double, double) { return 1.0; });
}

Value relu(Graph& g, Value a) {
  return unary(g, a, "relu", [](double x) { return x > 0.0 ? x : 0.0; },
               [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Value tanh(Graph& g, Value a) {
  return unary(g, a, "tanh", [](double x) { return std::tanh(x); },
               [](double, double y) { return 1.0 - y * y; });
}

Value sigmoid(Graph& g, Value a) {
  return unary(
      g, a, "sigmoid",
      [](double x) {
        if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
        const double e = std::exp(x);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); });
}

Value exp(Graph& g, Value a) {
  return unary(g, a, "exp", [](double x) { return std::exp(x); },
               [](double, double y) { return y; });
}

Value log(Graph& g, Value a) {
  return unary(g, a, "log", [](double x) { return std::log(x); },
               [](double x, double) { return 1.0 / x; });
}

Value square(Graph& g, Value a) {
  return unary(g, a, "square", [](double x) { return x * x; },
               [](double x, double) { return 2.0 * x; });
}

Value clamp(Graph& g, Value a, double lo, double hi) {
  return unary(g, a, "clamp", [lo, hi](double x) { return std::clamp(x, lo, hi); },
               [lo, hi](double x, double) { return x > lo && x < hi ? 1.0 : 0.0; });
}

Value sum(Graph& g, Value a) {
  const Tensor& x = g.value(a);
  double s = 0.0;
  for (double v : x.values()) s += v;
  return g.record("sum", Tensor::scalar(s), {a}, [](const BackwardArgs& args) {
    Tensor* gx = args.grad_inputs[0];
    if (gx == nullptr) return;
    const double go = args.grad_output[0];
    for (double& v : gx->values()) v += go;
  });
}

Value mean(Graph& g, Value a) {
  const Tensor& x = g.value(a);
  if (x.size() == 0) throw ContractError("mean of empty tensor");
  double s = 0.0;
  for (double v : x.values()) s += v;
  const double n = static_cast<double>(x.size());
  return g.record("mean", Tensor::scalar(s / n), {a}, [n](const BackwardArgs& args) {
    Tensor* gx = args.grad_inputs[0];
    if (gx == nullptr) return;
    const double go = args.grad_output[0] / n;
    for (double& v : gx->values()) v += go;
  });
}

Value mse(Graph& g, Value a, Value b) {
  require_same_shape(g, a, b, "mse");
  const Tensor& x = g.value(a);
  const Tensor& y = g.value(b);
  if (x.size() == 0) throw ContractError("mse of empty tensors");
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    s += d * d;
  }
  const double n = static_cast<double>(x.size());
  return g.record("mse", Tensor::scalar(s / n), {a, b}, [n](const BackwardArgs& args) {
    const Tensor& x = *args.inputs[0];
    const Tensor& y = *args.inputs[1];
    const double k = 2.0 * args.grad_output[0] / n;
    Tensor* ga = args.grad_inputs[0];
    Tensor* gb = args.grad_inputs[1];
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double d = k * (x[i] - y[i]);
      if (ga != nullptr) (*ga)[i] += d;
      if (gb != nullptr) (*gb)[i] -= d;
    }
  });
}

Value sum_last(Graph& g, Value a) {
  const Tensor& x = g.value(a);
  if (x.rank() == 0) throw ContractError("sum_last on a scalar");
  const std::size_t f = x.shape().back();
  const std::size_t rows = x.size() / f;
  Shape out_shape = x.shape();
  out_shape.back() = 1;
  Tensor out(out_shape);
  for (std::size_t r = 0; r < rows; ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < f; ++c) s += x[r * f + c];
    out[r] = s;
  }
  return g.record("sum_last", std::move(out), {a}, [f, rows](const BackwardArgs& args) {
    Tensor* gx = args.grad_inputs[0];
    if (gx == nullptr) return;
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < f; ++c) (*gx)[r * f + c] += args.grad_output[r];
    }
  });
}

Value reshape(Graph& g, Value a, Shape shape) {
  Tensor out = g.value(a).reshaped(std::move(shape));
  return g.record("reshape", std::move(out), {a}, [](const BackwardArgs& args) {
    Tensor* gx = args.grad_inputs[0];
    if (gx == nullptr) return;
    for (std::size_t i = 0; i < gx->size(); ++i) (*gx)[i] += args.grad_output[i];
  });
}

Value concat_last(Graph& g, const std::vector<Value>& parts) {
  if (parts.empty()) throw ContractError("concat_last of nothing");
  const Shape& first = g.shape(parts[0]);
  if (first.empty()) throw ContractError("concat_last on scalars");
  const std::size_t rows = shape_size(first) / first.back();
  std::vector<std::size_t> widths;
  std::size_t total = 0;
  for (Value p : parts) {
    const Shape& s = g.shape(p);
    if (s.size() != first.size() ||
        !std::equal(s.begin(), s.end() - 1, first.begin())) {
      throw ContractError("concat_last: leading extents differ");
    }
    widths.push_back(s.back());
    total += s.back();
  }
  Shape out_shape = first;
  out_shape.back() = total;
  Tensor out(out_shape);
  std::size_t offset = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const Tensor& x = g.value(parts[k]);
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < widths[k]; ++c) {
        out[r * total + offset + c] = x[r * widths[k] + c];
      }
    }
    offset += widths[k];
  }
  return g.record("concat_last", std::move(out), parts,
                  [widths, rows, total](const BackwardArgs& args) {
                    std::size_t offset = 0;
                    for (std::size_t k = 0; k < widths.size(); ++k) {
                      if (Tensor* gx = args.grad_inputs[k]) {
                        for (std::size_t r = 0; r < rows; ++r) {
                          for (std::size_t c = 0; c < widths[k]; ++c) {
                            (*gx)[r * widths[k] + c] +=
                                args.grad_output[r * total + offset + c];
                          }
                        }
                      }
                      offset += widths[k];
                    }
                  });
}

Value slice_last(Graph& g, Value a, std::size_t begin, std::size_t end) {
  const Tensor& x = g.value(a);
  if (x.rank() == 0 || begin >= end || end > x.shape().back()) {
    throw ContractError("slice_last: bad range for shape " + shape_str(x.shape()));
  }
  const std::size_t f = x.shape().back();
  const std::size_t w = end - begin;
  const std::size_t rows = x.size() / f;
  Shape out_shape = x.shape();
  out_shape.back() = w;
  Tensor out(out_shape);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < w; ++c) out[r * w + c] = x[r * f + begin + c];
  }
  return g.record("slice_last", std::move(out), {a},
                  [f, w, rows, begin](const BackwardArgs& args) {
                    Tensor* gx = args.grad_inputs[0];
                    if (gx == nullptr) return;
                    for (std::size_t r = 0; r < rows; ++r) {
                      for (std::size_t c = 0; c < w; ++c) {
                        (*gx)[r * f + begin + c] += args.grad_output[r * w + c];
                      }
                    }
                  });
}

Value l2_normalize(Graph& g, Value v, double eps) {
  const Tensor& x = g.value(v);
  if (x.rank() != 1) throw ContractError("l2_normalize expects a vector");
  double ss = 0.0;
  for (double e : x.values()) ss += e * e;
  const double n = std::sqrt(ss);
  if (!(n > eps)) {
    throw NumericError("l2_normalize: degenerate norm " + std::to_string(n));
  }
  Tensor out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] / n;
  return g.record("l2_normalize", std::move(out), {v}, [n](const BackwardArgs& args) {
    Tensor* gx = args.grad_inputs[0];
    if (gx == nullptr) return;
    const Tensor& y = args.output;
    const Tensor& go = args.grad_output;
    double yg = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) yg += y[i] * go[i];
    for (std::size_t i = 0; i < y.size(); ++i) (*gx)[i] += (go[i] - y[i] * yg) / n;
  });
}

}  // namespace prw::gradnet
