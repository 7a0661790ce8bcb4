#include "prw/common/error.hpp"
#include "prw/gradnet/ops.hpp"

namespace prw::gradnet {
namespace {

void check_bias(const Graph& g, Value bias, std::size_t out, const char* op) {
  if (bias.valid() && g.shape(bias) != Shape{out}) {
    throw ContractError(std::string(op) + ": bias shape " + shape_str(g.shape(bias)) +
                        ", expected [" + std::to_string(out) + "]");
  }
}

std::vector<Value> operands(Value x, Value w, Value b) {
  std::vector<Value> v{x, w};
  if (b.valid()) v.push_back(b);
  return v;
}

}  // namespace

Value dense(Graph& g, Value x, Value weight, Value bias) {
  const Shape& xs = g.shape(x);
  const Shape& ws = g.shape(weight);
  if (ws.size() != 2 || (xs.size() != 1 && xs.size() != 2) || xs.back() != ws[1]) {
    throw ContractError("dense: x " + shape_str(xs) + " incompatible with W " +
                        shape_str(ws));
  }
  const std::size_t out = ws[0];
  const std::size_t in = ws[1];
  const std::size_t batch = xs.size() == 2 ? xs[0] : 1;
  check_bias(g, bias, out, "dense");

  const double* xv = g.value(x).data();
  const double* wv = g.value(weight).data();
  const double* bv = bias.valid() ? g.value(bias).data() : nullptr;
  Shape out_shape = xs.size() == 2 ? Shape{batch, out} : Shape{out};
  Tensor y(out_shape);
  for (std::size_t r = 0; r < batch; ++r) {
    const double* xr = xv + r * in;
    for (std::size_t o = 0; o < out; ++o) {
      const double* wr = wv + o * in;
      double s = bv != nullptr ? bv[o] : 0.0;
      for (std::size_t i = 0; i < in; ++i) s += wr[i] * xr[i];
      y[r * out + o] = s;
    }
  }
  return g.record("dense", std::move(y), operands(x, weight, bias),
                  [batch, in, out](const BackwardArgs& args) {
                    const double* xv = args.inputs[0]->data();
                    const double* wv = args.inputs[1]->data();
                    const double* go = args.grad_output.data();
                    Tensor* gx = args.grad_inputs[0];
                    Tensor* gw = args.grad_inputs[1];
                    Tensor* gb = args.grad_inputs.size() > 2 ? args.grad_inputs[2] : nullptr;
                    for (std::size_t r = 0; r < batch; ++r) {
                      const double* xr = xv + r * in;
                      for (std::size_t o = 0; o < out; ++o) {
                        const double d = go[r * out + o];
                        if (d == 0.0) continue;
                        if (gb != nullptr) (*gb)[o] += d;
                        if (gw != nullptr) {
                          double* gwr = gw->data() + o * in;
                          for (std::size_t i = 0; i < in; ++i) gwr[i] += d * xr[i];
                        }
                        if (gx != nullptr) {
                          double* gxr = gx->data() + r * in;
                          const double* wr = wv + o * in;
                          for (std::size_t i = 0; i < in; ++i) gxr[i] += d * wr[i];
                        }
                      }
                    }
                  });
}

Value conv2d(Graph& g, Value x, Value kernels, Value bias, std::size_t stride) {
  const Shape& xs = g.shape(x);
  const Shape& ks = g.shape(kernels);
  if (xs.size() != 3 || ks.size() != 4 || ks[1] != xs[0] || ks[2] != ks[3] ||
      stride == 0 || xs[1] < ks[2] || xs[2] < ks[3]) {
    throw ContractError("conv2d: x " + shape_str(xs) + " incompatible with kernels " +
                        shape_str(ks));
  }
  const std::size_t C = xs[0], H = xs[1], W = xs[2];
  const std::size_t O = ks[0], k = ks[2], s = stride;
  const std::size_t Ho = (H - k) / s + 1, Wo = (W - k) / s + 1;
  check_bias(g, bias, O, "conv2d");

  const double* xv = g.value(x).data();
  const double* kv = g.value(kernels).data();
  const double* bv = bias.valid() ? g.value(bias).data() : nullptr;
  Tensor y(Shape{O, Ho, Wo});
  for (std::size_t o = 0; o < O; ++o) {
    for (std::size_t i = 0; i < Ho; ++i) {
      for (std::size_t j = 0; j < Wo; ++j) {
        double acc = bv != nullptr ? bv[o] : 0.0;
        for (std::size_t c = 0; c < C; ++c) {
          const double* kc = kv + ((o * C + c) * k) * k;
          const double* xc = xv + c * H * W;
          for (std::size_t p = 0; p < k; ++p) {
            const double* row = xc + (i * s + p) * W + j * s;
            for (std::size_t q = 0; q < k; ++q) acc += kc[p * k + q] * row[q];
          }
        }
        y[(o * Ho + i) * Wo + j] = acc;
      }
    }
  }
  return g.record(
      "conv2d", std::move(y), operands(x, kernels, bias),
      [C, H, W, O, k, s, Ho, Wo](const BackwardArgs& args) {
        const double* xv = args.inputs[0]->data();
        const double* kv = args.inputs[1]->data();
        const double* go = args.grad_output.data();
        Tensor* gx = args.grad_inputs[0];
        Tensor* gk = args.grad_inputs[1];
        Tensor* gb = args.grad_inputs.size() > 2 ? args.grad_inputs[2] : nullptr;
        for (std::size_t o = 0; o < O; ++o) {
          for (std::size_t i = 0; i < Ho; ++i) {
            for (std::size_t j = 0; j < Wo; ++j) {
              const double d = go[(o * Ho + i) * Wo + j];
              if (d == 0.0) continue;
              if (gb != nullptr) (*gb)[o] += d;
              for (std::size_t c = 0; c < C; ++c) {
                const std::size_t kbase = ((o * C + c) * k) * k;
                const std::size_t xbase = c * H * W;
                for (std::size_t p = 0; p < k; ++p) {
                  const std::size_t xrow = xbase + (i * s + p) * W + j * s;
                  for (std::size_t q = 0; q < k; ++q) {
                    if (gk != nullptr) (*gk)[kbase + p * k + q] += d * xv[xrow + q];
                    if (gx != nullptr) (*gx)[xrow + q] += d * kv[kbase + p * k + q];
                  }
                }
              }
            }
          }
        }
      });
}

Value conv_transpose2d(Graph& g, Value x, Value kernels, Value bias,
                       std::size_t stride) {
  const Shape& xs = g.shape(x);
  const Shape& ks = g.shape(kernels);
  if (xs.size() != 3 || ks.size() != 4 || ks[0] != xs[0] || ks[2] != ks[3] ||
      stride == 0) {
    throw ContractError("conv_transpose2d: x " + shape_str(xs) +
                        " incompatible with kernels " + shape_str(ks));
  }
  const std::size_t C = xs[0], H = xs[1], W = xs[2];
  const std::size_t O = ks[1], k = ks[2], s = stride;
  const std::size_t Ho = (H - 1) * s + k, Wo = (W - 1) * s + k;
  check_bias(g, bias, O, "conv_transpose2d");

  const double* xv = g.value(x).data();
  const double* kv = g.value(kernels).data();
  const double* bv = bias.valid() ? g.value(bias).data() : nullptr;
  Tensor y(Shape{O, Ho, Wo});
  if (bv != nullptr) {
    for (std::size_t o = 0; o < O; ++o) {
      for (std::size_t n = 0; n < Ho * Wo; ++n) y[o * Ho * Wo + n] = bv[o];
    }
  }
  for (std::size_t c = 0; c < C; ++c) {
    for (std::size_t i = 0; i < H; ++i) {
      for (std::size_t j = 0; j < W; ++j) {
        const double xval = xv[(c * H + i) * W + j];
        for (std::size_t o = 0; o < O; ++o) {
          const double* kc = kv + ((c * O + o) * k) * k;
          for (std::size_t p = 0; p < k; ++p) {
            double* row = y.data() + (o * Ho + i * s + p) * Wo + j * s;
            for (std::size_t q = 0; q < k; ++q) row[q] += xval * kc[p * k + q];
          }
        }
      }
    }
  }
  return g.record(
      "conv_transpose2d", std::move(y), operands(x, kernels, bias),
      [C, H, W, O, k, s, Ho, Wo](const BackwardArgs& args) {
        const double* xv = args.inputs[0]->data();
        const double* kv = args.inputs[1]->data();
        const double* go = args.grad_output.data();
        Tensor* gx = args.grad_inputs[0];
        Tensor* gk = args.grad_inputs[1];
        Tensor* gb = args.grad_inputs.size() > 2 ? args.grad_inputs[2] : nullptr;
        if (gb != nullptr) {
          for (std::size_t o = 0; o < O; ++o) {
            double acc = 0.0;
            for (std::size_t n = 0; n < Ho * Wo; ++n) acc += go[o * Ho * Wo + n];
            (*gb)[o] += acc;
          }
        }
        for (std::size_t c = 0; c < C; ++c) {
          for (std::size_t i = 0; i < H; ++i) {
            for (std::size_t j = 0; j < W; ++j) {
              const std::size_t xi = (c * H + i) * W + j;
              const double xval = xv[xi];
              double gxa = 0.0;
              for (std::size_t o = 0; o < O; ++o) {
                const std::size_t kbase = ((c * O + o) * k) * k;
                for (std::size_t p = 0; p < k; ++p) {
                  const double* row = go + (o * Ho + i * s + p) * Wo + j * s;
                  for (std::size_t q = 0; q < k; ++q) {
                    gxa += row[q] * kv[kbase + p * k + q];
                    if (gk != nullptr) (*gk)[kbase + p * k + q] += xval * row[q];
                  }
                }
              }
              if (gx != nullptr) (*gx)[xi] += gxa;
            }
          }
        }
      });
}

Value causal_conv1d(Graph& g, Value x, Value kernels, Value bias,
                    std::size_t dilation) {
  const Shape& xs = g.shape(x);
  const Shape& ks = g.shape(kernels);
  if (xs.size() != 2 || ks.size() != 3 || ks[1] != xs[0] || dilation == 0) {
    throw ContractError("causal_conv1d: x " + shape_str(xs) +
                        " incompatible with kernels " + shape_str(ks));
  }
  const std::size_t C = xs[0], L = xs[1];
  const std::size_t O = ks[0], K = ks[2], d = dilation;
  check_bias(g, bias, O, "causal_conv1d");

  const double* xv = g.value(x).data();
  const double* kv = g.value(kernels).data();
  const double* bv = bias.valid() ? g.value(bias).data() : nullptr;
  Tensor y(Shape{O, L});
  for (std::size_t o = 0; o < O; ++o) {
    for (std::size_t t = 0; t < L; ++t) {
      double acc = bv != nullptr ? bv[o] : 0.0;
      for (std::size_t j = 0; j < K; ++j) {
        const std::size_t lag = (K - 1 - j) * d;
        if (lag > t) continue;
        for (std::size_t c = 0; c < C; ++c) {
          acc += kv[(o * C + c) * K + j] * xv[c * L + t - lag];
        }
      }
      y[o * L + t] = acc;
    }
  }
  return g.record("causal_conv1d", std::move(y), operands(x, kernels, bias),
                  [C, L, O, K, d](const BackwardArgs& args) {
                    const double* xv = args.inputs[0]->data();
                    const double* kv = args.inputs[1]->data();
                    const double* go = args.grad_output.data();
                    Tensor* gx = args.grad_inputs[0];
                    Tensor* gk = args.grad_inputs[1];
                    Tensor* gb =
                        args.grad_inputs.size() > 2 ? args.grad_inputs[2] : nullptr;
                    for (std::size_t o = 0; o < O; ++o) {
                      for (std::size_t t = 0; t < L; ++t) {
                        const double dv = go[o * L + t];
                        if (dv == 0.0) continue;
                        if (gb != nullptr) (*gb)[o] += dv;
                        for (std::size_t j = 0; j < K; ++j) {
                          const std::size_t lag = (K - 1 - j) * d;
                          if (lag > t) continue;
                          for (std::size_t c = 0; c < C; ++c) {
                            const std::size_t ki = (o * C + c) * K + j;
                            const std::size_t xi = c * L + t - lag;
                            if (gk != nullptr) (*gk)[ki] += dv * xv[xi];
                            if (gx != nullptr) (*gx)[xi] += dv * kv[ki];
                          }
                        }
                      }
                    }
                  });
}

}  // namespace prw::gradnet
