#pragma once

#include <vector>

#include "prw/gradnet/graph.hpp"

namespace prw::gradnet {

// Elementwise (operands share one shape).
Value add(Graph& g, Value a, Value b);
Value sub(Graph& g, Value a, Value b);
Value mul(Graph& g, Value a, Value b);
Value minimum(Graph& g, Value a, Value b);
Value scale(Graph& g, Value a, double c);
Value add_scalar(Graph& g, Value a, double c);

Value relu(Graph& g, Value a);
Value tanh(Graph& g, Value a);
Value sigmoid(Graph& g, Value a);
Value exp(Graph& g, Value a);
// Natural log; inputs must be positive.
Value log(Graph& g, Value a);
Value square(Graph& g, Value a);
// Gradient passes only where lo < a < hi.
Value clamp(Graph& g, Value a, double lo, double hi);

// Reductions to a rank-0 scalar.
Value sum(Graph& g, Value a);
Value mean(Graph& g, Value a);
// Mean of squared differences over all elements.
Value mse(Graph& g, Value a, Value b);
// [..., F] -> [..., 1]
Value sum_last(Graph& g, Value a);

Value reshape(Graph& g, Value a, Shape shape);
// Concatenates along the last axis; leading extents must agree.
Value concat_last(Graph& g, const std::vector<Value>& parts);
// Columns [begin, end) of the last axis.
Value slice_last(Graph& g, Value a, std::size_t begin, std::size_t end);

// y = x W^T + b. x is [in] or [B, in]; W is [out, in]; b is [out] or invalid.
Value dense(Graph& g, Value x, Value weight, Value bias);

// Valid-padding cross-correlation. x [C, H, W], kernels [O, C, k, k],
// bias [O] or invalid. Output [O, (H-k)/s+1, (W-k)/s+1].
Value conv2d(Graph& g, Value x, Value kernels, Value bias, std::size_t stride);

// Adjoint of conv2d in its input. x [C, H, W], kernels [C, O, k, k],
// bias [O] or invalid. Output [O, (H-1)s+k, (W-1)s+k].
Value conv_transpose2d(Graph& g, Value x, Value kernels, Value bias,
                       std::size_t stride);

// Left-padded dilated convolution; output at t depends only on inputs <= t.
// x [C, L], kernels [O, C, K], bias [O] or invalid. Output [O, L].
Value causal_conv1d(Graph& g, Value x, Value kernels, Value bias,
                    std::size_t dilation);

// v / ||v|| for a rank-1 v. Throws NumericError when ||v|| <= eps.
Value l2_normalize(Graph& g, Value v, double eps = 1e-8);

}  // namespace prw::gradnet
