#pragma once

#include "prw/common/rng.hpp"
#include "prw/gradnet/tensor.hpp"

namespace prw::testing {

inline gradnet::Tensor random_tensor(gradnet::Shape shape, Rng& rng, double lo = -1.0,
                                     double hi = 1.0) {
  gradnet::Tensor t(std::move(shape));
  for (double& v : t.values()) v = rng.uniform(lo, hi);
  return t;
}

}  // namespace prw::testing
