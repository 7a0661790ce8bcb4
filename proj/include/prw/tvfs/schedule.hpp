#pragma once

#include <cstdint>
#include <numbers>
#include <span>

#include "prw/common/rng.hpp"
#include "prw/physim/types.hpp"

namespace prw::tvfs {

enum class KernelKind : std::uint32_t { kQuadratic = 1 };

// Maximum angular deviation of sampled actions as a function of demo time:
// low at both ends, peaked at T/2.
struct VarianceSchedule {
  double theta_min = std::numbers::pi / 12.0;
  double theta_max = std::numbers::pi / 4.0;
  std::int64_t horizon = 0;  // T
  KernelKind kernel = KernelKind::kQuadratic;

  void validate() const;
  // Throws RangeError for t outside [0, T].
  double eval(std::int64_t t) const;

  friend bool operator==(const VarianceSchedule&, const VarianceSchedule&) = default;
};

// Throws ValidationError when either vector has zero norm or lengths differ.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

struct SampleOptions {
  double scale_lo = 0.8;
  double scale_hi = 1.2;
  // Radius bound of the isotropic draw used when the demo action is zero.
  double fallback_radius = 0.1;
};

struct SampledAction {
  physim::Action action;     // after clamping
  physim::Action unclamped;  // inside the cone around the demo action
  double angle = 0.0;        // drawn deviation, in [0, theta]
  double scale = 1.0;
  bool fallback = false;     // demo action was zero
};

// Draws an action whose direction deviates from `demo` by an angle uniform in
// [0, theta], rotated toward a uniformly random orthogonal direction, with
// magnitude scaled by a factor uniform in [scale_lo, scale_hi].
SampledAction sample_action(const physim::Action& demo, double theta, Rng& rng,
                            const SampleOptions& options = {});

}  // namespace prw::tvfs
