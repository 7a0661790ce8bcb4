#include "prw/tvfs/schedule.hpp"

#include <cmath>
#include <string>

#include "prw/common/error.hpp"

namespace prw::tvfs {

void VarianceSchedule::validate() const {
  if (!(theta_min >= 0.0) || !(theta_max >= theta_min) ||
      !(theta_max <= std::numbers::pi)) {
    throw ConfigError("variance schedule needs 0 <= theta_min <= theta_max <= pi");
  }
  if (horizon < 0) throw ConfigError("variance schedule horizon must be >= 0");
  if (kernel != KernelKind::kQuadratic) throw ConfigError("unknown schedule kernel");
}

double VarianceSchedule::eval(std::int64_t t) const {
  if (t < 0 || t > horizon) {
    throw RangeError("schedule time " + std::to_string(t) + " outside [0, " +
                     std::to_string(horizon) + "]");
  }
  if (horizon == 0) return theta_min;
  // 4 tau (1 - tau) with integer products, so the weight is symmetric in t.
  const double num = 4.0 * static_cast<double>(t) * static_cast<double>(horizon - t);
  const double den = static_cast<double>(horizon) * static_cast<double>(horizon);
  const double w = num / den;
  return theta_min * (1.0 - w) + theta_max * w;
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ValidationError("cosine_similarity: length mismatch");
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  if (aa == 0.0 || bb == 0.0) {
    throw ValidationError("cosine_similarity undefined for a zero vector");
  }
  return ab / (std::sqrt(aa) * std::sqrt(bb));
}

namespace {

using Vec3 = std::array<double, 3>;

double norm(const Vec3& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }

// Isotropic unit vector orthogonal to unit u (Gaussian draw, projected).
Vec3 random_orthogonal(const Vec3& u, Rng& rng) {
  for (;;) {
    Vec3 g{rng.normal(), rng.normal(), rng.normal()};
    const double proj = g[0] * u[0] + g[1] * u[1] + g[2] * u[2];
    for (int i = 0; i < 3; ++i) g[i] -= proj * u[i];
    const double n = norm(g);
    if (n > 1e-9) {
      for (double& x : g) x /= n;
      return g;
    }
  }
}

}  // namespace

SampledAction sample_action(const physim::Action& demo, double theta, Rng& rng,
                            const SampleOptions& options) {
  if (!(theta >= 0.0) || theta > std::numbers::pi) {
    throw RangeError("sample_action: theta outside [0, pi]");
  }
  if (!demo.finite()) throw ValidationError("sample_action: non-finite demo action");
  const Vec3 d = demo.as_array();
  const double dn = norm(d);
  SampledAction out;
  if (dn == 0.0) {
    Vec3 dir{rng.normal(), rng.normal(), rng.normal()};
    double n = norm(dir);
    while (n < 1e-9) {
      dir = {rng.normal(), rng.normal(), rng.normal()};
      n = norm(dir);
    }
    const double r = options.fallback_radius * rng.uniform();
    for (double& x : dir) x *= r / n;
    out.unclamped = physim::Action::from_array(dir);
    out.action = out.unclamped.clamped();
    out.angle = 0.0;
    out.scale = 0.0;
    out.fallback = true;
    return out;
  }
  const Vec3 u{d[0] / dn, d[1] / dn, d[2] / dn};
  const Vec3 w = random_orthogonal(u, rng);
  const double alpha = theta * rng.uniform();
  const double scale =
      options.scale_lo == options.scale_hi
          ? options.scale_lo
          : rng.uniform(options.scale_lo, options.scale_hi);
  // d s cos(a) + w |d| s sin(a); reduces to d exactly for a = 0, s = 1.
  const double c = scale * std::cos(alpha);
  const double sn = dn * scale * std::sin(alpha);
  Vec3 v{};
  for (int i = 0; i < 3; ++i) v[i] = d[i] * c + w[i] * sn;
  out.unclamped = physim::Action::from_array(v);
  out.action = out.unclamped.clamped();
  out.angle = alpha;
  out.scale = scale;
  return out;
}

}  // namespace prw::tvfs
