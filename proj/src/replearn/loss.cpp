#include "prw/replearn/loss.hpp"

#include <cmath>

#include "prw/common/error.hpp"
#include "prw/gradnet/ops.hpp"

namespace prw::replearn {

namespace gn = gradnet;

LossNodes hybrid_loss_nodes(gn::Graph& g, const ReprModel& model,
                            std::span<const PreparedObs* const> first,
                            std::span<const PreparedObs* const> second,
                            const LossOptions& options) {
  if (first.empty() || first.size() != second.size()) {
    throw ContractError("hybrid loss needs matching non-empty pair lists");
  }
  LossNodes out;
  gn::Value sum_temporal, sum_recon_t, sum_recon_next;
  for (std::size_t i = 0; i < first.size(); ++i) {
    const gn::Value h_t = model.static_embedding(g, *first[i]);
    const gn::Value dh = model.dynamic_embedding(g, *first[i]);
    double n2 = 0.0;
    for (double v : g.value(dh).values()) n2 += v * v;
    out.max_norm_deviation = std::max(out.max_norm_deviation, std::abs(std::sqrt(n2) - 1.0));

    const gn::Value h_hat = gn::add(g, h_t, dh);
    gn::Value h_next = model.static_embedding(g, *second[i]);
    if (options.stop_gradient_target) h_next = g.constant(g.value(h_next));

    const gn::Value temporal = gn::mse(g, h_hat, h_next);
    const gn::Value recon_t =
        gn::mse(g, model.decode(g, h_t), g.constant(first[i]->target));
    const gn::Value recon_next =
        gn::mse(g, model.decode(g, h_hat), g.constant(second[i]->target));
    if (i == 0) {
      sum_temporal = temporal;
      sum_recon_t = recon_t;
      sum_recon_next = recon_next;
    } else {
      sum_temporal = gn::add(g, sum_temporal, temporal);
      sum_recon_t = gn::add(g, sum_recon_t, recon_t);
      sum_recon_next = gn::add(g, sum_recon_next, recon_next);
    }
  }
  const double inv = 1.0 / static_cast<double>(first.size());
  out.temporal = first.size() == 1 ? sum_temporal : gn::scale(g, sum_temporal, inv);
  out.recon_t = first.size() == 1 ? sum_recon_t : gn::scale(g, sum_recon_t, inv);
  out.recon_next = first.size() == 1 ? sum_recon_next : gn::scale(g, sum_recon_next, inv);
  out.recon = gn::add(g, out.recon_t, out.recon_next);
  out.total = gn::add(g, out.recon, gn::scale(g, out.temporal, options.lambda));
  return out;
}

LossBreakdown read_breakdown(const gn::Graph& g, const LossNodes& nodes, double lambda) {
  LossBreakdown b;
  b.temporal = g.value(nodes.temporal).item();
  b.recon_t = g.value(nodes.recon_t).item();
  b.recon_next = g.value(nodes.recon_next).item();
  b.recon = g.value(nodes.recon).item();
  b.lambda = lambda;
  b.total = g.value(nodes.total).item();
  b.max_norm_deviation = nodes.max_norm_deviation;
  return b;
}

LossBreakdown hybrid_loss(const ReprModel& model, const physim::Observation& s_t,
                          const physim::Observation& s_next, double lambda) {
  const PreparedObs a = prepare(model.config(), s_t);
  const PreparedObs b = prepare(model.config(), s_next);
  const PreparedObs* first[] = {&a};
  const PreparedObs* second[] = {&b};
  gn::Graph g;
  const LossNodes nodes = hybrid_loss_nodes(g, model, first, second, {.lambda = lambda});
  return read_breakdown(g, nodes, lambda);
}

std::vector<double> predict_next(std::span<const double> h_t, std::span<const double> dh_t) {
  if (h_t.size() != dh_t.size()) throw ContractError("predict_next: length mismatch");
  std::vector<double> out(h_t.size());
  for (std::size_t i = 0; i < h_t.size(); ++i) out[i] = h_t[i] + dh_t[i];
  return out;
}

}  // namespace prw::replearn
