#pragma once

#include <span>

#include "prw/replearn/model.hpp"

namespace prw::replearn {

struct LossBreakdown {
  double temporal = 0.0;    // MSE(h_t + dh_t, h_{t+1})
  double recon_t = 0.0;     // MSE(D(h_t), s_t)
  double recon_next = 0.0;  // MSE(D(h_t + dh_t), s_{t+1})
  double recon = 0.0;       // recon_t + recon_next
  double lambda = 10.0;
  double total = 0.0;       // recon + lambda * temporal
  // Largest | ||dh|| - 1 | over the pairs that produced this breakdown.
  double max_norm_deviation = 0.0;
};

struct LossOptions {
  double lambda = 10.0;
  // Ablation: treat E^s(s_{t+1}) as a constant inside the temporal term.
  bool stop_gradient_target = false;
};

struct LossNodes {
  gradnet::Value total, recon, recon_t, recon_next, temporal;
  double max_norm_deviation = 0.0;
};

// Mean hybrid loss over a batch of (s_t, s_{t+1}) pairs, recorded in `g`.
LossNodes hybrid_loss_nodes(gradnet::Graph& g, const ReprModel& model,
                            std::span<const PreparedObs* const> first,
                            std::span<const PreparedObs* const> second,
                            const LossOptions& options);

LossBreakdown read_breakdown(const gradnet::Graph& g, const LossNodes& nodes, double lambda);

// Single-pair convenience form.
LossBreakdown hybrid_loss(const ReprModel& model, const physim::Observation& s_t,
                          const physim::Observation& s_next, double lambda = 10.0);

// Predicted next embedding h_t + dh_t.
std::vector<double> predict_next(std::span<const double> h_t, std::span<const double> dh_t);

}  // namespace prw::replearn
