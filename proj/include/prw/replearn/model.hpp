#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "prw/common/rng.hpp"
#include "prw/gradnet/graph.hpp"
#include "prw/physim/types.hpp"

namespace prw::replearn {

struct ReprConfig {
  std::size_t grid_side = 32;
  // Static encoder, one stack per grid modality.
  std::vector<std::size_t> conv_channels{8, 16, 32, 64};
  std::size_t conv_kernel = 3;
  std::size_t conv_stride = 2;
  std::size_t branch_width = 32;
  std::size_t fusion_hidden = 128;
  std::size_t embed_dim = 64;
  // Decoder: dense to decoder_channels[0] x base x base, then one stride-2
  // kernel-2 transposed conv per remaining entry. Last entry must be 2.
  std::size_t decoder_base = 2;
  std::vector<std::size_t> decoder_channels{64, 32, 16, 8, 2};
  // Dynamic encoder.
  std::vector<std::size_t> tcn_channels{16, 16, 32, 32};
  std::vector<std::size_t> tcn_dilations{1, 2, 4, 8};
  std::size_t tcn_kernel = 2;
  std::size_t dynamic_hidden = 64;
  // Input scaling applied before the network (newtons and m/s are O(1-10)).
  double wrench_scale = 0.05;
  double velocity_scale = 1.0;

  void validate() const;
  // Spatial side after the conv stack (must be >= 1).
  std::size_t conv_output_side() const;
  // Window rows that can influence the dynamic embedding.
  std::size_t receptive_field() const;

  // 8x8 grids, width-4 embedding; used for gradient checks.
  static ReprConfig tiny();

  friend bool operator==(const ReprConfig&, const ReprConfig&) = default;
};

std::string to_json(const ReprConfig& c);
ReprConfig repr_config_from_json(const std::string& text);

// Network inputs derived from one observation.
struct PreparedObs {
  gradnet::Tensor intensity;  // [1, S, S]
  gradnet::Tensor depth;      // [1, S, S]
  gradnet::Tensor target;     // [2, S, S]: intensity then depth
  gradnet::Tensor window;     // [6, 32], channel-major, oldest column first
  gradnet::Tensor velocity;   // [3]
};

PreparedObs prepare(const ReprConfig& c, const physim::Observation& obs);

// h_phi (static encoder + decoder, "phi." parameters) and dh_psi (dynamic
// encoder, "psi." parameters).
class ReprModel {
 public:
  ReprModel(ReprConfig config, std::uint64_t init_seed);

  const ReprConfig& config() const { return config_; }
  gradnet::ParameterSet& params() { return params_; }
  const gradnet::ParameterSet& params() const { return params_; }

  // Graph builders.
  gradnet::Value static_embedding(gradnet::Graph& g, const PreparedObs& x) const;
  // normalize=false exposes the raw 64-vector before L2 normalization.
  gradnet::Value dynamic_embedding(gradnet::Graph& g, const PreparedObs& x,
                                   bool normalize = true) const;
  // [embed] -> [2, S, S] in [0, 1].
  gradnet::Value decode(gradnet::Graph& g, gradnet::Value h) const;

  // Inference helpers.
  std::vector<double> encode_static(const physim::Observation& obs) const;
  std::vector<double> encode_dynamic(const physim::Observation& obs) const;
  // Returns (intensity, depth), each S*S row-major.
  std::pair<std::vector<double>, std::vector<double>> decode_static(
      const std::vector<double>& h) const;

 private:
  struct Layer {
    std::size_t w = 0, b = 0;  // parameter indices
  };
  std::size_t add_param(const std::string& name, gradnet::Shape shape, double bound,
                        Rng& rng);
  Layer add_layer(const std::string& name, gradnet::Shape wshape, std::size_t fan_in,
                  std::size_t bias_len, Rng& rng);
  gradnet::Value branch(gradnet::Graph& g, const std::vector<Layer>& convs,
                        const Layer& dense, const gradnet::Tensor& grid) const;
  gradnet::Value p(gradnet::Graph& g, std::size_t index) const;

  ReprConfig config_;
  gradnet::ParameterSet params_;
  std::vector<Layer> intensity_convs_, depth_convs_;
  Layer intensity_dense_, depth_dense_, fusion_hidden_, fusion_out_;
  Layer decoder_dense_;
  std::vector<Layer> decoder_tconvs_;
  std::vector<Layer> tcn_;
  Layer dynamic_hidden_, dynamic_out_;
};

}  // namespace prw::replearn
