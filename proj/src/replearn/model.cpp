#include "prw/replearn/model.hpp"

#include <cmath>
#include <json.hpp>

#include "prw/common/error.hpp"
#include "prw/gradnet/ops.hpp"

namespace prw::replearn {

namespace gn = gradnet;

void ReprConfig::validate() const {
  if (grid_side < 2 || conv_channels.empty() || conv_kernel == 0 || conv_stride == 0 ||
      branch_width == 0 || fusion_hidden == 0 || embed_dim == 0) {
    throw ConfigError("representation config: zero-sized component");
  }
  std::size_t side = grid_side;
  for (std::size_t i = 0; i < conv_channels.size(); ++i) {
    if (side < conv_kernel) throw ConfigError("representation config: conv stack too deep");
    side = (side - conv_kernel) / conv_stride + 1;
  }
  if (decoder_channels.size() < 2 || decoder_channels.back() != 2) {
    throw ConfigError("decoder must end with 2 channels");
  }
  const std::size_t up = decoder_base << (decoder_channels.size() - 1);
  if (up != grid_side) {
    throw ConfigError("decoder output side " + std::to_string(up) + " != grid side " +
                      std::to_string(grid_side));
  }
  if (tcn_channels.empty() || tcn_channels.size() != tcn_dilations.size() ||
      tcn_kernel == 0 || dynamic_hidden == 0) {
    throw ConfigError("dynamic encoder: channels and dilations must pair up");
  }
  for (std::size_t d : tcn_dilations) {
    if (d == 0) throw ConfigError("dynamic encoder: dilation must be >= 1");
  }
  if (!(wrench_scale > 0.0) || !(velocity_scale > 0.0)) {
    throw ConfigError("input scales must be positive");
  }
}

std::size_t ReprConfig::conv_output_side() const {
  std::size_t side = grid_side;
  for (std::size_t i = 0; i < conv_channels.size(); ++i) {
    side = (side - conv_kernel) / conv_stride + 1;
  }
  return side;
}

std::size_t ReprConfig::receptive_field() const {
  std::size_t rf = 1;
  for (std::size_t d : tcn_dilations) rf += (tcn_kernel - 1) * d;
  return rf;
}

ReprConfig ReprConfig::tiny() {
  ReprConfig c;
  c.grid_side = 8;
  c.conv_channels = {3, 4};  // 8 -> 3 -> 1
  c.branch_width = 3;
  c.fusion_hidden = 5;
  c.embed_dim = 4;
  c.decoder_base = 2;
  c.decoder_channels = {3, 2, 2};  // 2 -> 4 -> 8
  c.tcn_channels = {3, 2};
  c.tcn_dilations = {1, 2};
  c.dynamic_hidden = 5;
  return c;
}

std::string to_json(const ReprConfig& c) {
  nlohmann::ordered_json j;
  j["grid_side"] = c.grid_side;
  j["conv_channels"] = c.conv_channels;
  j["conv_kernel"] = c.conv_kernel;
  j["conv_stride"] = c.conv_stride;
  j["branch_width"] = c.branch_width;
  j["fusion_hidden"] = c.fusion_hidden;
  j["embed_dim"] = c.embed_dim;
  j["decoder_base"] = c.decoder_base;
  j["decoder_channels"] = c.decoder_channels;
  j["tcn_channels"] = c.tcn_channels;
  j["tcn_dilations"] = c.tcn_dilations;
  j["tcn_kernel"] = c.tcn_kernel;
  j["dynamic_hidden"] = c.dynamic_hidden;
  j["wrench_scale"] = c.wrench_scale;
  j["velocity_scale"] = c.velocity_scale;
  return j.dump();
}

ReprConfig repr_config_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    ReprConfig c;
    c.grid_side = j.at("grid_side").get<std::size_t>();
    c.conv_channels = j.at("conv_channels").get<std::vector<std::size_t>>();
    c.conv_kernel = j.at("conv_kernel").get<std::size_t>();
    c.conv_stride = j.at("conv_stride").get<std::size_t>();
    c.branch_width = j.at("branch_width").get<std::size_t>();
    c.fusion_hidden = j.at("fusion_hidden").get<std::size_t>();
    c.embed_dim = j.at("embed_dim").get<std::size_t>();
    c.decoder_base = j.at("decoder_base").get<std::size_t>();
    c.decoder_channels = j.at("decoder_channels").get<std::vector<std::size_t>>();
    c.tcn_channels = j.at("tcn_channels").get<std::vector<std::size_t>>();
    c.tcn_dilations = j.at("tcn_dilations").get<std::vector<std::size_t>>();
    c.tcn_kernel = j.at("tcn_kernel").get<std::size_t>();
    c.dynamic_hidden = j.at("dynamic_hidden").get<std::size_t>();
    c.wrench_scale = j.at("wrench_scale").get<double>();
    c.velocity_scale = j.at("velocity_scale").get<double>();
    c.validate();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("bad representation config: ") + e.what());
  }
}

PreparedObs prepare(const ReprConfig& c, const physim::Observation& obs) {
  const std::size_t S = c.grid_side;
  if (obs.grid_side != S || obs.intensity.size() != S * S || obs.depth.size() != S * S) {
    throw ContractError("observation grid is " + std::to_string(obs.grid_side) +
                        ", model expects " + std::to_string(S));
  }
  PreparedObs x;
  x.intensity = gn::Tensor({1, S, S}, obs.intensity);
  x.depth = gn::Tensor({1, S, S}, obs.depth);
  std::vector<double> both(obs.intensity);
  both.insert(both.end(), obs.depth.begin(), obs.depth.end());
  x.target = gn::Tensor({2, S, S}, std::move(both));
  const std::size_t L = physim::kWindowLength, C = physim::kWindowChannels;
  x.window = gn::Tensor({C, L});
  for (std::size_t t = 0; t < L; ++t) {
    for (std::size_t ch = 0; ch < C; ++ch) {
      x.window[ch * L + t] = c.wrench_scale * obs.ft_window[t * C + ch];
    }
  }
  x.velocity = gn::Tensor::vector({c.velocity_scale * obs.velocity.vx,
                                   c.velocity_scale * obs.velocity.vy,
                                   c.velocity_scale * obs.velocity.omega});
  return x;
}

ReprModel::ReprModel(ReprConfig config, std::uint64_t init_seed) : config_(std::move(config)) {
  config_.validate();
  Rng rng(derive_seed(init_seed, 0x5EED));
  const ReprConfig& c = config_;
  const std::size_t k = c.conv_kernel;
  const std::size_t flat = c.conv_channels.back() * c.conv_output_side() * c.conv_output_side();
  for (auto* stack : {&intensity_convs_, &depth_convs_}) {
    const std::string prefix = stack == &intensity_convs_ ? "phi.intensity" : "phi.depth";
    std::size_t in = 1;
    for (std::size_t i = 0; i < c.conv_channels.size(); ++i) {
      const std::size_t out = c.conv_channels[i];
      stack->push_back(add_layer(prefix + ".conv" + std::to_string(i), {out, in, k, k},
                                 in * k * k, out, rng));
      in = out;
    }
    Layer dense = add_layer(prefix + ".dense", {c.branch_width, flat}, flat, c.branch_width, rng);
    (stack == &intensity_convs_ ? intensity_dense_ : depth_dense_) = dense;
  }
  fusion_hidden_ = add_layer("phi.fusion.hidden", {c.fusion_hidden, 2 * c.branch_width},
                             2 * c.branch_width, c.fusion_hidden, rng);
  fusion_out_ = add_layer("phi.fusion.out", {c.embed_dim, c.fusion_hidden}, c.fusion_hidden,
                          c.embed_dim, rng);

  const std::size_t base = c.decoder_base;
  const std::size_t dec0 = c.decoder_channels[0] * base * base;
  decoder_dense_ = add_layer("phi.decoder.dense", {dec0, c.embed_dim}, c.embed_dim, dec0, rng);
  for (std::size_t i = 1; i < c.decoder_channels.size(); ++i) {
    const std::size_t in = c.decoder_channels[i - 1], out = c.decoder_channels[i];
    decoder_tconvs_.push_back(add_layer("phi.decoder.tconv" + std::to_string(i - 1),
                                        {in, out, 2, 2}, in, out, rng));
  }

  std::size_t in = physim::kWindowChannels;
  for (std::size_t i = 0; i < c.tcn_channels.size(); ++i) {
    const std::size_t out = c.tcn_channels[i];
    tcn_.push_back(add_layer("psi.tcn" + std::to_string(i), {out, in, c.tcn_kernel},
                             in * c.tcn_kernel, out, rng));
    in = out;
  }
  const std::size_t dyn_in = c.tcn_channels.back() + 3;
  dynamic_hidden_ = add_layer("psi.hidden", {c.dynamic_hidden, dyn_in}, dyn_in,
                              c.dynamic_hidden, rng);
  dynamic_out_ = add_layer("psi.out", {c.embed_dim, c.dynamic_hidden}, c.dynamic_hidden,
                           c.embed_dim, rng);
}

std::size_t ReprModel::add_param(const std::string& name, gn::Shape shape, double bound,
                                 Rng& rng) {
  gn::Tensor t(std::move(shape));
  for (double& v : t.values()) v = rng.uniform(-bound, bound);
  return params_.add(name, std::move(t));
}

ReprModel::Layer ReprModel::add_layer(const std::string& name, gn::Shape wshape,
                                      std::size_t fan_in, std::size_t bias_len, Rng& rng) {
  Layer l;
  // He-uniform weights, zero biases.
  l.w = add_param(name + ".w", std::move(wshape), std::sqrt(6.0 / static_cast<double>(fan_in)),
                  rng);
  l.b = params_.add(name + ".b", gn::Tensor({bias_len}));
  return l;
}

gn::Value ReprModel::p(gn::Graph& g, std::size_t index) const {
  return g.parameter(params_[index]);
}

gn::Value ReprModel::branch(gn::Graph& g, const std::vector<Layer>& convs, const Layer& dense,
                            const gn::Tensor& grid) const {
  gn::Value h = g.constant(grid);
  for (const Layer& l : convs) {
    h = gn::relu(g, gn::conv2d(g, h, p(g, l.w), p(g, l.b), config_.conv_stride));
  }
  h = gn::reshape(g, h, {gn::shape_size(g.shape(h))});
  return gn::relu(g, gn::dense(g, h, p(g, dense.w), p(g, dense.b)));
}

gn::Value ReprModel::static_embedding(gn::Graph& g, const PreparedObs& x) const {
  const gn::Value a = branch(g, intensity_convs_, intensity_dense_, x.intensity);
  const gn::Value b = branch(g, depth_convs_, depth_dense_, x.depth);
  gn::Value h = gn::concat_last(g, {a, b});
  h = gn::relu(g, gn::dense(g, h, p(g, fusion_hidden_.w), p(g, fusion_hidden_.b)));
  return gn::dense(g, h, p(g, fusion_out_.w), p(g, fusion_out_.b));
}

gn::Value ReprModel::dynamic_embedding(gn::Graph& g, const PreparedObs& x,
                                       bool normalize) const {
  gn::Value h = g.constant(x.window);
  for (std::size_t i = 0; i < tcn_.size(); ++i) {
    h = gn::relu(g, gn::causal_conv1d(g, h, p(g, tcn_[i].w), p(g, tcn_[i].b),
                                      config_.tcn_dilations[i]));
  }
  const std::size_t L = g.shape(h)[1];
  h = gn::slice_last(g, h, L - 1, L);  // newest timestep
  h = gn::reshape(g, h, {config_.tcn_channels.back()});
  h = gn::concat_last(g, {h, g.constant(x.velocity)});
  h = gn::relu(g, gn::dense(g, h, p(g, dynamic_hidden_.w), p(g, dynamic_hidden_.b)));
  h = gn::dense(g, h, p(g, dynamic_out_.w), p(g, dynamic_out_.b));
  return normalize ? gn::l2_normalize(g, h) : h;
}

gn::Value ReprModel::decode(gn::Graph& g, gn::Value h) const {
  if (g.shape(h) != gn::Shape{config_.embed_dim}) {
    throw ContractError("decode: embedding shape " + gn::shape_str(g.shape(h)));
  }
  const std::size_t base = config_.decoder_base;
  gn::Value x = gn::dense(g, h, p(g, decoder_dense_.w), p(g, decoder_dense_.b));
  x = gn::relu(g, gn::reshape(g, x, {config_.decoder_channels[0], base, base}));
  for (std::size_t i = 0; i < decoder_tconvs_.size(); ++i) {
    const Layer& l = decoder_tconvs_[i];
    x = gn::conv_transpose2d(g, x, p(g, l.w), p(g, l.b), 2);
    x = i + 1 < decoder_tconvs_.size() ? gn::relu(g, x) : gn::sigmoid(g, x);
  }
  return x;
}

std::vector<double> ReprModel::encode_static(const physim::Observation& obs) const {
  gn::Graph g;
  const PreparedObs x = prepare(config_, obs);
  const auto& v = g.value(static_embedding(g, x)).values();
  return {v.begin(), v.end()};
}

std::vector<double> ReprModel::encode_dynamic(const physim::Observation& obs) const {
  gn::Graph g;
  const PreparedObs x = prepare(config_, obs);
  const auto& v = g.value(dynamic_embedding(g, x)).values();
  return {v.begin(), v.end()};
}

std::pair<std::vector<double>, std::vector<double>> ReprModel::decode_static(
    const std::vector<double>& h) const {
  if (h.size() != config_.embed_dim) throw ContractError("decode_static: wrong embedding length");
  gn::Graph g;
  const auto v = g.value(decode(g, g.constant(gn::Tensor::vector(h)))).values();
  const std::size_t n = config_.grid_side * config_.grid_side;
  return {std::vector<double>(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(n)),
          std::vector<double>(v.begin() + static_cast<std::ptrdiff_t>(n), v.end())};
}

}  // namespace prw::replearn
