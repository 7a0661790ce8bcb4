#include "prw/gradnet/checkpoint.hpp"

#include "prw/common/binary_io.hpp"
#include "prw/common/error.hpp"

namespace prw::gradnet {
namespace {

constexpr std::uint32_t kVersion = 1;

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const ParameterSet& params) {
  ByteWriter w;
  w.put_magic("PRCK");
  w.put<std::uint32_t>(kVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(params.size()));
  for (const Parameter& p : params) {
    w.put_string(p.name);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(p.value.rank()));
    for (std::size_t e : p.value.shape()) w.put<std::uint64_t>(e);
    w.put_f64s(p.value.values());
  }
  return w.take();
}

ParameterSet decode_checkpoint(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  r.expect_magic("PRCK");
  const auto version = r.get<std::uint32_t>();
  if (version != kVersion) {
    throw ValidationError("unsupported checkpoint version " + std::to_string(version));
  }
  const auto count = r.get<std::uint32_t>();
  ParameterSet out;
  for (std::uint32_t k = 0; k < count; ++k) {
    std::string name = r.get_string();
    const auto rank = r.get<std::uint32_t>();
    if (rank > 8) throw ValidationError("checkpoint tensor rank too large: " + name);
    Shape shape(rank);
    for (auto& e : shape) e = r.get<std::uint64_t>();
    const std::size_t n = shape_size(shape);
    if (n > bytes.size() / sizeof(double)) {
      throw ValidationError("checkpoint tensor too large: " + name);
    }
    std::vector<double> values(n);
    r.get_f64s(values);
    out.add(std::move(name), Tensor(std::move(shape), std::move(values)));
  }
  if (!r.at_end()) throw ValidationError("trailing bytes after checkpoint");
  return out;
}

void load_checkpoint_into(ParameterSet& params, std::span<const std::uint8_t> bytes) {
  const ParameterSet loaded = decode_checkpoint(bytes);
  if (loaded.size() != params.size()) {
    throw ValidationError("checkpoint holds " + std::to_string(loaded.size()) +
                          " tensors, model has " + std::to_string(params.size()));
  }
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (loaded[k].name != params[k].name ||
        loaded[k].value.shape() != params[k].value.shape()) {
      throw ValidationError("checkpoint tensor " + loaded[k].name + " " +
                            shape_str(loaded[k].value.shape()) + " does not match " +
                            params[k].name + " " + shape_str(params[k].value.shape()));
    }
  }
  params.assign_values(loaded);
}

void save_checkpoint(const std::filesystem::path& path, const ParameterSet& params) {
  write_file(path, encode_checkpoint(params));
}

void load_checkpoint_into(ParameterSet& params, const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  load_checkpoint_into(params, std::span<const std::uint8_t>(bytes));
}

}  // namespace prw::gradnet
