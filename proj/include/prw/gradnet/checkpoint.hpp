#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "prw/gradnet/graph.hpp"

namespace prw::gradnet {

// PRCK: named tensors in parameter-set order. Layout in docs/formats.md.
std::vector<std::uint8_t> encode_checkpoint(const ParameterSet& params);
ParameterSet decode_checkpoint(std::span<const std::uint8_t> bytes);

// Overwrites `params` from a checkpoint with the same names and shapes.
// Throws ValidationError on any mismatch and leaves `params` unchanged.
void load_checkpoint_into(ParameterSet& params, std::span<const std::uint8_t> bytes);

void save_checkpoint(const std::filesystem::path& path, const ParameterSet& params);
void load_checkpoint_into(ParameterSet& params, const std::filesystem::path& path);

}  // namespace prw::gradnet
