#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "prw/common/binary_io.hpp"
#include "prw/physim/expert.hpp"
#include "prw/physim/sensing.hpp"

namespace prw::physim {

struct DemoStep {
  EnvState state;
  std::optional<Action> action;  // empty on the final entry
  Observation obs;
  friend bool operator==(const DemoStep&, const DemoStep&) = default;
};

struct Demonstration {
  EnvKind kind = EnvKind::kBlockInsertion;
  std::vector<DemoStep> steps;  // T + 1 entries
  bool success = false;
  std::uint64_t seed = 0;
  std::string status = "ok";

  // T: number of actions taken.
  std::size_t horizon() const { return steps.empty() ? 0 : steps.size() - 1; }
  friend bool operator==(const Demonstration& a, const Demonstration& b) {
    return a.kind == b.kind && a.steps == b.steps && a.success == b.success &&
           a.seed == b.seed;
  }
};

struct DemoOptions {
  std::size_t horizon = 600;
  // Stop at the first successful state; otherwise run the full horizon.
  bool stop_on_success = true;
  double dt = kDefaultDt;
};

// Rolls out the scripted expert from initial_state(seed). A run that hits
// the horizon without success is returned with success=false and a warning
// status.
Demonstration record_demo(const Environment& env, std::uint64_t seed,
                          const Plan& plan, const DemoOptions& options = {});

// Replays the stored action sequence from the first state.
std::vector<EnvState> replay_states(const Environment& env,
                                    const Demonstration& demo,
                                    double dt = kDefaultDt);

// PRLD binary file (layout in docs/formats.md).
Bytes encode_demo(const Demonstration& demo);
Demonstration decode_demo(std::span<const std::uint8_t> bytes);
void save_demo(const std::filesystem::path& path, const Demonstration& demo);
Demonstration load_demo(const std::filesystem::path& path);

// Shared flat encodings used by the demo and pair-dataset formats.
void put_state(ByteWriter& w, const EnvState& s);
EnvState get_state(ByteReader& r);
void put_observation(ByteWriter& w, const Observation& o);
Observation get_observation(ByteReader& r);

}  // namespace prw::physim
