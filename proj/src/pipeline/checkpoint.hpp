#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "nn/model.hpp"
#include "pipeline/config.hpp"

namespace clhoi {

inline constexpr std::uint32_t kCheckpointVersion = 1;

// Binary layout: 8-byte magic "CLHOICKP", u32 version, u64 header length, the
// JSON header (config, step, rng state, tensor names/shapes/offsets), then all
// tensor values as little-endian IEEE-754 doubles in header order.
struct Checkpoint {
  Config config;
  ParameterMap params;
  std::uint64_t step = 0;
  std::string rng_state;
};

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
std::string serialize_checkpoint(const Checkpoint& checkpoint);

Checkpoint load_checkpoint(const std::filesystem::path& path);
Checkpoint deserialize_checkpoint(const std::string& bytes);

// Throws a load error unless the parameters match the registry of `expected`
// exactly: same names, same shapes, no extras.
void check_parameters(const ParameterMap& params, const ModelConfig& expected);

ModelWeights weights_of(const Checkpoint& checkpoint);

}  // namespace clhoi
