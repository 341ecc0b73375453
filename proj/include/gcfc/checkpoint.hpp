#pragma once

#include <string>

#include "nlohmann/json.hpp"

#include "gcfc/params.hpp"

namespace gcfc {

// Checkpoint file layout:
//   bytes 0..4   magic "GCFC1"
//   bytes 5..8   u32 little-endian manifest length in bytes
//   manifest     JSON: {"config": {...}, "params": [{name, shape, offset}]}
//   blob         raw little-endian doubles, offsets are byte positions
// The config object is an opaque snapshot of the resolved run configuration;
// loading validates that every stored tensor matches the store by name and
// shape and that no tensor is missing or unaccounted for.
void save_checkpoint(const std::string& path, const nlohmann::json& config,
                     const ParamStore& params);
void load_checkpoint(const std::string& path, ParamStore& params);
nlohmann::json read_checkpoint_config(const std::string& path);

}  // namespace gcfc
