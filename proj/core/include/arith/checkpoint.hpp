#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "arith/model.hpp"
#include "arith/trainer.hpp"

namespace arith {

// File layout: 8 magic bytes "ARLABCK1", u64-LE manifest byte length,
// JSON manifest (model config, step, rng states, ordered tensor table
// with shapes and byte offsets), then raw little-endian float32 payloads
// in manifest order.

struct CheckpointState {
  ParamStore<float> params;
  std::optional<OptState> opt;
  std::uint64_t step = 0;
  std::string data_rng;  // serialized batch-sampling rng, empty if absent
};

void save_checkpoint(const std::filesystem::path& path,
                     const ParamStore<float>& params,
                     const OptState* opt = nullptr, std::uint64_t step = 0,
                     const std::string& data_rng = {});

CheckpointState load_checkpoint(const std::filesystem::path& path);

}  // namespace arith
