#pragma once

#include "deepbarrier/nn/model_params.hpp"

#include <cstdint>
#include <filesystem>
#include <string>

namespace deepbarrier::nn {

/// Everything needed to resume or evaluate a training run.
struct Checkpoint {
  ModelParams params;
  std::uint64_t master_seed = 0;
  /// Index of the next mini-batch; mini-batch streams derive from
  /// (master_seed, index), so this is the whole generator state.
  std::int64_t next_batch = 0;
  /// Normalized run configuration the parameters were trained with.
  std::string config_text;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Binary little-endian container: magic, version, specs, weights, Adam
/// moments, seeds and the configuration text. Doubles are stored bit-exact.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

std::string serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint deserialize_checkpoint(const std::string& bytes);

}  // namespace deepbarrier::nn
