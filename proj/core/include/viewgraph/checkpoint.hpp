#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "viewgraph/config.hpp"
#include "viewgraph/model.hpp"

namespace viewgraph {

struct Checkpoint {
    TrainConfig config;
    ModelParams params;
};

/// "3DVG-M" model container:
///
///   magic "3DVG-M" | u32 version (1)
///   config: u32 D_low, N, F, V, L | f64 sigma, learning_rate | u32 epochs, batch_size
///           | u64 seed | u32 ablation bits | u8 include_self
///   u32 block count, then per block in `blocks()` order:
///       u32 name length, name, u32 rows, u32 cols, rows*cols f64
///
/// Little-endian throughout; C is flattened row-major, so W_G column r*K+k
/// multiplies C(r, k).
std::vector<std::byte> serialize_checkpoint(const Checkpoint& checkpoint);
Checkpoint deserialize_checkpoint(std::span<const std::byte> bytes);

void save_checkpoint(const Checkpoint& checkpoint, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

/// Content hash of the parameter payload alone.
std::string params_digest(const ModelParams& params);

}  // namespace viewgraph
