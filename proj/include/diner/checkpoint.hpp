#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "diner/training.hpp"

namespace diner {

/// Self-contained training snapshot. On disk:
///   "DINR" | u32 version | u64 json length | metadata JSON | payload
/// where the payload holds little-endian 64-bit floats in a fixed order
/// (per-layer weights and biases, per-layer Adam moments and step counts,
/// then table entries, moments, and row step counts). Every payload length
/// is derivable from the metadata, and load(save(x)) == x bitwise.
struct Checkpoint {
    Model model;
    FitState state;
    TrainConfig train;
    std::vector<std::size_t> signal_extents;
    std::size_t signal_channels = 1;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ck);
Checkpoint load_checkpoint(const std::filesystem::path& path);

} // namespace diner
