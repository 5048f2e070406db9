#pragma once

#include <cstddef>
#include <cstdint>

#include "diner/grid.hpp"
#include "diner/numerics.hpp"

namespace diner {

/// Deterministic textured test image: multi-frequency sinusoids, flat random
/// tiles with sharp edges, and per-pixel noise, mixed into [0,1]. The noise
/// floor keeps small smooth networks from fitting it closely.
Grid make_texture_image(std::size_t h, std::size_t w, std::size_t channels, std::uint64_t seed);

Grid make_constant_image(std::size_t h, std::size_t w, std::size_t channels, double value);

/// Single-channel volume: a blob orbiting over a static gradient plus mild
/// noise, frames x h x w.
Grid make_video_volume(std::size_t frames, std::size_t h, std::size_t w, std::uint64_t seed);

/// Smooth amplitude+phase specimen: absorbing soft disks and Gaussian phase
/// blobs. Amplitude in [0.05,1], phase within (-pi, pi).
ComplexGrid make_phantom_field(std::size_t h, std::size_t w);

/// Unit amplitude, phase step inside a centered disk.
ComplexGrid make_phase_disk(std::size_t h, std::size_t w);

} // namespace diner
