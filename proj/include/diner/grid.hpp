#pragma once

#include <cstddef>
#include <numeric>
#include <vector>

#include "diner/errors.hpp"

namespace diner {

/// Discrete multi-dimensional sampled signal: `extents` orders axes slowest
/// first (H,W or T,H,W), `values` stores one d_out-channel tuple per element
/// in row-major element order with the channel fastest.
struct Grid {
    std::vector<std::size_t> extents;
    std::size_t channels = 1;
    std::vector<double> values;

    Grid() = default;
    Grid(std::vector<std::size_t> ext, std::size_t ch, double fill = 0.0)
        : extents(std::move(ext)), channels(ch),
          values(element_count() * ch, fill) {}

    std::size_t rank() const { return extents.size(); }

    std::size_t element_count() const {
        std::size_t n = 1;
        for (std::size_t e : extents) n *= e;
        return extents.empty() ? 0 : n;
    }

    double& at(std::size_t flat, std::size_t c) { return values[flat * channels + c]; }
    double at(std::size_t flat, std::size_t c) const { return values[flat * channels + c]; }

    bool same_shape(const Grid& o) const {
        return extents == o.extents && channels == o.channels;
    }
};

/// Lattice coordinate normalized per axis to [-1,1]: (2i/(n-1)) - 1.
/// A single-sample axis sits at 0.
inline double lattice_coord(std::size_t i, std::size_t n) {
    if (n <= 1) return 0.0;
    return 2.0 * static_cast<double>(i) / static_cast<double>(n - 1) - 1.0;
}

} // namespace diner
