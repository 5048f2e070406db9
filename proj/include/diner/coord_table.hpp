#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "diner/numerics.hpp"

namespace diner {

enum class TableInit { Zero, Grid, Uniform };

/// Full-resolution learnable coordinate table: one d_in-dimensional mapped
/// coordinate per signal element, plus per-row Adam moments and step
/// counters so rows update lazily and independently.
struct CoordTable {
    std::size_t n = 0;
    std::size_t d_in = 0;
    std::vector<double> entries; // n x d_in, row-major
    std::vector<double> m;       // first moments, n x d_in
    std::vector<double> v;       // second moments, n x d_in
    std::vector<std::uint64_t> steps; // per-row step counter (touch count)

    std::span<const double> row(std::size_t i) const {
        return {entries.data() + i * d_in, d_in};
    }
    std::span<double> row(std::size_t i) {
        return {entries.data() + i * d_in, d_in};
    }
};

/// Zero fills 0; Grid fills the normalized [-1,1] lattice coordinates of
/// `grid_extents` (product must equal n); Uniform fills U(-scale, scale).
CoordTable new_table(std::size_t n, std::size_t d_in, TableInit init, double uniform_scale,
                     std::span<const std::size_t> grid_extents, Rng& rng);

/// Row read; O(1).
std::vector<double> lookup(const CoordTable& t, std::size_t flat_index);

/// Lazy Adam on exactly one row: bias correction uses that row's own step
/// count and no other row is touched.
void accumulate_and_step(CoordTable& t, std::size_t flat_index, std::span<const double> grad,
                         const AdamConfig& cfg);

/// Row-major flattening, last axis fastest.
std::size_t flatten_coord(std::span<const std::size_t> coord, std::span<const std::size_t> extents);

/// Rows reordered so that out.row(j) == in.row(perm[j]), optimizer state
/// included. perm must be a bijection on 0..n-1.
CoordTable apply_permutation(const CoordTable& t, std::span<const std::uint32_t> perm);

} // namespace diner
