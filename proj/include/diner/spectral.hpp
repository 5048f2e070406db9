#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "diner/coord_table.hpp"
#include "diner/grid.hpp"
#include "diner/network.hpp"

namespace diner {

/// Radial frequency-band statistics of a 2D signal: share of total spectral
/// magnitude per equal-width annulus in normalized radial frequency
/// r in [0, 0.5*sqrt(2)], DC in band 0.
struct SpectrumReport {
    std::vector<std::pair<double, double>> band_edges;
    std::vector<double> band_ratios;
    double total_energy = 0.0;
};

/// Centered FFT magnitude split into n_bands annuli; channels are averaged
/// before the transform. Extents must be powers of two.
SpectrumReport band_ratios(const Grid& img, std::size_t n_bands = 4);

/// JSON with fields band_edges, band_ratios, total_energy.
std::string to_json(const SpectrumReport& rep);

/// Samples a uniform mesh over the per-axis min/max box of the mapped
/// coordinates, evaluates the backbone on it, and clamps to [0,1].
Grid extract_learned_inr(const Backbone& bk, const CoordTable& table,
                         const std::vector<std::size_t>& resolution);

/// Separable linear upsampling (bilinear in 2D, trilinear in 3D). Each axis
/// of length n grows to factor*(n-1)+1, inserting factor-1 interpolated
/// samples between neighbors; factor 1 is the identity.
Grid post_interpolate(const Grid& g, std::size_t factor);

} // namespace diner
