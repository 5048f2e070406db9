#include "diner/coord_table.hpp"

#include <cmath>
#include <string>

#include "diner/grid.hpp"

namespace diner {

CoordTable new_table(std::size_t n, std::size_t d_in, TableInit init, double uniform_scale,
                     std::span<const std::size_t> grid_extents, Rng& rng) {
    if (n == 0) throw ConfigError("new_table: n must be >= 1");
    if (d_in == 0) throw ConfigError("new_table: d_in must be >= 1");

    CoordTable t;
    t.n = n;
    t.d_in = d_in;
    t.entries.assign(n * d_in, 0.0);
    t.m.assign(n * d_in, 0.0);
    t.v.assign(n * d_in, 0.0);
    t.steps.assign(n, 0);

    switch (init) {
    case TableInit::Zero:
        break;
    case TableInit::Grid: {
        if (grid_extents.size() != d_in)
            throw ConfigError("new_table: Grid init needs one extent per coordinate axis");
        std::size_t prod = 1;
        for (std::size_t e : grid_extents) prod *= e;
        if (prod != n)
            throw ConfigError("new_table: Grid extents product " + std::to_string(prod) +
                              " != n " + std::to_string(n));
        std::vector<std::size_t> idx(d_in, 0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t a = 0; a < d_in; ++a)
                t.entries[i * d_in + a] = lattice_coord(idx[a], grid_extents[a]);
            for (std::size_t a = d_in; a-- > 0;) { // last axis fastest
                if (++idx[a] < grid_extents[a]) break;
                idx[a] = 0;
            }
        }
        break;
    }
    case TableInit::Uniform:
        for (double& e : t.entries) e = rng.uniform(-uniform_scale, uniform_scale);
        break;
    }
    return t;
}

std::vector<double> lookup(const CoordTable& t, std::size_t flat_index) {
    if (flat_index >= t.n)
        throw IndexError("lookup: index " + std::to_string(flat_index) + " out of range for n=" +
                         std::to_string(t.n));
    auto r = t.row(flat_index);
    return {r.begin(), r.end()};
}

void accumulate_and_step(CoordTable& t, std::size_t flat_index, std::span<const double> grad,
                         const AdamConfig& cfg) {
    if (flat_index >= t.n)
        throw IndexError("accumulate_and_step: index out of range");
    if (grad.size() != t.d_in)
        throw ShapeError("accumulate_and_step: gradient width != d_in");
    for (std::size_t a = 0; a < t.d_in; ++a)
        if (!std::isfinite(grad[a]))
            throw NumericError("accumulate_and_step: non-finite gradient for row " +
                               std::to_string(flat_index));

    t.steps[flat_index] += 1;
    const double tt = static_cast<double>(t.steps[flat_index]);
    const double bc1 = 1.0 - std::pow(cfg.beta1, tt);
    const double bc2 = 1.0 - std::pow(cfg.beta2, tt);
    const std::size_t base = flat_index * t.d_in;
    for (std::size_t a = 0; a < t.d_in; ++a) {
        const double g = grad[a];
        double& m = t.m[base + a];
        double& v = t.v[base + a];
        m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
        v = cfg.beta2 * v + (1.0 - cfg.beta2) * g * g;
        t.entries[base + a] -= cfg.lr * (m / bc1) / (std::sqrt(v / bc2) + cfg.eps);
    }
}

std::size_t flatten_coord(std::span<const std::size_t> coord, std::span<const std::size_t> extents) {
    if (coord.size() != extents.size())
        throw ShapeError("flatten_coord: coordinate rank != extents rank");
    std::size_t flat = 0;
    for (std::size_t a = 0; a < coord.size(); ++a) {
        if (coord[a] >= extents[a])
            throw IndexError("flatten_coord: axis " + std::to_string(a) + " index " +
                             std::to_string(coord[a]) + " out of range");
        flat = flat * extents[a] + coord[a];
    }
    return flat;
}

CoordTable apply_permutation(const CoordTable& t, std::span<const std::uint32_t> perm) {
    if (perm.size() != t.n)
        throw ConfigError("apply_permutation: permutation length != n");
    std::vector<bool> seen(t.n, false);
    for (std::uint32_t p : perm) {
        if (p >= t.n || seen[p])
            throw ConfigError("apply_permutation: not a bijection on 0..n-1");
        seen[p] = true;
    }
    CoordTable out;
    out.n = t.n;
    out.d_in = t.d_in;
    out.entries.resize(t.entries.size());
    out.m.resize(t.m.size());
    out.v.resize(t.v.size());
    out.steps.resize(t.n);
    for (std::size_t j = 0; j < t.n; ++j) {
        const std::size_t src = perm[j];
        for (std::size_t a = 0; a < t.d_in; ++a) {
            out.entries[j * t.d_in + a] = t.entries[src * t.d_in + a];
            out.m[j * t.d_in + a] = t.m[src * t.d_in + a];
            out.v[j * t.d_in + a] = t.v[src * t.d_in + a];
        }
        out.steps[j] = t.steps[src];
    }
    return out;
}

} // namespace diner
