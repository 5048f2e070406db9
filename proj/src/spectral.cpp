#include "diner/spectral.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"

namespace diner {

SpectrumReport band_ratios(const Grid& img, std::size_t n_bands) {
    if (img.rank() != 2) throw ShapeError("band_ratios: input must be 2D");
    if (n_bands == 0) throw ConfigError("band_ratios: need at least one band");
    const std::size_t h = img.extents[0];
    const std::size_t w = img.extents[1];

    ComplexGrid g(h, w);
    const double inv_ch = 1.0 / static_cast<double>(img.channels);
    for (std::size_t i = 0; i < h * w; ++i) {
        double s = 0.0;
        for (std::size_t c = 0; c < img.channels; ++c) s += img.at(i, c);
        g.re[i] = s * inv_ch;
    }
    ComplexGrid F = fft2(g, /*inverse=*/false);

    const double r_max = 0.5 * std::sqrt(2.0);
    SpectrumReport rep;
    rep.band_ratios.assign(n_bands, 0.0);
    for (std::size_t b = 0; b < n_bands; ++b)
        rep.band_edges.push_back({r_max * static_cast<double>(b) / n_bands,
                                  r_max * static_cast<double>(b + 1) / n_bands});

    for (std::size_t ky = 0; ky < h; ++ky) {
        const double fy =
            (ky < h / 2 ? static_cast<double>(ky) : static_cast<double>(ky) - static_cast<double>(h)) /
            static_cast<double>(h);
        for (std::size_t kx = 0; kx < w; ++kx) {
            const double fx = (kx < w / 2 ? static_cast<double>(kx)
                                          : static_cast<double>(kx) - static_cast<double>(w)) /
                              static_cast<double>(w);
            const double r = std::sqrt(fx * fx + fy * fy);
            auto band = static_cast<std::size_t>(r / r_max * static_cast<double>(n_bands));
            if (band >= n_bands) band = n_bands - 1; // outer edge inclusive
            const std::size_t i = ky * w + kx;
            rep.band_ratios[band] += std::hypot(F.re[i], F.im[i]);
        }
    }

    rep.total_energy = 0.0;
    for (double b : rep.band_ratios) rep.total_energy += b;
    if (rep.total_energy > 0.0) {
        for (double& b : rep.band_ratios) b /= rep.total_energy;
    } else {
        rep.band_ratios.assign(n_bands, 0.0);
        rep.band_ratios[0] = 1.0; // all-zero signal counts as pure DC
    }
    return rep;
}

std::string to_json(const SpectrumReport& rep) {
    nlohmann::json j;
    j["band_edges"] = rep.band_edges;
    j["band_ratios"] = rep.band_ratios;
    j["total_energy"] = rep.total_energy;
    return j.dump(2);
}

Grid extract_learned_inr(const Backbone& bk, const CoordTable& table,
                         const std::vector<std::size_t>& resolution) {
    if (table.d_in != 2 || bk.spec.d_in != 2)
        throw ConfigError("extract_learned_inr: needs a 2D coordinate table");
    if (resolution.size() != 2 || resolution[0] == 0 || resolution[1] == 0)
        throw ConfigError("extract_learned_inr: resolution must be HxW");

    double lo[2], hi[2];
    for (int a = 0; a < 2; ++a) {
        lo[a] = table.entries[a];
        hi[a] = table.entries[a];
    }
    for (std::size_t i = 0; i < table.n; ++i) {
        for (int a = 0; a < 2; ++a) {
            lo[a] = std::min(lo[a], table.entries[i * 2 + a]);
            hi[a] = std::max(hi[a], table.entries[i * 2 + a]);
        }
    }
    for (int a = 0; a < 2; ++a)
        if (!(hi[a] > lo[a]))
            throw DegenerateRangeError("extract_learned_inr: mapped coordinates collapse on axis " +
                                      std::to_string(a));

    const std::size_t rh = resolution[0];
    const std::size_t rw = resolution[1];
    Tensor2D coords(rh * rw, 2);
    for (std::size_t iy = 0; iy < rh; ++iy) {
        const double cy = rh == 1 ? 0.5 * (lo[0] + hi[0])
                                  : lo[0] + (hi[0] - lo[0]) * static_cast<double>(iy) /
                                                static_cast<double>(rh - 1);
        for (std::size_t ix = 0; ix < rw; ++ix) {
            const double cx = rw == 1 ? 0.5 * (lo[1] + hi[1])
                                      : lo[1] + (hi[1] - lo[1]) * static_cast<double>(ix) /
                                                    static_cast<double>(rw - 1);
            coords.at(iy * rw + ix, 0) = cy;
            coords.at(iy * rw + ix, 1) = cx;
        }
    }

    Tensor2D out = forward(bk, coords);
    Grid img({rh, rw}, bk.spec.d_out);
    for (std::size_t i = 0; i < out.size(); ++i)
        img.values[i] = std::clamp(out.data[i], 0.0, 1.0);
    return img;
}

namespace {

// Linear interpolation along one axis; `inner` is the product of the faster
// axes times channels, `outer` the product of the slower axes.
Grid interpolate_axis(const Grid& g, std::size_t axis, std::size_t factor) {
    const std::size_t n = g.extents[axis];
    const std::size_t n_out = n == 1 ? 1 : factor * (n - 1) + 1;
    std::size_t outer = 1, inner = g.channels;
    for (std::size_t a = 0; a < axis; ++a) outer *= g.extents[a];
    for (std::size_t a = axis + 1; a < g.rank(); ++a) inner *= g.extents[a];

    std::vector<std::size_t> ext = g.extents;
    ext[axis] = n_out;
    Grid out(ext, g.channels);
    for (std::size_t o = 0; o < outer; ++o) {
        const double* src = g.values.data() + o * n * inner;
        double* dst = out.values.data() + o * n_out * inner;
        for (std::size_t j = 0; j < n_out; ++j) {
            const std::size_t q = j / factor;
            const std::size_t r = j % factor;
            if (r == 0 || q + 1 >= n) {
                std::copy(src + q * inner, src + (q + 1) * inner, dst + j * inner);
            } else {
                const double t = static_cast<double>(r) / static_cast<double>(factor);
                const double* a = src + q * inner;
                const double* b = src + (q + 1) * inner;
                for (std::size_t k = 0; k < inner; ++k)
                    dst[j * inner + k] = (1.0 - t) * a[k] + t * b[k];
            }
        }
    }
    return out;
}

} // namespace

Grid post_interpolate(const Grid& g, std::size_t factor) {
    if (factor == 0) throw ConfigError("post_interpolate: factor must be >= 1");
    if (factor == 1) return g;
    Grid out = g;
    for (std::size_t a = 0; a < g.rank(); ++a) out = interpolate_axis(out, a, factor);
    return out;
}

} // namespace diner
