#include "diner/synth.hpp"

#include <algorithm>
#include <cmath>

namespace diner {

Grid make_texture_image(std::size_t h, std::size_t w, std::size_t channels, std::uint64_t seed) {
    Grid img({h, w}, channels);
    Rng noise_rng = Rng(seed).fork(1);
    Rng tile_rng = Rng(seed).fork(2);
    Rng phase_rng = Rng(seed).fork(3);

    const std::size_t tile = 8;
    const std::size_t th = (h + tile - 1) / tile;
    const std::size_t tw = (w + tile - 1) / tile;
    std::vector<double> tiles(th * tw * channels);
    for (double& t : tiles) t = tile_rng.uniform01();

    std::vector<double> phase(channels);
    for (double& p : phase) p = phase_rng.uniform(0.0, 2.0 * M_PI);

    for (std::size_t y = 0; y < h; ++y) {
        const double v = h > 1 ? static_cast<double>(y) / static_cast<double>(h - 1) : 0.0;
        for (std::size_t x = 0; x < w; ++x) {
            const double u = w > 1 ? static_cast<double>(x) / static_cast<double>(w - 1) : 0.0;
            for (std::size_t c = 0; c < channels; ++c) {
                const double s1 =
                    0.5 + 0.5 * std::sin(2.0 * M_PI * (3.0 * u + 5.0 * v) + phase[c]);
                const double s2 =
                    0.5 + 0.5 * std::sin(2.0 * M_PI * (19.0 * u - 11.0 * v) + 2.0 * phase[c]);
                const double tl =
                    tiles[((y / tile) * tw + (x / tile)) * channels + c];
                const double nz = noise_rng.uniform01();
                img.at(y * w + x, c) = 0.35 * s1 + 0.2 * s2 + 0.25 * tl + 0.2 * nz;
            }
        }
    }
    return img;
}

Grid make_constant_image(std::size_t h, std::size_t w, std::size_t channels, double value) {
    return Grid({h, w}, channels, value);
}

Grid make_video_volume(std::size_t frames, std::size_t h, std::size_t w, std::uint64_t seed) {
    Grid vol({frames, h, w}, 1);
    Rng noise_rng = Rng(seed).fork(4);
    for (std::size_t t = 0; t < frames; ++t) {
        const double ang =
            2.0 * M_PI * static_cast<double>(t) / static_cast<double>(std::max<std::size_t>(frames, 1));
        const double cy = 0.5 + 0.28 * std::sin(ang);
        const double cx = 0.5 + 0.28 * std::cos(ang);
        for (std::size_t y = 0; y < h; ++y) {
            const double v = h > 1 ? static_cast<double>(y) / static_cast<double>(h - 1) : 0.0;
            for (std::size_t x = 0; x < w; ++x) {
                const double u = w > 1 ? static_cast<double>(x) / static_cast<double>(w - 1) : 0.0;
                const double d2 = (v - cy) * (v - cy) + (u - cx) * (u - cx);
                const double blob = std::exp(-d2 / 0.02);
                const double grad = 0.3 * u + 0.2 * v;
                const double nz = noise_rng.uniform01();
                vol.at((t * h + y) * w + x, 0) =
                    std::clamp(0.55 * blob + grad + 0.05 * nz, 0.0, 1.0);
            }
        }
    }
    return vol;
}

namespace {

double soft_disk(double y, double x, double cy, double cx, double radius, double edge) {
    const double d = std::hypot(y - cy, x - cx);
    return 1.0 / (1.0 + std::exp((d - radius) / edge));
}

double gauss2(double y, double x, double cy, double cx, double sigma) {
    const double d2 = (y - cy) * (y - cy) + (x - cx) * (x - cx);
    return std::exp(-d2 / (2.0 * sigma * sigma));
}

} // namespace

ComplexGrid make_phantom_field(std::size_t h, std::size_t w) {
    ComplexGrid field(h, w);
    for (std::size_t y = 0; y < h; ++y) {
        const double v = h > 1 ? static_cast<double>(y) / static_cast<double>(h - 1) : 0.0;
        for (std::size_t x = 0; x < w; ++x) {
            const double u = w > 1 ? static_cast<double>(x) / static_cast<double>(w - 1) : 0.0;
            double amp = 0.92 - 0.5 * soft_disk(v, u, 0.42, 0.38, 0.22, 0.03) -
                         0.2 * soft_disk(v, u, 0.68, 0.7, 0.12, 0.02);
            amp = std::clamp(amp, 0.05, 1.0);
            const double ph = 1.3 * gauss2(v, u, 0.55, 0.6, 0.16) -
                              0.9 * gauss2(v, u, 0.3, 0.35, 0.12);
            field.re[y * w + x] = amp * std::cos(ph);
            field.im[y * w + x] = amp * std::sin(ph);
        }
    }
    return field;
}

ComplexGrid make_phase_disk(std::size_t h, std::size_t w) {
    ComplexGrid field(h, w);
    for (std::size_t y = 0; y < h; ++y) {
        const double v = h > 1 ? static_cast<double>(y) / static_cast<double>(h - 1) : 0.0;
        for (std::size_t x = 0; x < w; ++x) {
            const double u = w > 1 ? static_cast<double>(x) / static_cast<double>(w - 1) : 0.0;
            const double ph = 1.0 * soft_disk(v, u, 0.5, 0.5, 0.25, 0.02);
            field.re[y * w + x] = std::cos(ph);
            field.im[y * w + x] = std::sin(ph);
        }
    }
    return field;
}

} // namespace diner
