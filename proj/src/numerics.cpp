#include "diner/numerics.hpp"

#include <cmath>
#include <string>

namespace diner {

std::vector<double> dense_affine(const Tensor2D& W, std::span<const double> b,
                                 std::span<const double> x) {
    if (W.cols != x.size())
        throw ShapeError("dense_affine: W has " + std::to_string(W.cols) +
                         " cols but x has " + std::to_string(x.size()) + " entries");
    if (W.rows != b.size())
        throw ShapeError("dense_affine: W has " + std::to_string(W.rows) +
                         " rows but b has " + std::to_string(b.size()) + " entries");
    std::vector<double> out(b.begin(), b.end());
    for (std::size_t r = 0; r < W.rows; ++r) {
        const double* wr = W.row_ptr(r);
        double acc = out[r];
        for (std::size_t c = 0; c < W.cols; ++c) acc += wr[c] * x[c];
        out[r] = acc;
    }
    return out;
}

namespace {

// In-place iterative radix-2 transform of one line. stride separates
// consecutive elements so the same routine handles rows and columns.
// tw holds n/2 twiddles exp(sign*i*2*pi*k/n).
void fft_line(double* re, double* im, std::size_t n, std::size_t stride,
              const double* tw_re, const double* tw_im) {
    // bit-reversal permutation
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) {
            std::swap(re[i * stride], re[j * stride]);
            std::swap(im[i * stride], im[j * stride]);
        }
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const std::size_t half = len >> 1;
        const std::size_t step = n / len; // twiddle table stride
        for (std::size_t start = 0; start < n; start += len) {
            for (std::size_t k = 0; k < half; ++k) {
                const double wr = tw_re[k * step];
                const double wi = tw_im[k * step];
                double* ar = re + (start + k) * stride;
                double* ai = im + (start + k) * stride;
                double* br = re + (start + k + half) * stride;
                double* bi = im + (start + k + half) * stride;
                const double tr = *br * wr - *bi * wi;
                const double ti = *br * wi + *bi * wr;
                *br = *ar - tr;
                *bi = *ai - ti;
                *ar += tr;
                *ai += ti;
            }
        }
    }
}

std::vector<double> twiddle_table(std::size_t n, double sign, bool want_im) {
    std::vector<double> t(n / 2);
    for (std::size_t k = 0; k < n / 2; ++k) {
        const double a = sign * 2.0 * M_PI * static_cast<double>(k) / static_cast<double>(n);
        t[k] = want_im ? std::sin(a) : std::cos(a);
    }
    return t;
}

} // namespace

ComplexGrid fft2(const ComplexGrid& g, bool inverse) {
    if (g.re.size() != g.size() || g.im.size() != g.size())
        throw ShapeError("fft2: re/im planes do not match height*width");
    if (!is_power_of_two(g.height) || !is_power_of_two(g.width))
        throw SizeError("fft2: extents must be powers of two, got " +
                        std::to_string(g.height) + "x" + std::to_string(g.width));

    const double sign = inverse ? 1.0 : -1.0;
    ComplexGrid out = g;

    const auto twr_w = twiddle_table(g.width, sign, false);
    const auto twi_w = twiddle_table(g.width, sign, true);
    for (std::size_t y = 0; y < g.height; ++y)
        fft_line(out.re.data() + y * g.width, out.im.data() + y * g.width, g.width, 1,
                 twr_w.data(), twi_w.data());

    const auto twr_h = twiddle_table(g.height, sign, false);
    const auto twi_h = twiddle_table(g.height, sign, true);
    for (std::size_t x = 0; x < g.width; ++x)
        fft_line(out.re.data() + x, out.im.data() + x, g.height, g.width,
                 twr_h.data(), twi_h.data());

    if (inverse) {
        const double scale = 1.0 / static_cast<double>(g.size());
        for (double& v : out.re) v *= scale;
        for (double& v : out.im) v *= scale;
    }
    return out;
}

void adam_step(std::span<double> params, std::span<const double> grads,
               AdamState& state, const AdamConfig& cfg) {
    const std::size_t n = params.size();
    if (grads.size() != n || state.m.size() != n || state.v.size() != n)
        throw ShapeError("adam_step: params/grads/state length mismatch");
    for (std::size_t i = 0; i < n; ++i)
        if (!std::isfinite(grads[i]))
            throw NumericError("adam_step: non-finite gradient at index " + std::to_string(i));

    state.t += 1;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
    double* p = params.data();
    const double* g = grads.data();
    double* m = state.m.data();
    double* v = state.v.data();
    for (std::size_t i = 0; i < n; ++i) {
        m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
        v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
        const double mhat = m[i] / bc1;
        const double vhat = v[i] / bc2;
        p[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
    }
}

std::vector<std::uint32_t> seeded_permutation(Rng& rng, std::size_t n) {
    if (n == 0) throw ConfigError("seeded_permutation: empty input (n == 0)");
    std::vector<std::uint32_t> p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = static_cast<std::uint32_t>(i);
    for (std::size_t i = n - 1; i > 0; --i) {
        const std::uint64_t j = rng.next_below(i + 1);
        std::swap(p[i], p[j]);
    }
    return p;
}

namespace {

// pi/2 split into high/mid/low parts for Cody-Waite reduction.
constexpr double kPio2Hi = 1.57079632673412561417e+00;
constexpr double kPio2Mid = 6.07710050650619224932e-11;
constexpr double kPio2Lo = 2.02226624879595063154e-21;
constexpr double kTwoOverPi = 6.36619772367581382433e-01;

// Minimax polynomials on |r| <= pi/4 (classic double-precision coefficients).
inline double sin_poly(double r, double r2) {
    double p = 1.58962301576546568060e-10;
    p = p * r2 - 2.50507477628578072866e-08;
    p = p * r2 + 2.75573136213857245213e-06;
    p = p * r2 - 1.98412698295895385996e-04;
    p = p * r2 + 8.33333333332211858878e-03;
    p = p * r2 - 1.66666666666666307295e-01;
    return r + r * r2 * p;
}

inline double cos_poly(double r2) {
    double p = -1.13585365213876817300e-11;
    p = p * r2 + 2.08757008419747316778e-09;
    p = p * r2 - 2.75573141792967388112e-07;
    p = p * r2 + 2.48015872888517179954e-05;
    p = p * r2 - 1.38888888888730564116e-03;
    p = p * r2 + 4.16666666666665929218e-02;
    return 1.0 - 0.5 * r2 + r2 * r2 * p;
}

} // namespace

void sincos_batch(const double* x, double* s, double* c, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        const double u = x[i];
        const double kd = std::nearbyint(u * kTwoOverPi);
        const double r = ((u - kd * kPio2Hi) - kd * kPio2Mid) - kd * kPio2Lo;
        const double r2 = r * r;
        const double sp = sin_poly(r, r2);
        const double cp = cos_poly(r2);
        const auto q = static_cast<std::int64_t>(kd) & 3;
        const bool swap = (q & 1) != 0;
        const double sv = swap ? cp : sp;
        const double cv = swap ? sp : cp;
        s[i] = (q & 2) ? -sv : sv;
        c[i] = (q == 1 || q == 2) ? -cv : cv;
    }
}

void sin_batch(const double* x, double* s, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        const double u = x[i];
        const double kd = std::nearbyint(u * kTwoOverPi);
        const double r = ((u - kd * kPio2Hi) - kd * kPio2Mid) - kd * kPio2Lo;
        const double r2 = r * r;
        const double sp = sin_poly(r, r2);
        const double cp = cos_poly(r2);
        const auto q = static_cast<std::int64_t>(kd) & 3;
        const bool swap = (q & 1) != 0;
        const double sv = swap ? cp : sp;
        s[i] = (q & 2) ? -sv : sv;
    }
}

} // namespace diner
