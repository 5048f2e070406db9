#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "diner/errors.hpp"

namespace diner {

/// Dense row-major matrix of 64-bit floats.
struct Tensor2D {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Tensor2D() = default;
    Tensor2D(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {}

    double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
    double* row_ptr(std::size_t r) { return data.data() + r * cols; }
    const double* row_ptr(std::size_t r) const { return data.data() + r * cols; }
    std::size_t size() const { return data.size(); }
};

/// Complex field sampled on a regular HxW grid, split into real/imaginary planes.
struct ComplexGrid {
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<double> re;
    std::vector<double> im;

    ComplexGrid() = default;
    ComplexGrid(std::size_t h, std::size_t w)
        : height(h), width(w), re(h * w, 0.0), im(h * w, 0.0) {}

    std::size_t size() const { return height * width; }
};

// Counter-based deterministic generator (SplitMix64): the state advances by a
// fixed odd constant and each output is a finalizer hash of the new state,
//   state += 0x9E3779B97F4A7C15
//   z = state; z ^= z>>30; z *= 0xBF58476D1CE4E5B9;
//   z ^= z>>27; z *= 0x94D049BB133111EB; z ^= z>>31
// Pure 64-bit integer arithmetic, so streams are identical on every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0,1) with 53 random bits.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Uniform integer in [0, bound). bound must be nonzero.
    std::uint64_t next_below(std::uint64_t bound) { return next_u64() % bound; }

    /// Independent substream derived from the current state and a caller tag.
    Rng fork(std::uint64_t tag) const {
        std::uint64_t z = state_ + 0x9E3779B97F4A7C15ULL * (tag + 1);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return Rng(z ^ (z >> 31));
    }

private:
    std::uint64_t state_;
};

/// First/second Adam moments plus the step counter of the parameter they shadow.
struct AdamState {
    std::vector<double> m;
    std::vector<double> v;
    std::uint64_t t = 0;

    AdamState() = default;
    explicit AdamState(std::size_t n) : m(n, 0.0), v(n, 0.0) {}
};

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// out = W*x + b. Shapes must chain: W.cols == x.size(), W.rows == b.size().
std::vector<double> dense_affine(const Tensor2D& W, std::span<const double> b,
                                 std::span<const double> x);

/// Radix-2 2D FFT. Forward uses the negative-exponent convention and is
/// unnormalized; the inverse divides by height*width. Extents must be powers
/// of two.
ComplexGrid fft2(const ComplexGrid& g, bool inverse);

/// Bias-corrected Adam update applied in place; increments state.t.
void adam_step(std::span<double> params, std::span<const double> grads,
               AdamState& state, const AdamConfig& cfg);

/// Fisher-Yates shuffle of 0..n-1 driven by the given stream.
std::vector<std::uint32_t> seeded_permutation(Rng& rng, std::size_t n);

/// Vectorizable sin/cos pair evaluation: s[i] = sin(x[i]), c[i] = cos(x[i]).
/// Cody-Waite reduction by pi/2 plus minimax polynomials; accurate to a few
/// ulp for |x| < 1e6, which covers every activation argument in this library.
void sincos_batch(const double* x, double* s, double* c, std::size_t n);

/// sin only, same kernel as sincos_batch.
void sin_batch(const double* x, double* s, std::size_t n);

inline bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

} // namespace diner
