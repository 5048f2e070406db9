#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "diner/numerics.hpp"

namespace diner {

enum class Activation { ReLU, Sine };

/// Input preprocessing. Fourier maps each component x to the interleaved
/// features (sin(2^k pi x), cos(2^k pi x)) for k = 0..octaves-1.
struct Encoding {
    enum class Kind { None, Fourier };
    Kind kind = Kind::None;
    std::size_t octaves = 10;

    std::size_t output_width(std::size_t d_in) const {
        return kind == Kind::None ? d_in : d_in * 2 * octaves;
    }

    static Encoding none() { return {Kind::None, 0}; }
    static Encoding fourier(std::size_t octaves) { return {Kind::Fourier, octaves}; }
};

struct BackboneSpec {
    std::size_t d_in = 2;
    std::size_t d_out = 1;
    std::size_t width = 64;
    std::size_t depth = 2; // hidden layers; the linear output layer is extra
    Activation activation = Activation::ReLU;
    double omega0 = 30.0;  // Sine frequency, ignored for ReLU
    Encoding encoding = Encoding::none();
};

struct Layer {
    Tensor2D W; // fan_out x fan_in
    std::vector<double> b;
};

/// Coordinate network: `depth` activated hidden layers plus a linear output
/// layer. Layer 0 consumes the encoded input.
struct Backbone {
    BackboneSpec spec;
    std::vector<Layer> layers;
};

/// Batches are sample-major Tensor2Ds: one row per sample, one column per
/// feature. The trace keeps per-layer pre-activations, post-activations, and
/// the activation derivative at the pre-activation, which backward() consumes.
struct ForwardTrace {
    Tensor2D input;   // B x d_in, the raw coordinates
    Tensor2D encoded; // B x enc_width
    std::vector<Tensor2D> pre;
    std::vector<Tensor2D> post;
    std::vector<Tensor2D> deriv;
};

struct BackboneGrads {
    std::vector<Layer> layers; // dW, db with the backbone's shapes
};

struct BackwardResult {
    BackboneGrads grads;
    Tensor2D input_grads; // B x d_in, gradients w.r.t. the raw coordinates
};

/// Seed-deterministic initialization. ReLU layers draw He-style uniform
/// U(+-sqrt(6/fan_in)); Sine uses U(+-1/fan_in) on the first layer and
/// U(+-sqrt(6/fan_in)/omega0) afterwards. Biases start at zero.
Backbone init_backbone(const BackboneSpec& spec, Rng& rng);

/// Encode one coordinate vector.
std::vector<double> encode(const Encoding& enc, std::span<const double> x);

/// Batched forward pass over coords (B x d_in). Fills *trace when given.
Tensor2D forward(const Backbone& bk, const Tensor2D& coords, ForwardTrace* trace = nullptr);

/// Hand-derived backward pass. Weight/bias gradients sum over batch rows
/// strictly in ascending row order, so the caller controls the reduction
/// order by ordering the rows. ReLU derivative at exactly 0 is 0; Sine
/// derivative is omega0*cos(omega0*a).
BackwardResult backward(const Backbone& bk, const ForwardTrace& trace, const Tensor2D& dL_dout);

/// Suggested learning rate for the activation family.
inline double default_lr(Activation a) { return a == Activation::Sine ? 1e-4 : 1e-3; }

} // namespace diner
