#include "diner/network.hpp"

#include <cmath>
#include <string>

namespace diner {

namespace {

Tensor2D transposed(const Tensor2D& a) {
    Tensor2D t(a.cols, a.rows);
    for (std::size_t r = 0; r < a.rows; ++r)
        for (std::size_t c = 0; c < a.cols; ++c) t.at(c, r) = a.at(r, c);
    return t;
}

// out(B x fan_out) = Z(B x fan_in) * Wt(fan_in x fan_out) + b. The reduction
// over fan_in runs in fixed ascending order per sample; the inner loop is a
// contiguous axpy the compiler vectorizes.
Tensor2D affine_batch(const Tensor2D& Z, const Tensor2D& Wt, const std::vector<double>& b) {
    const std::size_t B = Z.rows;
    const std::size_t fan_in = Wt.rows;
    const std::size_t fan_out = Wt.cols;
    Tensor2D out(B, fan_out);
    for (std::size_t i = 0; i < B; ++i) {
        double* __restrict o = out.row_ptr(i);
        for (std::size_t c = 0; c < fan_out; ++c) o[c] = b[c];
        const double* z = Z.row_ptr(i);
        for (std::size_t k = 0; k < fan_in; ++k) {
            const double zv = z[k];
            const double* __restrict w = Wt.row_ptr(k);
            for (std::size_t c = 0; c < fan_out; ++c) o[c] += zv * w[c];
        }
    }
    return out;
}

} // namespace

Backbone init_backbone(const BackboneSpec& spec, Rng& rng) {
    if (spec.width == 0 || spec.depth == 0)
        throw ConfigError("init_backbone: width and depth must be nonzero");
    if (spec.d_in == 0 || spec.d_out == 0)
        throw ConfigError("init_backbone: d_in and d_out must be nonzero");
    if (spec.activation == Activation::Sine && !(spec.omega0 > 0.0))
        throw ConfigError("init_backbone: omega0 must be positive");
    if (spec.encoding.kind == Encoding::Kind::Fourier && spec.encoding.octaves == 0)
        throw ConfigError("init_backbone: Fourier encoding needs octaves >= 1");

    Backbone bk;
    bk.spec = spec;
    const std::size_t n_layers = spec.depth + 1;
    std::size_t fan_in = spec.encoding.output_width(spec.d_in);
    for (std::size_t l = 0; l < n_layers; ++l) {
        const std::size_t fan_out = (l == n_layers - 1) ? spec.d_out : spec.width;
        double bound;
        if (spec.activation == Activation::Sine)
            bound = (l == 0) ? 1.0 / static_cast<double>(fan_in)
                             : std::sqrt(6.0 / static_cast<double>(fan_in)) / spec.omega0;
        else
            bound = std::sqrt(6.0 / static_cast<double>(fan_in));
        Layer layer;
        layer.W = Tensor2D(fan_out, fan_in);
        for (double& w : layer.W.data) w = rng.uniform(-bound, bound);
        layer.b.assign(fan_out, 0.0);
        bk.layers.push_back(std::move(layer));
        fan_in = fan_out;
    }
    return bk;
}

std::vector<double> encode(const Encoding& enc, std::span<const double> x) {
    if (enc.kind == Encoding::Kind::None) return {x.begin(), x.end()};
    std::vector<double> out;
    out.reserve(enc.output_width(x.size()));
    for (double xc : x) {
        double freq = M_PI;
        for (std::size_t k = 0; k < enc.octaves; ++k) {
            out.push_back(std::sin(freq * xc));
            out.push_back(std::cos(freq * xc));
            freq *= 2.0;
        }
    }
    return out;
}

namespace {

Tensor2D encode_batch(const Encoding& enc, const Tensor2D& coords) {
    if (enc.kind == Encoding::Kind::None) return coords;
    const std::size_t B = coords.rows;
    const std::size_t d_in = coords.cols;
    Tensor2D out(B, enc.output_width(d_in));
    std::vector<double> arg(B), sv(B), cv(B);
    for (std::size_t c = 0; c < d_in; ++c) {
        double freq = M_PI;
        for (std::size_t k = 0; k < enc.octaves; ++k) {
            for (std::size_t i = 0; i < B; ++i) arg[i] = freq * coords.at(i, c);
            sincos_batch(arg.data(), sv.data(), cv.data(), B);
            const std::size_t col = c * 2 * enc.octaves + 2 * k;
            for (std::size_t i = 0; i < B; ++i) {
                out.at(i, col) = sv[i];
                out.at(i, col + 1) = cv[i];
            }
            freq *= 2.0;
        }
    }
    return out;
}

} // namespace

Tensor2D forward(const Backbone& bk, const Tensor2D& coords, ForwardTrace* trace) {
    if (coords.cols != bk.spec.d_in)
        throw ShapeError("forward: coords have " + std::to_string(coords.cols) +
                         " columns, backbone expects d_in=" + std::to_string(bk.spec.d_in));
    for (double v : coords.data)
        if (!std::isfinite(v)) throw NumericError("forward: non-finite input coordinate");

    Tensor2D z = encode_batch(bk.spec.encoding, coords);
    if (trace) {
        trace->input = coords;
        trace->encoded = z;
        trace->pre.clear();
        trace->post.clear();
        trace->deriv.clear();
    }

    const std::size_t n_layers = bk.layers.size();
    std::vector<double> argbuf;
    for (std::size_t l = 0; l < n_layers; ++l) {
        const Layer& layer = bk.layers[l];
        if (layer.W.cols != z.cols)
            throw ShapeError("forward: layer " + std::to_string(l) + " width mismatch");
        Tensor2D a = affine_batch(z, transposed(layer.W), layer.b);
        if (l == n_layers - 1) return a; // linear output layer

        if (trace) trace->pre.push_back(a);
        Tensor2D post(a.rows, a.cols);
        Tensor2D deriv;
        if (trace) deriv = Tensor2D(a.rows, a.cols);
        if (bk.spec.activation == Activation::ReLU) {
            for (std::size_t i = 0; i < a.size(); ++i) {
                const double v = a.data[i];
                post.data[i] = v > 0.0 ? v : 0.0;
                if (trace) deriv.data[i] = v > 0.0 ? 1.0 : 0.0;
            }
        } else {
            const double w0 = bk.spec.omega0;
            argbuf.resize(a.size());
            for (std::size_t i = 0; i < a.size(); ++i) argbuf[i] = w0 * a.data[i];
            if (trace) {
                sincos_batch(argbuf.data(), post.data.data(), deriv.data.data(), a.size());
                for (double& d : deriv.data) d *= w0;
            } else {
                sin_batch(argbuf.data(), post.data.data(), a.size());
            }
        }
        if (trace) {
            trace->post.push_back(post);
            trace->deriv.push_back(std::move(deriv));
        }
        z = std::move(post);
    }
    return z; // unreachable for depth >= 1
}

BackwardResult backward(const Backbone& bk, const ForwardTrace& trace, const Tensor2D& dL_dout) {
    const std::size_t n_layers = bk.layers.size();
    const std::size_t n_hidden = n_layers - 1;
    const std::size_t B = trace.input.rows;
    if (trace.pre.size() != n_hidden || trace.post.size() != n_hidden ||
        trace.deriv.size() != n_hidden)
        throw ShapeError("backward: trace does not match backbone depth");
    if (dL_dout.cols != bk.spec.d_out || dL_dout.rows != B)
        throw ShapeError("backward: upstream gradient shape mismatch");

    BackwardResult res;
    res.grads.layers.resize(n_layers);

    Tensor2D delta = dL_dout; // B x fan_out of the current layer
    for (std::size_t l = n_layers; l-- > 0;) {
        const Layer& layer = bk.layers[l];
        const Tensor2D& zprev = (l == 0) ? trace.encoded : trace.post[l - 1];
        const std::size_t fan_out = layer.W.rows;
        const std::size_t fan_in = layer.W.cols;

        Layer& g = res.grads.layers[l];
        g.W = Tensor2D(fan_out, fan_in);
        g.b.assign(fan_out, 0.0);

        // dW and db accumulate over batch rows strictly in ascending order.
        for (std::size_t i = 0; i < B; ++i) {
            const double* d = delta.row_ptr(i);
            const double* __restrict zp = zprev.row_ptr(i);
            for (std::size_t r = 0; r < fan_out; ++r) {
                const double dv = d[r];
                double* __restrict gw = g.W.row_ptr(r);
                for (std::size_t k = 0; k < fan_in; ++k) gw[k] += dv * zp[k];
            }
            double* gb = g.b.data();
            for (std::size_t r = 0; r < fan_out; ++r) gb[r] += d[r];
        }

        // delta for the previous layer: (delta * W) .* deriv
        Tensor2D prev_delta(B, fan_in);
        for (std::size_t i = 0; i < B; ++i) {
            double* __restrict o = prev_delta.row_ptr(i);
            const double* d = delta.row_ptr(i);
            for (std::size_t r = 0; r < fan_out; ++r) {
                const double dv = d[r];
                const double* __restrict w = layer.W.row_ptr(r);
                for (std::size_t k = 0; k < fan_in; ++k) o[k] += dv * w[k];
            }
        }
        if (l > 0) {
            const Tensor2D& dv = trace.deriv[l - 1];
            for (std::size_t i = 0; i < prev_delta.size(); ++i)
                prev_delta.data[i] *= dv.data[i];
        }
        delta = std::move(prev_delta);
    }

    // delta now holds gradients w.r.t. the encoded input; undo the encoding.
    const Encoding& enc = bk.spec.encoding;
    if (enc.kind == Encoding::Kind::None) {
        res.input_grads = std::move(delta);
    } else {
        res.input_grads = Tensor2D(B, bk.spec.d_in);
        for (std::size_t i = 0; i < B; ++i) {
            const double* gd = delta.row_ptr(i);
            const double* ef = trace.encoded.row_ptr(i);
            double* out = res.input_grads.row_ptr(i);
            for (std::size_t c = 0; c < bk.spec.d_in; ++c) {
                double acc = 0.0;
                double freq = M_PI;
                for (std::size_t k = 0; k < enc.octaves; ++k) {
                    const std::size_t col = c * 2 * enc.octaves + 2 * k;
                    acc += freq * (gd[col] * ef[col + 1] - gd[col + 1] * ef[col]);
                    freq *= 2.0;
                }
                out[c] = acc;
            }
        }
    }
    return res;
}

} // namespace diner
