#include "diner/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>
#include <string>

namespace diner {

void validate_sample_set(const SampleSet& data) {
    if (data.extents.empty() || data.element_count() == 0)
        throw ConfigError("sample set has no elements");
    if (data.channels == 0) throw ConfigError("sample set has zero channels");
    if (data.values.size() != data.element_count() * data.channels)
        throw ShapeError("sample set value buffer does not match shape");
    for (double v : data.values)
        if (!(v >= 0.0 && v <= 1.0))
            throw NumericError("sample set values must be finite and in [0,1]");
}

void write_csv(const MetricsLog& log, std::ostream& os) {
    os << "epoch,loss,psnr_db,wall_ms\n";
    char buf[160];
    for (const MetricsRow& r : log.rows) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.3f\n", r.epoch, r.loss, r.psnr_db,
                      r.wall_ms);
        os << buf;
    }
}

double psnr(const Grid& a, const Grid& b) {
    if (!a.same_shape(b)) throw ShapeError("psnr: grids differ in shape");
    double se = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        const double av = std::clamp(a.values[i], 0.0, 1.0);
        const double bv = std::clamp(b.values[i], 0.0, 1.0);
        const double d = av - bv;
        se += d * d;
    }
    const double mse = se / static_cast<double>(a.values.size());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return -10.0 * std::log10(mse);
}

namespace {

double luminance(const SampleSet& data, std::size_t flat) {
    if (data.channels == 3)
        return 0.299 * data.at(flat, 0) + 0.587 * data.at(flat, 1) + 0.114 * data.at(flat, 2);
    double s = 0.0;
    for (std::size_t c = 0; c < data.channels; ++c) s += data.at(flat, c);
    return s / static_cast<double>(data.channels);
}

// Flat indices ordered by target tuple (lexicographic), ties by index. Two
// signals that are permutations of each other produce the same value
// sequence under this order, so full-batch gradient sums match bitwise.
std::vector<std::uint32_t> target_sorted_order(const SampleSet& data) {
    const std::size_t n = data.element_count();
    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
        for (std::size_t c = 0; c < data.channels; ++c) {
            const double va = data.at(a, c);
            const double vb = data.at(b, c);
            if (va != vb) return va < vb;
        }
        return false;
    });
    return order;
}

void lattice_row(const std::vector<std::size_t>& extents, std::size_t flat, double* out) {
    for (std::size_t a = extents.size(); a-- > 0;) {
        out[a] = lattice_coord(flat % extents[a], extents[a]);
        flat /= extents[a];
    }
}

double now_ms(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
        .count();
}

void ensure(Tensor2D& t, std::size_t rows, std::size_t cols) {
    t.rows = rows;
    t.cols = cols;
    if (t.data.size() != rows * cols) t.data.assign(rows * cols, 0.0);
}

// ---- batched kernels ------------------------------------------------------
// All reductions run in a fixed ascending order so results are deterministic
// and, with batch rows pre-sorted, independent of the signal arrangement.
// Row pairs share the weight loads; that is the fastest shape here.

// out = broadcast(bias); out += Z * Wt. W is the untransposed weight; narrow
// outputs (the linear head) run striped dot products over its rows instead.
void k_affine(const Tensor2D& Z, const Tensor2D& W, const Tensor2D& Wt,
              const std::vector<double>& bias, Tensor2D& out) {
    const std::size_t B = Z.rows;
    const std::size_t n_in = Wt.rows;
    const std::size_t n_out = Wt.cols;
    ensure(out, B, n_out);
    if (n_out <= 4 && n_in >= 8) {
        for (std::size_t i = 0; i < B; ++i) {
            const double* __restrict z = Z.row_ptr(i);
            double* o = out.row_ptr(i);
            for (std::size_t c = 0; c < n_out; ++c) {
                const double* __restrict wr = W.row_ptr(c);
                double l0 = 0.0, l1 = 0.0, l2 = 0.0, l3 = 0.0;
                std::size_t k = 0;
                for (; k + 3 < n_in; k += 4) {
                    l0 += z[k] * wr[k];
                    l1 += z[k + 1] * wr[k + 1];
                    l2 += z[k + 2] * wr[k + 2];
                    l3 += z[k + 3] * wr[k + 3];
                }
                double acc = ((l0 + l1) + l2) + l3;
                for (; k < n_in; ++k) acc += z[k] * wr[k];
                o[c] = bias[c] + acc;
            }
        }
        return;
    }
    for (std::size_t i = 0; i < B; ++i) {
        double* __restrict o = out.row_ptr(i);
        for (std::size_t c = 0; c < n_out; ++c) o[c] = bias[c];
        const double* z = Z.row_ptr(i);
        std::size_t k = 0;
        for (; k + 3 < n_in; k += 4) {
            const double a0 = z[k];
            const double a1 = z[k + 1];
            const double a2 = z[k + 2];
            const double a3 = z[k + 3];
            const double* __restrict w0 = Wt.row_ptr(k);
            const double* __restrict w1 = Wt.row_ptr(k + 1);
            const double* __restrict w2 = Wt.row_ptr(k + 2);
            const double* __restrict w3 = Wt.row_ptr(k + 3);
            for (std::size_t c = 0; c < n_out; ++c) {
                double acc = o[c];
                acc += a0 * w0[c];
                acc += a1 * w1[c];
                acc += a2 * w2[c];
                acc += a3 * w3[c];
                o[c] = acc;
            }
        }
        for (; k < n_in; ++k) {
            const double a = z[k];
            const double* __restrict w = Wt.row_ptr(k);
            for (std::size_t c = 0; c < n_out; ++c) o[c] += a * w[c];
        }
    }
}

// Affine + activation fused: post = act(Z*Wt + b), deriv = act'(pre), with the
// pre-activation kept in a small stack block instead of a full tensor.
void k_affine_act(const Tensor2D& Z, const Tensor2D& Wt, const std::vector<double>& bias,
                  Activation act, double omega0, Tensor2D& post, Tensor2D& deriv,
                  std::vector<double>& scratch) {
    const std::size_t B = Z.rows;
    const std::size_t n_in = Wt.rows;
    const std::size_t n_out = Wt.cols;
    ensure(post, B, n_out);
    ensure(deriv, B, n_out);
    scratch.resize(n_out);
    double* __restrict pre = scratch.data();
    for (std::size_t i = 0; i < B; ++i) {
        for (std::size_t c = 0; c < n_out; ++c) pre[c] = bias[c];
        const double* z = Z.row_ptr(i);
        std::size_t k = 0;
        for (; k + 3 < n_in; k += 4) {
            const double a0 = z[k];
            const double a1 = z[k + 1];
            const double a2 = z[k + 2];
            const double a3 = z[k + 3];
            const double* __restrict w0 = Wt.row_ptr(k);
            const double* __restrict w1 = Wt.row_ptr(k + 1);
            const double* __restrict w2 = Wt.row_ptr(k + 2);
            const double* __restrict w3 = Wt.row_ptr(k + 3);
            for (std::size_t c = 0; c < n_out; ++c) {
                double acc = pre[c];
                acc += a0 * w0[c];
                acc += a1 * w1[c];
                acc += a2 * w2[c];
                acc += a3 * w3[c];
                pre[c] = acc;
            }
        }
        for (; k < n_in; ++k) {
            const double a = z[k];
            const double* __restrict w = Wt.row_ptr(k);
            for (std::size_t c = 0; c < n_out; ++c) pre[c] += a * w[c];
        }
        double* __restrict p = post.row_ptr(i);
        double* __restrict d = deriv.row_ptr(i);
        if (act == Activation::ReLU) {
            for (std::size_t c = 0; c < n_out; ++c) {
                const double v = pre[c];
                p[c] = v > 0.0 ? v : 0.0;
                d[c] = v > 0.0 ? 1.0 : 0.0;
            }
        } else {
            for (std::size_t c = 0; c < n_out; ++c) pre[c] *= omega0;
            sincos_batch(pre, p, d, n_out);
            for (std::size_t c = 0; c < n_out; ++c) d[c] *= omega0;
        }
    }
}

// dW += sum_i delta[i] (x) Z[i] and db += sum_i delta[i], i strictly
// ascending. Narrow inputs (the coordinate layer) accumulate column-wise so
// the inner loop runs over delta instead of a 2-wide row.
void k_grad_accum(const Tensor2D& delta, const Tensor2D& Z, Tensor2D& dW,
                  std::vector<double>& db, std::vector<double>& scratch) {
    const std::size_t B = delta.rows;
    const std::size_t n_out = delta.cols;
    const std::size_t n_in = Z.cols;
    if (n_in <= 4 && n_out >= 8) {
        scratch.assign(n_in * n_out, 0.0);
        for (std::size_t i = 0; i < B; ++i) {
            const double* __restrict d = delta.row_ptr(i);
            const double* z = Z.row_ptr(i);
            double* __restrict acc = scratch.data();
            for (std::size_t a = 0; a < n_in; ++a, acc += n_out) {
                const double za = z[a];
                for (std::size_t r = 0; r < n_out; ++r) acc[r] += za * d[r];
            }
            double* __restrict bacc = db.data();
            for (std::size_t r = 0; r < n_out; ++r) bacc[r] += d[r];
        }
        for (std::size_t r = 0; r < n_out; ++r)
            for (std::size_t a = 0; a < n_in; ++a)
                dW.at(r, a) += scratch[a * n_out + r];
        return;
    }
    std::size_t i = 0;
    for (; i + 3 < B; i += 4) {
        const double* d0 = delta.row_ptr(i);
        const double* d1 = delta.row_ptr(i + 1);
        const double* d2 = delta.row_ptr(i + 2);
        const double* d3 = delta.row_ptr(i + 3);
        const double* __restrict z0 = Z.row_ptr(i);
        const double* __restrict z1 = Z.row_ptr(i + 1);
        const double* __restrict z2 = Z.row_ptr(i + 2);
        const double* __restrict z3 = Z.row_ptr(i + 3);
        for (std::size_t r = 0; r < n_out; ++r) {
            const double a0 = d0[r];
            const double a1 = d1[r];
            const double a2 = d2[r];
            const double a3 = d3[r];
            double* __restrict gw = dW.row_ptr(r);
            for (std::size_t k = 0; k < n_in; ++k) {
                double acc = gw[k];
                acc += a0 * z0[k];
                acc += a1 * z1[k];
                acc += a2 * z2[k];
                acc += a3 * z3[k];
                gw[k] = acc;
            }
            db[r] += ((a0 + a1) + a2) + a3;
        }
    }
    for (; i < B; ++i) {
        const double* d = delta.row_ptr(i);
        const double* __restrict z = Z.row_ptr(i);
        for (std::size_t r = 0; r < n_out; ++r) {
            const double a = d[r];
            double* __restrict gw = dW.row_ptr(r);
            for (std::size_t k = 0; k < n_in; ++k) gw[k] += a * z[k];
            db[r] += a;
        }
    }
}

// dprev = delta * W (rows independent, reduction over n_out ascending).
// The narrow case (gradients w.r.t. raw coordinates) runs striped dot
// products over a transposed W supplied by the caller.
void k_delta_prev(const Tensor2D& delta, const Tensor2D& W, const Tensor2D& Wt,
                  Tensor2D& dprev) {
    const std::size_t B = delta.rows;
    const std::size_t n_out = W.rows;
    const std::size_t n_in = W.cols;
    ensure(dprev, B, n_in);
    if (n_out <= 4 && n_in >= 8) {
        for (std::size_t i = 0; i < B; ++i) {
            const double* d = delta.row_ptr(i);
            double* __restrict o = dprev.row_ptr(i);
            const double* __restrict w0 = W.row_ptr(0);
            for (std::size_t k = 0; k < n_in; ++k) o[k] = d[0] * w0[k];
            for (std::size_t r = 1; r < n_out; ++r) {
                const double a = d[r];
                const double* __restrict w = W.row_ptr(r);
                for (std::size_t k = 0; k < n_in; ++k) o[k] += a * w[k];
            }
        }
        return;
    }
    if (n_in <= 4 && n_out >= 8) {
        for (std::size_t i = 0; i < B; ++i) {
            const double* __restrict d = delta.row_ptr(i);
            double* o = dprev.row_ptr(i);
            for (std::size_t a = 0; a < n_in; ++a) {
                const double* __restrict wcol = Wt.row_ptr(a);
                double l0 = 0.0, l1 = 0.0, l2 = 0.0, l3 = 0.0;
                std::size_t r = 0;
                for (; r + 3 < n_out; r += 4) {
                    l0 += d[r] * wcol[r];
                    l1 += d[r + 1] * wcol[r + 1];
                    l2 += d[r + 2] * wcol[r + 2];
                    l3 += d[r + 3] * wcol[r + 3];
                }
                double acc = ((l0 + l1) + l2) + l3;
                for (; r < n_out; ++r) acc += d[r] * wcol[r];
                o[a] = acc;
            }
        }
        return;
    }
    for (std::size_t i = 0; i < B; ++i) {
        double* __restrict o = dprev.row_ptr(i);
        for (std::size_t k = 0; k < n_in; ++k) o[k] = 0.0;
        const double* d = delta.row_ptr(i);
        std::size_t r = 0;
        for (; r + 3 < n_out; r += 4) {
            const double a0 = d[r];
            const double a1 = d[r + 1];
            const double a2 = d[r + 2];
            const double a3 = d[r + 3];
            const double* __restrict w0 = W.row_ptr(r);
            const double* __restrict w1 = W.row_ptr(r + 1);
            const double* __restrict w2 = W.row_ptr(r + 2);
            const double* __restrict w3 = W.row_ptr(r + 3);
            for (std::size_t k = 0; k < n_in; ++k) {
                double acc = o[k];
                acc += a0 * w0[k];
                acc += a1 * w1[k];
                acc += a2 * w2[k];
                acc += a3 * w3[k];
                o[k] = acc;
            }
        }
        for (; r < n_out; ++r) {
            const double a = d[r];
            const double* __restrict w = W.row_ptr(r);
            for (std::size_t k = 0; k < n_in; ++k) o[k] += a * w[k];
        }
    }
}

// Lazy Adam over table rows with memoized bias corrections; arithmetic is
// identical to accumulate_and_step, just without the per-row pow calls.
struct TableStepper {
    std::uint64_t cached_t = 0;
    double bc1 = 1.0;
    double bc2 = 1.0;

    void step_row(CoordTable& t, std::size_t row, const double* grad, const AdamConfig& cfg) {
        for (std::size_t a = 0; a < t.d_in; ++a)
            if (!std::isfinite(grad[a]))
                throw NumericError("fit: non-finite table gradient for row " +
                                   std::to_string(row));
        t.steps[row] += 1;
        if (t.steps[row] != cached_t) {
            cached_t = t.steps[row];
            const double tt = static_cast<double>(cached_t);
            bc1 = 1.0 - std::pow(cfg.beta1, tt);
            bc2 = 1.0 - std::pow(cfg.beta2, tt);
        }
        const std::size_t base = row * t.d_in;
        for (std::size_t a = 0; a < t.d_in; ++a) {
            const double g = grad[a];
            double& m = t.m[base + a];
            double& v = t.v[base + a];
            m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
            v = cfg.beta2 * v + (1.0 - cfg.beta2) * g * g;
            t.entries[base + a] -= cfg.lr * (m / bc1) / (std::sqrt(v / bc2) + cfg.eps);
        }
    }
};

// ---- fused trainer --------------------------------------------------------

struct Engine {
    const Backbone& bk;
    const Encoding enc;
    const std::size_t d_in;
    const std::size_t enc_w;
    const std::size_t d_out;

    std::vector<Tensor2D> wt;   // transposed weights, refreshed per step
    Tensor2D coords, encoded;
    std::vector<Tensor2D> post, deriv;
    Tensor2D out, dl, delta, dprev;
    BackboneGrads grads;
    Tensor2D input_grads;
    std::vector<double> argbuf, scratch;

    explicit Engine(const Backbone& bk_)
        : bk(bk_), enc(bk_.spec.encoding), d_in(bk_.spec.d_in),
          enc_w(enc.output_width(bk_.spec.d_in)), d_out(bk_.spec.d_out) {
        wt.resize(bk.layers.size());
        post.resize(bk.layers.size() - 1);
        deriv.resize(bk.layers.size() - 1);
        grads.layers.resize(bk.layers.size());
        for (std::size_t l = 0; l < bk.layers.size(); ++l) {
            grads.layers[l].W = Tensor2D(bk.layers[l].W.rows, bk.layers[l].W.cols);
            grads.layers[l].b.assign(bk.layers[l].b.size(), 0.0);
        }
    }

    void refresh_weights() {
        for (std::size_t l = 0; l < bk.layers.size(); ++l) {
            const Tensor2D& W = bk.layers[l].W;
            ensure(wt[l], W.cols, W.rows);
            for (std::size_t r = 0; r < W.rows; ++r)
                for (std::size_t c = 0; c < W.cols; ++c) wt[l].at(c, r) = W.at(r, c);
        }
    }

    void encode_into(const Tensor2D& src, Tensor2D& dst) {
        const std::size_t B = src.rows;
        ensure(dst, B, enc_w);
        argbuf.resize(B);
        std::vector<double> sv(B), cv(B);
        for (std::size_t c = 0; c < d_in; ++c) {
            double freq = M_PI;
            for (std::size_t k = 0; k < enc.octaves; ++k) {
                for (std::size_t i = 0; i < B; ++i) argbuf[i] = freq * src.at(i, c);
                sincos_batch(argbuf.data(), sv.data(), cv.data(), B);
                const std::size_t col = c * 2 * enc.octaves + 2 * k;
                for (std::size_t i = 0; i < B; ++i) {
                    dst.at(i, col) = sv[i];
                    dst.at(i, col + 1) = cv[i];
                }
                freq *= 2.0;
            }
        }
    }

    // Forward through the net; z0 must hold the encoded input.
    const Tensor2D& run_forward(const Tensor2D& z0) {
        const Tensor2D* z = &z0;
        const std::size_t n_hidden = bk.layers.size() - 1;
        for (std::size_t l = 0; l < n_hidden; ++l) {
            k_affine_act(*z, wt[l], bk.layers[l].b, bk.spec.activation, bk.spec.omega0,
                         post[l], deriv[l], scratch);
            z = &post[l];
        }
        k_affine(*z, bk.layers[n_hidden].W, wt[n_hidden], bk.layers[n_hidden].b, out);
        return out;
    }

    // Backward from dl; z0 must be the same encoded input run_forward saw.
    // Fills grads and, when requested, input_grads w.r.t. the raw coords.
    void run_backward(const Tensor2D& z0, bool need_input_grads) {
        const std::size_t n_layers = bk.layers.size();
        const std::size_t B = dl.rows;
        for (Layer& g : grads.layers) {
            std::fill(g.W.data.begin(), g.W.data.end(), 0.0);
            std::fill(g.b.begin(), g.b.end(), 0.0);
        }
        delta = dl;
        for (std::size_t l = n_layers; l-- > 0;) {
            const Tensor2D& zprev = (l == 0) ? z0 : post[l - 1];
            k_grad_accum(delta, zprev, grads.layers[l].W, grads.layers[l].b, scratch);
            if (l == 0 && !need_input_grads) return;
            k_delta_prev(delta, bk.layers[l].W, wt[l], dprev);
            if (l > 0) {
                const double* __restrict dv = deriv[l - 1].data.data();
                double* __restrict dp = dprev.data.data();
                for (std::size_t i = 0; i < dprev.size(); ++i) dp[i] *= dv[i];
            }
            std::swap(delta, dprev);
        }
        // delta now holds d/d(encoded input)
        if (enc.kind == Encoding::Kind::None) {
            std::swap(input_grads, delta);
        } else {
            ensure(input_grads, B, d_in);
            for (std::size_t i = 0; i < B; ++i) {
                const double* gd = delta.row_ptr(i);
                const double* ef = z0.row_ptr(i);
                double* og = input_grads.row_ptr(i);
                for (std::size_t c = 0; c < d_in; ++c) {
                    double acc = 0.0;
                    double freq = M_PI;
                    for (std::size_t k = 0; k < enc.octaves; ++k) {
                        const std::size_t col = c * 2 * enc.octaves + 2 * k;
                        acc += freq * (gd[col] * ef[col + 1] - gd[col + 1] * ef[col]);
                        freq *= 2.0;
                    }
                    og[c] = acc;
                }
            }
        }
    }
};

} // namespace

MetricsLog fit(Model& model, FitState& fs, const SampleSet& data, const TrainConfig& cfg) {
    validate_sample_set(data);
    if (cfg.process != Process::Identity)
        throw ConfigError("fit: only the identity process is handled here; use reconstruct() "
                          "for lensless fitting");
    if (cfg.epochs == 0) throw ConfigError("fit: epochs must be >= 1");
    if (!(cfg.lr_net > 0.0)) throw ConfigError("fit: lr_net must be positive");

    Backbone& bk = model.backbone;
    const std::size_t n = data.element_count();
    const std::size_t d_out = data.channels;
    if (bk.spec.d_out != d_out)
        throw ConfigError("fit: backbone d_out " + std::to_string(bk.spec.d_out) +
                          " != signal channels " + std::to_string(d_out));

    CoordTable* table = nullptr;
    if (cfg.use_table) {
        if (!model.table) throw ConfigError("fit: use_table set but model has no table");
        table = &*model.table;
        if (table->n != n)
            throw ConfigError("fit: table length " + std::to_string(table->n) +
                              " != element count " + std::to_string(n));
        if (table->d_in != bk.spec.d_in)
            throw ConfigError("fit: table width != backbone d_in");
        if (table->d_in != data.rank())
            throw ConfigError("fit: table width != signal rank");
    } else {
        if (bk.spec.d_in != data.rank())
            throw ConfigError("fit: backbone d_in != signal rank");
    }

    const double lr_table = cfg.lr_table < 0.0 ? cfg.lr_net : cfg.lr_table;
    const AdamConfig net_adam{cfg.lr_net};
    const AdamConfig table_adam{lr_table};

    if (fs.weight_state.empty()) {
        for (const Layer& l : bk.layers) {
            fs.weight_state.emplace_back(l.W.size());
            fs.bias_state.emplace_back(l.b.size());
        }
    } else if (fs.weight_state.size() != bk.layers.size()) {
        throw ConfigError("fit: optimizer state does not match backbone depth");
    }

    const std::vector<std::uint32_t> acc_order = target_sorted_order(data);
    const std::size_t d_in = bk.spec.d_in;

    Engine eng(bk);

    // Targets gathered in reduction order; baseline coordinates (and their
    // encoding) are fixed across epochs.
    Tensor2D targets(n, d_out);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t c = 0; c < d_out; ++c) targets.at(i, c) = data.at(acc_order[i], c);
    Tensor2D lattice, lattice_encoded;
    const bool full_batch = cfg.batch_size == 0 || cfg.batch_size >= n;
    if (!cfg.use_table && full_batch) {
        lattice = Tensor2D(n, d_in);
        for (std::size_t i = 0; i < n; ++i)
            lattice_row(data.extents, acc_order[i], lattice.row_ptr(i));
        if (eng.enc.kind != Encoding::Kind::None) eng.encode_into(lattice, lattice_encoded);
    }
    const std::size_t bsz = full_batch ? n : cfg.batch_size;

    const auto t0 = std::chrono::steady_clock::now();
    MetricsLog log;

    struct EpochStats {
        double se = 0.0;
        double se_clamped = 0.0;
    };

    Tensor2D batch_targets;
    TableStepper stepper;
    auto eval_batch = [&](std::span<const std::uint32_t> rows, bool update, EpochStats& stats) {
        const std::size_t B = rows.size();
        const Tensor2D* y = &targets;
        if (!(full_batch && !cfg.use_table)) {
            ensure(eng.coords, B, d_in);
            if (cfg.use_table) {
                for (std::size_t i = 0; i < B; ++i) {
                    const double* src = table->entries.data() + rows[i] * d_in;
                    std::copy(src, src + d_in, eng.coords.row_ptr(i));
                }
            } else {
                for (std::size_t i = 0; i < B; ++i)
                    lattice_row(data.extents, rows[i], eng.coords.row_ptr(i));
            }
        }
        if (!full_batch) {
            ensure(batch_targets, B, d_out);
            for (std::size_t i = 0; i < B; ++i)
                for (std::size_t c = 0; c < d_out; ++c)
                    batch_targets.at(i, c) = data.at(rows[i], c);
            y = &batch_targets;
        }

        const Tensor2D* z0;
        if (full_batch && !cfg.use_table) {
            z0 = eng.enc.kind == Encoding::Kind::None ? &lattice : &lattice_encoded;
        } else if (eng.enc.kind == Encoding::Kind::None) {
            z0 = &eng.coords;
        } else {
            eng.encode_into(eng.coords, eng.encoded);
            z0 = &eng.encoded;
        }

        if (update) eng.refresh_weights();
        const Tensor2D& out = eng.run_forward(*z0);

        ensure(eng.dl, B, d_out);
        const double scale = 2.0 / static_cast<double>(B * d_out);
        for (std::size_t i = 0; i < B * d_out; ++i) {
            const double r = out.data[i] - y->data[i];
            stats.se += r * r;
            const double rc = std::clamp(out.data[i], 0.0, 1.0) - y->data[i];
            stats.se_clamped += rc * rc;
            eng.dl.data[i] = scale * r;
        }
        if (!update) return;

        eng.run_backward(*z0, /*need_input_grads=*/cfg.use_table && lr_table > 0.0);
        for (std::size_t l = 0; l < bk.layers.size(); ++l) {
            adam_step(bk.layers[l].W.data, eng.grads.layers[l].W.data, fs.weight_state[l],
                      net_adam);
            adam_step(bk.layers[l].b, eng.grads.layers[l].b, fs.bias_state[l], net_adam);
        }
        if (cfg.use_table && lr_table > 0.0) {
            for (std::size_t i = 0; i < B; ++i)
                stepper.step_row(*table, rows[i], eng.input_grads.row_ptr(i), table_adam);
        }
    };

    auto log_row = [&](std::size_t epoch, const EpochStats& stats) {
        const double denom = static_cast<double>(n * d_out);
        const double mse_cl = stats.se_clamped / denom;
        const double p = mse_cl == 0.0 ? std::numeric_limits<double>::infinity()
                                       : -10.0 * std::log10(mse_cl);
        log.rows.push_back({epoch, stats.se / denom, p, now_ms(t0)});
    };

    std::vector<std::uint32_t> batch_ids;
    for (std::size_t e = 0; e < cfg.epochs; ++e) {
        EpochStats stats;
        if (full_batch) {
            eval_batch(acc_order, /*update=*/true, stats);
        } else {
            Rng shuffle_rng = Rng(cfg.seed).fork(0x9A7C0 + fs.epoch + e);
            batch_ids = seeded_permutation(shuffle_rng, n);
            for (std::size_t start = 0; start < n; start += bsz) {
                const std::size_t stop = std::min(start + bsz, n);
                std::sort(batch_ids.begin() + start, batch_ids.begin() + stop);
                eval_batch({batch_ids.data() + start, stop - start}, true, stats);
            }
        }
        if (!std::isfinite(stats.se))
            throw NumericError("fit: loss diverged at epoch " + std::to_string(fs.epoch + e));
        if (e % cfg.log_every == 0) log_row(fs.epoch + e, stats);
    }

    // One tail evaluation at the trained parameters.
    EpochStats stats;
    eng.refresh_weights();
    eval_batch(acc_order, /*update=*/false, stats);
    log_row(fs.epoch + cfg.epochs, stats);
    fs.epoch += cfg.epochs;
    return log;
}

MetricsLog fit(Model& model, const SampleSet& data, const TrainConfig& cfg) {
    FitState fs;
    return fit(model, fs, data, cfg);
}

Grid render_signal(const Model& model, const std::vector<std::size_t>& extents) {
    std::size_t n = 1;
    for (std::size_t e : extents) n *= e;
    if (extents.empty() || n == 0) throw ConfigError("render_signal: empty extents");

    const std::size_t d_in = model.backbone.spec.d_in;
    Tensor2D coords(n, d_in);
    if (model.table) {
        if (model.table->n != n)
            throw ConfigError("render_signal: table length != element count");
        std::copy(model.table->entries.begin(), model.table->entries.end(), coords.data.begin());
    } else {
        if (d_in != extents.size())
            throw ConfigError("render_signal: backbone d_in != rank");
        for (std::size_t i = 0; i < n; ++i) lattice_row(extents, i, coords.row_ptr(i));
    }
    Tensor2D out = forward(model.backbone, coords);
    Grid g(extents, model.backbone.spec.d_out);
    for (std::size_t i = 0; i < out.size(); ++i)
        g.values[i] = std::clamp(out.data[i], 0.0, 1.0);
    return g;
}

Rearranged rearrange(const SampleSet& data, Order order, std::uint64_t seed) {
    const std::size_t n = data.element_count();
    Rearranged out;
    out.perm.resize(n);
    std::iota(out.perm.begin(), out.perm.end(), 0u);

    switch (order) {
    case Order::Identity:
        break;
    case Order::SortedByIntensity:
        std::stable_sort(out.perm.begin(), out.perm.end(),
                         [&](std::uint32_t a, std::uint32_t b) {
                             return luminance(data, a) < luminance(data, b);
                         });
        break;
    case Order::Random: {
        Rng rng = Rng(seed).fork(0x5EA7);
        out.perm = seeded_permutation(rng, n);
        break;
    }
    }

    out.data = data;
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t c = 0; c < data.channels; ++c)
            out.data.at(j, c) = data.at(out.perm[j], c);
    return out;
}

InvarianceReport invariance_report(const SampleSet& data, const BackboneSpec& spec,
                                   const TrainConfig& cfg, std::span<const Order> orders) {
    if (!cfg.use_table) throw ConfigError("invariance_report: cfg.use_table must be true");
    if (orders.empty()) throw ConfigError("invariance_report: need at least one order");
    validate_sample_set(data);
    if (spec.d_in != data.rank() || spec.d_out != data.channels)
        throw ConfigError("invariance_report: backbone spec does not match signal");

    const std::size_t n = data.element_count();
    InvarianceReport rep;
    rep.orders.assign(orders.begin(), orders.end());

    // aligned[k][i*d_in+a]: table entry of run k for original element i
    std::vector<std::vector<double>> aligned;
    for (Order order : orders) {
        Rearranged r = rearrange(data, order, cfg.seed);

        Rng net_rng = Rng(cfg.seed).fork(0xB0DE);
        Rng table_rng = Rng(cfg.seed).fork(0x7AB1E);
        Model model;
        model.backbone = init_backbone(spec, net_rng);
        model.table = new_table(n, spec.d_in, TableInit::Zero, 0.0, {}, table_rng);

        MetricsLog log = fit(model, r.data, cfg);
        rep.psnr_db.push_back(log.final_row().psnr_db);

        std::vector<double> al(n * spec.d_in);
        for (std::size_t j = 0; j < n; ++j) {
            const double* src = model.table->entries.data() + j * spec.d_in;
            std::copy(src, src + spec.d_in, al.data() + r.perm[j] * spec.d_in);
        }
        aligned.push_back(std::move(al));
    }

    for (std::size_t a = 0; a < aligned.size(); ++a) {
        for (std::size_t b = a + 1; b < aligned.size(); ++b) {
            rep.max_psnr_gap_db =
                std::max(rep.max_psnr_gap_db, std::abs(rep.psnr_db[a] - rep.psnr_db[b]));
            for (std::size_t i = 0; i < aligned[a].size(); ++i)
                rep.max_table_residual =
                    std::max(rep.max_table_residual, std::abs(aligned[a][i] - aligned[b][i]));
        }
    }
    return rep;
}

} // namespace diner
