#include "diner/lensless.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <string>

namespace diner {

void OpticsConfig::validate() const {
    if (!(wavelength_m > 0.0)) throw ConfigError("optics: wavelength must be positive");
    if (!(pixel_pitch_m > 0.0)) throw ConfigError("optics: pixel pitch must be positive");
    if (heights_m.empty()) throw ConfigError("optics: need at least one height");
    for (std::size_t i = 0; i < heights_m.size(); ++i)
        for (std::size_t j = i + 1; j < heights_m.size(); ++j)
            if (heights_m[i] == heights_m[j])
                throw ConfigError("optics: heights must be distinct");
}

namespace {

// Fresnel transfer-function sampling limit: the quadratic phase must change
// by less than pi between adjacent frequency samples, i.e.
// |z| <= extent * pitch^2 / lambda.
void check_sampling(const ComplexGrid& field, double z_m, const OpticsConfig& o) {
    const double ext = static_cast<double>(std::min(field.height, field.width));
    const double z_max = ext * o.pixel_pitch_m * o.pixel_pitch_m / o.wavelength_m;
    if (std::abs(z_m) > z_max)
        throw SamplingError("propagate: |z|=" + std::to_string(std::abs(z_m)) +
                            " m exceeds the sampling limit " + std::to_string(z_max) + " m");
}

double bin_freq(std::size_t k, std::size_t n, double pitch) {
    const double idx = k < n / 2 ? static_cast<double>(k)
                                 : static_cast<double>(k) - static_cast<double>(n);
    return idx / (static_cast<double>(n) * pitch);
}

ComplexGrid apply_transfer(const ComplexGrid& field, double z_m, const OpticsConfig& o,
                           bool conjugate) {
    check_sampling(field, z_m, o);
    ComplexGrid F = fft2(field, /*inverse=*/false);
    const double lam = o.wavelength_m;
    const double global = 2.0 * M_PI * z_m / lam;
    for (std::size_t ky = 0; ky < field.height; ++ky) {
        const double fy = bin_freq(ky, field.height, o.pixel_pitch_m);
        for (std::size_t kx = 0; kx < field.width; ++kx) {
            const double fx = bin_freq(kx, field.width, o.pixel_pitch_m);
            double phase = global - M_PI * lam * z_m * (fx * fx + fy * fy);
            if (conjugate) phase = -phase;
            const double hr = std::cos(phase);
            const double hi = std::sin(phase);
            const std::size_t i = ky * field.width + kx;
            const double re = F.re[i] * hr - F.im[i] * hi;
            const double im = F.re[i] * hi + F.im[i] * hr;
            F.re[i] = re;
            F.im[i] = im;
        }
    }
    return fft2(F, /*inverse=*/true);
}

} // namespace

ComplexGrid propagate(const ComplexGrid& field, double z_m, const OpticsConfig& optics) {
    return apply_transfer(field, z_m, optics, /*conjugate=*/false);
}

ComplexGrid propagate_adjoint(const ComplexGrid& grad_out, double z_m,
                              const OpticsConfig& optics) {
    return apply_transfer(grad_out, z_m, optics, /*conjugate=*/true);
}

namespace {

void apply_illumination(ComplexGrid& field, const OpticsConfig& o, bool conjugate) {
    if (o.illumination.size() == 0) return; // all-ones default
    if (o.illumination.height != field.height || o.illumination.width != field.width)
        throw ShapeError("optics: illumination extents do not match the field");
    for (std::size_t i = 0; i < field.size(); ++i) {
        const double pr = o.illumination.re[i];
        const double pi_ = conjugate ? -o.illumination.im[i] : o.illumination.im[i];
        const double re = field.re[i] * pr - field.im[i] * pi_;
        const double im = field.re[i] * pi_ + field.im[i] * pr;
        field.re[i] = re;
        field.im[i] = im;
    }
}

} // namespace

MeasurementSet simulate(const ComplexGrid& object, const OpticsConfig& optics) {
    optics.validate();
    ComplexGrid v = object;
    apply_illumination(v, optics, /*conjugate=*/false);
    MeasurementSet out;
    for (double z : optics.heights_m) {
        ComplexGrid u = propagate(v, z, optics);
        Grid img({object.height, object.width}, 1);
        for (std::size_t i = 0; i < u.size(); ++i)
            img.values[i] = u.re[i] * u.re[i] + u.im[i] * u.im[i];
        out.intensities.push_back(std::move(img));
    }
    return out;
}

double measurement_psnr(const MeasurementSet& reference, const MeasurementSet& test) {
    if (reference.intensities.size() != test.intensities.size())
        throw ShapeError("measurement_psnr: stacks differ in height count");
    double peak = 0.0;
    double se = 0.0;
    std::size_t count = 0;
    for (std::size_t k = 0; k < reference.intensities.size(); ++k) {
        const Grid& a = reference.intensities[k];
        const Grid& b = test.intensities[k];
        if (!a.same_shape(b)) throw ShapeError("measurement_psnr: extents differ");
        for (std::size_t i = 0; i < a.values.size(); ++i) {
            peak = std::max(peak, a.values[i]);
            const double d = a.values[i] - b.values[i];
            se += d * d;
            ++count;
        }
    }
    const double mse = se / static_cast<double>(count);
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    if (peak == 0.0) return -std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(peak * peak / mse);
}

ComplexGrid field_from_outputs(const Tensor2D& outputs, std::size_t height, std::size_t width) {
    if (outputs.cols != 2 || outputs.rows != height * width)
        throw ShapeError("field_from_outputs: expected N x 2 outputs");
    ComplexGrid field(height, width);
    std::vector<double> ph(outputs.rows), sv(outputs.rows), cv(outputs.rows);
    for (std::size_t i = 0; i < outputs.rows; ++i) ph[i] = M_PI * outputs.at(i, 1);
    sincos_batch(ph.data(), sv.data(), cv.data(), outputs.rows);
    for (std::size_t i = 0; i < outputs.rows; ++i) {
        const double amp = 1.0 / (1.0 + std::exp(-outputs.at(i, 0)));
        field.re[i] = amp * cv[i];
        field.im[i] = amp * sv[i];
    }
    return field;
}

PhysicsLossResult physics_loss(const Tensor2D& outputs, const MeasurementSet& meas,
                               const OpticsConfig& optics) {
    optics.validate();
    if (meas.intensities.size() != optics.heights_m.size())
        throw ShapeError("physics_loss: one measurement per height required");
    const std::size_t h = meas.intensities[0].extents[0];
    const std::size_t w = meas.intensities[0].extents[1];
    const std::size_t n = h * w;
    const std::size_t n_z = optics.heights_m.size();

    PhysicsLossResult res;
    res.field = field_from_outputs(outputs, h, w);

    ComplexGrid v = res.field;
    apply_illumination(v, optics, /*conjugate=*/false);

    const double denom = static_cast<double>(n_z * n);
    ComplexGrid g_v(h, w);
    for (std::size_t k = 0; k < n_z; ++k) {
        const Grid& target = meas.intensities[k];
        if (target.rank() != 2 || target.extents[0] != h || target.extents[1] != w)
            throw ShapeError("physics_loss: measurement extents mismatch");
        const double z = optics.heights_m[k];
        ComplexGrid u = propagate(v, z, optics);
        ComplexGrid g_u(h, w);
        for (std::size_t i = 0; i < n; ++i) {
            const double sim = u.re[i] * u.re[i] + u.im[i] * u.im[i];
            const double r = sim - target.values[i];
            res.loss += r * r / denom;
            const double c = 4.0 * r / denom; // d loss / d sim * d sim / d u
            g_u.re[i] = c * u.re[i];
            g_u.im[i] = c * u.im[i];
        }
        ComplexGrid back = propagate_adjoint(g_u, z, optics);
        for (std::size_t i = 0; i < n; ++i) {
            g_v.re[i] += back.re[i];
            g_v.im[i] += back.im[i];
        }
    }
    apply_illumination(g_v, optics, /*conjugate=*/true);

    // Chain to the raw outputs: amplitude = sigmoid(o0), phase = pi * o1.
    res.d_outputs = Tensor2D(n, 2);
    for (std::size_t i = 0; i < n; ++i) {
        const double re = res.field.re[i];
        const double im = res.field.im[i];
        const double amp = std::hypot(re, im);
        const double cosp = amp > 0.0 ? re / amp : 1.0;
        const double sinp = amp > 0.0 ? im / amp : 0.0;
        const double d_amp = cosp * g_v.re[i] + sinp * g_v.im[i];
        const double d_phase = amp * (cosp * g_v.im[i] - sinp * g_v.re[i]);
        res.d_outputs.at(i, 0) = d_amp * amp * (1.0 - amp); // sigmoid'
        res.d_outputs.at(i, 1) = d_phase * M_PI;
    }
    return res;
}

ReconstructResult reconstruct(const MeasurementSet& meas, const OpticsConfig& optics,
                              const BackboneSpec& spec, const TrainConfig& cfg) {
    optics.validate();
    if (meas.intensities.empty() || meas.intensities.size() != optics.heights_m.size())
        throw ConfigError("reconstruct: one measurement per configured height required");
    if (meas.intensities[0].rank() != 2)
        throw ShapeError("reconstruct: measurements must be 2D");
    if (!cfg.use_table) throw ConfigError("reconstruct: cfg.use_table must be set");
    if (spec.d_in != 2 || spec.d_out != 2)
        throw ConfigError("reconstruct: backbone must map 2 coordinates to (amplitude, phase)");
    if (cfg.epochs == 0) throw ConfigError("reconstruct: epochs must be >= 1");
    for (const Grid& m : meas.intensities)
        for (double v : m.values)
            if (!(v >= 0.0) || !std::isfinite(v))
                throw NumericError("reconstruct: measurements must be finite and >= 0");

    ReconstructResult res;
    if (meas.intensities.size() < 2)
        res.warnings.push_back("single-height stack: the phase problem is ill-posed, "
                               "reconstruction may not be unique");

    const std::size_t h = meas.intensities[0].extents[0];
    const std::size_t w = meas.intensities[0].extents[1];
    const std::size_t n = h * w;

    Rng net_rng = Rng(cfg.seed).fork(0xB0DE);
    Rng table_rng = Rng(cfg.seed).fork(0x7AB1E);
    res.model.backbone = init_backbone(spec, net_rng);
    res.model.table = new_table(n, 2, TableInit::Uniform, 1e-4, {}, table_rng);
    CoordTable& table = *res.model.table;

    FitState fs;
    for (const Layer& l : res.model.backbone.layers) {
        fs.weight_state.emplace_back(l.W.size());
        fs.bias_state.emplace_back(l.b.size());
    }
    const double lr_table = cfg.lr_table < 0.0 ? cfg.lr_net : cfg.lr_table;
    const AdamConfig net_adam{cfg.lr_net};
    const AdamConfig table_adam{lr_table};

    const auto t0 = std::chrono::steady_clock::now();
    auto elapsed_ms = [&] {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
            .count();
    };

    Tensor2D coords(n, 2);
    PhysicsLossResult pl;
    auto epoch_pass = [&](bool update) {
        std::copy(table.entries.begin(), table.entries.end(), coords.data.begin());
        ForwardTrace trace;
        Tensor2D out = forward(res.model.backbone, coords, update ? &trace : nullptr);
        pl = physics_loss(out, meas, optics);
        if (!update) return;
        BackwardResult back = backward(res.model.backbone, trace, pl.d_outputs);
        for (std::size_t l = 0; l < res.model.backbone.layers.size(); ++l) {
            adam_step(res.model.backbone.layers[l].W.data, back.grads.layers[l].W.data,
                      fs.weight_state[l], net_adam);
            adam_step(res.model.backbone.layers[l].b, back.grads.layers[l].b, fs.bias_state[l],
                      net_adam);
        }
        if (lr_table > 0.0)
            for (std::size_t i = 0; i < n; ++i)
                accumulate_and_step(table, i, {back.input_grads.row_ptr(i), 2}, table_adam);
    };

    auto log_row = [&](std::size_t epoch) {
        MeasurementSet sim = simulate(pl.field, optics);
        res.log.rows.push_back({epoch, pl.loss, measurement_psnr(meas, sim), elapsed_ms()});
    };

    for (std::size_t e = 0; e < cfg.epochs; ++e) {
        epoch_pass(/*update=*/true);
        if (!std::isfinite(pl.loss))
            throw NumericError("reconstruct: loss diverged at epoch " + std::to_string(e));
        if (e % cfg.log_every == 0) log_row(e);
    }
    epoch_pass(/*update=*/false);
    log_row(cfg.epochs);

    res.field = pl.field;
    res.amplitude = Grid({h, w}, 1);
    res.phase = Grid({h, w}, 1);
    for (std::size_t i = 0; i < n; ++i) {
        res.amplitude.values[i] = std::hypot(res.field.re[i], res.field.im[i]);
        res.phase.values[i] = std::atan2(res.field.im[i], res.field.re[i]);
    }
    return res;
}

void permittivity_to_ri(const PermittivityContrast& p, double n0, Grid& n_re, Grid& n_im) {
    if (!(n0 > 0.0)) throw ConfigError("permittivity_to_ri: n0 must be positive");
    if (!p.re.same_shape(p.im)) throw ShapeError("permittivity_to_ri: re/im grids differ");
    n_re = Grid(p.re.extents, p.re.channels);
    n_im = Grid(p.re.extents, p.re.channels);
    for (std::size_t i = 0; i < p.re.values.size(); ++i) {
        const double a = n0 * n0 + p.re.values[i];
        const double b = p.im.values[i];
        const double root = std::sqrt(a * a + b * b);
        const double re = std::sqrt(0.5 * (a + root));
        const double im = b == 0.0 ? 0.0 : b / (2.0 * re);
        if (!std::isfinite(re) || !std::isfinite(im))
            throw NumericError("permittivity_to_ri: non-finite result at element " +
                               std::to_string(i));
        n_re.values[i] = re;
        n_im.values[i] = im;
    }
}

} // namespace diner
