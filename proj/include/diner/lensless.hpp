#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "diner/grid.hpp"
#include "diner/numerics.hpp"
#include "diner/training.hpp"

namespace diner {

/// Multi-height lensless acquisition geometry. An empty illumination means
/// uniform plane-wave illumination (all ones).
struct OpticsConfig {
    double wavelength_m = 532e-9;
    double pixel_pitch_m = 4.4e-6;
    std::vector<double> heights_m = {1.0e-3, 1.5e-3, 2.0e-3};
    ComplexGrid illumination;

    void validate() const;
};

/// One captured intensity image per configured height, same extents.
struct MeasurementSet {
    std::vector<Grid> intensities;
};

/// Complex permittivity contrast of a specimen against the background medium.
struct PermittivityContrast {
    Grid re;
    Grid im; // >= 0 for absorbing media
};

/// Fresnel free-space propagation over distance z via the frequency-domain
/// transfer function H = exp(i 2 pi z / lambda) * exp(-i pi lambda z (fx^2+fy^2)).
/// |H| == 1, so the intensity sum is conserved. Extents must be powers of two
/// and |z| must respect the sampling limit |z| <= extent * pitch^2 / lambda.
ComplexGrid propagate(const ComplexGrid& field, double z_m, const OpticsConfig& optics);

/// Gradient backprop through propagate: multiplication by the conjugate
/// transfer function, which equals propagation over -z.
ComplexGrid propagate_adjoint(const ComplexGrid& grad_out, double z_m, const OpticsConfig& optics);

/// Per height z: I_z = |propagate(P .* O, z)|^2.
MeasurementSet simulate(const ComplexGrid& object, const OpticsConfig& optics);

/// 10*log10(peak^2/MSE) with peak taken over the reference set.
double measurement_psnr(const MeasurementSet& reference, const MeasurementSet& test);

/// Network-output parameterization of the specimen field:
/// amplitude = sigmoid(out0), phase = pi * out1, O = amplitude * exp(i*phase).
ComplexGrid field_from_outputs(const Tensor2D& outputs, std::size_t height, std::size_t width);

/// Physics loss and its gradients for one model state: mean over heights and
/// pixels of (|propagate(P .* O, z)|^2 - I_z)^2. Returns the loss, the
/// gradient w.r.t. the raw network outputs (amplitude/phase channels), and
/// the current field.
struct PhysicsLossResult {
    double loss = 0.0;
    Tensor2D d_outputs; // N x 2
    ComplexGrid field;
};
PhysicsLossResult physics_loss(const Tensor2D& outputs, const MeasurementSet& meas,
                               const OpticsConfig& optics);

struct ReconstructResult {
    ComplexGrid field;
    Grid amplitude; // H x W in [0,1]
    Grid phase;     // H x W, radians
    MetricsLog log; // loss and measurement PSNR per logged epoch
    Model model;
    std::vector<std::string> warnings;
};

/// DINER reconstruction of the complex specimen field from a multi-height
/// measurement stack. cfg.use_table must be set; the table is one row per
/// pixel, Uniform(1e-4) initialized. Fewer than two heights is ill-posed and
/// only warns.
ReconstructResult reconstruct(const MeasurementSet& meas, const OpticsConfig& optics,
                              const BackboneSpec& spec, const TrainConfig& cfg);

/// Permittivity contrast to refractive index:
/// n_re = sqrt(((n0^2+de_re) + sqrt((n0^2+de_re)^2 + de_im^2)) / 2),
/// n_im = de_im / (2 n_re).
void permittivity_to_ri(const PermittivityContrast& p, double n0, Grid& n_re, Grid& n_im);

} // namespace diner
