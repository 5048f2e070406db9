// diner: coordinate-table INR fitting, disorder-invariance checks, spectral
// analysis, and multi-height lensless reconstruction.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "diner/checkpoint.hpp"
#include "diner/image_io.hpp"
#include "diner/lensless.hpp"
#include "diner/spectral.hpp"
#include "diner/synth.hpp"
#include "diner/training.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace diner;

namespace {

// exit codes, also listed in --help
constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;
constexpr int kExitConfig = 4;
constexpr int kExitNumeric = 5;
constexpr int kExitTolerance = 6;
constexpr int kExitFormat = 7;

constexpr const char* kExitTable =
    "Exit codes:\n"
    "  0  success\n"
    "  2  command-line usage error\n"
    "  3  I/O failure (missing or unwritable files)\n"
    "  4  invalid configuration\n"
    "  5  numeric failure (divergence, non-finite data)\n"
    "  6  invariance tolerance exceeded\n"
    "  7  malformed file (image, checkpoint, or manifest)\n";

struct ModelFlags {
    std::string backbone = "mlp";
    std::size_t width = 64;
    std::size_t depth = 2;
    std::string encoding = "none";
    std::size_t octaves = 10;
    double omega0 = 30.0;
    bool diner = false;
    std::string table_init = "uniform";
    double table_scale = 1e-4;
};

struct TrainFlags {
    std::size_t epochs = 3000;
    std::size_t batch = 0;
    double lr = -1.0; // negative = pick by backbone
    double lr_table = -1.0;
    std::uint64_t seed = 0;
    std::size_t log_every = 100;
    int threads = 1;
};

void add_model_flags(CLI::App* cmd, ModelFlags& mf, bool with_diner = true) {
    cmd->add_option("--backbone", mf.backbone, "Backbone activation: mlp (ReLU) or siren")
        ->check(CLI::IsMember({"mlp", "siren"}));
    cmd->add_option("--width", mf.width, "Hidden layer width");
    cmd->add_option("--depth", mf.depth, "Number of hidden layers");
    cmd->add_option("--encoding", mf.encoding, "Input encoding: none or pe")
        ->check(CLI::IsMember({"none", "pe"}));
    cmd->add_option("--octaves", mf.octaves, "Positional-encoding octaves");
    cmd->add_option("--omega0", mf.omega0, "Sine activation frequency");
    if (with_diner) {
        cmd->add_flag("--diner", mf.diner, "Learn a per-element coordinate table");
        cmd->add_option("--table-init", mf.table_init, "Table init: zero, grid, or uniform")
            ->check(CLI::IsMember({"zero", "grid", "uniform"}));
        cmd->add_option("--table-scale", mf.table_scale, "Uniform table init half-range");
    }
}

void add_train_flags(CLI::App* cmd, TrainFlags& tf) {
    cmd->add_option("--epochs", tf.epochs, "Training epochs");
    cmd->add_option("--batch", tf.batch, "Mini-batch size (0 = full batch)");
    cmd->add_option("--lr", tf.lr, "Network learning rate (default 1e-3 mlp, 1e-4 siren)");
    cmd->add_option("--lr-table", tf.lr_table,
                    "Table learning rate (default: same as --lr; 0 freezes)");
    cmd->add_option("--seed", tf.seed, "RNG seed");
    cmd->add_option("--log-every", tf.log_every, "Metrics row stride in epochs");
    cmd->add_option("--threads", tf.threads, "Worker cap (compute is single-threaded)");
}

BackboneSpec make_spec(const ModelFlags& mf, std::size_t d_in, std::size_t d_out) {
    BackboneSpec spec;
    spec.d_in = d_in;
    spec.d_out = d_out;
    spec.width = mf.width;
    spec.depth = mf.depth;
    spec.activation = mf.backbone == "siren" ? Activation::Sine : Activation::ReLU;
    spec.omega0 = mf.omega0;
    spec.encoding = mf.encoding == "pe" ? Encoding::fourier(mf.octaves) : Encoding::none();
    if (mf.backbone == "siren" && mf.encoding == "pe")
        std::cerr << "warning: positional encoding with a siren backbone is unusual; "
                     "proceeding\n";
    return spec;
}

TableInit parse_table_init(const std::string& s) {
    if (s == "zero") return TableInit::Zero;
    if (s == "grid") return TableInit::Grid;
    return TableInit::Uniform;
}

double pick_lr(const TrainFlags& tf, const BackboneSpec& spec) {
    return tf.lr > 0.0 ? tf.lr : default_lr(spec.activation);
}

TrainConfig make_train_config(const TrainFlags& tf, const BackboneSpec& spec, bool use_table) {
    TrainConfig cfg;
    cfg.epochs = tf.epochs;
    cfg.batch_size = tf.batch;
    cfg.lr_net = pick_lr(tf, spec);
    cfg.lr_table = tf.lr_table;
    cfg.seed = tf.seed;
    cfg.use_table = use_table;
    cfg.log_every = tf.log_every;
    cfg.threads = std::max(tf.threads, 1);
    return cfg;
}

Model build_model(const ModelFlags& mf, const BackboneSpec& spec, std::uint64_t seed,
                  const std::vector<std::size_t>& extents) {
    Rng net_rng = Rng(seed).fork(0xB0DE);
    Model m;
    m.backbone = init_backbone(spec, net_rng);
    if (mf.diner) {
        std::size_t n = 1;
        for (std::size_t e : extents) n *= e;
        Rng table_rng = Rng(seed).fork(0x7AB1E);
        m.table = new_table(n, spec.d_in, parse_table_init(mf.table_init), mf.table_scale,
                            extents, table_rng);
    }
    return m;
}

void write_metrics(const fs::path& path, const MetricsLog& log) {
    std::ostringstream ss;
    write_csv(log, ss);
    write_file_atomic(path, ss.str());
}

Grid load_signal(const fs::path& input) {
    if (input.extension() == ".json") return read_volume(input);
    return read_image(input);
}

void write_reconstruction(const fs::path& out_dir, const Grid& recon) {
    if (recon.rank() == 3) {
        write_volume(out_dir / "recon.json", recon);
    } else {
        write_image(out_dir / (recon.channels == 3 ? "recon.ppm" : "recon.pgm"), recon);
    }
}

Grid pad_pow2(const Grid& img, std::vector<std::size_t>& original) {
    original = img.extents;
    std::size_t h = 1, w = 1;
    while (h < img.extents[0]) h <<= 1;
    while (w < img.extents[1]) w <<= 1;
    if (h == img.extents[0] && w == img.extents[1]) return img;
    Grid out({h, w}, img.channels, 0.0);
    for (std::size_t y = 0; y < img.extents[0]; ++y)
        for (std::size_t x = 0; x < img.extents[1]; ++x)
            for (std::size_t c = 0; c < img.channels; ++c)
                out.at(y * w + x, c) = img.at(y * img.extents[1] + x, c);
    return out;
}

// RunConfig: JSON mirror of the fit flags. Unknown keys are rejected and all
// paths are validated before training starts.
void apply_run_config(const fs::path& path, CLI::App* cmd, std::string& input,
                      std::string& out_dir, ModelFlags& mf, TrainFlags& tf) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw FormatError("run config: " + std::string(e.what()));
    }
    const auto has_flag = [&](const char* name) { return cmd->count(name) > 0; };
    for (const auto& [key, value] : j.items()) {
        try {
            if (key == "input") {
                if (input.empty()) input = value.get<std::string>();
            } else if (key == "out") {
                if (!has_flag("--out")) out_dir = value.get<std::string>();
            } else if (key == "backbone") {
                if (!has_flag("--backbone")) mf.backbone = value.get<std::string>();
                if (mf.backbone != "mlp" && mf.backbone != "siren")
                    throw ConfigError("run config: backbone must be mlp or siren");
            } else if (key == "width") {
                if (!has_flag("--width")) mf.width = value.get<std::size_t>();
            } else if (key == "depth") {
                if (!has_flag("--depth")) mf.depth = value.get<std::size_t>();
            } else if (key == "encoding") {
                if (!has_flag("--encoding")) mf.encoding = value.get<std::string>();
                if (mf.encoding != "none" && mf.encoding != "pe")
                    throw ConfigError("run config: encoding must be none or pe");
            } else if (key == "octaves") {
                if (!has_flag("--octaves")) mf.octaves = value.get<std::size_t>();
            } else if (key == "omega0") {
                if (!has_flag("--omega0")) mf.omega0 = value.get<double>();
            } else if (key == "diner") {
                if (!has_flag("--diner")) mf.diner = value.get<bool>();
            } else if (key == "table_init") {
                if (!has_flag("--table-init")) mf.table_init = value.get<std::string>();
            } else if (key == "table_scale") {
                if (!has_flag("--table-scale")) mf.table_scale = value.get<double>();
            } else if (key == "epochs") {
                if (!has_flag("--epochs")) tf.epochs = value.get<std::size_t>();
            } else if (key == "batch") {
                if (!has_flag("--batch")) tf.batch = value.get<std::size_t>();
            } else if (key == "lr") {
                if (!has_flag("--lr")) tf.lr = value.get<double>();
            } else if (key == "lr_table") {
                if (!has_flag("--lr-table")) tf.lr_table = value.get<double>();
            } else if (key == "seed") {
                if (!has_flag("--seed")) tf.seed = value.get<std::uint64_t>();
            } else if (key == "log_every") {
                if (!has_flag("--log-every")) tf.log_every = value.get<std::size_t>();
            } else if (key == "threads") {
                if (!has_flag("--threads")) tf.threads = value.get<int>();
            } else {
                throw ConfigError("run config: unknown key \"" + key + "\"");
            }
        } catch (const json::exception& e) {
            throw FormatError("run config key \"" + key + "\": " + e.what());
        }
    }
}

// ---- subcommands ----------------------------------------------------------

int cmd_fit(const std::string& input, const std::string& out_dir, const std::string& config,
            CLI::App* cmd, ModelFlags mf, TrainFlags tf) {
    std::string in = input, out = out_dir;
    if (!config.empty()) apply_run_config(config, cmd, in, out, mf, tf);
    if (in.empty()) throw ConfigError("fit: no input given (flag or run config)");
    if (out.empty()) throw ConfigError("fit: no output directory given");
    if (!fs::exists(in)) throw IoError("fit: input does not exist: " + in);
    fs::create_directories(out);

    Grid data = load_signal(in);
    validate_sample_set(data);
    BackboneSpec spec = make_spec(mf, data.rank(), data.channels);
    TrainConfig cfg = make_train_config(tf, spec, mf.diner);
    Model model = build_model(mf, spec, tf.seed, data.extents);

    FitState state;
    MetricsLog log = fit(model, state, data, cfg);

    write_metrics(fs::path(out) / "metrics.csv", log);
    write_reconstruction(out, render_signal(model, data.extents));
    save_checkpoint(fs::path(out) / "checkpoint.dinr",
                    Checkpoint{std::move(model), std::move(state), cfg, data.extents,
                               data.channels});
    std::printf("fit: %zu epochs, final loss %.6g, psnr %.2f dB\n", cfg.epochs,
                log.final_row().loss, log.final_row().psnr_db);
    return kExitOk;
}

int cmd_invariance(const std::string& input, const std::string& out_file,
                   const std::string& orders_csv, double tolerance_db, ModelFlags mf,
                   TrainFlags tf) {
    if (!fs::exists(input)) throw IoError("invariance: input does not exist: " + input);
    Grid data = load_signal(input);
    validate_sample_set(data);

    std::vector<Order> orders;
    std::vector<std::string> names;
    std::stringstream ss(orders_csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok == "identity")
            orders.push_back(Order::Identity);
        else if (tok == "sorted")
            orders.push_back(Order::SortedByIntensity);
        else if (tok == "random")
            orders.push_back(Order::Random);
        else
            throw ConfigError("invariance: unknown order \"" + tok + "\"");
        names.push_back(tok);
    }

    BackboneSpec spec = make_spec(mf, data.rank(), data.channels);
    TrainConfig cfg = make_train_config(tf, spec, /*use_table=*/true);
    InvarianceReport rep = invariance_report(data, spec, cfg, orders);

    json j;
    j["orders"] = names;
    j["psnr_db"] = rep.psnr_db;
    j["max_psnr_gap_db"] = rep.max_psnr_gap_db;
    j["max_table_residual"] = rep.max_table_residual;
    j["tolerance_db"] = tolerance_db;
    j["within_tolerance"] = rep.max_psnr_gap_db <= tolerance_db;
    const std::string text = j.dump(2);
    if (out_file.empty())
        std::cout << text << "\n";
    else
        write_file_atomic(out_file, text);

    if (rep.max_psnr_gap_db > tolerance_db) {
        std::cerr << "invariance: PSNR gap " << rep.max_psnr_gap_db << " dB exceeds tolerance "
                  << tolerance_db << " dB\n";
        return kExitTolerance;
    }
    return kExitOk;
}

int cmd_spectrum(const std::string& input, const std::string& checkpoint,
                 const std::string& out_file, std::size_t bands) {
    if (!fs::exists(input)) throw IoError("spectrum: input does not exist: " + input);
    Grid img = read_image(input);
    std::vector<std::size_t> original;
    Grid padded = pad_pow2(img, original);

    json j;
    j["input"] = json::parse(to_json(band_ratios(padded, bands)));
    j["original_extents"] = original;

    if (!checkpoint.empty()) {
        Checkpoint ck = load_checkpoint(checkpoint);
        if (!ck.model.table)
            throw ConfigError("spectrum: checkpoint has no coordinate table");
        Grid inr = extract_learned_inr(ck.model.backbone, *ck.model.table,
                                       {img.extents[0], img.extents[1]});
        std::vector<std::size_t> inr_orig;
        Grid inr_padded = pad_pow2(inr, inr_orig);
        j["learned_inr"] = json::parse(to_json(band_ratios(inr_padded, bands)));
    }

    const std::string text = j.dump(2);
    if (out_file.empty())
        std::cout << text << "\n";
    else
        write_file_atomic(out_file, text);
    return kExitOk;
}

int cmd_lensless_simulate(const std::string& phantom, const std::string& amplitude_path,
                          const std::string& phase_path, std::size_t size,
                          const OpticsConfig& optics, const std::string& out_dir) {
    optics.validate();
    ComplexGrid object;
    if (!amplitude_path.empty() || !phase_path.empty()) {
        if (amplitude_path.empty() || phase_path.empty())
            throw ConfigError("lensless simulate: need both --amplitude and --phase");
        Grid amp = read_image(amplitude_path);
        Grid ph = read_image(phase_path);
        if (!amp.same_shape(ph) || amp.channels != 1)
            throw ConfigError("lensless simulate: amplitude/phase must be single-channel "
                              "grids of one shape");
        object = ComplexGrid(amp.extents[0], amp.extents[1]);
        for (std::size_t i = 0; i < object.size(); ++i) {
            object.re[i] = amp.values[i] * std::cos(ph.values[i]);
            object.im[i] = amp.values[i] * std::sin(ph.values[i]);
        }
    } else if (phantom == "phase-disk") {
        object = make_phase_disk(size, size);
    } else {
        object = make_phantom_field(size, size);
    }

    MeasurementSet meas = simulate(object, optics);
    fs::create_directories(out_dir);
    for (std::size_t k = 0; k < meas.intensities.size(); ++k) {
        char name[32];
        std::snprintf(name, sizeof name, "meas_%03zu.pfm", k);
        write_image(fs::path(out_dir) / name, meas.intensities[k]);
    }
    json manifest;
    manifest["lambda_m"] = optics.wavelength_m;
    manifest["pitch_m"] = optics.pixel_pitch_m;
    manifest["heights_m"] = optics.heights_m;
    write_file_atomic(fs::path(out_dir) / "manifest.json", manifest.dump(2));

    Grid amp({object.height, object.width}, 1);
    Grid ph({object.height, object.width}, 1);
    for (std::size_t i = 0; i < object.size(); ++i) {
        amp.values[i] = std::hypot(object.re[i], object.im[i]);
        ph.values[i] = std::atan2(object.im[i], object.re[i]);
    }
    write_image(fs::path(out_dir) / "gt_amplitude.pfm", amp);
    write_image(fs::path(out_dir) / "gt_phase.pfm", ph);
    std::printf("lensless simulate: %zu heights written to %s\n", meas.intensities.size(),
                out_dir.c_str());
    return kExitOk;
}

int cmd_lensless_reconstruct(const std::string& manifest_path, const std::string& out_dir,
                             ModelFlags mf, TrainFlags tf) {
    if (!fs::exists(manifest_path))
        throw IoError("lensless reconstruct: manifest does not exist: " + manifest_path);
    json manifest;
    try {
        manifest = json::parse(read_file(manifest_path));
    } catch (const json::exception& e) {
        throw FormatError("lensless reconstruct: bad manifest: " + std::string(e.what()));
    }
    OpticsConfig optics;
    try {
        optics.wavelength_m = manifest.at("lambda_m").get<double>();
        optics.pixel_pitch_m = manifest.at("pitch_m").get<double>();
        optics.heights_m = manifest.at("heights_m").get<std::vector<double>>();
    } catch (const json::exception& e) {
        throw FormatError("lensless reconstruct: manifest field: " + std::string(e.what()));
    }

    const fs::path dir = fs::path(manifest_path).parent_path();
    MeasurementSet meas;
    for (std::size_t k = 0; k < optics.heights_m.size(); ++k) {
        char name[32];
        std::snprintf(name, sizeof name, "meas_%03zu.pfm", k);
        meas.intensities.push_back(read_image(dir / name));
    }

    BackboneSpec spec = make_spec(mf, 2, 2);
    TrainConfig cfg = make_train_config(tf, spec, /*use_table=*/true);
    ReconstructResult res = reconstruct(meas, optics, spec, cfg);
    for (const std::string& w : res.warnings) std::cerr << "warning: " << w << "\n";

    fs::create_directories(out_dir);
    write_image(fs::path(out_dir) / "amplitude.pfm", res.amplitude);
    write_image(fs::path(out_dir) / "phase.pfm", res.phase);
    write_metrics(fs::path(out_dir) / "metrics.csv", res.log);
    FitState opt_state;
    for (const Layer& l : res.model.backbone.layers) {
        opt_state.weight_state.emplace_back(l.W.size());
        opt_state.bias_state.emplace_back(l.b.size());
    }
    opt_state.epoch = cfg.epochs;
    const std::vector<std::size_t> extents = res.amplitude.extents;
    save_checkpoint(fs::path(out_dir) / "checkpoint.dinr",
                    Checkpoint{std::move(res.model), std::move(opt_state), cfg, extents, 2});
    std::printf("lensless reconstruct: measurement psnr %.2f dB after %zu epochs\n",
                res.log.final_row().psnr_db, cfg.epochs);
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"diner: implicit neural representations with a learnable full-resolution "
                 "coordinate table"};
    app.footer(kExitTable);
    app.require_subcommand(1);

    // fit
    auto* fit_cmd = app.add_subcommand("fit", "Fit an INR (optionally DINER) to an image or "
                                              "volume manifest");
    std::string fit_input, fit_out = "out", fit_config;
    ModelFlags fit_mf;
    TrainFlags fit_tf;
    fit_cmd->add_option("--input", fit_input, "Image (.pgm/.ppm/.pfm) or volume manifest (.json)");
    fit_cmd->add_option("--out", fit_out, "Output directory");
    fit_cmd->add_option("--config", fit_config, "RunConfig JSON (flags override its keys)");
    add_model_flags(fit_cmd, fit_mf);
    add_train_flags(fit_cmd, fit_tf);

    // invariance
    auto* inv_cmd = app.add_subcommand("invariance",
                                       "Train one DINER per arrangement order and compare");
    std::string inv_input, inv_out, inv_orders = "identity,sorted,random";
    double inv_tol = 0.1;
    ModelFlags inv_mf;
    TrainFlags inv_tf;
    inv_tf.epochs = 2000;
    inv_cmd->add_option("--input", inv_input, "Image path")->required();
    inv_cmd->add_option("--orders", inv_orders, "Comma list of identity,sorted,random");
    inv_cmd->add_option("--tolerance-db", inv_tol, "Max allowed pairwise PSNR gap");
    inv_cmd->add_option("--out", inv_out, "Report JSON path (stdout when omitted)");
    add_model_flags(inv_cmd, inv_mf, /*with_diner=*/false);
    add_train_flags(inv_cmd, inv_tf);

    // spectrum
    auto* spec_cmd = app.add_subcommand("spectrum", "Frequency-band ratios of an image and, "
                                                    "optionally, of a checkpoint's learned INR");
    std::string sp_input, sp_checkpoint, sp_out;
    std::size_t sp_bands = 4;
    spec_cmd->add_option("--input", sp_input, "Image path")->required();
    spec_cmd->add_option("--checkpoint", sp_checkpoint, "Trained DINER checkpoint");
    spec_cmd->add_option("--bands", sp_bands, "Number of radial bands");
    spec_cmd->add_option("--out", sp_out, "Report JSON path (stdout when omitted)");

    // lensless
    auto* lens_cmd = app.add_subcommand("lensless", "Multi-height lensless imaging");
    lens_cmd->require_subcommand(1);

    auto* sim_cmd = lens_cmd->add_subcommand("simulate", "Phantom -> measurement stack");
    std::string sim_phantom = "builtin", sim_amp, sim_phase, sim_out = "meas";
    std::size_t sim_size = 64;
    OpticsConfig sim_optics;
    sim_cmd->add_option("--phantom", sim_phantom, "builtin or phase-disk")
        ->check(CLI::IsMember({"builtin", "phase-disk"}));
    sim_cmd->add_option("--amplitude", sim_amp, "Amplitude PFM/PGM (overrides --phantom)");
    sim_cmd->add_option("--phase", sim_phase, "Phase PFM in radians");
    sim_cmd->add_option("--size", sim_size, "Built-in phantom extent (power of two)");
    sim_cmd->add_option("--wavelength", sim_optics.wavelength_m, "Wavelength in meters");
    sim_cmd->add_option("--pitch", sim_optics.pixel_pitch_m, "Pixel pitch in meters");
    sim_cmd->add_option("--heights", sim_optics.heights_m, "Heights in meters")->delimiter(',');
    sim_cmd->add_option("--out", sim_out, "Output directory");

    auto* rec_cmd = lens_cmd->add_subcommand("reconstruct", "Measurement stack -> field");
    std::string rec_manifest, rec_out = "recon";
    ModelFlags rec_mf;
    rec_mf.backbone = "siren";
    rec_mf.diner = true;
    TrainFlags rec_tf;
    rec_tf.epochs = 5000;
    rec_cmd->add_option("--manifest", rec_manifest, "manifest.json path")->required();
    rec_cmd->add_option("--out", rec_out, "Output directory");
    add_model_flags(rec_cmd, rec_mf, /*with_diner=*/false);
    add_train_flags(rec_cmd, rec_tf);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e); // prints the message or help text
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (fit_cmd->parsed())
            return cmd_fit(fit_input, fit_out, fit_config, fit_cmd, fit_mf, fit_tf);
        if (inv_cmd->parsed())
            return cmd_invariance(inv_input, inv_out, inv_orders, inv_tol, inv_mf, inv_tf);
        if (spec_cmd->parsed()) return cmd_spectrum(sp_input, sp_checkpoint, sp_out, sp_bands);
        if (lens_cmd->parsed()) {
            if (sim_cmd->parsed())
                return cmd_lensless_simulate(sim_phantom, sim_amp, sim_phase, sim_size,
                                             sim_optics, sim_out);
            if (rec_cmd->parsed())
                return cmd_lensless_reconstruct(rec_manifest, rec_out, rec_mf, rec_tf);
        }
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const FormatError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFormat;
    } catch (const NumericError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const SamplingError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
    return kExitUsage;
}
