#include <cstdio>
#include <filesystem>
#include <unistd.h>
#include <string>

#include "doctest.h"

#include "diner/checkpoint.hpp"
#include "diner/image_io.hpp"
#include "diner/synth.hpp"
#include "diner/training.hpp"

using namespace diner;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("diner_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    static int& counter() {
        static int c = 0;
        return c;
    }
};

Grid f32_grid(std::size_t h, std::size_t w, std::size_t ch, std::uint64_t seed) {
    Grid g({h, w}, ch);
    Rng rng(seed);
    for (double& v : g.values) v = static_cast<double>(static_cast<float>(rng.uniform01()));
    return g;
}

} // namespace

TEST_CASE("pgm 8-bit parsing maps linearly to [0,1]") {
    TempDir td;
    const fs::path p = td.path / "t.pgm";
    std::string bytes = "P5\n1 1\n255\n";
    bytes.push_back(static_cast<char>(128));
    write_file_atomic(p, bytes);
    Grid g = read_image(p);
    REQUIRE(g.extents == std::vector<std::size_t>{1, 1});
    CHECK(g.values[0] == 128.0 / 255.0);
}

TEST_CASE("16-bit ppm samples are big-endian") {
    TempDir td;
    const fs::path p = td.path / "t.ppm";
    std::string bytes = "P6\n1 1\n65535\n";
    // one RGB pixel: 0x1234, 0x0000, 0xFFFF
    const unsigned char px[] = {0x12, 0x34, 0x00, 0x00, 0xFF, 0xFF};
    bytes.append(reinterpret_cast<const char*>(px), sizeof px);
    write_file_atomic(p, bytes);
    Grid g = read_image(p);
    REQUIRE(g.channels == 3);
    CHECK(g.values[0] == doctest::Approx(0x1234 / 65535.0).epsilon(1e-12));
    CHECK(g.values[1] == 0.0);
    CHECK(g.values[2] == 1.0);
}

TEST_CASE("pgm/ppm write-read round trip is quantization-exact") {
    TempDir td;
    // values on the 16-bit quantization lattice survive exactly
    Grid g({4, 4}, 3);
    Rng rng(5);
    for (double& v : g.values)
        v = static_cast<double>(rng.next_below(65536)) / 65535.0;
    const fs::path p = td.path / "q.ppm";
    write_image(p, g);
    Grid back = read_image(p);
    REQUIRE(back.same_shape(g));
    for (std::size_t i = 0; i < g.values.size(); ++i)
        CHECK(back.values[i] == doctest::Approx(g.values[i]).epsilon(1e-12));
}

TEST_CASE("pfm round trip is bitwise for float-representable data") {
    TempDir td;
    for (std::size_t ch : {std::size_t{1}, std::size_t{3}}) {
        Grid g = f32_grid(8, 4, ch, 42 + ch);
        const fs::path p = td.path / ("t" + std::to_string(ch) + ".pfm");
        write_image(p, g);
        Grid first = read_image(p);
        CHECK(first.values == g.values);
        write_image(p, first);
        Grid second = read_image(p);
        CHECK(second.values == first.values);
    }
}

TEST_CASE("read_image rejects malformed files") {
    TempDir td;
    const fs::path p = td.path / "bad.pgm";
    write_file_atomic(p, "P5\n4 4\n255\nxx"); // truncated
    CHECK_THROWS_AS(read_image(p), FormatError);
    write_file_atomic(p, "GARBAGE");
    CHECK_THROWS_AS(read_image(p), FormatError);
    CHECK_THROWS_AS(read_image(td.path / "missing.pgm"), IoError);
}

TEST_CASE("write failures leave no partial output") {
    TempDir td;
    const fs::path blocked = td.path / "dir_in_the_way";
    fs::create_directories(blocked);
    Grid g = make_constant_image(2, 2, 1, 0.5);
    CHECK_THROWS_AS(write_image(blocked, g), Error);
    const bool no_partial = !fs::exists(blocked.string() + ".tmp");
    CHECK(no_partial);
    CHECK(fs::is_directory(blocked)); // untouched
}

TEST_CASE("volume manifest round trip") {
    TempDir td;
    Grid vol = make_video_volume(3, 4, 4, 9);
    // quantize to f32 so the pfm round trip is exact
    for (double& v : vol.values) v = static_cast<double>(static_cast<float>(v));
    const fs::path manifest = td.path / "vol.json";
    write_volume(manifest, vol);
    Grid back = read_volume(manifest);
    REQUIRE(back.extents == vol.extents);
    CHECK(back.values == vol.values);
}

TEST_CASE("checkpoint round trip is bitwise") {
    TempDir td;
    Grid img = make_texture_image(8, 8, 3, 3);
    BackboneSpec spec;
    spec.d_in = 2;
    spec.d_out = 3;
    spec.width = 16;
    spec.depth = 2;
    spec.activation = Activation::Sine;
    Rng rng = Rng(2).fork(0xB0DE);
    Model m;
    m.backbone = init_backbone(spec, rng);
    Rng trng = Rng(2).fork(0x7AB1E);
    m.table = new_table(64, 2, TableInit::Uniform, 1e-4, {}, trng);
    FitState fs_state;
    TrainConfig cfg;
    cfg.epochs = 30;
    cfg.lr_net = 1e-4;
    cfg.use_table = true;
    cfg.log_every = 10;
    fit(m, fs_state, img, cfg);

    Checkpoint ck{std::move(m), std::move(fs_state), cfg, img.extents, img.channels};
    const fs::path p = td.path / "model.dinr";
    save_checkpoint(p, ck);
    Checkpoint back = load_checkpoint(p);

    REQUIRE(back.model.backbone.layers.size() == ck.model.backbone.layers.size());
    for (std::size_t l = 0; l < ck.model.backbone.layers.size(); ++l) {
        CHECK(back.model.backbone.layers[l].W.data == ck.model.backbone.layers[l].W.data);
        CHECK(back.model.backbone.layers[l].b == ck.model.backbone.layers[l].b);
        CHECK(back.state.weight_state[l].m == ck.state.weight_state[l].m);
        CHECK(back.state.weight_state[l].v == ck.state.weight_state[l].v);
        CHECK(back.state.weight_state[l].t == ck.state.weight_state[l].t);
        CHECK(back.state.bias_state[l].m == ck.state.bias_state[l].m);
    }
    REQUIRE(back.model.table.has_value());
    CHECK(back.model.table->entries == ck.model.table->entries);
    CHECK(back.model.table->m == ck.model.table->m);
    CHECK(back.model.table->v == ck.model.table->v);
    CHECK(back.model.table->steps == ck.model.table->steps);
    CHECK(back.state.epoch == ck.state.epoch);
    CHECK(back.signal_extents == ck.signal_extents);
    CHECK(back.train.lr_net == ck.train.lr_net);

    // saving the loaded copy reproduces identical bytes
    const fs::path p2 = td.path / "model2.dinr";
    save_checkpoint(p2, back);
    CHECK(read_file(p) == read_file(p2));
}

TEST_CASE("checkpoint rejects bad magic and version mismatch") {
    TempDir td;
    const fs::path p = td.path / "ck.dinr";
    write_file_atomic(p, "NOPE0000000000000000");
    CHECK_THROWS_AS(load_checkpoint(p), FormatError);

    // craft a valid-magic header with a wrong version
    std::string bytes = "DINR";
    bytes.push_back(static_cast<char>(9)); // version 9 LE
    bytes.append(3, '\0');
    bytes.append(8, '\0'); // zero-length metadata
    write_file_atomic(p, bytes);
    CHECK_THROWS_WITH_AS(load_checkpoint(p), doctest::Contains("version mismatch"),
                         FormatError);
}
