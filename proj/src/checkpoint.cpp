#include "diner/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <string>

#include "json.hpp"

#include "diner/image_io.hpp"

namespace diner {

namespace {

using nlohmann::json;

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& out, double d) { put_u64(out, std::bit_cast<std::uint64_t>(d)); }

void put_f64_span(std::string& out, std::span<const double> s) {
    for (double d : s) put_f64(out, d);
}

struct Reader {
    const std::string& buf;
    std::size_t pos = 0;

    void need(std::size_t n) const {
        if (buf.size() - pos < n) throw FormatError("checkpoint: truncated payload");
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v |= static_cast<std::uint32_t>(static_cast<unsigned char>(buf[pos++])) << (8 * i);
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i)
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[pos++])) << (8 * i);
        return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }
    void f64_into(std::span<double> s) {
        for (double& d : s) d = f64();
    }
};

json encoding_to_json(const Encoding& e) {
    json j;
    j["kind"] = e.kind == Encoding::Kind::None ? "none" : "fourier";
    j["octaves"] = e.octaves;
    return j;
}

Encoding encoding_from_json(const json& j) {
    Encoding e;
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "none")
        e.kind = Encoding::Kind::None;
    else if (kind == "fourier")
        e.kind = Encoding::Kind::Fourier;
    else
        throw FormatError("checkpoint: unknown encoding kind " + kind);
    e.octaves = j.at("octaves").get<std::size_t>();
    return e;
}

json train_to_json(const TrainConfig& t) {
    json j;
    j["epochs"] = t.epochs;
    j["batch_size"] = t.batch_size;
    j["lr_net"] = t.lr_net;
    j["lr_table"] = t.lr_table;
    j["seed"] = t.seed;
    j["use_table"] = t.use_table;
    j["process"] = t.process == Process::Identity ? "identity" : "lensless";
    j["log_every"] = t.log_every;
    j["threads"] = t.threads;
    return j;
}

TrainConfig train_from_json(const json& j) {
    TrainConfig t;
    t.epochs = j.at("epochs").get<std::size_t>();
    t.batch_size = j.at("batch_size").get<std::size_t>();
    t.lr_net = j.at("lr_net").get<double>();
    t.lr_table = j.at("lr_table").get<double>();
    t.seed = j.at("seed").get<std::uint64_t>();
    t.use_table = j.at("use_table").get<bool>();
    t.process = j.at("process").get<std::string>() == "lensless" ? Process::Lensless
                                                                 : Process::Identity;
    t.log_every = j.at("log_every").get<std::size_t>();
    t.threads = j.at("threads").get<int>();
    return t;
}

} // namespace

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ck) {
    const Backbone& bk = ck.model.backbone;
    if (ck.state.weight_state.size() != bk.layers.size() ||
        ck.state.bias_state.size() != bk.layers.size())
        throw ConfigError("save_checkpoint: optimizer state does not match backbone");

    json meta;
    json jb;
    jb["d_in"] = bk.spec.d_in;
    jb["d_out"] = bk.spec.d_out;
    jb["width"] = bk.spec.width;
    jb["depth"] = bk.spec.depth;
    jb["activation"] = bk.spec.activation == Activation::Sine ? "sine" : "relu";
    jb["omega0"] = bk.spec.omega0;
    jb["encoding"] = encoding_to_json(bk.spec.encoding);
    json shapes = json::array();
    for (const Layer& l : bk.layers) shapes.push_back({l.W.rows, l.W.cols});
    jb["layer_shapes"] = shapes;
    meta["backbone"] = jb;

    json jt;
    jt["present"] = ck.model.table.has_value();
    if (ck.model.table) {
        jt["n"] = ck.model.table->n;
        jt["d_in"] = ck.model.table->d_in;
    }
    meta["table"] = jt;
    meta["train"] = train_to_json(ck.train);
    meta["epoch"] = ck.state.epoch;
    meta["signal_extents"] = ck.signal_extents;
    meta["signal_channels"] = ck.signal_channels;

    const std::string meta_str = meta.dump();
    std::string out;
    out += "DINR";
    put_u32(out, kCheckpointVersion);
    put_u64(out, meta_str.size());
    out += meta_str;

    for (const Layer& l : bk.layers) {
        put_f64_span(out, l.W.data);
        put_f64_span(out, l.b);
    }
    for (std::size_t l = 0; l < bk.layers.size(); ++l) {
        put_f64_span(out, ck.state.weight_state[l].m);
        put_f64_span(out, ck.state.weight_state[l].v);
        put_f64_span(out, ck.state.bias_state[l].m);
        put_f64_span(out, ck.state.bias_state[l].v);
    }
    for (std::size_t l = 0; l < bk.layers.size(); ++l) {
        put_u64(out, ck.state.weight_state[l].t);
        put_u64(out, ck.state.bias_state[l].t);
    }
    if (ck.model.table) {
        const CoordTable& t = *ck.model.table;
        put_f64_span(out, t.entries);
        put_f64_span(out, t.m);
        put_f64_span(out, t.v);
        for (std::uint64_t s : t.steps) put_u64(out, s);
    }
    write_file_atomic(path, out);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    const std::string buf = read_file(path);
    if (buf.size() < 16 || buf.compare(0, 4, "DINR") != 0)
        throw FormatError("checkpoint: bad magic in " + path.string());
    Reader rd{buf, 4};
    const std::uint32_t version = rd.u32();
    if (version != kCheckpointVersion)
        throw FormatError("checkpoint: version mismatch (file has " + std::to_string(version) +
                          ", expected " + std::to_string(kCheckpointVersion) + ")");
    const std::uint64_t meta_len = rd.u64();
    rd.need(meta_len);
    json meta;
    try {
        meta = json::parse(buf.substr(rd.pos, meta_len));
    } catch (const json::exception& e) {
        throw FormatError("checkpoint: bad metadata: " + std::string(e.what()));
    }
    rd.pos += meta_len;

    Checkpoint ck;
    try {
        const json& jb = meta.at("backbone");
        BackboneSpec spec;
        spec.d_in = jb.at("d_in").get<std::size_t>();
        spec.d_out = jb.at("d_out").get<std::size_t>();
        spec.width = jb.at("width").get<std::size_t>();
        spec.depth = jb.at("depth").get<std::size_t>();
        spec.activation =
            jb.at("activation").get<std::string>() == "sine" ? Activation::Sine : Activation::ReLU;
        spec.omega0 = jb.at("omega0").get<double>();
        spec.encoding = encoding_from_json(jb.at("encoding"));
        ck.model.backbone.spec = spec;

        for (const auto& sh : jb.at("layer_shapes")) {
            Layer l;
            l.W = Tensor2D(sh.at(0).get<std::size_t>(), sh.at(1).get<std::size_t>());
            l.b.assign(l.W.rows, 0.0);
            ck.model.backbone.layers.push_back(std::move(l));
        }

        const json& jt = meta.at("table");
        if (jt.at("present").get<bool>()) {
            CoordTable t;
            t.n = jt.at("n").get<std::size_t>();
            t.d_in = jt.at("d_in").get<std::size_t>();
            t.entries.resize(t.n * t.d_in);
            t.m.resize(t.n * t.d_in);
            t.v.resize(t.n * t.d_in);
            t.steps.resize(t.n);
            ck.model.table = std::move(t);
        }
        ck.train = train_from_json(meta.at("train"));
        ck.state.epoch = meta.at("epoch").get<std::uint64_t>();
        ck.signal_extents = meta.at("signal_extents").get<std::vector<std::size_t>>();
        ck.signal_channels = meta.at("signal_channels").get<std::size_t>();
    } catch (const json::exception& e) {
        throw FormatError("checkpoint: metadata field missing or mistyped: " +
                          std::string(e.what()));
    }

    for (Layer& l : ck.model.backbone.layers) {
        rd.f64_into(l.W.data);
        rd.f64_into(l.b);
    }
    for (std::size_t l = 0; l < ck.model.backbone.layers.size(); ++l) {
        Layer& layer = ck.model.backbone.layers[l];
        AdamState ws(layer.W.size());
        AdamState bs(layer.b.size());
        rd.f64_into(ws.m);
        rd.f64_into(ws.v);
        rd.f64_into(bs.m);
        rd.f64_into(bs.v);
        ck.state.weight_state.push_back(std::move(ws));
        ck.state.bias_state.push_back(std::move(bs));
    }
    for (std::size_t l = 0; l < ck.model.backbone.layers.size(); ++l) {
        ck.state.weight_state[l].t = rd.u64();
        ck.state.bias_state[l].t = rd.u64();
    }
    if (ck.model.table) {
        CoordTable& t = *ck.model.table;
        rd.f64_into(t.entries);
        rd.f64_into(t.m);
        rd.f64_into(t.v);
        for (std::uint64_t& s : t.steps) s = rd.u64();
    }
    if (rd.pos != buf.size()) throw FormatError("checkpoint: trailing bytes");
    return ck;
}

} // namespace diner
