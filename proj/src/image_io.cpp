#include "diner/image_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace diner {

namespace fs = std::filesystem;

void write_file_atomic(const fs::path& path, const std::string& bytes) {
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
    }
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open for writing: " + tmp.string());
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw IoError("short write: " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp);
        throw IoError("cannot rename " + tmp.string() + " -> " + path.string());
    }
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    if (!in.good() && !in.eof()) throw IoError("read failure: " + path.string());
    return ss.str();
}

namespace {

// netpbm header token reader: skips whitespace and '#' comments.
std::string next_token(const std::string& buf, std::size_t& pos) {
    while (pos < buf.size()) {
        const char ch = buf[pos];
        if (ch == '#') {
            while (pos < buf.size() && buf[pos] != '\n') ++pos;
        } else if (ch == ' ' || ch == '\t' || ch == '\r' || ch == '\n') {
            ++pos;
        } else {
            break;
        }
    }
    const std::size_t start = pos;
    while (pos < buf.size() && !std::isspace(static_cast<unsigned char>(buf[pos]))) ++pos;
    if (start == pos) throw FormatError("truncated netpbm header");
    return buf.substr(start, pos - start);
}

std::size_t parse_count(const std::string& tok) {
    std::size_t v = 0;
    for (char ch : tok) {
        if (ch < '0' || ch > '9') throw FormatError("bad number in header: " + tok);
        v = v * 10 + static_cast<std::size_t>(ch - '0');
    }
    return v;
}

Grid read_pnm(const std::string& buf, std::size_t channels) {
    std::size_t pos = 2; // past magic
    const std::size_t w = parse_count(next_token(buf, pos));
    const std::size_t h = parse_count(next_token(buf, pos));
    const std::size_t maxval = parse_count(next_token(buf, pos));
    if (w == 0 || h == 0) throw FormatError("zero image extent");
    if (maxval != 255 && maxval != 65535)
        throw FormatError("unsupported maxval " + std::to_string(maxval));
    pos += 1; // single whitespace after maxval
    const std::size_t bytes_per = maxval > 255 ? 2 : 1;
    const std::size_t need = w * h * channels * bytes_per;
    if (buf.size() - pos < need) throw FormatError("truncated pixel data");

    Grid img({h, w}, channels);
    const auto* p = reinterpret_cast<const unsigned char*>(buf.data() + pos);
    const double scale = 1.0 / static_cast<double>(maxval);
    for (std::size_t i = 0; i < w * h * channels; ++i) {
        std::size_t v;
        if (bytes_per == 2)
            v = static_cast<std::size_t>(p[2 * i]) << 8 | p[2 * i + 1]; // big-endian
        else
            v = p[i];
        img.values[i] = static_cast<double>(v) * scale;
    }
    return img;
}

float load_le_float(const unsigned char* p, bool little) {
    std::uint32_t u;
    if (little)
        u = static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
            static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
    else
        u = static_cast<std::uint32_t>(p[3]) | static_cast<std::uint32_t>(p[2]) << 8 |
            static_cast<std::uint32_t>(p[1]) << 16 | static_cast<std::uint32_t>(p[0]) << 24;
    return std::bit_cast<float>(u);
}

Grid read_pfm(const std::string& buf) {
    const std::size_t channels = buf[1] == 'F' ? 3 : 1;
    std::size_t pos = 2;
    const std::size_t w = parse_count(next_token(buf, pos));
    const std::size_t h = parse_count(next_token(buf, pos));
    const std::string scale_tok = next_token(buf, pos);
    const double scale = std::stod(scale_tok);
    if (scale == 0.0) throw FormatError("pfm scale must be nonzero");
    const bool little = scale < 0.0;
    pos += 1;
    const std::size_t need = w * h * channels * 4;
    if (buf.size() - pos < need) throw FormatError("truncated pfm data");

    Grid img({h, w}, channels);
    const auto* p = reinterpret_cast<const unsigned char*>(buf.data() + pos);
    // pfm scanlines run bottom-to-top
    for (std::size_t row = 0; row < h; ++row) {
        const std::size_t src_row = h - 1 - row;
        for (std::size_t i = 0; i < w * channels; ++i) {
            const float f = load_le_float(p + (src_row * w * channels + i) * 4, little);
            img.values[row * w * channels + i] = static_cast<double>(f);
        }
    }
    return img;
}

void store_le_float(float f, std::string& out) {
    const auto u = std::bit_cast<std::uint32_t>(f);
    out.push_back(static_cast<char>(u & 0xff));
    out.push_back(static_cast<char>((u >> 8) & 0xff));
    out.push_back(static_cast<char>((u >> 16) & 0xff));
    out.push_back(static_cast<char>((u >> 24) & 0xff));
}

std::string encode_pnm(const Grid& img, unsigned maxval) {
    if (img.rank() != 2) throw ShapeError("write_image: pgm/ppm needs a 2D grid");
    if (img.channels != 1 && img.channels != 3)
        throw ShapeError("write_image: pgm/ppm supports 1 or 3 channels");
    if (maxval != 255 && maxval != 65535) throw ConfigError("write_image: bad maxval");
    std::ostringstream head;
    head << (img.channels == 3 ? "P6" : "P5") << "\n"
         << img.extents[1] << " " << img.extents[0] << "\n"
         << maxval << "\n";
    std::string out = head.str();
    for (double v : img.values) {
        const double cl = std::clamp(v, 0.0, 1.0);
        const auto q = static_cast<std::uint32_t>(std::lround(cl * maxval));
        if (maxval > 255) {
            out.push_back(static_cast<char>((q >> 8) & 0xff)); // big-endian
            out.push_back(static_cast<char>(q & 0xff));
        } else {
            out.push_back(static_cast<char>(q & 0xff));
        }
    }
    return out;
}

std::string encode_pfm(const Grid& img) {
    if (img.rank() != 2) throw ShapeError("write_image: pfm needs a 2D grid");
    if (img.channels != 1 && img.channels != 3)
        throw ShapeError("write_image: pfm supports 1 or 3 channels");
    std::ostringstream head;
    head << (img.channels == 3 ? "PF" : "Pf") << "\n"
         << img.extents[1] << " " << img.extents[0] << "\n"
         << "-1.0\n";
    std::string out = head.str();
    const std::size_t h = img.extents[0];
    const std::size_t w = img.extents[1];
    for (std::size_t row = 0; row < h; ++row) {
        const std::size_t src_row = h - 1 - row; // bottom-to-top
        for (std::size_t i = 0; i < w * img.channels; ++i)
            store_le_float(static_cast<float>(img.values[src_row * w * img.channels + i]), out);
    }
    return out;
}

} // namespace

Grid read_image(const fs::path& path) {
    const std::string buf = read_file(path);
    if (buf.size() < 2) throw FormatError("file too short: " + path.string());
    if (buf[0] == 'P' && buf[1] == '5') return read_pnm(buf, 1);
    if (buf[0] == 'P' && buf[1] == '6') return read_pnm(buf, 3);
    if (buf[0] == 'P' && (buf[1] == 'f' || buf[1] == 'F')) return read_pfm(buf);
    throw FormatError("unrecognized image magic in " + path.string());
}

void write_image(const fs::path& path, const Grid& img) {
    const std::string ext = path.extension().string();
    if (ext == ".pfm") {
        write_file_atomic(path, encode_pfm(img));
    } else if (ext == ".pgm" || ext == ".ppm") {
        write_image_quantized(path, img, 65535);
    } else {
        throw ConfigError("write_image: unsupported extension " + ext);
    }
}

void write_image_quantized(const fs::path& path, const Grid& img, unsigned maxval) {
    write_file_atomic(path, encode_pnm(img, maxval));
}

Grid read_volume(const fs::path& manifest_path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(manifest_path));
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("bad volume manifest: " + std::string(e.what()));
    }
    if (!j.contains("frames") || !j["frames"].is_array() || j["frames"].empty())
        throw FormatError("volume manifest needs a nonempty \"frames\" array");

    const fs::path dir = manifest_path.parent_path();
    Grid vol;
    std::size_t t = 0;
    const std::size_t n_frames = j["frames"].size();
    for (const auto& f : j["frames"]) {
        Grid frame = read_image(dir / f.get<std::string>());
        if (t == 0) {
            vol = Grid({n_frames, frame.extents[0], frame.extents[1]}, frame.channels);
        } else if (frame.extents[0] != vol.extents[1] || frame.extents[1] != vol.extents[2] ||
                   frame.channels != vol.channels) {
            throw FormatError("volume frames disagree in shape");
        }
        std::copy(frame.values.begin(), frame.values.end(),
                  vol.values.begin() +
                      static_cast<std::ptrdiff_t>(t * frame.values.size()));
        ++t;
    }
    return vol;
}

void write_volume(const fs::path& manifest_path, const Grid& volume) {
    if (volume.rank() != 3) throw ShapeError("write_volume: needs a 3D grid");
    const fs::path dir = manifest_path.parent_path();
    const std::string stem = manifest_path.stem().string();
    const std::size_t frames = volume.extents[0];
    const std::size_t per = volume.extents[1] * volume.extents[2] * volume.channels;

    nlohmann::json j;
    j["frames"] = nlohmann::json::array();
    for (std::size_t t = 0; t < frames; ++t) {
        char name[64];
        std::snprintf(name, sizeof name, "%s_%03zu.pfm", stem.c_str(), t);
        Grid frame({volume.extents[1], volume.extents[2]}, volume.channels);
        std::copy(volume.values.begin() + static_cast<std::ptrdiff_t>(t * per),
                  volume.values.begin() + static_cast<std::ptrdiff_t>((t + 1) * per),
                  frame.values.begin());
        write_image(dir / name, frame);
        j["frames"].push_back(name);
    }
    write_file_atomic(manifest_path, j.dump(2));
}

} // namespace diner
