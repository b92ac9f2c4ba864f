#include "zits/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cctype>
#include <cstring>
#include <fstream>
#include <string>

namespace zits {
namespace {

void put_u32(std::ostream& os, std::uint32_t v) {
    char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
    os.write(b, 4);
}

std::uint32_t get_u32(std::istream& is) {
    unsigned char b[4];
    if (!is.read(reinterpret_cast<char*>(b), 4)) throw IoError("zten: truncated header");
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void put_f64(std::ostream& os, double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((bits >> (8 * i)) & 0xFF);
    os.write(b, 8);
}

double get_f64(const unsigned char* b) {
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return std::bit_cast<double>(bits);
}

// Netpbm header token, skipping whitespace and '#' comments.
std::string header_token(std::istream& is) {
    std::string tok;
    int ch;
    while ((ch = is.get()) != EOF) {
        if (ch == '#') {
            while ((ch = is.get()) != EOF && ch != '\n') {
            }
            continue;
        }
        if (std::isspace(ch)) {
            if (!tok.empty()) return tok;
            continue;
        }
        tok.push_back(static_cast<char>(ch));
    }
    if (tok.empty()) throw IoError("netpbm: truncated header");
    return tok;
}

std::size_t header_number(std::istream& is, const char* what) {
    const std::string tok = header_token(is);
    try {
        std::size_t used = 0;
        const unsigned long v = std::stoul(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw IoError(std::string("netpbm: bad ") + what + " '" + tok + "'");
    }
}

}  // namespace

void write_zten(std::ostream& os, const Tensor& t) {
    os.write("ZTEN", 4);
    const Shape& s = t.shape();
    os.put(static_cast<char>(s.rank()));
    for (std::size_t i = 0; i < s.rank(); ++i) put_u32(os, static_cast<std::uint32_t>(s[i]));
    for (double v : t.data()) put_f64(os, v);
    if (!os) throw IoError("zten: write failed");
}

Tensor read_zten(std::istream& is) {
    char magic[4];
    if (!is.read(magic, 4) || std::memcmp(magic, "ZTEN", 4) != 0) throw IoError("zten: bad magic");
    const int rank = is.get();
    if (rank == EOF || rank < 1 || rank > 4) throw IoError("zten: bad rank");
    std::vector<std::size_t> extents(static_cast<std::size_t>(rank));
    for (auto& e : extents) {
        e = get_u32(is);
        if (e == 0) throw IoError("zten: zero extent");
    }
    const Shape shape(extents);
    std::vector<unsigned char> raw(shape.numel() * 8);
    if (!is.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()))) {
        throw IoError("zten: truncated payload");
    }
    std::vector<double> data(shape.numel());
    for (std::size_t i = 0; i < data.size(); ++i) data[i] = get_f64(raw.data() + 8 * i);
    return Tensor(shape, std::move(data));
}

void save_zten(const std::filesystem::path& path, const Tensor& t) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");
    write_zten(os, t);
}

Tensor load_zten(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path.string());
    return read_zten(is);
}

Netpbm read_netpbm(std::istream& is) {
    const std::string magic = header_token(is);
    Netpbm img;
    if (magic == "P5") {
        img.channels = 1;
    } else if (magic == "P6") {
        img.channels = 3;
    } else {
        throw IoError("netpbm: unsupported magic '" + magic + "'");
    }
    img.width = header_number(is, "width");
    img.height = header_number(is, "height");
    const std::size_t maxval = header_number(is, "maxval");
    if (img.width == 0 || img.height == 0) throw IoError("netpbm: zero extent");
    if (maxval == 0 || maxval > 65535) throw IoError("netpbm: maxval out of range");
    img.maxval = static_cast<std::uint32_t>(maxval);
    // header_token consumed exactly one whitespace byte after maxval.
    const std::size_t count = img.width * img.height * img.channels;
    const std::size_t bytes = img.maxval < 256 ? 1 : 2;
    std::vector<unsigned char> raw(count * bytes);
    if (!is.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()))) {
        throw IoError("netpbm: truncated raster");
    }
    img.samples.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        img.samples[i] = bytes == 1 ? raw[i] : static_cast<std::uint16_t>((raw[2 * i] << 8) | raw[2 * i + 1]);
        if (img.samples[i] > img.maxval) throw IoError("netpbm: sample exceeds maxval");
    }
    return img;
}

void write_netpbm(std::ostream& os, const Netpbm& img) {
    if (img.channels != 1 && img.channels != 3) throw IoError("netpbm: channels must be 1 or 3");
    if (img.samples.size() != img.width * img.height * img.channels) throw IoError("netpbm: sample count mismatch");
    os << (img.channels == 1 ? "P5" : "P6") << '\n' << img.width << ' ' << img.height << '\n' << img.maxval << '\n';
    for (std::uint16_t v : img.samples) {
        if (img.maxval < 256) {
            os.put(static_cast<char>(v));
        } else {
            os.put(static_cast<char>(v >> 8));
            os.put(static_cast<char>(v & 0xFF));
        }
    }
    if (!os) throw IoError("netpbm: write failed");
}

Netpbm load_netpbm(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path.string());
    return read_netpbm(is);
}

void save_netpbm(const std::filesystem::path& path, const Netpbm& img) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");
    write_netpbm(os, img);
}

Tensor netpbm_to_tensor(const Netpbm& img) {
    Tensor t = Tensor::nchw(1, img.channels, img.height, img.width);
    const double inv = 1.0 / static_cast<double>(img.maxval);
    for (std::size_t y = 0; y < img.height; ++y)
        for (std::size_t x = 0; x < img.width; ++x)
            for (std::size_t c = 0; c < img.channels; ++c)
                t.at(0, c, y, x) = img.samples[(y * img.width + x) * img.channels + c] * inv;
    return t;
}

Netpbm tensor_to_netpbm(const Tensor& t, std::uint32_t maxval) {
    const Shape& s = t.shape();
    if (s.n() != 1 || (s.c() != 1 && s.c() != 3)) {
        throw ShapeError("netpbm: tensor " + s.str() + " is not (1, 1|3, H, W)");
    }
    if (maxval == 0 || maxval > 65535) throw IoError("netpbm: maxval out of range");
    Netpbm img{s.w(), s.h(), s.c(), maxval, {}};
    img.samples.resize(s.numel());
    for (std::size_t y = 0; y < s.h(); ++y)
        for (std::size_t x = 0; x < s.w(); ++x)
            for (std::size_t c = 0; c < s.c(); ++c) {
                const double v = std::clamp(t.at(0, c, y, x), 0.0, 1.0);
                img.samples[(y * s.w() + x) * s.c() + c] =
                    static_cast<std::uint16_t>(std::lround(v * static_cast<double>(maxval)));
            }
    return img;
}

void save_params(const std::filesystem::path& dir, const ParamList& params) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
    std::ofstream manifest(dir / "manifest.txt");
    if (!manifest) throw IoError("cannot write " + (dir / "manifest.txt").string());
    for (const NamedTensor& p : params) {
        if (p.name.empty() || p.name.find_first_of(" /\\\n") != std::string::npos) {
            throw IoError("params: invalid name '" + p.name + "'");
        }
        const Shape& s = p.value.shape();
        manifest << p.name << ' ' << s.rank();
        for (std::size_t i = 0; i < s.rank(); ++i) manifest << ' ' << s[i];
        manifest << '\n';
        save_zten(dir / (p.name + ".zten"), p.value);
    }
    if (!manifest) throw IoError("params: manifest write failed");
}

ParamList load_params(const std::filesystem::path& dir) {
    std::ifstream manifest(dir / "manifest.txt");
    if (!manifest) throw IoError("cannot open " + (dir / "manifest.txt").string());
    ParamList out;
    std::string name;
    std::size_t rank = 0;
    while (manifest >> name >> rank) {
        if (rank == 0 || rank > Shape::kMaxRank) throw IoError("params: bad rank for " + name);
        std::vector<std::size_t> ext(rank);
        for (std::size_t& e : ext)
            if (!(manifest >> e)) throw IoError("params: truncated manifest entry for " + name);
        Tensor t = load_zten(dir / (name + ".zten"));
        if (!(t.shape() == Shape(std::span<const std::size_t>(ext)))) {
            throw IoError("params: " + name + " has shape " + t.shape().str() + " but the manifest says otherwise");
        }
        out.push_back({name, std::move(t)});
    }
    if (!manifest.eof()) throw IoError("params: malformed manifest");
    return out;
}

const Tensor& find_param(const ParamList& params, const std::string& name) {
    for (const NamedTensor& p : params)
        if (p.name == name) return p.value;
    throw IoError("params: missing entry '" + name + "'");
}

}  // namespace zits

