// Copyright 2026 The relit Authors
// SPDX-License-Identifier: Apache-2.0
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <string>

#include "relit/core/error.hpp"
#include "relit/io/image_io.hpp"

namespace relit::io {
namespace {

static_assert(std::endian::native == std::endian::little, "EXR codec assumes little-endian host");

constexpr std::uint32_t kMagic = 20000630;
constexpr int kHalf = 1;
constexpr int kFloat = 2;

class Writer {
public:
    std::vector<std::uint8_t> bytes;

    template <typename T>
    void pod(T v) {
        const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
        bytes.insert(bytes.end(), p, p + sizeof(T));
    }
    void str(const std::string& s) {
        bytes.insert(bytes.end(), s.begin(), s.end());
        bytes.push_back(0);
    }
    void attr(const std::string& name, const std::string& type, std::int32_t size) {
        str(name);
        str(type);
        pod(size);
    }
};

class Reader {
public:
    Reader(const std::vector<std::uint8_t>& b, const std::string& path) : bytes_(b), path_(path) {}

    template <typename T>
    T pod() {
        need(sizeof(T));
        T v;
        std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return v;
    }
    std::string str() {
        std::string s;
        while (true) {
            need(1);
            char c = static_cast<char>(bytes_[pos_++]);
            if (c == 0) break;
            s += c;
        }
        return s;
    }
    void skip(std::size_t n) {
        need(n);
        pos_ += n;
    }
    void seek(std::size_t p) {
        if (p > bytes_.size()) throw IoError(path_, "EXR offset out of range");
        pos_ = p;
    }
    std::size_t pos() const { return pos_; }

private:
    void need(std::size_t n) const {
        if (pos_ + n > bytes_.size()) throw IoError(path_, "truncated EXR file");
    }
    const std::vector<std::uint8_t>& bytes_;
    std::string path_;
    std::size_t pos_ = 0;
};

float half_to_float(std::uint16_t h) {
    const std::uint32_t sign = (h >> 15) & 1;
    const std::uint32_t exp = (h >> 10) & 0x1f;
    const std::uint32_t mant = h & 0x3ff;
    float v;
    if (exp == 0)
        v = std::ldexp(static_cast<float>(mant), -24);
    else if (exp == 31)
        v = mant ? NAN : INFINITY;
    else
        v = std::ldexp(static_cast<float>(mant | 0x400), static_cast<int>(exp) - 25);
    return sign ? -v : v;
}

struct Channel {
    std::string name;
    int type;
};

}  // namespace

void write_exr(const std::filesystem::path& path, const Image& img) {
    Writer w;
    w.pod<std::uint32_t>(kMagic);
    w.pod<std::uint32_t>(2);

    w.attr("channels", "chlist", 3 * (2 + 16) + 1);
    for (const char* name : {"B", "G", "R"}) {
        w.str(name);
        w.pod<std::int32_t>(kFloat);
        w.pod<std::uint8_t>(0);
        w.pod<std::uint8_t>(0);
        w.pod<std::uint8_t>(0);
        w.pod<std::uint8_t>(0);
        w.pod<std::int32_t>(1);
        w.pod<std::int32_t>(1);
    }
    w.pod<std::uint8_t>(0);
    w.attr("compression", "compression", 1);
    w.pod<std::uint8_t>(0);
    for (const char* name : {"dataWindow", "displayWindow"}) {
        w.attr(name, "box2i", 16);
        w.pod<std::int32_t>(0);
        w.pod<std::int32_t>(0);
        w.pod<std::int32_t>(img.width - 1);
        w.pod<std::int32_t>(img.height - 1);
    }
    w.attr("lineOrder", "lineOrder", 1);
    w.pod<std::uint8_t>(0);
    w.attr("pixelAspectRatio", "float", 4);
    w.pod<float>(1.0f);
    w.attr("screenWindowCenter", "v2f", 8);
    w.pod<float>(0.0f);
    w.pod<float>(0.0f);
    w.attr("screenWindowWidth", "float", 4);
    w.pod<float>(1.0f);
    w.pod<std::uint8_t>(0);

    const std::size_t table = w.bytes.size();
    const std::size_t line_bytes = static_cast<std::size_t>(img.width) * 3 * sizeof(float);
    const std::size_t chunk = 8 + line_bytes;
    for (int y = 0; y < img.height; ++y)
        w.pod<std::uint64_t>(table + 8 * static_cast<std::size_t>(img.height) + chunk * y);
    for (int y = 0; y < img.height; ++y) {
        w.pod<std::int32_t>(y);
        w.pod<std::int32_t>(static_cast<std::int32_t>(line_bytes));
        for (int c : {2, 1, 0})
            for (int x = 0; x < img.width; ++x) w.pod<float>(img.at(x, y, c));
    }
    write_file(path, w.bytes);
}

Image read_exr(const std::filesystem::path& path) {
    const auto bytes = read_file(path);
    const std::string p = path.string();
    Reader r(bytes, p);
    if (r.pod<std::uint32_t>() != kMagic) throw IoError(p, "not an OpenEXR file");
    const auto version = r.pod<std::uint32_t>();
    if ((version & 0xff) != 2 || (version & 0x200) != 0) throw IoError(p, "only single-part scanline EXR is supported");

    std::vector<Channel> channels;
    int compression = -1;
    std::array<std::int32_t, 4> window{};
    bool have_window = false;
    while (true) {
        const std::string name = r.str();
        if (name.empty()) break;
        const std::string type = r.str();
        const auto size = r.pod<std::int32_t>();
        if (name == "channels") {
            const std::size_t end = r.pos() + static_cast<std::size_t>(size);
            while (true) {
                std::string cname = r.str();
                if (cname.empty()) break;
                const int ctype = r.pod<std::int32_t>();
                r.skip(4);
                const int xs = r.pod<std::int32_t>();
                const int ys = r.pod<std::int32_t>();
                if (xs != 1 || ys != 1) throw IoError(p, "subsampled channels are not supported");
                channels.push_back({cname, ctype});
            }
            r.seek(end);
        } else if (name == "compression") {
            compression = r.pod<std::uint8_t>();
        } else if (name == "dataWindow") {
            for (auto& v : window) v = r.pod<std::int32_t>();
            have_window = true;
        } else {
            r.skip(static_cast<std::size_t>(size));
        }
    }
    if (compression != 0) throw IoError(p, "compressed EXR is not supported");
    if (!have_window) throw IoError(p, "EXR has no dataWindow");
    const int width = window[2] - window[0] + 1;
    const int height = window[3] - window[1] + 1;
    if (width <= 0 || height <= 0) throw IoError(p, "empty EXR data window");

    std::array<int, 3> slot{-1, -1, -1};
    std::size_t pixel_bytes = 0;
    for (std::size_t i = 0; i < channels.size(); ++i) {
        const auto& c = channels[i];
        if (c.type != kHalf && c.type != kFloat) throw IoError(p, "unsupported channel type for " + c.name);
        if (c.name == "R") slot[0] = static_cast<int>(i);
        if (c.name == "G") slot[1] = static_cast<int>(i);
        if (c.name == "B") slot[2] = static_cast<int>(i);
        pixel_bytes += c.type == kHalf ? 2 : 4;
    }
    if (slot[0] < 0 || slot[1] < 0 || slot[2] < 0) throw IoError(p, "EXR lacks R/G/B channels");

    std::vector<std::uint64_t> offsets(static_cast<std::size_t>(height));
    for (auto& o : offsets) o = r.pod<std::uint64_t>();

    Image img(width, height);
    std::vector<float> line(channels.size() * static_cast<std::size_t>(width));
    for (int i = 0; i < height; ++i) {
        r.seek(static_cast<std::size_t>(offsets[static_cast<std::size_t>(i)]));
        const int y = r.pod<std::int32_t>() - window[1];
        const auto size = r.pod<std::int32_t>();
        if (y < 0 || y >= height || static_cast<std::size_t>(size) != pixel_bytes * width)
            throw IoError(p, "corrupt EXR scanline");
        for (std::size_t c = 0; c < channels.size(); ++c)
            for (int x = 0; x < width; ++x)
                line[c * width + x] = channels[c].type == kFloat ? r.pod<float>() : half_to_float(r.pod<std::uint16_t>());
        for (int ch = 0; ch < 3; ++ch)
            for (int x = 0; x < width; ++x) img.at(x, y, ch) = line[static_cast<std::size_t>(slot[ch]) * width + x];
    }
    return img;
}

}  // namespace relit::io
