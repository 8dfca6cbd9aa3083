// Copyright 2026 The relit Authors
// SPDX-License-Identifier: Apache-2.0
#include <array>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>

#include "relit/core/error.hpp"
#include "relit/io/image_io.hpp"

namespace relit::io {
namespace {

std::array<std::uint8_t, 4> to_rgbe(float r, float g, float b) {
    const float m = std::max({r, g, b});
    if (m < 1e-32f) return {0, 0, 0, 0};
    int e = 0;
    const float f = std::frexp(m, &e) * 256.0f / m;
    return {static_cast<std::uint8_t>(r * f), static_cast<std::uint8_t>(g * f), static_cast<std::uint8_t>(b * f),
            static_cast<std::uint8_t>(e + 128)};
}

void from_rgbe(const std::uint8_t* in, float* out) {
    if (in[3] == 0) {
        out[0] = out[1] = out[2] = 0.0f;
        return;
    }
    const float f = std::ldexp(1.0f, static_cast<int>(in[3]) - (128 + 8));
    for (int c = 0; c < 3; ++c) out[c] = (static_cast<float>(in[c]) + 0.5f) * f;
}

}  // namespace

void write_rgbe(const std::filesystem::path& path, const Image& img) {
    std::string header = "#?RADIANCE\nFORMAT=32-bit_rle_rgbe\n\n-Y " + std::to_string(img.height) + " +X " +
                         std::to_string(img.width) + "\n";
    std::vector<std::uint8_t> bytes(header.begin(), header.end());
    bytes.reserve(bytes.size() + img.pixel_count() * 4);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            auto q = to_rgbe(img.at(x, y, 0), img.at(x, y, 1), img.at(x, y, 2));
            bytes.insert(bytes.end(), q.begin(), q.end());
        }
    write_file(path, bytes);
}

Image read_rgbe(const std::filesystem::path& path) {
    const auto bytes = read_file(path);
    const std::string p = path.string();
    std::size_t pos = 0;
    auto line = [&]() {
        std::string s;
        while (pos < bytes.size() && bytes[pos] != '\n') s += static_cast<char>(bytes[pos++]);
        if (pos >= bytes.size()) throw IoError(p, "truncated Radiance header");
        ++pos;
        return s;
    };
    const std::string magic = line();
    if (magic.rfind("#?", 0) != 0) throw IoError(p, "not a Radiance HDR file");
    while (true) {
        const std::string s = line();
        if (s.empty()) break;
        if (s.rfind("FORMAT=", 0) == 0 && s != "FORMAT=32-bit_rle_rgbe") throw IoError(p, "unsupported format " + s);
    }
    int width = 0, height = 0;
    {
        const std::string res = line();
        char ya[3] = {}, xa[3] = {};
        if (std::sscanf(res.c_str(), "%2s %d %2s %d", ya, &height, xa, &width) != 4 || std::string(ya) != "-Y" ||
            std::string(xa) != "+X" || width <= 0 || height <= 0)
            throw IoError(p, "unsupported resolution line '" + res + "'");
    }

    Image img(width, height);
    std::vector<std::uint8_t> scan(static_cast<std::size_t>(width) * 4);
    auto need = [&](std::size_t n) {
        if (pos + n > bytes.size()) throw IoError(p, "truncated Radiance pixel data");
    };
    for (int y = 0; y < height; ++y) {
        need(4);
        const bool rle = width >= 8 && width < 32768 && bytes[pos] == 2 && bytes[pos + 1] == 2 &&
                         ((bytes[pos + 2] << 8) | bytes[pos + 3]) == width;
        if (rle) {
            pos += 4;
            for (int c = 0; c < 4; ++c) {
                int x = 0;
                while (x < width) {
                    need(1);
                    int count = bytes[pos++];
                    if (count > 128) {
                        count -= 128;
                        need(1);
                        const std::uint8_t v = bytes[pos++];
                        if (x + count > width) throw IoError(p, "bad RLE run");
                        for (int i = 0; i < count; ++i) scan[static_cast<std::size_t>(x++) * 4 + c] = v;
                    } else {
                        if (count == 0 || x + count > width) throw IoError(p, "bad RLE run");
                        need(static_cast<std::size_t>(count));
                        for (int i = 0; i < count; ++i) scan[static_cast<std::size_t>(x++) * 4 + c] = bytes[pos++];
                    }
                }
            }
        } else {
            need(scan.size());
            std::copy(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                      bytes.begin() + static_cast<std::ptrdiff_t>(pos + scan.size()), scan.begin());
            pos += scan.size();
        }
        for (int x = 0; x < width; ++x) from_rgbe(&scan[static_cast<std::size_t>(x) * 4], &img.at(x, y, 0));
    }
    return img;
}

}  // namespace relit::io
