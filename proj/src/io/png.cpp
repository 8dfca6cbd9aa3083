// Copyright 2026 The relit Authors
// SPDX-License-Identifier: Apache-2.0
#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstring>

#include "relit/core/error.hpp"
#include "relit/io/image_io.hpp"

namespace relit::io {
namespace {

void on_write(png_structp png, png_bytep data, png_size_t len) {
    auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
    out->insert(out->end(), data, data + len);
}

struct ReadCursor {
    const std::vector<std::uint8_t>* bytes;
    std::size_t pos;
};

void on_read(png_structp png, png_bytep data, png_size_t len) {
    auto* cur = static_cast<ReadCursor*>(png_get_io_ptr(png));
    if (cur->pos + len > cur->bytes->size()) png_error(png, "truncated PNG");
    std::memcpy(data, cur->bytes->data() + cur->pos, len);
    cur->pos += len;
}

std::uint8_t quantize(float v) {
    return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f));
}

}  // namespace

std::vector<std::uint8_t> encode_png(const Image& img) {
    std::vector<std::uint8_t> out;
    std::vector<std::uint8_t> row;
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw Error("PNG encoding failed");
    }
    png_set_write_fn(png, &out, on_write, nullptr);
    row.resize(static_cast<std::size_t>(img.width) * 3);
    png_set_IHDR(png, info, static_cast<png_uint_32>(img.width), static_cast<png_uint_32>(img.height), 8,
                 PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int y = 0; y < img.height; ++y) {
        for (std::size_t i = 0; i < row.size(); ++i) row[i] = quantize(img.data[img.index(0, y) + i]);
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    return out;
}

Image decode_png(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) throw Error("not a PNG image");
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    Image img;
    std::vector<std::uint8_t> row;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw Error("corrupt PNG image");
    }
    ReadCursor cur{&bytes, 0};
    png_set_read_fn(png, &cur, on_read);
    png_read_info(png, info);
    png_set_expand(png);
    png_set_strip_16(png);
    png_set_strip_alpha(png);
    png_set_gray_to_rgb(png);
    png_read_update_info(png, info);
    const int w = static_cast<int>(png_get_image_width(png, info));
    const int h = static_cast<int>(png_get_image_height(png, info));
    img = Image(w, h);
    row.resize(png_get_rowbytes(png, info));
    for (int y = 0; y < h; ++y) {
        png_read_row(png, row.data(), nullptr);
        for (int i = 0; i < w * 3; ++i) img.data[img.index(0, y) + i] = row[i] / 255.0f;
    }
    png_destroy_read_struct(&png, &info, nullptr);
    return img;
}

void write_png(const std::filesystem::path& path, const Image& img) { write_file(path, encode_png(img)); }

Image read_png(const std::filesystem::path& path) {
    try {
        return decode_png(read_file(path));
    } catch (const IoError&) {
        throw;
    } catch (const Error& e) {
        throw IoError(path.string(), e.what());
    }
}

}  // namespace relit::io
