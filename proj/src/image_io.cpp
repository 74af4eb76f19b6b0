// Copyright Contributors to the splatlab Project
// SPDX-License-Identifier: Apache-2.0

#include "splat/error.hpp"
#include "splat/image.hpp"

#include <fmt/format.h>
#include <png.h>

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <memory>

namespace splat {

double mse(const Image& a, const Image& b) {
    if (!a.same_shape(b))
        throw Error(ErrorKind::contract,
                    fmt::format("image shape mismatch: {}x{} vs {}x{}", a.width, a.height,
                                b.width, b.height));
    double acc = 0.0;
    for (std::size_t i = 0; i < a.rgb.size(); ++i) {
        double d = a.rgb[i] - b.rgb[i];
        acc += d * d;
    }
    return a.rgb.empty() ? 0.0 : acc / double(a.rgb.size());
}

double psnr(const Image& a, const Image& b) {
    double e = mse(a, b);
    if (e <= 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(1.0 / e);
}

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

std::uint8_t quantize(double v) {
    double c = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
    return std::uint8_t(std::lround(c * 255.0));
}

} // namespace

void write_png(const std::string& path, const Image& image) {
    FilePtr fp(std::fopen(path.c_str(), "wb"));
    if (!fp) throw Error(ErrorKind::io, fmt::format("cannot open '{}' for writing", path));

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        throw Error(ErrorKind::io, "libpng initialization failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw Error(ErrorKind::io, fmt::format("PNG write failed for '{}'", path));
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, png_uint_32(image.width), png_uint_32(image.height), 8,
                 PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);

    std::vector<std::uint8_t> row(std::size_t(image.width) * 3);
    for (int y = 0; y < image.height; ++y) {
        for (int x = 0; x < image.width; ++x)
            for (int c = 0; c < 3; ++c) row[std::size_t(x) * 3 + c] = quantize(image.at(x, y, c));
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

Image read_png(const std::string& path) {
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp) throw Error(ErrorKind::io, fmt::format("cannot open '{}'", path));

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw Error(ErrorKind::io, "libpng initialization failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw Error(ErrorKind::corrupt, fmt::format("PNG read failed for '{}'", path));
    }
    png_init_io(png, fp.get());
    png_read_info(png, info);

    // Normalize any input layout to 8-bit RGB.
    png_set_expand(png);
    png_set_strip_16(png);
    png_set_strip_alpha(png);
    png_set_gray_to_rgb(png);
    png_read_update_info(png, info);

    Image image;
    image.width = int(png_get_image_width(png, info));
    image.height = int(png_get_image_height(png, info));
    image.rgb.resize(std::size_t(3) * image.width * image.height);

    std::vector<std::uint8_t> row(png_get_rowbytes(png, info));
    for (int y = 0; y < image.height; ++y) {
        png_read_row(png, row.data(), nullptr);
        for (int x = 0; x < image.width; ++x)
            for (int c = 0; c < 3; ++c)
                image.at(x, y, c) = double(row[std::size_t(x) * 3 + c]) / 255.0;
    }
    png_destroy_read_struct(&png, &info, nullptr);
    return image;
}

namespace {

void put_u32(std::ofstream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::ifstream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    return std::uint32_t(b[0]) | std::uint32_t(b[1]) << 8 | std::uint32_t(b[2]) << 16 |
           std::uint32_t(b[3]) << 24;
}

static_assert(sizeof(float) == 4 && std::numeric_limits<float>::is_iec559);
static_assert(std::endian::native == std::endian::little,
              "raw float payloads are written in host order");

} // namespace

void write_float_dump(const std::string& path, const Image& image) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::io, fmt::format("cannot open '{}' for writing", path));
    put_u32(out, std::uint32_t(image.width));
    put_u32(out, std::uint32_t(image.height));
    put_u32(out, 3);
    put_u32(out, 0);
    std::vector<float> data(image.rgb.size());
    for (std::size_t i = 0; i < image.rgb.size(); ++i) data[i] = float(image.rgb[i]);
    out.write(reinterpret_cast<const char*>(data.data()),
              std::streamsize(data.size() * sizeof(float)));
    if (!out) throw Error(ErrorKind::io, fmt::format("write failed for '{}'", path));
}

Image read_float_dump(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::io, fmt::format("cannot open '{}'", path));
    Image image;
    image.width = int(get_u32(in));
    image.height = int(get_u32(in));
    std::uint32_t channels = get_u32(in);
    get_u32(in); // reserved
    if (!in || channels != 3 || image.width <= 0 || image.height <= 0)
        throw Error(ErrorKind::corrupt, fmt::format("bad float dump header in '{}'", path));
    std::vector<float> data(std::size_t(3) * image.width * image.height);
    in.read(reinterpret_cast<char*>(data.data()), std::streamsize(data.size() * sizeof(float)));
    if (!in)
        throw Error(ErrorKind::corrupt, fmt::format("truncated float dump '{}'", path));
    image.rgb.assign(data.begin(), data.end());
    return image;
}

} // namespace splat
