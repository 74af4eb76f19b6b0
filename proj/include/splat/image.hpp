// Copyright Contributors to the splatlab Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "splat/vec.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace splat {

// Row-major RGB image, values nominally in [0,1]. Doubles internally; PNG
// quantization and the float32 dump happen only at the I/O boundary.
struct Image {
    int width = 0;
    int height = 0;
    std::vector<double> rgb; // 3 * width * height

    static Image filled(int width, int height, const Vec3& color) {
        Image img;
        img.width = width;
        img.height = height;
        img.rgb.resize(std::size_t(3) * width * height);
        for (std::size_t p = 0; p < std::size_t(width) * height; ++p) {
            img.rgb[p * 3 + 0] = color.x;
            img.rgb[p * 3 + 1] = color.y;
            img.rgb[p * 3 + 2] = color.z;
        }
        return img;
    }

    double& at(int x, int y, int channel) {
        return rgb[(std::size_t(y) * width + x) * 3 + channel];
    }
    double at(int x, int y, int channel) const {
        return rgb[(std::size_t(y) * width + x) * 3 + channel];
    }
    std::size_t pixel_count() const { return std::size_t(width) * height; }
    bool same_shape(const Image& o) const { return width == o.width && height == o.height; }
};

// Mean squared error over all pixels and channels. Throws Error{contract} on
// shape mismatch.
double mse(const Image& a, const Image& b);

// 10*log10(1/mse) for unit-range images; +infinity when mse is zero.
double psnr(const Image& a, const Image& b);

// 8-bit PNG with round-to-nearest quantization.
void write_png(const std::string& path, const Image& image);
Image read_png(const std::string& path);

// Lossless float32 dump: 16-byte header (u32 width, height, channels,
// reserved), then little-endian float32 samples row-major.
void write_float_dump(const std::string& path, const Image& image);
Image read_float_dump(const std::string& path);

} // namespace splat
