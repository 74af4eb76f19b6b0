// Copyright Contributors to the splatlab Project
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"
#include "splat/error.hpp"
#include "splat/image.hpp"
#include "splat/rng.hpp"

#include <filesystem>
#include <fstream>

using namespace splat;

TEST_CASE("float dump round-trips bit-exactly") {
    const auto dir = test::temp_dir("imageio");
    Rng rng(5);
    Image img = Image::filled(13, 7, {0, 0, 0});
    for (double& v : img.rgb) v = double(float(rng.uniform(-2.0, 2.0)));

    const auto path = (dir / "img.f32").string();
    write_float_dump(path, img);
    const Image back = read_float_dump(path);
    REQUIRE(back.same_shape(img));
    for (std::size_t i = 0; i < img.rgb.size(); ++i) CHECK(back.rgb[i] == img.rgb[i]);

    // Re-dumping produces identical bytes.
    const auto path2 = (dir / "img2.f32").string();
    write_float_dump(path2, back);
    std::ifstream a(path, std::ios::binary), b(path2, std::ios::binary);
    std::string sa((std::istreambuf_iterator<char>(a)), {});
    std::string sb((std::istreambuf_iterator<char>(b)), {});
    CHECK(sa == sb);
}

TEST_CASE("float dump rejects truncation") {
    const auto dir = test::temp_dir("imageio_trunc");
    const auto path = (dir / "img.f32").string();
    write_float_dump(path, Image::filled(4, 4, {0.5, 0.5, 0.5}));
    std::filesystem::resize_file(path, 16 + 10);
    CHECK_THROWS_AS(read_float_dump(path), Error);
}

TEST_CASE("png round-trip quantizes to the nearest 8-bit level") {
    const auto dir = test::temp_dir("png");
    Image img = Image::filled(8, 8, {0, 0, 0});
    // Values straddling quantization boundaries, plus out-of-range ones.
    const double vals[] = {0.0, 1.0, 0.5, 2.0 / 255.0, 0.2499 / 255.0 * 255.0, -0.3, 1.7};
    for (std::size_t i = 0; i < img.rgb.size(); ++i) img.rgb[i] = vals[i % 7];
    const auto path = (dir / "img.png").string();
    write_png(path, img);
    const Image back = read_png(path);
    REQUIRE(back.same_shape(img));
    for (std::size_t i = 0; i < img.rgb.size(); ++i) {
        const double clamped = std::clamp(img.rgb[i], 0.0, 1.0);
        const double want = std::round(clamped * 255.0) / 255.0;
        CHECK(back.rgb[i] == doctest::Approx(want).epsilon(1e-12));
    }
}

TEST_CASE("psnr: identical images give +infinity, known mse gives known psnr") {
    const Image a = Image::filled(6, 6, {0.25, 0.5, 0.75});
    CHECK(std::isinf(psnr(a, a)));
    Image b = a;
    for (double& v : b.rgb) v += 0.1;
    CHECK(mse(a, b) == doctest::Approx(0.01).epsilon(1e-12));
    CHECK(psnr(a, b) == doctest::Approx(20.0).epsilon(1e-9));
}

TEST_CASE("mse rejects shape mismatch") {
    CHECK_THROWS_AS(mse(Image::filled(2, 2, {0, 0, 0}), Image::filled(3, 2, {0, 0, 0})), Error);
}
