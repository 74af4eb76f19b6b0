// Copyright Contributors to the splatlab Project
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"
#include "splat/pose_rig.hpp"
#include "splat/renderer.hpp"

#include <omp.h>

#include <cmath>

using namespace splat;

namespace {

// A splat whose footprint covers the whole frame with near-constant alpha.
Gaussian full_coverage_splat(double opacity_logit, const Vec3& dc_color_offset) {
    Gaussian g;
    g.position = {0, 0, 0};
    g.log_scales = {std::log(1e5), std::log(1e5), std::log(1e5)};
    g.rotation = {1, 0, 0, 0};
    g.opacity_logit = opacity_logit;
    g.sh = ShCoefficients::zeros(0);
    // color = 0.5 + C0 * dc
    const double c0 = 0.28209479177387814;
    g.sh.values = {dc_color_offset.x / c0, dc_color_offset.y / c0, dc_color_offset.z / c0};
    return g;
}

Camera test_camera(int size = 16) {
    RigIntrinsics intr;
    intr.width = size;
    intr.height = size;
    return look_at_camera("cam", {0.0, 0.0, -3.0}, {0.0, 0.0, 0.0}, intr);
}

bool images_equal(const Image& a, const Image& b) {
    if (!a.same_shape(b)) return false;
    for (std::size_t i = 0; i < a.rgb.size(); ++i)
        if (a.rgb[i] != b.rgb[i]) return false;
    return true;
}

} // namespace

TEST_CASE("render: empty scene gives the background") {
    Scene scene;
    const Image img = render(scene, test_camera(), {});
    for (double v : img.rgb) CHECK(v == 0.0);

    RenderOptions opts;
    opts.background = {0.25, 0.5, 0.75};
    const Image img2 = render(scene, test_camera(), opts);
    for (int x = 0; x < img2.width; ++x) {
        CHECK(img2.at(x, 3, 0) == 0.25);
        CHECK(img2.at(x, 3, 1) == 0.5);
        CHECK(img2.at(x, 3, 2) == 0.75);
    }
}

TEST_CASE("render: saturated full-coverage splat with zero SH reads mid-gray") {
    Scene scene;
    scene.gaussians.push_back(full_coverage_splat(20.0, {0, 0, 0}));
    const Image img = render(scene, test_camera(), {});
    for (double v : img.rgb) CHECK(std::abs(v - 0.5) < 1.0 / 255.0);
}

TEST_CASE("render: two coincident half-opacity splats composite as 0.5f + 0.25b") {
    Scene scene;
    scene.gaussians.push_back(full_coverage_splat(0.0, {0.5, -0.5, -0.5})); // front: (1,0,0)
    scene.gaussians.push_back(full_coverage_splat(0.0, {-0.5, 0.5, -0.5})); // back: (0,1,0)
    const Image img = render(scene, test_camera(), {});
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            CHECK(img.at(x, y, 0) == doctest::Approx(0.5).epsilon(1e-6));
            CHECK(img.at(x, y, 1) == doctest::Approx(0.25).epsilon(1e-6));
            CHECK(img.at(x, y, 2) == doctest::Approx(0.0).epsilon(1e-6));
        }
}

TEST_CASE("render: depth order, not index order, wins") {
    // Red splat nearer the camera occludes green, regardless of insertion order.
    Scene scene;
    Gaussian red = full_coverage_splat(6.0, {0.5, -0.5, -0.5});
    Gaussian green = full_coverage_splat(6.0, {-0.5, 0.5, -0.5});
    red.position = {0, 0, -1.0};  // camera sits at z=-3 looking toward +z
    green.position = {0, 0, 1.0};
    scene.gaussians.push_back(green);
    scene.gaussians.push_back(red);
    const Image img = render(scene, test_camera(), {});
    CHECK(img.at(8, 8, 0) > 0.95);
    CHECK(img.at(8, 8, 1) < 0.05);
}

TEST_CASE("render: bit-identical across runs and thread counts") {
    const auto fx = test::random_guarded_scene(101, 8, 16);
    const int saved = omp_get_max_threads();
    omp_set_num_threads(1);
    const Image a = render(fx.scene, fx.camera, {});
    const Image a2 = render(fx.scene, fx.camera, {});
    omp_set_num_threads(8);
    const Image b = render(fx.scene, fx.camera, {});
    omp_set_num_threads(saved);
    CHECK(images_equal(a, a2));
    CHECK(images_equal(a, b));
}

TEST_CASE("render: parallel and serial reference agree") {
    for (std::uint64_t seed : {7ULL, 8ULL, 9ULL}) {
        const auto fx = test::random_guarded_scene(seed, 10, 24);
        RenderOptions opts;
        opts.background = {0.1, 0.2, 0.3};
        const Image fast = render(fx.scene, fx.camera, opts);
        const Image ref = render_reference(fx.scene, fx.camera, opts);
        REQUIRE(fast.same_shape(ref));
        for (std::size_t i = 0; i < fast.rgb.size(); ++i)
            CHECK(std::abs(fast.rgb[i] - ref.rgb[i]) < 1e-12);
    }
}

TEST_CASE("render: monotone occlusion") {
    // Raising a front splat's opacity never increases what shows through of
    // anything behind it: with front red and back green, the green component
    // must be non-increasing in the front logit.
    const Camera cam = test_camera();
    double previous_green = 1.0;
    for (double logit : {-2.0, -0.5, 0.0, 1.0, 3.0, 8.0}) {
        Scene scene;
        Gaussian front = full_coverage_splat(logit, {0.5, -0.5, -0.5});
        front.position = {0, 0, -0.5};
        Gaussian back = full_coverage_splat(4.0, {-0.5, 0.5, -0.5});
        scene.gaussians.push_back(front);
        scene.gaussians.push_back(back);
        const Image img = render(scene, cam, {});
        double green = 0.0;
        for (int y = 0; y < img.height; ++y)
            for (int x = 0; x < img.width; ++x) green = std::max(green, img.at(x, y, 1));
        CHECK(green <= previous_green + 1e-12);
        previous_green = green;
    }
}

TEST_CASE("render: degenerate covariance is skipped with a counter, not a fault") {
    Scene scene;
    Gaussian g = full_coverage_splat(2.0, {0, 0, 0});
    g.log_scales = {700.0, 700.0, 700.0}; // exp overflows -> non-finite cov2d
    scene.gaussians.push_back(g);
    RenderStats stats;
    const Image img = render(scene, test_camera(), {}, &stats);
    CHECK(stats.degenerate == 1);
    for (double v : img.rgb) CHECK(v == 0.0);
}

TEST_CASE("render: view-dependent color differs between opposing viewpoints") {
    Scene scene;
    Gaussian g;
    g.position = {0, 0, 0};
    g.log_scales = {std::log(0.4), std::log(0.4), std::log(0.4)};
    g.rotation = {1, 0, 0, 0};
    g.opacity_logit = 8.0;
    g.sh = ShCoefficients::zeros(1);
    g.sh.values[2 * 3 + 0] = 0.45; // z-linear band, R channel
    scene.gaussians.push_back(g);

    RigIntrinsics intr;
    intr.width = 32;
    intr.height = 32;
    const Camera front = look_at_camera("front", {0, 0, -3.0}, {0, 0, 0}, intr);
    const Camera behind = look_at_camera("behind", {0, 0, 3.0}, {0, 0, 0}, intr);
    const Image f = render(scene, front, {});
    const Image b = render(scene, behind, {});
    CHECK(std::abs(f.at(16, 16, 0) - b.at(16, 16, 0)) > 0.2);
    CHECK(std::abs(f.at(16, 16, 1) - b.at(16, 16, 1)) < 1e-9);
}
