// Copyright Contributors to the splatlab Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "splat/core_math.hpp"
#include "splat/image.hpp"
#include "splat/pose_rig.hpp"
#include "splat/renderer.hpp"
#include "splat/rng.hpp"
#include "splat/scene.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

namespace splat::test {

// Rounds a double to the nearest float32 value. The volatile store keeps the
// narrowing conversion from being folded away at high optimization levels.
inline double round_to_float(double v) {
    volatile float f = static_cast<float>(v);
    return double(f);
}

// Unique writable directory per test run.
inline std::filesystem::path temp_dir(const std::string& tag) {
    auto dir = std::filesystem::temp_directory_path() /
               ("splatlab_" + tag + "_" + std::to_string(::getpid()));
    std::filesystem::create_directories(dir);
    return dir;
}

// Eigenvalues of a symmetric 3x3 via cyclic Jacobi rotations (test oracle).
inline std::array<double, 3> symmetric_eigenvalues(Mat3 a) {
    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = std::abs(a.m[0][1]) + std::abs(a.m[0][2]) + std::abs(a.m[1][2]);
        if (off < 1e-15) break;
        for (int p = 0; p < 3; ++p)
            for (int q = p + 1; q < 3; ++q) {
                if (std::abs(a.m[p][q]) < 1e-18) continue;
                const double theta = (a.m[q][q] - a.m[p][p]) / (2.0 * a.m[p][q]);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                Mat3 r = Mat3::identity();
                r.m[p][p] = c;
                r.m[q][q] = c;
                r.m[p][q] = s;
                r.m[q][p] = -s;
                a = r.transpose() * a * r;
            }
    }
    std::array<double, 3> ev{a.m[0][0], a.m[1][1], a.m[2][2]};
    std::sort(ev.begin(), ev.end());
    return ev;
}

inline Gaussian random_gaussian(Rng& rng, int degree) {
    Gaussian g;
    g.position = {rng.normal() * 0.4, rng.normal() * 0.4, rng.normal() * 0.4};
    g.log_scales = {rng.uniform(std::log(0.15), std::log(0.6)),
                    rng.uniform(std::log(0.15), std::log(0.6)),
                    rng.uniform(std::log(0.15), std::log(0.6))};
    g.rotation = {rng.normal(), rng.normal(), rng.normal(), rng.normal()};
    if (g.rotation.norm() < 0.1) g.rotation = {1, 0, 0, 0};
    g.opacity_logit = rng.uniform(-1.0, 1.5);
    g.sh = ShCoefficients::zeros(degree);
    for (int b = 0; b < sh_basis_count(degree); ++b)
        for (int ch = 0; ch < 3; ++ch)
            g.sh.values[std::size_t(b * 3 + ch)] =
                b == 0 ? rng.uniform(-0.6, 0.6) : rng.uniform(-0.15, 0.15);
    return g;
}

// A scene stays clear of the renderer's decision boundaries (ellipse cutoff,
// alpha floor, depth ties, clamp saturation, near plane) so central finite
// differences of the piecewise-smooth forward map are trustworthy.
inline bool clear_of_thresholds(const Scene& scene, const Camera& cam) {
    const Vec3 cam_center = cam.center();
    std::vector<double> depths;
    for (const Gaussian& g : scene.gaussians) {
        auto proj = project_gaussian(g.position, covariance_from(g.log_scales, g.rotation), cam);
        if (!proj) return false; // keep every splat in front for FD stability
        if (proj->depth < 0.5) return false;
        depths.push_back(proj->depth);
        const double det = proj->cov2d.det();
        if (!(det > 1e-6)) return false;

        const Vec3 pre = eval_sh_unclamped(g.sh, (g.position - cam_center).normalized());
        for (int ch = 0; ch < 3; ++ch) {
            const double v = ch == 0 ? pre.x : (ch == 1 ? pre.y : pre.z);
            if (v < 2e-3 || v > 1.0 - 2e-3) return false;
        }

        const double la = proj->cov2d.m[1][1] / det;
        const double lb = -proj->cov2d.m[0][1] / det;
        const double lc = proj->cov2d.m[0][0] / det;
        const double sigma = sigmoid(g.opacity_logit);
        for (int y = 0; y < cam.height; ++y)
            for (int x = 0; x < cam.width; ++x) {
                const double dx = x + 0.5 - proj->mean2d.x;
                const double dy = y + 0.5 - proj->mean2d.y;
                const double q = la * dx * dx + 2.0 * lb * dx * dy + lc * dy * dy;
                if (std::abs(q - kEllipseCutoff) < 0.05) return false;
                const double alpha = sigma * std::exp(-0.5 * q);
                if (std::abs(alpha / kAlphaFloor - 1.0) < 0.02) return false;
            }
    }
    std::sort(depths.begin(), depths.end());
    for (std::size_t i = 1; i < depths.size(); ++i)
        if (depths[i] - depths[i - 1] < 5e-4) return false;
    return true;
}

struct GuardedFixture {
    Scene scene;
    Camera camera;
};

// Deterministic: retries sub-seeds until the guards pass.
inline GuardedFixture random_guarded_scene(std::uint64_t seed, int max_splats, int image_size = 8) {
    RigIntrinsics intr;
    intr.width = image_size;
    intr.height = image_size;
    intr.fov_deg = 55.0;
    for (std::uint64_t attempt = 0;; ++attempt) {
        Rng rng(seed * 7919 + attempt);
        Camera cam = look_at_camera("fd", {3.0 * std::sin(0.3 + 0.1 * double(attempt % 7)),
                                           -1.0, 3.0 * std::cos(0.3)},
                                    {0, 0, 0}, intr);
        Scene scene;
        const int count = 2 + int(rng.uniform_index(std::size_t(max_splats - 1)));
        for (int i = 0; i < count; ++i) scene.gaussians.push_back(random_gaussian(rng, 3));
        if (clear_of_thresholds(scene, cam)) return {std::move(scene), std::move(cam)};
    }
}

inline Image random_adjoint(int width, int height, std::uint64_t seed) {
    Rng rng(seed);
    Image adj = Image::filled(width, height, {0, 0, 0});
    for (double& v : adj.rgb) v = rng.uniform(-1.0, 1.0);
    return adj;
}

inline double scalar_loss(const Scene& scene, const Camera& cam, const Image& adjoint,
                          const RenderOptions& opts) {
    const Image img = render(scene, cam, opts);
    double acc = 0.0;
    for (std::size_t i = 0; i < img.rgb.size(); ++i) acc += img.rgb[i] * adjoint.rgb[i];
    return acc;
}

// Central finite differences of scalar_loss against the analytic gradients,
// coordinate by coordinate, over the requested group.
struct FdReport {
    double max_rel_err = 0.0;
    std::size_t compared = 0;
};

template <typename GetSet>
void fd_check_coord(const Scene& scene, const Camera& cam, const Image& adjoint,
                    const RenderOptions& opts, double analytic, double h, GetSet&& access,
                    FdReport& report) {
    Scene work = scene;
    const double base = access(work, 0.0);
    access(work, base + h);
    const double up = scalar_loss(work, cam, adjoint, opts);
    access(work, base - h);
    const double down = scalar_loss(work, cam, adjoint, opts);
    access(work, base);
    const double fd = (up - down) / (2.0 * h);
    if (std::max(std::abs(analytic), std::abs(fd)) <= 1e-6) return;
    const double rel = std::abs(analytic - fd) / std::max(std::abs(analytic), std::abs(fd));
    report.max_rel_err = std::max(report.max_rel_err, rel);
    ++report.compared;
}

inline FdReport fd_check_all_groups(const Scene& scene, const Camera& cam, const Image& adjoint,
                                    const RenderOptions& opts, double h = 1e-4) {
    std::vector<std::size_t> mask(scene.gaussians.size());
    for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = i;
    const auto res = render_with_gradients(scene, cam, adjoint, mask, ParamGroupFlags::all(), opts);

    FdReport report;
    for (std::size_t i = 0; i < scene.gaussians.size(); ++i) {
        const auto& g = res.gradients.splats[i];
        for (int k = 0; k < 3; ++k)
            fd_check_coord(scene, cam, adjoint, opts,
                           k == 0 ? g.d_position.x : (k == 1 ? g.d_position.y : g.d_position.z), h,
                           [i, k](Scene& s, double v) -> double {
                               double* p = k == 0   ? &s.gaussians[i].position.x
                                           : k == 1 ? &s.gaussians[i].position.y
                                                    : &s.gaussians[i].position.z;
                               double old = *p;
                               *p = v;
                               return old;
                           },
                           report);
        for (std::size_t c = 0; c < g.d_sh.size(); ++c)
            fd_check_coord(scene, cam, adjoint, opts, g.d_sh[c], h,
                           [i, c](Scene& s, double v) -> double {
                               double old = s.gaussians[i].sh.values[c];
                               s.gaussians[i].sh.values[c] = v;
                               return old;
                           },
                           report);
        for (int k = 0; k < 3; ++k)
            fd_check_coord(scene, cam, adjoint, opts,
                           k == 0 ? g.d_log_scales.x
                                  : (k == 1 ? g.d_log_scales.y : g.d_log_scales.z),
                           h,
                           [i, k](Scene& s, double v) -> double {
                               double* p = k == 0   ? &s.gaussians[i].log_scales.x
                                           : k == 1 ? &s.gaussians[i].log_scales.y
                                                    : &s.gaussians[i].log_scales.z;
                               double old = *p;
                               *p = v;
                               return old;
                           },
                           report);
        for (int k = 0; k < 4; ++k)
            fd_check_coord(scene, cam, adjoint, opts, g.d_rotation[std::size_t(k)], h,
                           [i, k](Scene& s, double v) -> double {
                               double* p = k == 0   ? &s.gaussians[i].rotation.w
                                           : k == 1 ? &s.gaussians[i].rotation.x
                                           : k == 2 ? &s.gaussians[i].rotation.y
                                                    : &s.gaussians[i].rotation.z;
                               double old = *p;
                               *p = v;
                               return old;
                           },
                           report);
        fd_check_coord(scene, cam, adjoint, opts, g.d_opacity_logit, h,
                       [i](Scene& s, double v) -> double {
                           double old = s.gaussians[i].opacity_logit;
                           s.gaussians[i].opacity_logit = v;
                           return old;
                       },
                       report);
    }
    return report;
}

} // namespace splat::test
