// Copyright Contributors to the splatlab Project
// SPDX-License-Identifier: Apache-2.0

#include "splat/core_math.hpp"
#include "splat/renderer.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace splat {

// Straight-line serial implementation of the forward contract. No blocking,
// no scratch reuse; useful as a second opinion in tests and as the baseline
// in the renderer benchmark.
Image render_reference(const Scene& scene, const Camera& camera, const RenderOptions& options) {
    camera.validate();
    const int used_degree = std::clamp(options.sh_degree_used, 0, scene.sh_degree());
    const Vec3 cam_center = camera.center();

    struct Visible {
        std::size_t index;
        Vec2 mean2d;
        double depth;
        double lam[3];
        double sigma;
        Vec3 color;
    };
    std::vector<Visible> visible;
    for (std::size_t i = 0; i < scene.gaussians.size(); ++i) {
        const Gaussian& g = scene.gaussians[i];
        const auto proj = project_gaussian(g.position, covariance_from(g.log_scales, g.rotation),
                                           camera, options.near_plane);
        if (!proj) continue;
        const double det = proj->cov2d.det();
        if (!(det > 0.0) || !std::isfinite(det)) continue;
        Visible v;
        v.index = i;
        v.mean2d = proj->mean2d;
        v.depth = proj->depth;
        v.lam[0] = proj->cov2d.m[1][1] / det;
        v.lam[1] = -proj->cov2d.m[0][1] / det;
        v.lam[2] = proj->cov2d.m[0][0] / det;
        v.sigma = sigmoid(g.opacity_logit);
        v.color = eval_sh(g.sh, (g.position - cam_center).normalized(), used_degree);
        visible.push_back(v);
    }
    std::sort(visible.begin(), visible.end(), [](const Visible& a, const Visible& b) {
        if (a.depth != b.depth) return a.depth < b.depth;
        return a.index < b.index;
    });

    Image img = Image::filled(camera.width, camera.height, {0, 0, 0});
    for (int y = 0; y < camera.height; ++y) {
        for (int x = 0; x < camera.width; ++x) {
            const double px = x + 0.5, py = y + 0.5;
            Vec3 c{0, 0, 0};
            double t = 1.0;
            for (const Visible& v : visible) {
                const double dx = px - v.mean2d.x;
                const double dy = py - v.mean2d.y;
                const double q =
                    v.lam[0] * dx * dx + 2.0 * v.lam[1] * dx * dy + v.lam[2] * dy * dy;
                if (q > kEllipseCutoff) continue;
                const double alpha = v.sigma * std::exp(-0.5 * q);
                if (alpha < kAlphaFloor) continue;
                c += v.color * (alpha * t);
                t *= 1.0 - alpha;
            }
            c += options.background * t;
            img.at(x, y, 0) = c.x;
            img.at(x, y, 1) = c.y;
            img.at(x, y, 2) = c.z;
        }
    }
    return img;
}

} // namespace splat
