// Copyright Contributors to the splatlab Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "splat/camera.hpp"
#include "splat/image.hpp"
#include "splat/scene.hpp"

#include <array>
#include <cstddef>
#include <vector>

namespace splat {

// Rasterization thresholds, kept in one place. Splats are skipped at a pixel
// beyond the 3-sigma ellipse or once their effective alpha drops below the
// 8-bit quantization floor.
inline constexpr double kAlphaFloor = 1.0 / 255.0;
inline constexpr double kEllipseCutoff = 9.0; // squared Mahalanobis distance

struct RenderOptions {
    Vec3 background{0.0, 0.0, 0.0};
    int sh_degree_used = kMaxShDegree; // clamped to the scene's degree
    double near_plane = 0.01;
};

struct RenderStats {
    std::size_t culled = 0;     // behind the near plane
    std::size_t degenerate = 0; // cov2d not invertible after dilation
};

// Per-splat gradients, shaped exactly like the scene's parameters. Splats
// outside the requested mask (and groups left unflagged) are exactly zero.
struct SceneGradients {
    struct SplatGrad {
        Vec3 d_position;
        std::vector<double> d_sh;
        Vec3 d_log_scales;
        std::array<double, 4> d_rotation{0, 0, 0, 0};
        double d_opacity_logit = 0.0;
    };
    std::vector<SplatGrad> splats;

    static SceneGradients zeros_like(const Scene& scene);
};

// Deterministic forward rasterization: depth-sorted (ties by splat index)
// front-to-back alpha compositing with per-splat SH color. Bit-identical
// across runs and thread counts.
Image render(const Scene& scene, const Camera& camera, const RenderOptions& options = {},
             RenderStats* stats = nullptr);

// Plain serial implementation of the same contract, kept as a comparison
// point for tests and the benchmark. Matches `render` to ~1e-12 (it orders
// some floating-point reductions differently).
Image render_reference(const Scene& scene, const Camera& camera,
                       const RenderOptions& options = {});

struct RenderGradResult {
    Image image; // identical to render()
    SceneGradients gradients;
    RenderStats stats;
};

// Exact reverse-mode derivative of the forward compositing (through SH
// evaluation, activations and projection), contracted with a pixel-space
// adjoint. Only splats listed in `mask` and parameter groups flagged in
// `groups` receive gradients; everything else is exactly zero.
//
// Gradient accumulation runs over fixed-size row blocks that are reduced in
// ascending order, so results are bit-identical for any thread count.
RenderGradResult render_with_gradients(const Scene& scene, const Camera& camera,
                                       const Image& adjoint,
                                       const std::vector<std::size_t>& mask,
                                       const ParamGroupFlags& groups,
                                       const RenderOptions& options = {});

} // namespace splat
