// Copyright Contributors to the splatlab Project
// SPDX-License-Identifier: Apache-2.0

#include "splat/scene.hpp"

#include "splat/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace splat {

void Scene::validate() const {
    const int degree = sh_degree();
    for (std::size_t i = 0; i < gaussians.size(); ++i) {
        const Gaussian& g = gaussians[i];
        auto check_finite = [&](double v, const char* field) {
            if (!std::isfinite(v))
                throw Error(ErrorKind::numeric,
                            fmt::format("splat {}: non-finite {}", i, field));
        };
        check_finite(g.position.x, "position");
        check_finite(g.position.y, "position");
        check_finite(g.position.z, "position");
        check_finite(g.log_scales.x, "log_scales");
        check_finite(g.log_scales.y, "log_scales");
        check_finite(g.log_scales.z, "log_scales");
        check_finite(g.opacity_logit, "opacity_logit");
        check_finite(g.rotation.w, "rotation");
        check_finite(g.rotation.x, "rotation");
        check_finite(g.rotation.y, "rotation");
        check_finite(g.rotation.z, "rotation");
        if (!(g.rotation.norm() > 1e-12))
            throw Error(ErrorKind::numeric,
                        fmt::format("splat {}: quaternion norm below 1e-12", i));
        if (g.sh.degree != degree)
            throw Error(ErrorKind::config,
                        fmt::format("splat {}: SH degree {} differs from scene degree {}", i,
                                    g.sh.degree, degree));
        if (g.sh.values.size() != g.sh.expected_size())
            throw Error(ErrorKind::config,
                        fmt::format("splat {}: SH value count {} does not match degree {}", i,
                                    g.sh.values.size(), g.sh.degree));
        for (double v : g.sh.values) check_finite(v, "sh");
    }
    if (target_mask) {
        const auto& idx = target_mask->indices;
        for (std::size_t k = 0; k < idx.size(); ++k) {
            if (idx[k] >= gaussians.size())
                throw Error(ErrorKind::bounds,
                            fmt::format("target mask index {} out of range (scene has {})",
                                        idx[k], gaussians.size()));
            if (k > 0 && idx[k] <= idx[k - 1])
                throw Error(ErrorKind::config, "target mask indices not sorted unique");
        }
    }
}

const std::vector<std::size_t>& select_splats(Scene& scene, const SelectionCriterion& criterion,
                                              const std::string& mask_name) {
    std::vector<std::size_t> indices;
    if (const auto* box = std::get_if<BoundingBox>(&criterion)) {
        if (!std::isfinite(box->min.x) || !std::isfinite(box->max.x) ||
            !std::isfinite(box->min.y) || !std::isfinite(box->max.y) ||
            !std::isfinite(box->min.z) || !std::isfinite(box->max.z))
            throw Error(ErrorKind::config, "selection box must be finite");
        for (std::size_t i = 0; i < scene.gaussians.size(); ++i)
            if (box->contains(scene.gaussians[i].position)) indices.push_back(i);
    } else {
        indices = std::get<std::vector<std::size_t>>(criterion);
        for (std::size_t i : indices)
            if (i >= scene.gaussians.size())
                throw Error(ErrorKind::bounds,
                            fmt::format("selection index {} out of range (scene has {})", i,
                                        scene.gaussians.size()));
        std::sort(indices.begin(), indices.end());
        indices.erase(std::unique(indices.begin(), indices.end()), indices.end());
    }
    scene.target_mask = TargetMask{mask_name, std::move(indices)};
    return scene.target_mask->indices;
}

} // namespace splat
