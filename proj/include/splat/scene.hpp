// Copyright Contributors to the splatlab Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "splat/core_math.hpp"
#include "splat/vec.hpp"

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace splat {

// One splat, raw (pre-activation) parameters: scales as logs, opacity as a
// logit, quaternion stored unnormalized. Activations are applied only inside
// the renderer so attacks perturb exactly what the scene file stores.
struct Gaussian {
    Vec3 position;
    ShCoefficients sh;
    Vec3 log_scales;
    Quat rotation;
    double opacity_logit = 0.0;
};

// Which raw parameter fields an operation touches. Order here is the
// canonical group order used by flattened parameter vectors.
struct ParamGroupFlags {
    bool position = false;
    bool sh = false;
    bool log_scales = false;
    bool rotation = false;
    bool opacity_logit = false;

    static ParamGroupFlags all() { return {true, true, true, true, true}; }
    bool any() const { return position || sh || log_scales || rotation || opacity_logit; }
};

struct TargetMask {
    std::string name;
    std::vector<std::size_t> indices; // sorted, unique, in range
};

struct Scene {
    std::vector<Gaussian> gaussians;
    std::optional<TargetMask> target_mask;

    // Common SH degree of all splats (scenes are uniform-degree; enforced by
    // validate and the loaders).
    int sh_degree() const { return gaussians.empty() ? 0 : gaussians.front().sh.degree; }

    // Throws Error{numeric/config/bounds} on non-finite fields, mixed SH
    // degrees, non-normalizable quaternions, or a bad target mask.
    void validate() const;
};

struct BoundingBox {
    Vec3 min;
    Vec3 max;

    bool contains(const Vec3& p) const {
        return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y && p.z >= min.z &&
               p.z <= max.z;
    }
    Vec3 diagonal() const { return max - min; }
};

using SelectionCriterion = std::variant<BoundingBox, std::vector<std::size_t>>;

// Resolves the criterion to a sorted duplicate-free index set and stores it
// as the scene's target mask. Throws Error{bounds} for out-of-range indices.
const std::vector<std::size_t>& select_splats(Scene& scene, const SelectionCriterion& criterion,
                                              const std::string& mask_name = "target");

// Scene PLY (binary little-endian, float32 properties, standard splat-export
// layout; see docs/file_formats.md).
Scene load_scene(const std::string& path);
void save_scene(const Scene& scene, const std::string& path);

} // namespace splat
