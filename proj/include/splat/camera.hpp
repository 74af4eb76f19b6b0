// Copyright Contributors to the splatlab Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "splat/vec.hpp"

#include <string>
#include <vector>

namespace splat {

// Distortion-free pinhole camera. world_to_camera maps world points into a
// frame with +z forward, +x right, +y down; pixels are u = fx*x/z + cx,
// v = fy*y/z + cy with pixel (i,j) covering [i,i+1)x[j,j+1).
struct Camera {
    std::string pose_id;
    int width = 0;
    int height = 0;
    double fx = 0.0, fy = 0.0, cx = 0.0, cy = 0.0;
    Mat3 rotation;    // rotation block of world_to_camera
    Vec3 translation; // x_cam = rotation * x_world + translation

    Vec3 center() const { return rotation.transpose() * (-translation); }

    // Throws Error{config} on invalid intrinsics or a rotation block that is
    // not orthonormal within `rotation_tol`.
    void validate(double rotation_tol = 1e-4) const;
};

// Camera-set file: a JSON array of records
//   {pose_id, width, height, fx, fy, cx, cy, world_to_camera: [16 row-major]}
// (see docs/file_formats.md; a committed example lives in assets/).
std::vector<Camera> load_cameras(const std::string& path);
void save_cameras(const std::string& path, const std::vector<Camera>& cameras);

} // namespace splat
