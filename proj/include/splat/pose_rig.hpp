// Copyright Contributors to the splatlab Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "splat/camera.hpp"

#include <string>
#include <vector>

namespace splat {

// Camera rig helpers. World convention used by the rigs: the up direction is
// -y (so image-space +y, which points down, matches world +y for an upright
// camera and world_to_camera stays a proper rotation).

struct RigIntrinsics {
    int width = 64;
    int height = 64;
    double fov_deg = 50.0; // horizontal field of view
};

// Proper-rotation look-at pose; throws if eye coincides with target.
Camera look_at_camera(const std::string& pose_id, const Vec3& eye, const Vec3& target,
                      const RigIntrinsics& intr = {});

// Elevation/azimuth of the camera center as seen from the world origin, in
// degrees: elevation in [-90, 90] above the horizon plane, azimuth in
// [0, 360) measured from +z toward +x.
struct PoseAngles {
    double elevation_deg;
    double azimuth_deg;
};
PoseAngles pose_angles_of(const Camera& camera);

// Evenly spaced ring of cameras at a fixed elevation, all aimed at the
// origin. Pose ids are "<prefix>_<index>" with the ring's azimuth offset
// applied before spacing.
std::vector<Camera> make_ring(const std::string& prefix, double elevation_deg, int count,
                              double radius, double azimuth_offset_deg = 0.0,
                              const RigIntrinsics& intr = {});

// Arc of cameras spanning [azimuth_from, azimuth_to] inclusively.
std::vector<Camera> make_arc(const std::string& prefix, double elevation_deg, int count,
                             double radius, double azimuth_from_deg, double azimuth_to_deg,
                             const RigIntrinsics& intr = {});

} // namespace splat
