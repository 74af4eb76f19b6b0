// Copyright Contributors to the splatlab Project
// SPDX-License-Identifier: Apache-2.0

#include "splat/pose_rig.hpp"

#include "splat/error.hpp"

#include <fmt/format.h>

#include <cmath>
#include <numbers>

namespace splat {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kRadToDeg = 180.0 / std::numbers::pi;

// World down direction (up is -y; see header).
constexpr Vec3 kWorldDown{0.0, 1.0, 0.0};

} // namespace

Camera look_at_camera(const std::string& pose_id, const Vec3& eye, const Vec3& target,
                      const RigIntrinsics& intr) {
    const Vec3 to_target = target - eye;
    if (!(to_target.norm() > 1e-12))
        throw Error(ErrorKind::config,
                    fmt::format("camera '{}': eye coincides with target", pose_id));
    const Vec3 forward = to_target.normalized();

    Vec3 down_hint = kWorldDown;
    if (std::abs(forward.dot(down_hint)) > 0.999) down_hint = {1.0, 0.0, 0.0};
    const Vec3 right = down_hint.cross(forward).normalized();
    const Vec3 down = forward.cross(right); // unit: forward and right orthonormal

    Camera cam;
    cam.pose_id = pose_id;
    cam.width = intr.width;
    cam.height = intr.height;
    cam.fx = 0.5 * intr.width / std::tan(0.5 * intr.fov_deg * kDegToRad);
    cam.fy = cam.fx;
    cam.cx = 0.5 * intr.width;
    cam.cy = 0.5 * intr.height;
    cam.rotation.m[0][0] = right.x;
    cam.rotation.m[0][1] = right.y;
    cam.rotation.m[0][2] = right.z;
    cam.rotation.m[1][0] = down.x;
    cam.rotation.m[1][1] = down.y;
    cam.rotation.m[1][2] = down.z;
    cam.rotation.m[2][0] = forward.x;
    cam.rotation.m[2][1] = forward.y;
    cam.rotation.m[2][2] = forward.z;
    cam.translation = cam.rotation * (-eye);
    cam.validate(1e-9);
    return cam;
}

PoseAngles pose_angles_of(const Camera& camera) {
    const Vec3 c = camera.center();
    const double r = c.norm();
    double el = 0.0, az = 0.0;
    if (r > 1e-12) {
        double s = -c.y / r; // up is -y
        s = s < -1.0 ? -1.0 : (s > 1.0 ? 1.0 : s);
        el = std::asin(s) * kRadToDeg;
        az = std::atan2(c.x, c.z) * kRadToDeg;
        if (az < 0.0) az += 360.0;
    }
    return {el, az};
}

namespace {

Vec3 hemisphere_point(double elevation_deg, double azimuth_deg, double radius) {
    const double el = elevation_deg * kDegToRad;
    const double az = azimuth_deg * kDegToRad;
    return {radius * std::cos(el) * std::sin(az), -radius * std::sin(el),
            radius * std::cos(el) * std::cos(az)};
}

} // namespace

std::vector<Camera> make_ring(const std::string& prefix, double elevation_deg, int count,
                              double radius, double azimuth_offset_deg,
                              const RigIntrinsics& intr) {
    std::vector<Camera> cams;
    cams.reserve(std::size_t(count));
    for (int i = 0; i < count; ++i) {
        const double az = azimuth_offset_deg + 360.0 * i / count;
        cams.push_back(look_at_camera(fmt::format("{}_{:03d}", prefix, i),
                                      hemisphere_point(elevation_deg, az, radius),
                                      {0.0, 0.0, 0.0}, intr));
    }
    return cams;
}

std::vector<Camera> make_arc(const std::string& prefix, double elevation_deg, int count,
                             double radius, double azimuth_from_deg, double azimuth_to_deg,
                             const RigIntrinsics& intr) {
    std::vector<Camera> cams;
    cams.reserve(std::size_t(count));
    for (int i = 0; i < count; ++i) {
        const double f = count == 1 ? 0.5 : double(i) / (count - 1);
        const double az = azimuth_from_deg + f * (azimuth_to_deg - azimuth_from_deg);
        cams.push_back(look_at_camera(fmt::format("{}_{:03d}", prefix, i),
                                      hemisphere_point(elevation_deg, az, radius),
                                      {0.0, 0.0, 0.0}, intr));
    }
    return cams;
}

} // namespace splat
