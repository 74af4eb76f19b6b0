// Copyright Contributors to the splatlab Project
// SPDX-License-Identifier: Apache-2.0

#include "splat/camera.hpp"

#include "splat/error.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <set>

namespace splat {

void Camera::validate(double rotation_tol) const {
    if (width <= 0 || height <= 0)
        throw Error(ErrorKind::config,
                    fmt::format("camera '{}': non-positive image size", pose_id));
    if (!(fx > 0.0) || !(fy > 0.0))
        throw Error(ErrorKind::config,
                    fmt::format("camera '{}': focal lengths must be positive", pose_id));
    if (!(cx >= 0.0 && cx < width) || !(cy >= 0.0 && cy < height))
        throw Error(ErrorKind::config,
                    fmt::format("camera '{}': principal point outside image", pose_id));
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            if (!std::isfinite(rotation.m[i][j]))
                throw Error(ErrorKind::config,
                            fmt::format("camera '{}': non-finite rotation", pose_id));
    if (!std::isfinite(translation.x) || !std::isfinite(translation.y) ||
        !std::isfinite(translation.z))
        throw Error(ErrorKind::config,
                    fmt::format("camera '{}': non-finite translation", pose_id));
    // R R^T must be the identity within tolerance.
    const Mat3 rrt = rotation * rotation.transpose();
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            const double want = i == j ? 1.0 : 0.0;
            if (std::abs(rrt.m[i][j] - want) > rotation_tol)
                throw Error(ErrorKind::config,
                            fmt::format("camera '{}': rotation block not orthonormal "
                                        "(|R R^T - I| exceeds {})",
                                        pose_id, rotation_tol));
        }
}

namespace {

using nlohmann::json;

json camera_to_json(const Camera& c) {
    json w2c = json::array();
    const double bottom[4] = {0.0, 0.0, 0.0, 1.0};
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) w2c.push_back(c.rotation.m[i][j]);
        w2c.push_back(i == 0 ? c.translation.x : (i == 1 ? c.translation.y : c.translation.z));
    }
    for (double v : bottom) w2c.push_back(v);
    return json{{"pose_id", c.pose_id}, {"width", c.width},   {"height", c.height},
                {"fx", c.fx},           {"fy", c.fy},         {"cx", c.cx},
                {"cy", c.cy},           {"world_to_camera", w2c}};
}

Camera camera_from_json(const json& j) {
    Camera c;
    try {
        c.pose_id = j.at("pose_id").get<std::string>();
        c.width = j.at("width").get<int>();
        c.height = j.at("height").get<int>();
        c.fx = j.at("fx").get<double>();
        c.fy = j.at("fy").get<double>();
        c.cx = j.at("cx").get<double>();
        c.cy = j.at("cy").get<double>();
        const auto& w2c = j.at("world_to_camera");
        if (!w2c.is_array() || w2c.size() != 16)
            throw Error(ErrorKind::schema, "world_to_camera must hold 16 numbers");
        for (int i = 0; i < 3; ++i) {
            for (int k = 0; k < 3; ++k) c.rotation.m[i][k] = w2c[std::size_t(i * 4 + k)];
            const double t = w2c[std::size_t(i * 4 + 3)];
            (i == 0 ? c.translation.x : i == 1 ? c.translation.y : c.translation.z) = t;
        }
        for (int k = 0; k < 4; ++k) {
            const double want = k == 3 ? 1.0 : 0.0;
            if (std::abs(double(w2c[std::size_t(12 + k)]) - want) > 1e-9)
                throw Error(ErrorKind::schema,
                            fmt::format("camera '{}': world_to_camera bottom row must be "
                                        "(0,0,0,1)",
                                        c.pose_id));
        }
    } catch (const json::exception& e) {
        throw Error(ErrorKind::schema, fmt::format("bad camera record: {}", e.what()));
    }
    return c;
}

} // namespace

std::vector<Camera> load_cameras(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::io, fmt::format("cannot open camera file '{}'", path));
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw Error(ErrorKind::schema, fmt::format("camera file '{}': {}", path, e.what()));
    }
    if (!doc.is_array())
        throw Error(ErrorKind::schema,
                    fmt::format("camera file '{}' must hold a JSON array", path));

    std::vector<Camera> cameras;
    std::set<std::string> seen;
    for (const auto& entry : doc) {
        Camera c = camera_from_json(entry);
        c.validate(1e-4);
        if (!seen.insert(c.pose_id).second)
            throw Error(ErrorKind::config,
                        fmt::format("duplicate pose_id '{}' in '{}'", c.pose_id, path));
        cameras.push_back(std::move(c));
    }
    return cameras;
}

void save_cameras(const std::string& path, const std::vector<Camera>& cameras) {
    json doc = json::array();
    for (const Camera& c : cameras) doc.push_back(camera_to_json(c));
    std::ofstream out(path);
    if (!out)
        throw Error(ErrorKind::io, fmt::format("cannot open camera file '{}' for writing", path));
    out << doc.dump(2) << "\n";
    if (!out) throw Error(ErrorKind::io, fmt::format("write failed for '{}'", path));
}

} // namespace splat
