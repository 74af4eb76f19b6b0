// Copyright Contributors to the splatlab Project
// SPDX-License-Identifier: Apache-2.0

#include "splat/error.hpp"
#include "splat/scene.hpp"

#include <fmt/format.h>

#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace splat {

namespace {

static_assert(std::endian::native == std::endian::little,
              "PLY payload is written in host order");

int degree_for_rest_count(std::size_t rest) {
    for (int degree = 0; degree <= kMaxShDegree; ++degree)
        if (rest == std::size_t(3 * (sh_basis_count(degree) - 1))) return degree;
    return -1;
}

// Canonical property order for a given SH degree.
std::vector<std::string> canonical_properties(int degree) {
    std::vector<std::string> props = {"x", "y", "z", "nx", "ny", "nz",
                                      "f_dc_0", "f_dc_1", "f_dc_2"};
    const int rest = 3 * (sh_basis_count(degree) - 1);
    for (int i = 0; i < rest; ++i) props.push_back(fmt::format("f_rest_{}", i));
    props.insert(props.end(), {"opacity", "scale_0", "scale_1", "scale_2", "rot_0", "rot_1",
                               "rot_2", "rot_3"});
    return props;
}

} // namespace

Scene load_scene(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::io, fmt::format("cannot open scene file '{}'", path));

    std::string line;
    if (!std::getline(in, line) || line != "ply")
        throw Error(ErrorKind::schema, fmt::format("'{}' is not a PLY file", path));

    std::size_t vertex_count = 0;
    bool format_ok = false;
    bool in_vertex_element = false;
    std::vector<std::string> property_names;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::istringstream ls(line);
        std::string tok;
        ls >> tok;
        if (tok == "comment" || tok.empty()) continue;
        if (tok == "format") {
            std::string kind, version;
            ls >> kind >> version;
            if (kind != "binary_little_endian")
                throw Error(ErrorKind::schema,
                            fmt::format("unsupported PLY format '{}' (need binary_little_endian)",
                                        kind));
            format_ok = true;
        } else if (tok == "element") {
            std::string name;
            std::size_t count = 0;
            ls >> name >> count;
            if (name == "vertex") {
                vertex_count = count;
                in_vertex_element = true;
            } else {
                throw Error(ErrorKind::schema,
                            fmt::format("unsupported PLY element '{}'", name));
            }
        } else if (tok == "property") {
            if (!in_vertex_element) continue;
            std::string type, name;
            ls >> type >> name;
            if (type != "float")
                throw Error(ErrorKind::schema,
                            fmt::format("property '{}' has type '{}' (need float)", name, type));
            property_names.push_back(name);
        } else if (tok == "end_header") {
            break;
        }
    }
    if (!format_ok || !in_vertex_element)
        throw Error(ErrorKind::schema, fmt::format("incomplete PLY header in '{}'", path));

    std::map<std::string, std::size_t> column;
    for (std::size_t i = 0; i < property_names.size(); ++i) column[property_names[i]] = i;
    auto require = [&](const std::string& name) -> std::size_t {
        auto it = column.find(name);
        if (it == column.end())
            throw Error(ErrorKind::schema,
                        fmt::format("scene PLY missing property '{}'", name));
        return it->second;
    };

    std::size_t rest_count = 0;
    while (column.count(fmt::format("f_rest_{}", rest_count))) ++rest_count;
    const int degree = degree_for_rest_count(rest_count);
    if (degree < 0)
        throw Error(ErrorKind::schema,
                    fmt::format("unsupported f_rest count {} (expected 0, 9, 24 or 45)",
                                rest_count));
    const int basis = sh_basis_count(degree);

    const std::size_t col_x = require("x"), col_y = require("y"), col_z = require("z");
    const std::size_t col_dc[3] = {require("f_dc_0"), require("f_dc_1"), require("f_dc_2")};
    std::vector<std::size_t> col_rest(rest_count);
    for (std::size_t i = 0; i < rest_count; ++i) col_rest[i] = require(fmt::format("f_rest_{}", i));
    const std::size_t col_opacity = require("opacity");
    const std::size_t col_scale[3] = {require("scale_0"), require("scale_1"),
                                      require("scale_2")};
    const std::size_t col_rot[4] = {require("rot_0"), require("rot_1"), require("rot_2"),
                                    require("rot_3")};

    const std::size_t stride = property_names.size();
    std::vector<float> row(stride);
    Scene scene;
    scene.gaussians.reserve(vertex_count);
    for (std::size_t v = 0; v < vertex_count; ++v) {
        in.read(reinterpret_cast<char*>(row.data()), std::streamsize(stride * sizeof(float)));
        if (!in)
            throw Error(ErrorKind::corrupt,
                        fmt::format("truncated PLY payload in '{}' at vertex {}/{}", path, v,
                                    vertex_count));
        Gaussian g;
        g.position = {row[col_x], row[col_y], row[col_z]};
        g.sh.degree = degree;
        g.sh.values.resize(std::size_t(3 * basis));
        for (int ch = 0; ch < 3; ++ch) g.sh.values[std::size_t(ch)] = row[col_dc[ch]];
        // f_rest is planar channel-major: index ch*(basis-1) + (band_index-1).
        for (int b = 1; b < basis; ++b)
            for (int ch = 0; ch < 3; ++ch)
                g.sh.values[std::size_t(b * 3 + ch)] =
                    row[col_rest[std::size_t(ch * (basis - 1) + (b - 1))]];
        g.opacity_logit = row[col_opacity];
        g.log_scales = {row[col_scale[0]], row[col_scale[1]], row[col_scale[2]]};
        g.rotation = {row[col_rot[0]], row[col_rot[1]], row[col_rot[2]], row[col_rot[3]]};
        scene.gaussians.push_back(std::move(g));
    }
    scene.validate();
    return scene;
}

void save_scene(const Scene& scene, const std::string& path) {
    scene.validate();
    const int degree = scene.sh_degree();
    const int basis = sh_basis_count(degree);
    const auto props = canonical_properties(degree);

    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error(ErrorKind::io, fmt::format("cannot open scene file '{}' for writing", path));

    out << "ply\nformat binary_little_endian 1.0\n";
    out << "element vertex " << scene.gaussians.size() << "\n";
    for (const auto& p : props) out << "property float " << p << "\n";
    out << "end_header\n";

    std::vector<float> row(props.size());
    for (const Gaussian& g : scene.gaussians) {
        std::size_t c = 0;
        row[c++] = float(g.position.x);
        row[c++] = float(g.position.y);
        row[c++] = float(g.position.z);
        row[c++] = 0.0f; // normals written as zeros
        row[c++] = 0.0f;
        row[c++] = 0.0f;
        for (int ch = 0; ch < 3; ++ch) row[c++] = float(g.sh.values[std::size_t(ch)]);
        for (int ch = 0; ch < 3; ++ch)
            for (int b = 1; b < basis; ++b)
                row[c++] = float(g.sh.values[std::size_t(b * 3 + ch)]);
        row[c++] = float(g.opacity_logit);
        row[c++] = float(g.log_scales.x);
        row[c++] = float(g.log_scales.y);
        row[c++] = float(g.log_scales.z);
        row[c++] = float(g.rotation.w);
        row[c++] = float(g.rotation.x);
        row[c++] = float(g.rotation.y);
        row[c++] = float(g.rotation.z);
        out.write(reinterpret_cast<const char*>(row.data()),
                  std::streamsize(row.size() * sizeof(float)));
    }
    if (!out) throw Error(ErrorKind::io, fmt::format("write failed for '{}'", path));
}

} // namespace splat
