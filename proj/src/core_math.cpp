// Copyright Contributors to the splatlab Project
// SPDX-License-Identifier: Apache-2.0

#include "splat/core_math.hpp"

#include "splat/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cassert>
#include <cmath>

namespace splat {

namespace {

// Real SH normalization constants, bands 0..3, matching the convention of
// common splat-scene exports.
constexpr double kC0 = 0.28209479177387814;
constexpr double kC1 = 0.4886025119029199;
constexpr double kC2[5] = {1.0925484305920792, -1.0925484305920792, 0.31539156525252005,
                           -1.0925484305920792, 0.5462742152960396};
constexpr double kC3[7] = {-0.5900435899266435, 2.890611442640554,  -0.4570457994644658,
                           0.3731763325901154,  -0.4570457994644658, 1.445305721320277,
                           -0.5900435899266435};

} // namespace

void sh_basis(int degree, const Vec3& dir, double* out) {
    const double x = dir.x, y = dir.y, z = dir.z;
    out[0] = kC0;
    if (degree < 1) return;
    out[1] = -kC1 * y;
    out[2] = kC1 * z;
    out[3] = -kC1 * x;
    if (degree < 2) return;
    const double xx = x * x, yy = y * y, zz = z * z;
    const double xy = x * y, yz = y * z, xz = x * z;
    out[4] = kC2[0] * xy;
    out[5] = kC2[1] * yz;
    out[6] = kC2[2] * (2.0 * zz - xx - yy);
    out[7] = kC2[3] * xz;
    out[8] = kC2[4] * (xx - yy);
    if (degree < 3) return;
    out[9] = kC3[0] * y * (3.0 * xx - yy);
    out[10] = kC3[1] * xy * z;
    out[11] = kC3[2] * y * (4.0 * zz - xx - yy);
    out[12] = kC3[3] * z * (2.0 * zz - 3.0 * xx - 3.0 * yy);
    out[13] = kC3[4] * x * (4.0 * zz - xx - yy);
    out[14] = kC3[5] * z * (xx - yy);
    out[15] = kC3[6] * x * (xx - 3.0 * yy);
}

void sh_basis_with_grad(int degree, const Vec3& dir, double* out, Vec3* grad_out) {
    sh_basis(degree, dir, out);
    const double x = dir.x, y = dir.y, z = dir.z;
    grad_out[0] = {0, 0, 0};
    if (degree < 1) return;
    grad_out[1] = {0, -kC1, 0};
    grad_out[2] = {0, 0, kC1};
    grad_out[3] = {-kC1, 0, 0};
    if (degree < 2) return;
    const double xx = x * x, yy = y * y, zz = z * z;
    grad_out[4] = {kC2[0] * y, kC2[0] * x, 0};
    grad_out[5] = {0, kC2[1] * z, kC2[1] * y};
    grad_out[6] = {-2.0 * kC2[2] * x, -2.0 * kC2[2] * y, 4.0 * kC2[2] * z};
    grad_out[7] = {kC2[3] * z, 0, kC2[3] * x};
    grad_out[8] = {2.0 * kC2[4] * x, -2.0 * kC2[4] * y, 0};
    if (degree < 3) return;
    grad_out[9] = {kC3[0] * 6.0 * x * y, kC3[0] * (3.0 * xx - 3.0 * yy), 0};
    grad_out[10] = {kC3[1] * y * z, kC3[1] * x * z, kC3[1] * x * y};
    grad_out[11] = {kC3[2] * -2.0 * x * y, kC3[2] * (4.0 * zz - xx - 3.0 * yy),
                    kC3[2] * 8.0 * y * z};
    grad_out[12] = {kC3[3] * -6.0 * x * z, kC3[3] * -6.0 * y * z,
                    kC3[3] * (6.0 * zz - 3.0 * xx - 3.0 * yy)};
    grad_out[13] = {kC3[4] * (4.0 * zz - 3.0 * xx - yy), kC3[4] * -2.0 * x * y,
                    kC3[4] * 8.0 * x * z};
    grad_out[14] = {kC3[5] * 2.0 * x * z, kC3[5] * -2.0 * y * z, kC3[5] * (xx - yy)};
    grad_out[15] = {kC3[6] * (3.0 * xx - 3.0 * yy), kC3[6] * -6.0 * x * y, 0};
}

Vec3 eval_sh_unclamped(const ShCoefficients& coeffs, const Vec3& dir, int max_degree) {
    const int degree = std::min(coeffs.degree, max_degree);
    double basis[16];
    sh_basis(degree, dir, basis);
    Vec3 rgb{0.5, 0.5, 0.5};
    const int n = sh_basis_count(degree);
    for (int b = 0; b < n; ++b) {
        rgb.x += basis[b] * coeffs.values[std::size_t(b * 3 + 0)];
        rgb.y += basis[b] * coeffs.values[std::size_t(b * 3 + 1)];
        rgb.z += basis[b] * coeffs.values[std::size_t(b * 3 + 2)];
    }
    return rgb;
}

Vec3 eval_sh(const ShCoefficients& coeffs, const Vec3& dir, int max_degree) {
    if (coeffs.values.size() != coeffs.expected_size())
        throw Error(ErrorKind::contract,
                    fmt::format("SH coefficient count {} does not match degree {}",
                                coeffs.values.size(), coeffs.degree));
    for (double v : coeffs.values)
        if (!std::isfinite(v))
            throw Error(ErrorKind::numeric, "non-finite SH coefficient");
    assert(std::abs(dir.norm() - 1.0) < 1e-6);
    Vec3 rgb = eval_sh_unclamped(coeffs, dir, max_degree);
    return {std::clamp(rgb.x, 0.0, 1.0), std::clamp(rgb.y, 0.0, 1.0),
            std::clamp(rgb.z, 0.0, 1.0)};
}

Quat normalize_quat(const Quat& q) {
    double n = q.norm();
    if (!(n > 1e-12))
        throw Error(ErrorKind::numeric, "degenerate rotation: quaternion norm below 1e-12");
    // Already-unit fast path keeps normalization idempotent bit-for-bit.
    if (std::abs(n - 1.0) <= 1e-12) return q;
    return {q.w / n, q.x / n, q.y / n, q.z / n};
}

Mat3 rotation_from_unit_quat(const Quat& q) {
    const double w = q.w, x = q.x, y = q.y, z = q.z;
    Mat3 r;
    r.m[0][0] = 1.0 - 2.0 * (y * y + z * z);
    r.m[0][1] = 2.0 * (x * y - w * z);
    r.m[0][2] = 2.0 * (x * z + w * y);
    r.m[1][0] = 2.0 * (x * y + w * z);
    r.m[1][1] = 1.0 - 2.0 * (x * x + z * z);
    r.m[1][2] = 2.0 * (y * z - w * x);
    r.m[2][0] = 2.0 * (x * z - w * y);
    r.m[2][1] = 2.0 * (y * z + w * x);
    r.m[2][2] = 1.0 - 2.0 * (x * x + y * y);
    return r;
}

Covariance3 covariance_from(const Vec3& log_scales, const Quat& rotation) {
    const Quat q = normalize_quat(rotation);
    const Mat3 r = rotation_from_unit_quat(q);
    const Vec3 s{std::exp(log_scales.x), std::exp(log_scales.y), std::exp(log_scales.z)};
    // M = R * diag(s); Sigma = M * M^T, symmetrized entry-by-entry.
    Mat3 m;
    for (int i = 0; i < 3; ++i) {
        m.m[i][0] = r.m[i][0] * s.x;
        m.m[i][1] = r.m[i][1] * s.y;
        m.m[i][2] = r.m[i][2] * s.z;
    }
    Covariance3 cov;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j <= i; ++j) {
            double v = m.m[i][0] * m.m[j][0] + m.m[i][1] * m.m[j][1] + m.m[i][2] * m.m[j][2];
            cov.m.m[i][j] = v;
            cov.m.m[j][i] = v;
        }
    return cov;
}

std::optional<ProjectedGaussian> project_gaussian(const Vec3& mean, const Covariance3& cov,
                                                  const Camera& camera, double near_plane) {
    const Vec3 t = camera.rotation * mean + camera.translation;
    if (!(t.z > near_plane)) return std::nullopt;

    ProjectedGaussian out;
    out.depth = t.z;
    out.mean2d = {camera.fx * t.x / t.z + camera.cx, camera.fy * t.y / t.z + camera.cy};

    const double inv_z = 1.0 / t.z;
    const double inv_z2 = inv_z * inv_z;
    // J = d(pixel)/d(camera point), 2x3 at the mean.
    const double j00 = camera.fx * inv_z;
    const double j02 = -camera.fx * t.x * inv_z2;
    const double j11 = camera.fy * inv_z;
    const double j12 = -camera.fy * t.y * inv_z2;

    const Mat3 v = camera.rotation * cov.m * camera.rotation.transpose();

    // cov2d = J V J^T with the sparse J rows (j00, 0, j02) and (0, j11, j12);
    // the off-diagonal is assigned once so the result is symmetric exactly.
    const double jv0[3] = {j00 * v.m[0][0] + j02 * v.m[2][0],
                           j00 * v.m[0][1] + j02 * v.m[2][1],
                           j00 * v.m[0][2] + j02 * v.m[2][2]};
    const double jv1[3] = {j11 * v.m[1][0] + j12 * v.m[2][0],
                           j11 * v.m[1][1] + j12 * v.m[2][1],
                           j11 * v.m[1][2] + j12 * v.m[2][2]};
    Mat2 c2;
    c2.m[0][0] = jv0[0] * j00 + jv0[2] * j02 + kLowPassDilation;
    c2.m[0][1] = jv0[1] * j11 + jv0[2] * j12;
    c2.m[1][0] = c2.m[0][1];
    c2.m[1][1] = jv1[1] * j11 + jv1[2] * j12 + kLowPassDilation;
    out.cov2d = c2;
    return out;
}

double sigmoid(double x) {
    if (x >= 0.0) {
        const double e = std::exp(-x);
        return 1.0 / (1.0 + e);
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

} // namespace splat
