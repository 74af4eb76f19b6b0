// Copyright Contributors to the splatlab Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "splat/camera.hpp"
#include "splat/vec.hpp"

#include <optional>
#include <vector>

namespace splat {

inline constexpr int kMaxShDegree = 3;

inline constexpr int sh_basis_count(int degree) { return (degree + 1) * (degree + 1); }

// Per-splat view-dependent color coefficients. `values` holds one (R,G,B)
// triple per basis function, band-major: values[b*3 + channel].
struct ShCoefficients {
    int degree = 0;
    std::vector<double> values;

    static ShCoefficients zeros(int degree) {
        return {degree, std::vector<double>(std::size_t(3 * sh_basis_count(degree)), 0.0)};
    }
    std::size_t expected_size() const { return std::size_t(3 * sh_basis_count(degree)); }
};

// Symmetric PSD 3x3 built by covariance_from; kept as a distinct type so a
// raw Mat3 cannot be passed where the PSD guarantee is assumed.
struct Covariance3 {
    Mat3 m;
};

// Evaluates the first `degree+1` bands of the real SH basis at a unit
// direction. `out` must hold sh_basis_count(degree) entries. The basis uses
// the sign/normalization convention of common splat-scene exports (band 0
// constant 1/(2*sqrt(pi))), so imported scenes keep their appearance.
void sh_basis(int degree, const Vec3& dir, double* out);

// Same, plus the gradient of each basis function w.r.t. the (free) direction
// components. Combine with the unit-normalization Jacobian when the
// direction itself is a function of position.
void sh_basis_with_grad(int degree, const Vec3& dir, double* out, Vec3* grad_out);

// 0.5 + sum_b Y_b(dir) * c_b per channel, without the [0,1] clamp.
Vec3 eval_sh_unclamped(const ShCoefficients& coeffs, const Vec3& dir,
                       int max_degree = kMaxShDegree);

// Clamped to [0,1] per channel. Throws Error{numeric} on non-finite
// coefficients. `dir` must be unit length within 1e-6.
Vec3 eval_sh(const ShCoefficients& coeffs, const Vec3& dir, int max_degree = kMaxShDegree);

// Normalizes scalar-first quaternions; throws Error{numeric} when the norm
// is below 1e-12 (no recoverable rotation).
Quat normalize_quat(const Quat& q);

Mat3 rotation_from_unit_quat(const Quat& q);

// Sigma = R * diag(exp(s))^2 * R^T. Symmetric by construction; eigenvalues
// are exp(2*s_i).
Covariance3 covariance_from(const Vec3& log_scales, const Quat& rotation);

struct ProjectedGaussian {
    Vec2 mean2d;  // pixel coordinates
    Mat2 cov2d;   // screen-space covariance after low-pass dilation
    double depth; // camera-space z
};

// Screen-space covariance dilation, in squared pixels. Keeps sub-pixel
// splats invertible.
inline constexpr double kLowPassDilation = 0.3;

// Perspective projection of a world-space Gaussian with the local affine
// (EWA-style) approximation: cov2d = J W Sigma W^T J^T + dilation * I.
// Returns nullopt when the mean is at or behind `near_plane` (culled).
std::optional<ProjectedGaussian> project_gaussian(const Vec3& mean, const Covariance3& cov,
                                                  const Camera& camera,
                                                  double near_plane = 0.01);

double sigmoid(double x);

} // namespace splat
