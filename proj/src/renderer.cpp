// Copyright Contributors to the splatlab Project
// SPDX-License-Identifier: Apache-2.0

#include "splat/renderer.hpp"

#include "splat/core_math.hpp"
#include "splat/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace splat {

namespace {

// Rows are processed in fixed-size blocks; each block owns a gradient
// accumulation buffer and blocks are reduced in ascending order, which makes
// the result independent of the number of OpenMP workers.
constexpr int kRowsPerBlock = 16;

struct PreparedSplat {
    bool visible = false;
    Vec2 mean2d;
    double depth = 0.0;
    double lam_a = 0.0, lam_b = 0.0, lam_c = 0.0; // inverse cov2d (symmetric)
    double sigma = 0.0;                           // activated opacity
    Vec3 color;                                   // clamped SH color
    Vec3 color_pre;                               // pre-clamp SH color
    Vec3 view_dir;                                // unit, camera center -> splat
    double view_dist = 0.0;
    Vec3 t; // camera-space mean
};

struct Prepared {
    std::vector<PreparedSplat> splats;
    std::vector<std::size_t> order; // visible splats, ascending (depth, index)
    RenderStats stats;
    int used_degree = 0;
};

Prepared prepare(const Scene& scene, const Camera& camera, const RenderOptions& options) {
    camera.validate();
    Prepared prep;
    prep.used_degree = std::clamp(options.sh_degree_used, 0, scene.sh_degree());
    const std::size_t n = scene.gaussians.size();
    prep.splats.resize(n);
    const Vec3 cam_center = camera.center();

    std::size_t culled = 0, degenerate = 0;
#pragma omp parallel for schedule(static) reduction(+ : culled, degenerate)
    for (long is = 0; is < long(n); ++is) {
        const std::size_t i = std::size_t(is);
        const Gaussian& g = scene.gaussians[i];
        PreparedSplat& ps = prep.splats[i];

        const Covariance3 cov = covariance_from(g.log_scales, g.rotation);
        auto proj = project_gaussian(g.position, cov, camera, options.near_plane);
        if (!proj) {
            ++culled;
            continue;
        }
        const double det = proj->cov2d.det();
        if (!(det > 0.0) || !std::isfinite(det)) {
            ++degenerate;
            continue;
        }
        ps.visible = true;
        ps.mean2d = proj->mean2d;
        ps.depth = proj->depth;
        const double inv_det = 1.0 / det;
        ps.lam_a = proj->cov2d.m[1][1] * inv_det;
        ps.lam_b = -proj->cov2d.m[0][1] * inv_det;
        ps.lam_c = proj->cov2d.m[0][0] * inv_det;
        ps.sigma = sigmoid(g.opacity_logit);
        ps.t = camera.rotation * g.position + camera.translation;

        const Vec3 u = g.position - cam_center;
        ps.view_dist = u.norm();
        ps.view_dir = u * (1.0 / ps.view_dist);
        ps.color_pre = eval_sh_unclamped(g.sh, ps.view_dir, prep.used_degree);
        ps.color = {std::clamp(ps.color_pre.x, 0.0, 1.0), std::clamp(ps.color_pre.y, 0.0, 1.0),
                    std::clamp(ps.color_pre.z, 0.0, 1.0)};
    }
    prep.stats.culled = culled;
    prep.stats.degenerate = degenerate;

    prep.order.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        if (prep.splats[i].visible) prep.order.push_back(i);
    std::sort(prep.order.begin(), prep.order.end(), [&](std::size_t a, std::size_t b) {
        if (prep.splats[a].depth != prep.splats[b].depth)
            return prep.splats[a].depth < prep.splats[b].depth;
        return a < b;
    });
    return prep;
}

struct Contribution {
    std::size_t splat;
    double alpha;
    double transmittance; // before this splat
};

// Front-to-back compositing for one pixel. When `records` is non-null the
// contributing splats are appended for the backward sweep; `t_out` receives
// the final transmittance.
inline Vec3 forward_pixel(double px, double py, const Prepared& prep, const Vec3& background,
                          std::vector<Contribution>* records, double* t_out) {
    Vec3 color{0.0, 0.0, 0.0};
    double t = 1.0;
    for (std::size_t i : prep.order) {
        const PreparedSplat& ps = prep.splats[i];
        const double dx = px - ps.mean2d.x;
        const double dy = py - ps.mean2d.y;
        const double q = ps.lam_a * dx * dx + 2.0 * ps.lam_b * dx * dy + ps.lam_c * dy * dy;
        if (q > kEllipseCutoff) continue;
        const double alpha = ps.sigma * std::exp(-0.5 * q);
        if (alpha < kAlphaFloor) continue;
        if (records) records->push_back({i, alpha, t});
        const double w = alpha * t;
        color += ps.color * w;
        t *= 1.0 - alpha;
    }
    color += background * t;
    if (t_out) *t_out = t;
    return color;
}

// Screen-space adjoints accumulated per splat during the pixel phase; the
// chain to raw parameters runs once per splat afterwards.
struct ScreenAdjoint {
    Vec3 d_color;
    Vec2 d_mean2d;
    double d_lam[3] = {0, 0, 0}; // vs lam_a, lam_b (off-diag, stored once), lam_c
    double s_alpha = 0.0;        // sum over pixels of dL/dalpha * alpha

    ScreenAdjoint& operator+=(const ScreenAdjoint& o) {
        d_color += o.d_color;
        d_mean2d += o.d_mean2d;
        for (int k = 0; k < 3; ++k) d_lam[k] += o.d_lam[k];
        s_alpha += o.s_alpha;
        return *this;
    }
};

void backward_pixel(double px, double py, const Vec3& g_pix, const Prepared& prep,
                    const Vec3& background, const std::vector<Contribution>& records,
                    double t_final, std::vector<ScreenAdjoint>& acc) {
    // rest = sum over splats behind the current one of color*alpha*T, plus
    // the background term; maintained while sweeping back-to-front.
    Vec3 rest = background * t_final;
    for (std::size_t k = records.size(); k-- > 0;) {
        const Contribution& rec = records[k];
        const PreparedSplat& ps = prep.splats[rec.splat];
        ScreenAdjoint& sa = acc[rec.splat];
        const double w = rec.alpha * rec.transmittance;
        sa.d_color += g_pix * w;

        const double denom = 1.0 - rec.alpha;
        Vec3 term{0.0, 0.0, 0.0};
        if (denom > 0.0) term = rest * (1.0 / denom);
        const double d_alpha = g_pix.x * (ps.color.x * rec.transmittance - term.x) +
                               g_pix.y * (ps.color.y * rec.transmittance - term.y) +
                               g_pix.z * (ps.color.z * rec.transmittance - term.z);
        rest += ps.color * w;

        sa.s_alpha += d_alpha * rec.alpha;
        const double dq = d_alpha * (-0.5 * rec.alpha);
        const double dx = px - ps.mean2d.x;
        const double dy = py - ps.mean2d.y;
        // q = a dx^2 + 2 b dx dy + c dy^2
        const double dL_ddx = dq * (2.0 * ps.lam_a * dx + 2.0 * ps.lam_b * dy);
        const double dL_ddy = dq * (2.0 * ps.lam_b * dx + 2.0 * ps.lam_c * dy);
        sa.d_mean2d.x -= dL_ddx;
        sa.d_mean2d.y -= dL_ddy;
        sa.d_lam[0] += dq * dx * dx;
        sa.d_lam[1] += dq * dx * dy;
        sa.d_lam[2] += dq * dy * dy;
    }
}

// Chains one splat's screen-space adjoints back to its raw parameters.
SceneGradients::SplatGrad chain_to_parameters(const Gaussian& g, const PreparedSplat& ps,
                                              const ScreenAdjoint& sa, const Camera& camera,
                                              int used_degree) {
    SceneGradients::SplatGrad grad;
    grad.d_sh.assign(g.sh.expected_size(), 0.0);

    // --- color path: clamp subgradient, SH coefficients, view direction.
    Vec3 d_pre{
        (ps.color_pre.x >= 0.0 && ps.color_pre.x <= 1.0) ? sa.d_color.x : 0.0,
        (ps.color_pre.y >= 0.0 && ps.color_pre.y <= 1.0) ? sa.d_color.y : 0.0,
        (ps.color_pre.z >= 0.0 && ps.color_pre.z <= 1.0) ? sa.d_color.z : 0.0,
    };
    double basis[16];
    Vec3 basis_grad[16];
    sh_basis_with_grad(used_degree, ps.view_dir, basis, basis_grad);
    Vec3 d_dir{0.0, 0.0, 0.0};
    const int nb = sh_basis_count(used_degree);
    for (int b = 0; b < nb; ++b) {
        grad.d_sh[std::size_t(b * 3 + 0)] = d_pre.x * basis[b];
        grad.d_sh[std::size_t(b * 3 + 1)] = d_pre.y * basis[b];
        grad.d_sh[std::size_t(b * 3 + 2)] = d_pre.z * basis[b];
        const double coeff = d_pre.x * g.sh.values[std::size_t(b * 3 + 0)] +
                             d_pre.y * g.sh.values[std::size_t(b * 3 + 1)] +
                             d_pre.z * g.sh.values[std::size_t(b * 3 + 2)];
        d_dir += basis_grad[b] * coeff;
    }
    // dir = u / |u|; project out the radial component.
    const Vec3 d_u = (d_dir - ps.view_dir * ps.view_dir.dot(d_dir)) * (1.0 / ps.view_dist);
    grad.d_position += d_u;

    // --- opacity path.
    grad.d_opacity_logit = sa.s_alpha * (1.0 - ps.sigma);

    // --- geometry path: inverse covariance -> cov2d -> (J, V) -> raw params.
    const double la = ps.lam_a, lb = ps.lam_b, lc = ps.lam_c;
    const double ga = sa.d_lam[0], gb = sa.d_lam[1], gc = sa.d_lam[2];
    // dSigma2 = -Lam * G * Lam (all symmetric 2x2).
    const double m00 = la * ga + lb * gb, m01 = la * gb + lb * gc;
    const double m10 = lb * ga + lc * gb, m11 = lb * gb + lc * gc;
    const double ds2_00 = -(m00 * la + m01 * lb);
    const double ds2_01 = -(m00 * lb + m01 * lc);
    const double ds2_10 = -(m10 * la + m11 * lb);
    const double ds2_11 = -(m10 * lb + m11 * lc);

    const double tx = ps.t.x, ty = ps.t.y, tz = ps.t.z;
    const double inv_z = 1.0 / tz, inv_z2 = inv_z * inv_z;
    const double j00 = camera.fx * inv_z;
    const double j02 = -camera.fx * tx * inv_z2;
    const double j11 = camera.fy * inv_z;
    const double j12 = -camera.fy * ty * inv_z2;

    const Covariance3 cov3 = covariance_from(g.log_scales, g.rotation);
    const Mat3 v = camera.rotation * cov3.m * camera.rotation.transpose();

    // dV = J^T dSigma2 J with J rows (j00,0,j02), (0,j11,j12).
    Mat3 dv;
    {
        const double r0[3] = {j00, 0.0, j02};
        const double r1[3] = {0.0, j11, j12};
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                dv.m[i][j] = r0[i] * (ds2_00 * r0[j] + ds2_01 * r1[j]) +
                             r1[i] * (ds2_10 * r0[j] + ds2_11 * r1[j]);
    }
    // dJ = 2 * dSigma2 * J * V (dSigma2 and V symmetric).
    double jv[2][3];
    for (int j = 0; j < 3; ++j) {
        jv[0][j] = j00 * v.m[0][j] + j02 * v.m[2][j];
        jv[1][j] = j11 * v.m[1][j] + j12 * v.m[2][j];
    }
    double dj[2][3];
    for (int j = 0; j < 3; ++j) {
        dj[0][j] = 2.0 * (ds2_00 * jv[0][j] + ds2_01 * jv[1][j]);
        dj[1][j] = 2.0 * (ds2_10 * jv[0][j] + ds2_11 * jv[1][j]);
    }

    // Camera-space position gradient: mean2d path plus the J(t) dependence.
    Vec3 dt{j00 * sa.d_mean2d.x, j11 * sa.d_mean2d.y,
            j02 * sa.d_mean2d.x + j12 * sa.d_mean2d.y};
    const double inv_z3 = inv_z2 * inv_z;
    dt.x += dj[0][2] * (-camera.fx * inv_z2);
    dt.y += dj[1][2] * (-camera.fy * inv_z2);
    dt.z += dj[0][0] * (-camera.fx * inv_z2) + dj[0][2] * (2.0 * camera.fx * tx * inv_z3) +
            dj[1][1] * (-camera.fy * inv_z2) + dj[1][2] * (2.0 * camera.fy * ty * inv_z3);
    grad.d_position += camera.rotation.transpose() * dt;

    // dSigma3 = W^T dV W; then Sigma3 = M M^T with M = R diag(exp(s)).
    const Mat3 ds3 = camera.rotation.transpose() * dv * camera.rotation;
    const Quat qn = normalize_quat(g.rotation);
    const Mat3 rot = rotation_from_unit_quat(qn);
    const Vec3 s{std::exp(g.log_scales.x), std::exp(g.log_scales.y),
                 std::exp(g.log_scales.z)};
    Mat3 mmat;
    for (int i = 0; i < 3; ++i) {
        mmat.m[i][0] = rot.m[i][0] * s.x;
        mmat.m[i][1] = rot.m[i][1] * s.y;
        mmat.m[i][2] = rot.m[i][2] * s.z;
    }
    const Mat3 dm = (ds3 + ds3.transpose()) * mmat;

    // M = R * diag(s): column scaling.
    Mat3 dr;
    double ds_log[3] = {0, 0, 0};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            const double sj = j == 0 ? s.x : (j == 1 ? s.y : s.z);
            dr.m[i][j] = dm.m[i][j] * sj;
            ds_log[j] += dm.m[i][j] * rot.m[i][j] * sj; // d/d log s_j pulls in s_j
        }
    grad.d_log_scales = {ds_log[0], ds_log[1], ds_log[2]};

    // Rotation matrix -> unit quaternion.
    const double w = qn.w, x = qn.x, y = qn.y, z = qn.z;
    const double dRw[3][3] = {{0, -z, y}, {z, 0, -x}, {-y, x, 0}};
    const double dRx[3][3] = {{0, y, z}, {y, -2 * x, -w}, {z, w, -2 * x}};
    const double dRy[3][3] = {{-2 * y, x, w}, {x, 0, z}, {-w, z, -2 * y}};
    const double dRz[3][3] = {{-2 * z, -w, x}, {w, -2 * z, y}, {x, y, 0}};
    double dqn[4] = {0, 0, 0, 0};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            dqn[0] += dr.m[i][j] * 2.0 * dRw[i][j];
            dqn[1] += dr.m[i][j] * 2.0 * dRx[i][j];
            dqn[2] += dr.m[i][j] * 2.0 * dRy[i][j];
            dqn[3] += dr.m[i][j] * 2.0 * dRz[i][j];
        }
    // Unit quaternion -> raw quaternion through the normalization.
    const double qraw_norm = g.rotation.norm();
    const double dot = dqn[0] * w + dqn[1] * x + dqn[2] * y + dqn[3] * z;
    grad.d_rotation[0] = (dqn[0] - w * dot) / qraw_norm;
    grad.d_rotation[1] = (dqn[1] - x * dot) / qraw_norm;
    grad.d_rotation[2] = (dqn[2] - y * dot) / qraw_norm;
    grad.d_rotation[3] = (dqn[3] - z * dot) / qraw_norm;

    return grad;
}

} // namespace

SceneGradients SceneGradients::zeros_like(const Scene& scene) {
    SceneGradients g;
    g.splats.resize(scene.gaussians.size());
    for (std::size_t i = 0; i < scene.gaussians.size(); ++i)
        g.splats[i].d_sh.assign(scene.gaussians[i].sh.expected_size(), 0.0);
    return g;
}

Image render(const Scene& scene, const Camera& camera, const RenderOptions& options,
             RenderStats* stats) {
    const Prepared prep = prepare(scene, camera, options);
    if (stats) *stats = prep.stats;

    Image img;
    img.width = camera.width;
    img.height = camera.height;
    img.rgb.resize(std::size_t(3) * img.width * img.height);

#pragma omp parallel for schedule(static)
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            const Vec3 c = forward_pixel(x + 0.5, y + 0.5, prep, options.background, nullptr,
                                         nullptr);
            img.at(x, y, 0) = c.x;
            img.at(x, y, 1) = c.y;
            img.at(x, y, 2) = c.z;
        }
    }
    return img;
}

RenderGradResult render_with_gradients(const Scene& scene, const Camera& camera,
                                       const Image& adjoint,
                                       const std::vector<std::size_t>& mask,
                                       const ParamGroupFlags& groups,
                                       const RenderOptions& options) {
    if (adjoint.width != camera.width || adjoint.height != camera.height ||
        adjoint.rgb.size() != std::size_t(3) * camera.width * camera.height)
        throw Error(ErrorKind::contract,
                    fmt::format("adjoint shape {}x{} does not match camera {}x{}", adjoint.width,
                                adjoint.height, camera.width, camera.height));
    for (std::size_t i : mask)
        if (i >= scene.gaussians.size())
            throw Error(ErrorKind::bounds,
                        fmt::format("mask index {} out of range (scene has {})", i,
                                    scene.gaussians.size()));

    const Prepared prep = prepare(scene, camera, options);
    const std::size_t n = scene.gaussians.size();

    RenderGradResult result;
    result.stats = prep.stats;
    result.image.width = camera.width;
    result.image.height = camera.height;
    result.image.rgb.resize(std::size_t(3) * camera.width * camera.height);
    result.gradients = SceneGradients::zeros_like(scene);

    const int num_blocks = (camera.height + kRowsPerBlock - 1) / kRowsPerBlock;
    std::vector<std::vector<ScreenAdjoint>> block_acc(static_cast<std::size_t>(num_blocks));

#pragma omp parallel for schedule(dynamic)
    for (int block = 0; block < num_blocks; ++block) {
        auto& acc = block_acc[std::size_t(block)];
        acc.assign(n, ScreenAdjoint{});
        std::vector<Contribution> records;
        records.reserve(prep.order.size());
        const int y0 = block * kRowsPerBlock;
        const int y1 = std::min(camera.height, y0 + kRowsPerBlock);
        for (int y = y0; y < y1; ++y) {
            for (int x = 0; x < camera.width; ++x) {
                records.clear();
                double t_final = 1.0;
                const Vec3 c = forward_pixel(x + 0.5, y + 0.5, prep, options.background,
                                             &records, &t_final);
                result.image.at(x, y, 0) = c.x;
                result.image.at(x, y, 1) = c.y;
                result.image.at(x, y, 2) = c.z;
                const Vec3 g_pix{adjoint.at(x, y, 0), adjoint.at(x, y, 1), adjoint.at(x, y, 2)};
                backward_pixel(x + 0.5, y + 0.5, g_pix, prep, options.background, records,
                               t_final, acc);
            }
        }
    }

    // Fixed-order reduction: block 0, 1, ... regardless of thread count.
    std::vector<ScreenAdjoint> total(n);
    for (int block = 0; block < num_blocks; ++block)
        for (std::size_t i = 0; i < n; ++i) total[i] += block_acc[std::size_t(block)][i];

    std::vector<std::size_t> active = mask;
    std::sort(active.begin(), active.end());
    active.erase(std::unique(active.begin(), active.end()), active.end());

#pragma omp parallel for schedule(dynamic)
    for (long k = 0; k < long(active.size()); ++k) {
        const std::size_t i = active[std::size_t(k)];
        if (!prep.splats[i].visible) continue;
        SceneGradients::SplatGrad grad = chain_to_parameters(
            scene.gaussians[i], prep.splats[i], total[i], camera, prep.used_degree);
        auto& out = result.gradients.splats[i];
        if (groups.position) out.d_position = grad.d_position;
        if (groups.sh) out.d_sh = std::move(grad.d_sh);
        if (groups.log_scales) out.d_log_scales = grad.d_log_scales;
        if (groups.rotation) out.d_rotation = grad.d_rotation;
        if (groups.opacity_logit) out.d_opacity_logit = grad.d_opacity_logit;
    }
    return result;
}

} // namespace splat
