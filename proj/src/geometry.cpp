#include "gsr/geometry.hpp"

#include <cmath>
#include <stdexcept>

namespace gsr {

namespace {

Mat3 rot_x(double a) {
    const double c = std::cos(a), s = std::sin(a);
    Mat3 m;
    m << 1, 0, 0,
         0, c, -s,
         0, s, c;
    return m;
}

Mat3 rot_z(double a) {
    const double c = std::cos(a), s = std::sin(a);
    Mat3 m;
    m << c, -s, 0,
         s, c, 0,
         0, 0, 1;
    return m;
}

Mat3 intrinsics_from_aspect(double fov, double aspect) {
    if (!(fov > 0.0 && fov < M_PI)) {
        throw std::domain_error("fov must lie in (0, pi)");
    }
    const double focal = 1.0 / std::tan(fov / 2.0);
    Mat3 m = Mat3::Zero();
    m(0, 0) = focal / aspect;  // horizontal NDC spans [-1,1] too
    m(1, 1) = focal;
    m(2, 2) = 1.0;
    return m;
}

}  // namespace

Vec2 Homography::apply(const Vec2& ground) const {
    const Vec3 p = h * Vec3(ground.x(), ground.y(), 1.0);
    return {p.x() / p.z(), p.y() / p.z()};
}

Homography Homography::inverse() const {
    Homography inv;
    inv.h = h.inverse();
    if (std::abs(inv.h(2, 2)) > 1e-12) {
        inv.h /= inv.h(2, 2);
    } else {
        inv.h /= inv.h.norm();
    }
    return inv;
}

Mat3 intrinsics_from_fov(double fov, double width, double height) {
    if (width <= 0.0 || height <= 0.0) {
        throw std::domain_error("frame dimensions must be positive");
    }
    return intrinsics_from_aspect(fov, width / height);
}

Mat3 rotation_from_angles(double pan, double tilt, double roll) {
    const Mat3 cam_to_world = rot_z(pan) * rot_x(tilt) * rot_z(roll);
    return cam_to_world.transpose();
}

Vec3 world_to_ndc(const CameraParams& params, const Vec3& world, double aspect) {
    const Mat3 intr = intrinsics_from_aspect(params.fov, aspect);
    const Mat3 rot = rotation_from_angles(params.pan, params.tilt, params.roll);
    return intr * (rot * (world - params.position()));
}

Vec3 ndc_to_world(const CameraParams& params, const Vec3& ndc, double aspect) {
    const Mat3 intr = intrinsics_from_aspect(params.fov, aspect);
    const Mat3 rot = rotation_from_angles(params.pan, params.tilt, params.roll);
    const Vec3 inv_intr(ndc.x() / intr(0, 0), ndc.y() / intr(1, 1), ndc.z());
    return rot.transpose() * inv_intr + params.position();
}

Vec2 ndc_to_pixel(const Vec3& ndc, double width, double height) {
    if (ndc.z() == 0.0) {
        throw std::domain_error("zero depth in perspective divide");
    }
    const double px = (ndc.x() / ndc.z() + 1.0) / 2.0 * width;
    const double py = (ndc.y() / ndc.z() + 1.0) / 2.0 * height;
    return {px, py};
}

std::optional<Vec3> try_pixel_to_pitch(const CameraParams& params, const Vec2& pixel,
                                       double width, double height) {
    const double a = 2.0 * pixel.x() / width - 1.0;
    const double b = 2.0 * pixel.y() / height - 1.0;
    const Mat3 intr = intrinsics_from_fov(params.fov, width, height);
    const Mat3 rot = rotation_from_angles(params.pan, params.tilt, params.roll);
    // Direction of the viewing ray in world coordinates, parameterized by depth.
    const Vec3 dir = rot.transpose() * Vec3(a / intr(0, 0), b / intr(1, 1), 1.0);
    if (std::abs(dir.z()) < 1e-15) {
        return std::nullopt;
    }
    const double depth = -params.z / dir.z();
    if (depth <= 0.0) {
        return std::nullopt;
    }
    Vec3 hit = params.position() + depth * dir;
    hit.z() = 0.0;
    return hit;
}

Vec3 pixel_to_pitch(const CameraParams& params, const Vec2& pixel, double width, double height) {
    const auto hit = try_pixel_to_pitch(params, pixel, width, height);
    if (!hit) {
        throw std::domain_error("viewing ray does not intersect the ground plane");
    }
    return *hit;
}

Homography homography_from_params(const CameraParams& params, double width, double height) {
    if (std::abs(params.z) < 1e-9) {
        throw std::domain_error("camera in the ground plane: homography degenerate");
    }
    const Mat3 intr = intrinsics_from_fov(params.fov, width, height);
    const Mat3 rot = rotation_from_angles(params.pan, params.tilt, params.roll);
    const Mat3 m = intr * rot;
    Mat3 ndc_h;
    ndc_h.col(0) = m.col(0);
    ndc_h.col(1) = m.col(1);
    ndc_h.col(2) = -m * params.position();
    Mat3 pixel_map;
    pixel_map << width / 2.0, 0, width / 2.0,
                 0, height / 2.0, height / 2.0,
                 0, 0, 1;
    Homography out;
    out.h = pixel_map * ndc_h;
    if (std::abs(out.h(2, 2)) > 1e-12) {
        out.h /= out.h(2, 2);
    } else {
        out.h /= out.h.norm();
    }
    return out;
}

std::vector<Vec3> pitch_grid(int steps) {
    std::vector<Vec3> points;
    points.reserve(static_cast<size_t>(steps) * steps);
    const double half_len = kPitchLength / 2.0;
    const double half_wid = kPitchWidth / 2.0;
    for (int iy = 0; iy < steps; ++iy) {
        for (int ix = 0; ix < steps; ++ix) {
            const double x = -half_len + kPitchLength * ix / (steps - 1);
            const double y = -half_wid + kPitchWidth * iy / (steps - 1);
            points.emplace_back(x, y, 0.0);
        }
    }
    return points;
}

double loss_world(const CameraParams& pred, const CameraParams& gt, std::span<const Vec3> points) {
    if (points.empty()) {
        throw std::domain_error("loss_world requires a nonempty point set");
    }
    if (pred.to_array() == gt.to_array()) {
        return 0.0;  // P_pred^-1 . P_gt is the identity; avoid round-trip noise
    }
    double sum = 0.0;
    for (const Vec3& p : points) {
        sum += (ndc_to_world(pred, world_to_ndc(gt, p)) - p).norm();
    }
    return sum;
}

double loss_camera(const CameraParams& pred, const CameraParams& gt, std::span<const Vec3> points) {
    if (points.empty()) {
        throw std::domain_error("loss_camera requires a nonempty point set");
    }
    double sum = 0.0;
    for (const Vec3& p : points) {
        sum += (world_to_ndc(pred, p) - world_to_ndc(gt, p)).norm();
    }
    return sum;
}

double loss_params(const CameraParams& pred, const CameraParams& gt) {
    const auto a = pred.to_array();
    const auto b = gt.to_array();
    double sum = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        sum += std::abs(a[i] - b[i]);
    }
    return sum;
}

double loss_heatmap(const UvMaps& pred, const UvMaps& gt) {
    if (pred.width != gt.width || pred.height != gt.height) {
        throw std::domain_error("heatmap shape mismatch");
    }
    double sum = 0.0;
    for (size_t i = 0; i < pred.u.size(); ++i) {
        if (!pred.valid[i] || !gt.valid[i]) {
            continue;
        }
        const double du = pred.u[i] - gt.u[i];
        const double dv = pred.v[i] - gt.v[i];
        sum += std::sqrt(du * du + dv * dv);
    }
    return sum;
}

double loss_total(const CameraParams& pred, const CameraParams& gt, std::span<const Vec3> points,
                  const UvMaps* pred_uv, const UvMaps* gt_uv, const LossWeights& weights) {
    double total = weights.w1 * loss_world(pred, gt, points) +
                   weights.w2 * loss_camera(pred, gt, points) +
                   weights.w3 * loss_params(pred, gt);
    if (pred_uv != nullptr && gt_uv != nullptr) {
        total += weights.w4 * loss_heatmap(*pred_uv, *gt_uv);
    }
    return total;
}

UvMaps uv_heatmaps(const CameraParams& params, int width, int height) {
    if (std::abs(params.z) < 1e-9) {
        throw std::domain_error("camera in the ground plane: UV maps degenerate");
    }
    UvMaps maps;
    maps.width = width;
    maps.height = height;
    const size_t n = static_cast<size_t>(width) * height;
    maps.u.assign(n, 0.0);
    maps.v.assign(n, 0.0);
    maps.valid.assign(n, 0);
    for (int py = 0; py < height; ++py) {
        for (int px = 0; px < width; ++px) {
            const auto hit = try_pixel_to_pitch(params, Vec2(px, py), width, height);
            if (!hit) {
                continue;
            }
            const size_t i = maps.index(px, py);
            maps.u[i] = hit->x();
            maps.v[i] = hit->y();
            maps.valid[i] = 1;
        }
    }
    return maps;
}

}  // namespace gsr
