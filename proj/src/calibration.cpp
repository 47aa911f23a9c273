#include "gsr/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gsr {

namespace {

struct TlsLine {
    Vec2 point;
    Vec2 dir;
};

// Total-least-squares line through >= 2 points (principal axis of the scatter).
TlsLine fit_line(const std::vector<Vec2>& pts) {
    Vec2 mean = Vec2::Zero();
    for (const Vec2& p : pts) mean += p;
    mean /= static_cast<double>(pts.size());
    Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
    for (const Vec2& p : pts) {
        const Vec2 d = p - mean;
        cov += d * d.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(cov);
    return {mean, eig.eigenvectors().col(1)};  // largest eigenvalue
}

double line_distance(const TlsLine& line, const Vec2& p) {
    const Vec2 d = p - line.point;
    return std::abs(d.x() * line.dir.y() - d.y() * line.dir.x());
}

const std::array<bool, 7> kIsAngle = {false, false, false, true, true, true, true};
// Sweep order: pan, tilt, roll, fov, x, y, z (array layout is x,y,z,pan,tilt,roll,fov).
const std::array<int, 7> kSweepOrder = {3, 4, 5, 6, 0, 1, 2};

// Normalized DLT: ground plane (z=0) to pixels over the known correspondences.
std::optional<Mat3> homography_from_correspondences(const std::vector<Vec2>& world,
                                                    const std::vector<Vec2>& pixels) {
    const int n = static_cast<int>(world.size());
    if (n < 4) {
        return std::nullopt;
    }
    auto normalizer = [](const std::vector<Vec2>& pts) {
        Vec2 mean = Vec2::Zero();
        for (const auto& p : pts) mean += p;
        mean /= static_cast<double>(pts.size());
        double spread = 0.0;
        for (const auto& p : pts) spread += (p - mean).norm();
        const double scale = spread > 0.0 ? std::sqrt(2.0) * pts.size() / spread : 1.0;
        Mat3 t;
        t << scale, 0, -scale * mean.x(), 0, scale, -scale * mean.y(), 0, 0, 1;
        return t;
    };
    const Mat3 tw = normalizer(world);
    const Mat3 tp = normalizer(pixels);
    Eigen::MatrixXd a(2 * n, 9);
    for (int i = 0; i < n; ++i) {
        const Vec3 w = tw * Vec3(world[i].x(), world[i].y(), 1.0);
        const Vec3 p = tp * Vec3(pixels[i].x(), pixels[i].y(), 1.0);
        a.row(2 * i) << 0, 0, 0, -w.x(), -w.y(), -1, p.y() * w.x(), p.y() * w.y(), p.y();
        a.row(2 * i + 1) << w.x(), w.y(), 1, 0, 0, 0, -p.x() * w.x(), -p.x() * w.y(), -p.x();
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinV);
    const Eigen::VectorXd h = svd.matrixV().col(8);
    Mat3 hh;
    hh << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8);
    return Mat3(tp.inverse() * hh * tw);
}

// Plane-based decomposition of a ground->pixel homography into the seven
// camera parameters (principal point at centre, square pixels, aspect from
// the frame size). Returns nothing for degenerate geometry.
std::optional<CameraParams> camera_from_homography(const Mat3& h_pixel, double width,
                                                   double height, const Vec2& reference_ground) {
    const double aspect = width / height;
    Mat3 a_inv;
    a_inv << 2.0 / width, 0, -1, 0, 2.0 / height, -1, 0, 0, 1;
    Mat3 g = a_inv * h_pixel;
    // Fix the homography sign so the reference point sits in front.
    const Vec3 probe = g * Vec3(reference_ground.x(), reference_ground.y(), 1.0);
    if (probe.z() < 0.0) {
        g = -g;
    }
    const Vec3 g1 = g.col(0), g2 = g.col(1);
    const double a2 = aspect * aspect;
    double f2_sum = 0.0;
    int f2_terms = 0;
    {
        const double num = -(a2 * g1.x() * g2.x() + g1.y() * g2.y());
        const double den = g1.z() * g2.z();
        if (std::abs(den) > 1e-12 && num / den > 0.0) {
            f2_sum += num / den;
            ++f2_terms;
        }
    }
    {
        const double num = -(a2 * (g1.x() * g1.x() - g2.x() * g2.x()) +
                             (g1.y() * g1.y() - g2.y() * g2.y()));
        const double den = g1.z() * g1.z() - g2.z() * g2.z();
        if (std::abs(den) > 1e-12 && num / den > 0.0) {
            f2_sum += num / den;
            ++f2_terms;
        }
    }
    if (f2_terms == 0) {
        return std::nullopt;
    }
    const double f = std::sqrt(f2_sum / f2_terms);
    auto intr_inv = [&](const Vec3& v) { return Vec3(aspect * v.x() / f, v.y() / f, v.z()); };
    Vec3 r1 = intr_inv(g1);
    Vec3 r2 = intr_inv(g2);
    const double lambda = 0.5 * (r1.norm() + r2.norm());
    if (lambda < 1e-12) {
        return std::nullopt;
    }
    r1 /= lambda;
    r2 /= lambda;
    Mat3 rr;
    rr.col(0) = r1;
    rr.col(1) = r2;
    rr.col(2) = r1.cross(r2);
    Eigen::JacobiSVD<Mat3> svd(rr, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Mat3 rot = svd.matrixU() * svd.matrixV().transpose();  // world-to-camera
    if (rot.determinant() < 0.0) {
        Mat3 d = Mat3::Identity();
        d(2, 2) = -1.0;
        rot = svd.matrixU() * d * svd.matrixV().transpose();
    }
    const Vec3 t = -(1.0 / lambda) * (rot.transpose() * intr_inv(g.col(2)));

    CameraParams cam;
    const Mat3 c = rot.transpose();  // camera-to-world
    cam.tilt = std::acos(std::clamp(c(2, 2), -1.0, 1.0));
    cam.pan = std::atan2(c(0, 2), -c(1, 2));
    Mat3 rz_pan, rx_tilt;
    {
        const double cp = std::cos(cam.pan), sp = std::sin(cam.pan);
        const double ct = std::cos(cam.tilt), st = std::sin(cam.tilt);
        rz_pan << cp, -sp, 0, sp, cp, 0, 0, 0, 1;
        rx_tilt << 1, 0, 0, 0, ct, -st, 0, st, ct;
    }
    const Mat3 rz_roll = (rz_pan * rx_tilt).transpose() * c;
    cam.roll = std::atan2(rz_roll(1, 0), rz_roll(0, 0));
    cam.fov = 2.0 * std::atan(1.0 / f);
    cam.x = t.x();
    cam.y = t.y();
    cam.z = t.z();
    if (!(cam.fov > 0.0 && cam.fov < M_PI) || !std::isfinite(t.norm())) {
        return std::nullopt;
    }
    return cam;
}

}  // namespace

std::vector<LineObservation> keypoints_to_lines(std::span<const DetectedKeypoint> kps,
                                                const CameraParams& params,
                                                const PitchModel& model,
                                                const RefinementConfig& config) {
    // Ground-plane projection per keypoint index; rays that miss stay empty.
    std::vector<std::optional<Vec2>> planar(model.keypoints.size());
    std::vector<int> source(model.keypoints.size(), -1);
    for (size_t i = 0; i < kps.size(); ++i) {
        const auto& kp = kps[i];
        if (kp.idx < 0 || kp.idx >= static_cast<int>(model.keypoints.size())) {
            continue;
        }
        const auto hit = try_pixel_to_pitch(params, kp.pixel, config.frame_width, config.frame_height);
        if (hit) {
            planar[kp.idx] = Vec2(hit->x(), hit->y());
            source[kp.idx] = static_cast<int>(i);
        }
    }

    std::vector<LineObservation> out;
    for (const auto& group : model.groups) {
        std::vector<Vec2> pts;
        std::vector<int> ids;
        for (int member : group.members) {
            if (planar[member]) {
                pts.push_back(*planar[member]);
                ids.push_back(source[member]);
            }
        }
        if (pts.size() < 2) {
            continue;
        }
        TlsLine line = fit_line(pts);
        double worst = 0.0;
        for (const Vec2& p : pts) {
            worst = std::max(worst, line_distance(line, p));
        }
        std::vector<uint8_t> keep(pts.size(), 1);
        if (worst > config.outlier_threshold) {
            // Contaminated group: a joint fit is dragged by the outlier.
            // Pick the two-point hypothesis with the largest consensus set;
            // ties go to the line best aligned with the group's expected
            // model direction, then to the smallest residual sum.
            const Vec2 expected =
                (model.keypoints[group.members.back()] - model.keypoints[group.members.front()]).normalized();
            size_t best_count = 0;
            double best_misalign = 0.0;
            double best_sum = 0.0;
            std::vector<uint8_t> best_keep;
            for (size_t i = 0; i + 1 < pts.size(); ++i) {
                for (size_t j = i + 1; j < pts.size(); ++j) {
                    const Vec2 span = pts[j] - pts[i];
                    if (span.norm() < 1e-9) {
                        continue;
                    }
                    const TlsLine hyp{pts[i], span.normalized()};
                    std::vector<uint8_t> mask(pts.size(), 0);
                    size_t count = 0;
                    double sum = 0.0;
                    for (size_t k = 0; k < pts.size(); ++k) {
                        const double d = line_distance(hyp, pts[k]);
                        if (d <= config.outlier_threshold) {
                            mask[k] = 1;
                            ++count;
                            sum += d;
                        }
                    }
                    const double cross = hyp.dir.x() * expected.y() - hyp.dir.y() * expected.x();
                    const double misalign = cross * cross;  // sin^2 of the angle between lines
                    const bool better =
                        count > best_count ||
                        (count == best_count &&
                         (misalign < best_misalign - 1e-12 ||
                          (std::abs(misalign - best_misalign) <= 1e-12 && sum < best_sum)));
                    if (better) {
                        best_count = count;
                        best_misalign = misalign;
                        best_sum = sum;
                        best_keep = std::move(mask);
                    }
                }
            }
            keep = std::move(best_keep);
            std::vector<Vec2> kept;
            for (size_t k = 0; k < pts.size(); ++k) {
                if (keep[k]) {
                    kept.push_back(pts[k]);
                }
            }
            line = fit_line(kept);
        }
        LineObservation obs;
        obs.group_id = group.id;
        obs.point = line.point;
        obs.dir = line.dir;
        for (size_t k = 0; k < pts.size(); ++k) {
            if (keep[k]) {
                obs.inliers.push_back(ids[k]);
            }
        }
        std::sort(obs.inliers.begin(), obs.inliers.end());
        out.push_back(std::move(obs));
    }
    return out;
}

ObjectiveResult refinement_objective(const CameraParams& params,
                                     std::span<const DetectedKeypoint> kps,
                                     const PitchModel& model,
                                     const RefinementConfig& config) {
    ObjectiveResult result;
    if (kps.empty()) {
        result.empty = true;
        return result;
    }

    // Every off-ground ray is charged, matched and unmatched alike; otherwise
    // the search could lower the objective by pushing keypoints over the horizon.
    std::vector<std::optional<Vec2>> planar(kps.size());
    for (size_t i = 0; i < kps.size(); ++i) {
        const auto hit = try_pixel_to_pitch(params, kps[i].pixel, config.frame_width, config.frame_height);
        if (hit) {
            planar[i] = Vec2(hit->x(), hit->y());
        } else {
            result.value += config.projection_penalty;
        }
    }

    const auto lines = keypoints_to_lines(kps, params, model, config);
    // A keypoint counts as inlier when at least one of its groups kept it.
    std::vector<uint8_t> inlier(kps.size(), 0);
    for (const auto& obs : lines) {
        for (int i : obs.inliers) {
            inlier[i] = 1;
        }
    }
    for (size_t i = 0; i < kps.size(); ++i) {
        if (!inlier[i] || !planar[i]) {
            continue;
        }
        // Distance to the keypoint's own model position. The keypoint index
        // fixes the correspondence; scoring against the nearest marking
        // instead leaves translations along the long markings unobservable
        // and the grid search drifts meters while the score improves.
        const int idx = kps[i].idx;
        if (idx >= 0 && idx < static_cast<int>(model.keypoints.size())) {
            result.value += (*planar[i] - model.keypoints[idx]).norm();
            ++result.inliers;
        }
    }
    return result;
}

namespace {

CameraParams coordinate_descent(const CameraParams& initial,
                                std::span<const DetectedKeypoint> kps,
                                const PitchModel& model,
                                const RefinementConfig& config) {
    auto params = initial.to_array();
    double best = refinement_objective(CameraParams::from_array(params), kps, model, config).value;

    for (int sweep = 0; sweep < config.max_sweeps; ++sweep) {
        bool improved = false;
        for (int channel : kSweepOrder) {
            const auto& deltas = kIsAngle[channel] ? config.angle_deltas : config.position_deltas;
            double best_delta = 0.0;
            double best_value = best;
            for (double delta : deltas) {
                if (delta == 0.0) {
                    continue;  // current value already evaluated
                }
                auto candidate = params;
                candidate[channel] += delta;
                if (channel == 6 && (candidate[6] <= 0.0 || candidate[6] >= M_PI)) {
                    continue;  // fov must stay a valid vertical field of view
                }
                const double value =
                    refinement_objective(CameraParams::from_array(candidate), kps, model, config).value;
                const bool better = value < best_value ||
                                    (value == best_value && best_delta != 0.0 &&
                                     std::abs(delta) < std::abs(best_delta));
                if (better) {
                    best_value = value;
                    best_delta = delta;
                }
            }
            if (best_delta != 0.0) {
                params[channel] += best_delta;
                best = best_value;
                improved = true;
            }
        }
        if (!improved) {
            break;
        }
    }
    return CameraParams::from_array(params);
}

}  // namespace

CameraParams refine_params(const CameraParams& initial,
                           std::span<const DetectedKeypoint> kps,
                           const PitchModel& model,
                           const RefinementConfig& config) {
    if (kps.empty()) {
        return initial;
    }
    CameraParams best = coordinate_descent(initial, kps, model, config);
    const ObjectiveResult best_obj = refinement_objective(best, kps, model, config);

    // The grid search alone settles into compensated minima (pan vs x, tilt
    // vs y, fov vs camera range trade off almost freely on plane-only
    // observations). When real residual is left, a closed-form candidate from
    // the keypoint correspondences (DLT + plane decomposition) breaks the tie;
    // near a perfect fit the grid result is kept so exact inputs stay fixed.
    if (best_obj.inliers > 0 && best_obj.value > 1e-3 * best_obj.inliers) {
        std::vector<Vec2> world, pixels;
        for (const auto& kp : kps) {
            if (kp.idx >= 0 && kp.idx < static_cast<int>(model.keypoints.size())) {
                world.push_back(model.keypoints[kp.idx]);
                pixels.push_back(kp.pixel);
            }
        }
        const auto h = homography_from_correspondences(world, pixels);
        if (h) {
            Vec2 reference = Vec2::Zero();
            for (const auto& w : world) reference += w;
            reference /= static_cast<double>(world.size());
            const auto candidate =
                camera_from_homography(*h, config.frame_width, config.frame_height, reference);
            if (candidate) {
                const CameraParams polished = coordinate_descent(*candidate, kps, model, config);
                const double polished_obj =
                    refinement_objective(polished, kps, model, config).value;
                if (polished_obj < best_obj.value) {
                    return polished;
                }
            }
        }
    }
    return best;
}

std::vector<CameraParams> smooth_sequence(const std::vector<CameraParams>& seq,
                                          const SmootherConfig& config) {
    if (config.window % 2 == 0 || config.window <= config.order) {
        throw std::invalid_argument("Savitzky-Golay window must be odd and exceed the order");
    }
    const int n = static_cast<int>(seq.size());
    if (n < config.window) {
        return seq;
    }

    const int half = config.window / 2;
    const int terms = config.order + 1;

    // channels layout matches CameraParams::to_array: x,y,z,pan,tilt,roll,fov
    std::vector<std::array<double, 7>> raw(n);
    for (int i = 0; i < n; ++i) {
        raw[i] = seq[i].to_array();
    }

    std::vector<std::array<double, 7>> smoothed = raw;
    for (int k = 0; k < n; ++k) {
        const int lo = std::max(0, k - half);
        const int hi = std::min(n - 1, k + half);
        const int m = hi - lo + 1;
        // Least-squares polynomial in the frame offset, evaluated at offset 0.
        Eigen::MatrixXd vand(m, terms);
        for (int r = 0; r < m; ++r) {
            const double t = static_cast<double>(lo + r - k);
            double powed = 1.0;
            for (int c = 0; c < terms; ++c) {
                vand(r, c) = powed;
                powed *= t;
            }
        }
        const Eigen::MatrixXd pinv =
            (vand.transpose() * vand).ldlt().solve(vand.transpose() * Eigen::MatrixXd::Identity(m, m));
        Eigen::VectorXd window_values(m);
        for (int ch = 0; ch < 7; ++ch) {
            for (int r = 0; r < m; ++r) {
                window_values(r) = raw[lo + r][ch];
            }
            smoothed[k][ch] = pinv.row(0).dot(window_values);
        }
    }

    std::vector<CameraParams> out(n);
    for (int k = 0; k < n; ++k) {
        for (int ch = 0; ch < 7; ++ch) {
            const double clamp = (ch >= 3) ? config.angle_clamp : config.position_clamp;
            const double corrected = std::clamp(smoothed[k][ch], raw[k][ch] - clamp, raw[k][ch] + clamp);
            smoothed[k][ch] = corrected;
        }
        out[k] = CameraParams::from_array(smoothed[k]);
    }
    return out;
}

}  // namespace gsr
