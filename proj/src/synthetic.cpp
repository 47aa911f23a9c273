#include "gsr/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace gsr {

namespace {

constexpr double kPlayerHeight = 1.8;  // meters, z is down so the head is at -1.8

Eigen::VectorXd random_unit(std::mt19937_64& rng, int dim) {
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::VectorXd v(dim);
    for (int i = 0; i < dim; ++i) v(i) = g(rng);
    const double n = v.norm();
    return n > 0.0 ? Eigen::VectorXd(v / n) : Eigen::VectorXd::Unit(dim, 0);
}

// Five mutually orthonormal kit vectors: team left/right, gk left/right, referee.
std::array<Eigen::VectorXd, 5> kit_latents(std::mt19937_64& rng, int dim) {
    std::array<Eigen::VectorXd, 5> kits;
    for (int k = 0; k < 5; ++k) {
        Eigen::VectorXd v = random_unit(rng, dim);
        for (int j = 0; j < k; ++j) {
            v -= v.dot(kits[j]) * kits[j];
        }
        double n = v.norm();
        while (n < 1e-6) {  // nearly dependent draw, try again
            v = random_unit(rng, dim);
            for (int j = 0; j < k; ++j) {
                v -= v.dot(kits[j]) * kits[j];
            }
            n = v.norm();
        }
        kits[k] = v / n;
    }
    return kits;
}

Eigen::VectorXd noisy_unit(const Eigen::VectorXd& latent, double sigma, std::mt19937_64& rng) {
    if (sigma <= 0.0) {
        return latent;
    }
    std::normal_distribution<double> g(0.0, sigma);
    Eigen::VectorXd v = latent;
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) += g(rng);
    const double n = v.norm();
    return n > 0.0 ? Eigen::VectorXd(v / n) : latent;
}

Orientation orientation_from_velocity(const Vec2& v) {
    const double angle = std::atan2(v.y(), v.x());
    if (angle > -M_PI / 4 && angle <= M_PI / 4) return Orientation::right;
    if (angle > M_PI / 4 && angle <= 3 * M_PI / 4) return Orientation::up;
    if (angle <= -M_PI / 4 && angle > -3 * M_PI / 4) return Orientation::down;
    return Orientation::left;
}

// Facing direction per identity and frame. Below a walking pace the previous
// facing is kept, the way an appearance-based orientation classifier behaves
// for a standing player (no left/right flicker from velocity jitter).
std::vector<std::vector<Orientation>> stable_orientations(const GroundTruth& gt) {
    const size_t frames = gt.velocities.size();
    const size_t n = gt.identities.size();
    std::vector<std::vector<Orientation>> out(frames, std::vector<Orientation>(n, Orientation::up));
    std::vector<Orientation> state(n, Orientation::up);
    for (size_t f = 0; f < frames; ++f) {
        for (size_t i = 0; i < n; ++i) {
            if (gt.velocities[f][i].norm() >= 0.5) {
                state[i] = orientation_from_velocity(gt.velocities[f][i]);
            }
            out[f][i] = state[i];
        }
    }
    return out;
}

JerseyReading concentrated_reading(int first_idx, int second_idx, double conf_first,
                                   double conf_second) {
    JerseyReading r;
    for (int i = 0; i < 10; ++i) {
        r.first[i] = (1.0 - conf_first) / 9.0;
        r.second[i] = (1.0 - conf_second) / 9.0;
    }
    r.first[first_idx] = conf_first;
    r.second[second_idx] = conf_second;
    return r;
}

JerseyReading uniform_reading() {
    JerseyReading r;
    r.first.fill(0.1);
    r.second.fill(0.1);
    return r;
}

JerseyReading render_jersey(const Identity& ident, double confusion, std::mt19937_64& rng) {
    if (!ident.jersey) {
        return uniform_reading();
    }
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    const int first = *ident.jersey / 10;  // 0 encodes "no leading digit"
    const int second = *ident.jersey % 10;
    if (u01(rng) >= confusion) {
        std::uniform_real_distribution<double> conf(0.85, 0.98);
        return concentrated_reading(first, second, conf(rng), conf(rng));
    }
    if (u01(rng) < 0.5) {
        // Corrupted: confidently wrong digits.
        std::uniform_int_distribution<int> df(0, 9), ds(0, 9);
        int wf = df(rng), ws = ds(rng);
        if (wf == first && ws == second) {
            ws = (ws + 1) % 10;
        }
        std::uniform_real_distribution<double> conf(0.55, 0.90);
        return concentrated_reading(wf, ws, conf(rng), conf(rng));
    }
    return uniform_reading();  // unreadable crop
}

bool project_feet(const CameraParams& cam, const Vec2& pos, double w, double h, Vec2& feet_px,
                  double& bbox_h) {
    const Vec3 feet_ndc = world_to_ndc(cam, Vec3(pos.x(), pos.y(), 0.0));
    if (feet_ndc.z() <= 1e-9) {
        return false;
    }
    feet_px = ndc_to_pixel(feet_ndc, w, h);
    if (feet_px.x() < 0.0 || feet_px.x() > w || feet_px.y() < 0.0 || feet_px.y() > h) {
        return false;
    }
    const Vec3 head_ndc = world_to_ndc(cam, Vec3(pos.x(), pos.y(), -kPlayerHeight));
    if (head_ndc.z() <= 1e-9) {
        return false;
    }
    const Vec2 head_px = ndc_to_pixel(head_ndc, w, h);
    bbox_h = std::abs(feet_px.y() - head_px.y());
    return true;
}

}  // namespace

CameraParams sample_camera(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> ux(-60.0, 60.0), uy(40.0, 110.0), uz(-40.0, -10.0);
    std::uniform_real_distribution<double> ufov(0.4, 1.3);
    std::uniform_real_distribution<double> utx(-52.5, 52.5), uty(-34.0, 34.0);

    CameraParams cam;
    cam.x = ux(rng);
    cam.y = uy(rng);
    cam.z = uz(rng);
    cam.roll = 0.0;
    cam.fov = ufov(rng);

    // Aim the optical axis at a point on the pitch and read pan/tilt off the
    // direction: d = (sin t sin p, -sin t cos p, cos t).
    const Vec3 target(utx(rng), uty(rng), 0.0);
    const Vec3 dir = (target - cam.position()).normalized();
    cam.tilt = std::acos(std::clamp(dir.z(), -1.0, 1.0));
    cam.pan = std::atan2(dir.x(), -dir.y());
    return cam;
}

GroundTruth simulate_match(const SimConfig& cfg) {
    std::mt19937_64 rng(cfg.seed);
    GroundTruth gt;
    gt.cfg = cfg;

    const auto kits = kit_latents(rng, cfg.team_dim);
    // kit order: team_left, team_right, gk_left, gk_right, referee
    auto add_identity = [&](Role role, Side side, std::optional<int> jersey, int kit) {
        Identity ident;
        ident.role = role;
        ident.side = side;
        ident.jersey = jersey;
        ident.reid_latent = random_unit(rng, cfg.reid_dim);
        ident.team_latent = kits[kit];
        gt.identities.push_back(std::move(ident));
    };
    for (int side_i = 0; side_i < 2; ++side_i) {
        const Side side = side_i == 0 ? Side::left : Side::right;
        for (int p = 0; p < cfg.players_per_team; ++p) {
            if (p == 0) {
                add_identity(Role::goalkeeper, side, 1, side_i == 0 ? 2 : 3);
            } else {
                add_identity(Role::player, side, p + 1, side_i);
            }
        }
    }
    for (int r = 0; r < cfg.referees; ++r) {
        add_identity(Role::referee, Side::none, std::nullopt, 4);
    }

    const int n = static_cast<int>(gt.identities.size());
    const int frames = cfg.frame_count();
    const double dt = 1.0 / cfg.fps;

    // Start positions: goalkeepers at their goals, players on their half,
    // referees around the centre.
    std::vector<Vec2> pos(n), vel(n, Vec2::Zero());
    std::uniform_real_distribution<double> uy(-30.0, 30.0), uvel(-3.0, 3.0);
    for (int i = 0; i < n; ++i) {
        const Identity& ident = gt.identities[i];
        if (ident.role == Role::goalkeeper) {
            pos[i] = Vec2(ident.side == Side::left ? -48.0 : 48.0, uy(rng) * 0.2);
        } else if (ident.role == Role::referee) {
            pos[i] = Vec2(uvel(rng) * 4.0, uy(rng));
        } else {
            std::uniform_real_distribution<double> ux_half(5.0, 48.0);
            const double x = ux_half(rng);
            pos[i] = Vec2(ident.side == Side::left ? -x : x, uy(rng));
        }
        vel[i] = Vec2(uvel(rng), uvel(rng));
    }

    CameraParams cam = sample_camera(rng);

    // Channel order: pan, tilt, fov, x, y, z.
    std::array<double, 6> cam_state = {cam.pan, cam.tilt, cam.fov, cam.x, cam.y, cam.z};
    const std::array<double, 6> cam_anchor_arr = cam_state;
    std::array<double, 6> cam_vel{};
    const std::array<double, 6> cam_spring = {0.4, 0.5, 0.5, 0.3, 0.3, 0.4};
    const std::array<double, 6> cam_damp = {1.5, 1.6, 1.6, 1.2, 1.2, 1.4};
    const std::array<double, 6> cam_accel = {0.06, 0.03, 0.03, 0.6, 0.6, 0.3};

    gt.cameras.reserve(frames);
    gt.positions.reserve(frames);
    gt.velocities.reserve(frames);
    std::normal_distribution<double> accel(0.0, 4.0);
    std::normal_distribution<double> cam_walk(0.0, 1.0);

    for (int f = 0; f < frames; ++f) {
        gt.positions.push_back(pos);
        gt.velocities.push_back(vel);
        gt.cameras.push_back(cam);

        for (int i = 0; i < n; ++i) {
            const Identity& ident = gt.identities[i];
            Vec2 a(accel(rng), accel(rng));
            // Soft confinement to the pitch (players may step slightly outside).
            if (std::abs(pos[i].x()) > 51.0) a.x() -= 3.0 * (pos[i].x() > 0 ? 1.0 : -1.0);
            if (std::abs(pos[i].y()) > 32.0) a.y() -= 3.0 * (pos[i].y() > 0 ? 1.0 : -1.0);
            if (ident.role == Role::goalkeeper) {
                const Vec2 anchor(ident.side == Side::left ? -46.0 : 46.0, 0.0);
                a += 1.2 * (anchor - pos[i]) - 1.5 * vel[i];
            }
            if (a.norm() > 6.0) {
                a *= 6.0 / a.norm();
            }
            vel[i] += a * dt;
            const double cap = ident.role == Role::goalkeeper ? 4.0 : cfg.max_speed;
            if (vel[i].norm() > cap) {
                vel[i] *= cap / vel[i].norm();
            }
            pos[i] += vel[i] * dt;
        }

        // Damped-spring camera motion: smooth velocity, bounded excursions.
        // A broadcast camera head moves with continuous velocity; jerk lives
        // well below the Savitzky-Golay window scale.
        for (int ch = 0; ch < 6; ++ch) {
            const double accel = -cam_spring[ch] * (cam_state[ch] - cam_anchor_arr[ch]) -
                                 cam_damp[ch] * cam_vel[ch] + cam_accel[ch] * cam_walk(rng);
            cam_vel[ch] += accel * dt;
            cam_state[ch] += cam_vel[ch] * dt;
        }
        cam.pan = cam_state[0];
        cam.tilt = std::clamp(cam_state[1], 0.5, 1.55);
        cam.fov = std::clamp(cam_state[2], 0.35, 1.35);
        cam.x = cam_state[3];
        cam.y = std::clamp(cam_state[4], 40.0, 110.0);
        cam.z = std::clamp(cam_state[5], -40.0, -10.0);
    }
    return gt;
}

Observations render_observations(const GroundTruth& gt, const PitchModel& model) {
    const SimConfig& cfg = gt.cfg;
    Observations obs;
    const int frames = static_cast<int>(gt.positions.size());
    obs.keypoints.resize(frames);
    obs.initial_cameras.reserve(frames);

    std::mt19937_64 cam_rng(cfg.seed ^ 0x5DEECE66DULL);
    std::normal_distribution<double> g01(0.0, 1.0);
    const auto orientations = stable_orientations(gt);

    for (int f = 0; f < frames; ++f) {
        // Per-frame generator: rendering stays deterministic even if frames
        // are processed in parallel.
        std::mt19937_64 rng(cfg.seed + 0x9E3779B97F4A7C15ULL * static_cast<uint64_t>(f + 1));
        std::uniform_real_distribution<double> u01(0.0, 1.0);
        std::normal_distribution<double> pixel_noise(0.0, cfg.noise.pixel_sigma);
        const CameraParams& cam = gt.cameras[f];

        for (size_t i = 0; i < gt.identities.size(); ++i) {
            const Identity& ident = gt.identities[i];
            Vec2 feet;
            double bbox_h = 0.0;
            if (!project_feet(cam, gt.positions[f][i], cfg.frame_width, cfg.frame_height, feet, bbox_h)) {
                continue;
            }
            if (cfg.noise.dropout > 0.0 && u01(rng) < cfg.noise.dropout) {
                continue;
            }
            if (cfg.noise.pixel_sigma > 0.0) {
                feet += Vec2(pixel_noise(rng), pixel_noise(rng));
            }
            Detection det;
            det.frame = f;
            const double bbox_w = 0.4 * bbox_h;
            det.bbox = {feet.x() - bbox_w / 2.0, feet.y() - bbox_h, bbox_w, bbox_h};
            det.cls = DetClass::athlete;
            det.conf = 0.8 + 0.2 * u01(rng);
            det.reid = noisy_unit(ident.reid_latent, cfg.noise.embedding_sigma, rng);
            det.team = noisy_unit(ident.team_latent, cfg.noise.embedding_sigma, rng);
            det.jersey = render_jersey(ident, cfg.noise.jersey_confusion, rng);
            det.orient = orientations[f][i];
            det.anomaly = false;
            obs.detections.push_back(std::move(det));
        }

        for (size_t k = 0; k < model.keypoints.size(); ++k) {
            const Vec3 world(model.keypoints[k].x(), model.keypoints[k].y(), 0.0);
            const Vec3 ndc = world_to_ndc(cam, world);
            if (ndc.z() <= 1e-9) {
                continue;
            }
            Vec2 px = ndc_to_pixel(ndc, cfg.frame_width, cfg.frame_height);
            if (px.x() < 0.0 || px.x() > cfg.frame_width || px.y() < 0.0 ||
                px.y() > cfg.frame_height) {
                continue;
            }
            if (cfg.noise.pixel_sigma > 0.0) {
                px += Vec2(pixel_noise(rng), pixel_noise(rng));
            }
            obs.keypoints[f].push_back({static_cast<int>(k), px, 0.7 + 0.3 * u01(rng)});
        }

        CameraParams noisy = cam;
        noisy.pan += cfg.noise.camera.angle_sigma * g01(cam_rng);
        noisy.tilt += cfg.noise.camera.angle_sigma * g01(cam_rng);
        noisy.roll += cfg.noise.camera.angle_sigma * g01(cam_rng);
        noisy.fov += cfg.noise.camera.fov_sigma * g01(cam_rng);
        noisy.x += cfg.noise.camera.position_sigma * g01(cam_rng);
        noisy.y += cfg.noise.camera.position_sigma * g01(cam_rng);
        noisy.z += cfg.noise.camera.position_sigma * g01(cam_rng);
        obs.initial_cameras.push_back(noisy);
    }
    return obs;
}

std::vector<GsRecord> ground_truth_gamestate(const GroundTruth& gt) {
    std::vector<GsRecord> out;
    const SimConfig& cfg = gt.cfg;
    for (size_t f = 0; f < gt.positions.size(); ++f) {
        for (size_t i = 0; i < gt.identities.size(); ++i) {
            Vec2 feet;
            double bbox_h = 0.0;
            if (!project_feet(gt.cameras[f], gt.positions[f][i], cfg.frame_width,
                              cfg.frame_height, feet, bbox_h)) {
                continue;
            }
            GsRecord r;
            r.frame = static_cast<int>(f);
            r.id = static_cast<int>(i) + 1;
            r.pos = gt.positions[f][i];
            r.role = gt.identities[i].role;
            r.side = gt.identities[i].side;
            r.jersey = gt.identities[i].jersey;
            out.push_back(r);
        }
    }
    return out;
}

std::vector<Tracklet> perfect_tracklets(const GroundTruth& gt) {
    std::vector<Tracklet> out;
    const auto orientations = stable_orientations(gt);
    for (size_t i = 0; i < gt.identities.size(); ++i) {
        const Identity& ident = gt.identities[i];
        Tracklet t;
        t.id = static_cast<int>(i) + 1;
        t.role = ident.role;
        t.side = ident.side;
        t.jersey = ident.jersey;
        for (size_t f = 0; f < gt.positions.size(); ++f) {
            TrackletRecord rec;
            rec.frame = static_cast<int>(f);
            rec.pos = gt.positions[f][i];
            rec.reid = ident.reid_latent;
            rec.team = ident.team_latent;
            if (ident.jersey) {
                rec.jersey = concentrated_reading(*ident.jersey / 10, *ident.jersey % 10, 0.97, 0.97);
            }
            rec.orient = orientations[f][i];
            t.records.push_back(std::move(rec));
        }
        out.push_back(std::move(t));
    }
    return out;
}

std::vector<Tracklet> fragment_tracklets(const std::vector<Tracklet>& tracklets, int pieces,
                                         uint64_t seed) {
    if (pieces < 1) {
        throw std::invalid_argument("fragment_tracklets requires pieces >= 1");
    }
    std::mt19937_64 rng(seed);
    std::vector<Tracklet> out;
    int next_id = 1;
    for (const auto& t : tracklets) {
        const int n = static_cast<int>(t.records.size());
        const int want = std::min(pieces, (n + 1) / 2);
        if (want <= 1) {
            Tracklet copy = t;
            copy.id = next_id++;
            out.push_back(std::move(copy));
            continue;
        }
        // Drop `want - 1` non-adjacent interior records; the gaps between
        // drops become the pieces. Non-adjacent k-subsets of {1..m} biject
        // with k-subsets of {1..m-k+1} via an index spread, which keeps the
        // sampler uniform and always terminating.
        const int k = want - 1;
        const int m = n - 2;
        std::set<int> base;
        std::uniform_int_distribution<int> upos(1, m - k + 1);
        while (static_cast<int>(base.size()) < k) {
            base.insert(upos(rng));
        }
        std::set<int> drops;
        int offset = 0;
        for (int b : base) {
            drops.insert(b + offset++);
        }
        Tracklet piece;
        piece.id = next_id++;
        piece.role = t.role;
        piece.side = t.side;
        piece.jersey = t.jersey;
        for (int r = 0; r < n; ++r) {
            if (drops.count(r)) {
                if (!piece.records.empty()) {
                    out.push_back(std::move(piece));
                    piece = Tracklet{};
                    piece.id = next_id++;
                    piece.role = t.role;
                    piece.side = t.side;
                    piece.jersey = t.jersey;
                }
                continue;
            }
            piece.records.push_back(t.records[r]);
        }
        if (!piece.records.empty()) {
            out.push_back(std::move(piece));
        }
    }
    return out;
}

}  // namespace gsr
