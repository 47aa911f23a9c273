#include "gsr/tracking.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>

namespace gsr {

namespace {

double cosine_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    const double na = a.norm(), nb = b.norm();
    if (na == 0.0 || nb == 0.0) {
        return 1.0;
    }
    return 1.0 - a.dot(b) / (na * nb);
}

Eigen::Matrix4d transition(double dt) {
    Eigen::Matrix4d f = Eigen::Matrix4d::Identity();
    f(0, 2) = dt;
    f(1, 3) = dt;
    return f;
}

Eigen::Matrix4d process_noise(double dt, double accel_std) {
    const double q = accel_std * accel_std;
    const double dt2 = dt * dt;
    Eigen::Matrix4d noise = Eigen::Matrix4d::Zero();
    noise(0, 0) = noise(1, 1) = q * dt2 * dt2 / 4.0;
    noise(2, 2) = noise(3, 3) = q * dt2;
    noise(0, 2) = noise(2, 0) = q * dt2 * dt / 2.0;
    noise(1, 3) = noise(3, 1) = q * dt2 * dt / 2.0;
    return noise;
}

double measurement_sigma(const Detection& det, const TrackerConfig& cfg);

TrackState make_track(int id, const Detection& det, const TrackerConfig& cfg) {
    TrackState t;
    t.id = id;
    t.mean.head<2>() = det.pitch_pos;
    const double sigma = measurement_sigma(det, cfg);
    t.cov = Eigen::Matrix4d::Zero();
    t.cov(0, 0) = t.cov(1, 1) = sigma * sigma;
    t.cov(2, 2) = t.cov(3, 3) = cfg.initial_velocity_std * cfg.initial_velocity_std;
    t.age = 1;
    t.hits = 1;
    t.gallery.push_back(det.reid);
    t.team_sum = det.team;
    t.team_count = 1;
    t.last_orient = det.orient;
    return t;
}

double measurement_sigma(const Detection& det, const TrackerConfig& cfg) {
    return std::max(cfg.measurement_noise, det.pos_sigma);
}

void kalman_update(TrackState& t, const Detection& det, const TrackerConfig& cfg) {
    const Vec2 z = det.pitch_pos;
    const double sigma = measurement_sigma(det, cfg);
    Eigen::Matrix<double, 2, 4> h = Eigen::Matrix<double, 2, 4>::Zero();
    h(0, 0) = h(1, 1) = 1.0;
    const Eigen::Matrix2d r = Eigen::Matrix2d::Identity() * sigma * sigma;
    const Eigen::Matrix2d s = h * t.cov * h.transpose() + r;
    const Eigen::Matrix<double, 4, 2> k = t.cov * h.transpose() * s.inverse();
    t.mean += k * (z - h * t.mean);
    // Joseph form keeps the covariance symmetric positive definite.
    const Eigen::Matrix4d ikh = Eigen::Matrix4d::Identity() - k * h;
    t.cov = ikh * t.cov * ikh.transpose() + k * r * k.transpose();
}

}  // namespace

const char* to_string(Orientation o) {
    switch (o) {
        case Orientation::left: return "left";
        case Orientation::up: return "up";
        case Orientation::right: return "right";
        default: return "down";
    }
}

Orientation orientation_from_string(const std::string& s) {
    if (s == "left") return Orientation::left;
    if (s == "up") return Orientation::up;
    if (s == "right") return Orientation::right;
    if (s == "down") return Orientation::down;
    throw std::invalid_argument("unknown orientation: " + s);
}

bool opposite_orientation(Orientation a, Orientation b) {
    return (a == Orientation::left && b == Orientation::right) ||
           (a == Orientation::right && b == Orientation::left) ||
           (a == Orientation::up && b == Orientation::down) ||
           (a == Orientation::down && b == Orientation::up);
}

Eigen::VectorXd TrackState::team_mean() const {
    if (team_count == 0 || team_sum.size() == 0 || team_sum.norm() == 0.0) {
        return team_sum;
    }
    return team_sum.normalized();
}

std::vector<Detection> filter_anomalies(const std::vector<Detection>& dets) {
    std::vector<Detection> out;
    out.reserve(dets.size());
    for (const auto& d : dets) {
        if (!d.anomaly) {
            out.push_back(d);
        }
    }
    return out;
}

TrackState predict(const TrackState& track, double dt, const TrackerConfig& config) {
    if (dt <= 0.0) {
        throw std::invalid_argument("predict requires dt > 0");
    }
    TrackState out = track;
    const Eigen::Matrix4d f = transition(dt);
    out.mean = f * track.mean;
    out.cov = f * track.cov * f.transpose() + process_noise(dt, config.process_noise);
    return out;
}

double association_cost(const TrackState& predicted, const Detection& det,
                        const TrackerConfig& config) {
    // Mahalanobis gate in measurement space.
    const double sigma = measurement_sigma(det, config);
    const Eigen::Matrix2d s = predicted.cov.topLeftCorner<2, 2>() +
                              Eigen::Matrix2d::Identity() * sigma * sigma;
    const Vec2 innovation = det.pitch_pos - predicted.position();
    const double d2 = innovation.dot(s.inverse() * innovation);
    if (d2 > config.gate) {
        return kInfeasibleCost;
    }
    if (config.orientation_gate && opposite_orientation(predicted.last_orient, det.orient)) {
        return kInfeasibleCost;
    }
    const Eigen::VectorXd team_mean = predicted.team_mean();
    if (team_mean.size() > 0 && det.team.size() > 0 &&
        cosine_distance(team_mean, det.team) > config.team_gate) {
        return kInfeasibleCost;
    }
    double appearance = 0.0;
    if (!predicted.gallery.empty() && det.reid.size() > 0) {
        appearance = std::numeric_limits<double>::infinity();
        for (const auto& g : predicted.gallery) {
            appearance = std::min(appearance, cosine_distance(g, det.reid));
        }
    }
    const double motion = std::sqrt(d2 / config.gate);
    return (1.0 - config.appearance_weight) * motion + config.appearance_weight * appearance;
}

Matching associate(const std::vector<TrackState>& predicted, const std::vector<Detection>& dets,
                   const TrackerConfig& config) {
    Matching m;
    if (predicted.empty() || dets.empty()) {
        for (size_t i = 0; i < predicted.size(); ++i) m.unmatched_tracks.push_back(static_cast<int>(i));
        for (size_t j = 0; j < dets.size(); ++j) m.unmatched_dets.push_back(static_cast<int>(j));
        return m;
    }
    Eigen::MatrixXd cost(predicted.size(), dets.size());
    for (size_t i = 0; i < predicted.size(); ++i) {
        for (size_t j = 0; j < dets.size(); ++j) {
            cost(i, j) = association_cost(predicted[i], dets[j], config);
        }
    }
    m.pairs = solve_assignment(cost);

    std::vector<uint8_t> track_used(predicted.size(), 0), det_used(dets.size(), 0);
    for (const auto& [ti, dj] : m.pairs) {
        track_used[ti] = 1;
        det_used[dj] = 1;
    }
    for (size_t i = 0; i < predicted.size(); ++i) {
        if (!track_used[i]) m.unmatched_tracks.push_back(static_cast<int>(i));
    }
    for (size_t j = 0; j < dets.size(); ++j) {
        if (!det_used[j]) m.unmatched_dets.push_back(static_cast<int>(j));
    }
    return m;
}

std::vector<TrackRecord> Tracker::step(const std::vector<Detection>& frame_dets, double dt) {
    std::vector<TrackRecord> emitted;

    std::vector<Detection> athletes;
    std::vector<const Detection*> balls;
    for (const auto& d : frame_dets) {
        if (d.cls == DetClass::ball) {
            balls.push_back(&d);
        } else {
            athletes.push_back(d);
        }
    }

    for (auto& t : tracks_) {
        t = predict(t, dt, config_);
        ++t.age;
    }

    // DeepSORT matching cascade: recently updated tracks claim detections
    // first, so a stale twin of a live track starves instead of leapfrogging
    // it indefinitely.
    Matching match;
    {
        std::vector<int> remaining(athletes.size());
        std::iota(remaining.begin(), remaining.end(), 0);
        std::vector<uint8_t> track_matched(tracks_.size(), 0);
        std::map<int, std::vector<int>> by_staleness;
        for (size_t i = 0; i < tracks_.size(); ++i) {
            by_staleness[tracks_[i].misses].push_back(static_cast<int>(i));
        }
        for (const auto& [staleness, track_idx] : by_staleness) {
            if (remaining.empty()) {
                break;
            }
            std::vector<TrackState> bucket;
            bucket.reserve(track_idx.size());
            for (int ti : track_idx) {
                bucket.push_back(tracks_[ti]);
            }
            std::vector<Detection> det_bucket;
            det_bucket.reserve(remaining.size());
            for (int dj : remaining) {
                det_bucket.push_back(athletes[dj]);
            }
            const Matching sub = associate(bucket, det_bucket, config_);
            std::set<int> taken;
            for (const auto& [bi, bj] : sub.pairs) {
                match.pairs.emplace_back(track_idx[bi], remaining[bj]);
                track_matched[track_idx[bi]] = 1;
                taken.insert(remaining[bj]);
            }
            std::vector<int> next_remaining;
            for (int dj : remaining) {
                if (!taken.count(dj)) {
                    next_remaining.push_back(dj);
                }
            }
            remaining = std::move(next_remaining);
        }
        for (size_t i = 0; i < tracks_.size(); ++i) {
            if (!track_matched[i]) {
                match.unmatched_tracks.push_back(static_cast<int>(i));
            }
        }
        match.unmatched_dets = remaining;
        std::sort(match.pairs.begin(), match.pairs.end());
    }

    for (const auto& [ti, dj] : match.pairs) {
        TrackState& t = tracks_[ti];
        const Detection& det = athletes[dj];
        kalman_update(t, det, config_);
        ++t.hits;
        t.misses = 0;
        t.gallery.push_back(det.reid);
        while (static_cast<int>(t.gallery.size()) > config_.gallery_size) {
            t.gallery.pop_front();
        }
        if (t.team_sum.size() == det.team.size()) {
            t.team_sum += det.team;
        } else {
            t.team_sum = det.team;
        }
        ++t.team_count;
        t.last_orient = det.orient;

        TrackRecord rec;
        rec.frame = det.frame;
        rec.track_id = t.id;
        rec.pos = t.position();
        rec.reid = det.reid;
        rec.team = det.team;
        rec.jersey = det.jersey;
        rec.orient = det.orient;

        if (t.status == TrackStatus::tentative) {
            t.pending.push_back(std::move(rec));
            if (t.hits >= config_.confirm_hits) {
                t.status = TrackStatus::confirmed;
                for (auto& buffered : t.pending) {
                    emitted.push_back(std::move(buffered));
                }
                t.pending.clear();
            }
        } else {
            emitted.push_back(std::move(rec));
        }
    }

    for (int ti : match.unmatched_tracks) {
        ++tracks_[ti].misses;
        if (tracks_[ti].misses > config_.max_misses) {
            tracks_[ti].status = TrackStatus::terminated;
        }
    }
    tracks_.erase(std::remove_if(tracks_.begin(), tracks_.end(),
                                 [](const TrackState& t) { return t.status == TrackStatus::terminated; }),
                  tracks_.end());

    const size_t tracks_before_spawns = tracks_.size();
    for (int dj : match.unmatched_dets) {
        const Detection& det = athletes[dj];
        if (config_.spawn_gate > 0.0) {
            // A twin shadows an existing track both in position and in
            // appearance; a different player standing nearby does not.
            bool shadows_existing = false;
            const double sigma = measurement_sigma(det, config_);
            for (size_t i = 0; i < tracks_before_spawns; ++i) {
                const TrackState& t = tracks_[i];
                const Eigen::Matrix2d s = t.cov.topLeftCorner<2, 2>() +
                                          Eigen::Matrix2d::Identity() * sigma * sigma;
                const Vec2 innovation = det.pitch_pos - t.position();
                if (innovation.dot(s.inverse() * innovation) >= config_.spawn_gate) {
                    continue;
                }
                bool appearance_match = true;  // unknown appearance: be conservative
                if (!t.gallery.empty() && det.reid.size() > 0) {
                    double best = std::numeric_limits<double>::infinity();
                    for (const auto& g : t.gallery) {
                        best = std::min(best, cosine_distance(g, det.reid));
                    }
                    appearance_match = best < config_.spawn_appearance_gate;
                }
                if (appearance_match) {
                    shadows_existing = true;
                    break;
                }
            }
            if (shadows_existing) {
                continue;
            }
        }
        TrackState t = make_track(next_id_++, det, config_);
        TrackRecord rec;
        rec.frame = det.frame;
        rec.track_id = t.id;
        rec.pos = t.position();
        rec.reid = det.reid;
        rec.team = det.team;
        rec.jersey = det.jersey;
        rec.orient = det.orient;
        if (config_.confirm_hits <= 1) {
            t.status = TrackStatus::confirmed;
            emitted.push_back(std::move(rec));
        } else {
            t.pending.push_back(std::move(rec));
        }
        tracks_.push_back(std::move(t));
    }

    // Ball: single nearest-neighbour track, no Kalman state.
    if (!balls.empty()) {
        const Detection* chosen = balls.front();
        if (ball_pos_) {
            double best = std::numeric_limits<double>::infinity();
            for (const Detection* b : balls) {
                const double d = (b->pitch_pos - *ball_pos_).norm();
                if (d < best) {
                    best = d;
                    chosen = b;
                }
            }
        }
        if (ball_id_ == 0) {
            ball_id_ = next_id_++;
        }
        ball_pos_ = chosen->pitch_pos;
        TrackRecord rec;
        rec.frame = chosen->frame;
        rec.track_id = ball_id_;
        rec.pos = chosen->pitch_pos;
        rec.reid = chosen->reid;
        rec.team = chosen->team;
        rec.jersey = chosen->jersey;
        rec.orient = chosen->orient;
        rec.is_ball = true;
        emitted.push_back(std::move(rec));
    }

    return emitted;
}

int Tracker::confirmed_count() const {
    int n = 0;
    for (const auto& t : tracks_) {
        n += t.status == TrackStatus::confirmed ? 1 : 0;
    }
    return n;
}

}  // namespace gsr
