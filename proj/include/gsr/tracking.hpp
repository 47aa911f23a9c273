#ifndef GSR_TRACKING_HPP
#define GSR_TRACKING_HPP

#include "gsr/assignment.hpp"
#include "gsr/geometry.hpp"

#include <deque>
#include <optional>
#include <string>
#include <vector>

namespace gsr {

enum class Orientation { left, up, right, down };
enum class DetClass { athlete, ball };

const char* to_string(Orientation o);
Orientation orientation_from_string(const std::string& s);

/// 180-degree pairs: (left,right) and (up,down).
bool opposite_orientation(Orientation a, Orientation b);

/// Two-head jersey reading: index 0 of `first` means "no leading digit".
struct JerseyReading {
    std::array<double, 10> first{};   // none, 1..9
    std::array<double, 10> second{};  // 0..9
};

struct Detection {
    int frame = 0;
    std::array<double, 4> bbox{};  // x, y, w, h in pixels
    DetClass cls = DetClass::athlete;
    double conf = 1.0;
    Vec2 pitch_pos = Vec2::Zero();  // derived from bbox + camera upstream
    // Ground-plane position noise (meters): pixel jitter amplified by the
    // projection footprint at this detection's range. 0 means "unknown";
    // the tracker then falls back to its configured floor.
    double pos_sigma = 0.0;
    Eigen::VectorXd reid;
    Eigen::VectorXd team;
    JerseyReading jersey;
    Orientation orient = Orientation::up;
    bool anomaly = false;
};

struct TrackerConfig {
    double process_noise = 6.0;       // accel std, m/s^2
    double measurement_noise = 0.3;   // position std floor, m
    double pixel_noise_px = 2.0;      // assumed detector jitter, px
    double initial_velocity_std = 5.0;
    double gate = 9.4877;             // squared Mahalanobis gate
    double appearance_weight = 0.5;
    int max_misses = 30;
    int confirm_hits = 3;
    int gallery_size = 50;
    double team_gate = 0.35;          // cosine distance between team means
    bool orientation_gate = true;
    // An unmatched detection within this squared-Mahalanobis distance of an
    // existing track, with an appearance matching that track's gallery, lost
    // the assignment to a competitor; spawning a twin there would shadow the
    // real track forever. 0 disables the check.
    double spawn_gate = 9.4877;
    double spawn_appearance_gate = 0.4;  // cosine distance
};

enum class TrackStatus { tentative, confirmed, terminated };

struct TrackRecord {
    int frame = 0;
    int track_id = 0;
    Vec2 pos = Vec2::Zero();
    Eigen::VectorXd reid;
    Eigen::VectorXd team;
    JerseyReading jersey;
    Orientation orient = Orientation::up;
    bool is_ball = false;
};

struct TrackState {
    int id = 0;
    Eigen::Vector4d mean = Eigen::Vector4d::Zero();  // x, y, vx, vy
    Eigen::Matrix4d cov = Eigen::Matrix4d::Identity();
    int age = 0;
    int hits = 0;
    int misses = 0;
    TrackStatus status = TrackStatus::tentative;
    std::deque<Eigen::VectorXd> gallery;  // recent reid embeddings
    Eigen::VectorXd team_sum;
    int team_count = 0;
    Orientation last_orient = Orientation::up;
    std::vector<TrackRecord> pending;  // buffered while tentative

    Vec2 position() const { return mean.head<2>(); }
    Eigen::VectorXd team_mean() const;
};

/// Detections with the anomaly flag set are dropped; order is preserved.
std::vector<Detection> filter_anomalies(const std::vector<Detection>& dets);

/// Constant-velocity Kalman prediction over dt seconds.
TrackState predict(const TrackState& track, double dt, const TrackerConfig& config);

/// Blended Mahalanobis/appearance cost, or kInfeasibleCost when any gate
/// (distance, opposite orientation, team embedding) rejects the pair.
double association_cost(const TrackState& predicted, const Detection& det,
                        const TrackerConfig& config);

struct Matching {
    std::vector<std::pair<int, int>> pairs;  // (track index, detection index)
    std::vector<int> unmatched_tracks;
    std::vector<int> unmatched_dets;
};

/// Minimum-total-cost one-to-one matching over feasible pairs.
Matching associate(const std::vector<TrackState>& predicted, const std::vector<Detection>& dets,
                   const TrackerConfig& config);

/// Frame-sequential DeepSORT-style tracker in pitch coordinates. Athlete
/// detections feed the Kalman/appearance pipeline; ball detections are kept
/// in a single nearest-neighbour track.
class Tracker {
  public:
    explicit Tracker(TrackerConfig config) : config_(std::move(config)) {}

    // Processes one frame; returns the records that became final this step.
    // Records of a tentative track are buffered and released on confirmation.
    std::vector<TrackRecord> step(const std::vector<Detection>& frame_dets, double dt);

    const std::vector<TrackState>& tracks() const { return tracks_; }
    int confirmed_count() const;

  private:
    TrackerConfig config_;
    std::vector<TrackState> tracks_;
    int next_id_ = 1;
    std::optional<Vec2> ball_pos_;
    int ball_id_ = 0;
};

}  // namespace gsr

#endif  // GSR_TRACKING_HPP
