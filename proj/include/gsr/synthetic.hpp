#ifndef GSR_SYNTHETIC_HPP
#define GSR_SYNTHETIC_HPP

#include "gsr/calibration.hpp"
#include "gsr/evaluation.hpp"
#include "gsr/tracklet.hpp"

#include <random>
#include <vector>

namespace gsr {

struct CameraNoise {
    double angle_sigma = 0.0;     // pan/tilt/roll, radians
    double fov_sigma = 0.0;       // radians
    double position_sigma = 0.0;  // meters per axis
};

struct NoiseConfig {
    double pixel_sigma = 0.0;       // detection and keypoint pixel noise
    double embedding_sigma = 0.0;   // added to reid/team latents, renormalized
    double jersey_confusion = 0.0;  // probability of a corrupted or absent reading
    double dropout = 0.0;           // probability a visible detection is dropped
    CameraNoise camera;             // initial camera parameter noise
};

struct SimConfig {
    uint64_t seed = 1;
    double fps = 30.0;
    double duration_seconds = 30.0;
    int players_per_team = 11;  // including the goalkeeper
    int referees = 3;
    int reid_dim = 128;
    int team_dim = 32;
    double frame_width = 1920.0;
    double frame_height = 1080.0;
    double max_speed = 9.0;  // m/s
    NoiseConfig noise;

    int frame_count() const { return static_cast<int>(fps * duration_seconds); }
};

struct Identity {
    Role role = Role::player;
    Side side = Side::none;
    std::optional<int> jersey;
    Eigen::VectorXd reid_latent;
    Eigen::VectorXd team_latent;
};

struct GroundTruth {
    SimConfig cfg;
    std::vector<Identity> identities;
    std::vector<CameraParams> cameras;        // per frame
    std::vector<std::vector<Vec2>> positions; // [frame][identity]
    std::vector<std::vector<Vec2>> velocities;
};

/// Everything the perception stack would produce for one clip.
struct Observations {
    std::vector<Detection> detections;                    // all frames, frame-tagged
    std::vector<std::vector<DetectedKeypoint>> keypoints; // per frame
    std::vector<CameraParams> initial_cameras;            // noisy per-frame estimates
};

// Position uniform over x [-60,60], y [40,110], z [-40,-10]; pan/tilt solved
// so the optical axis hits the pitch rectangle; roll fixed at 0; fov uniform
// in [0.4, 1.3].
CameraParams sample_camera(std::mt19937_64& rng);

// Smooth bounded-speed trajectories for 2 x players + referees, goalkeepers
// anchored to their penalty areas, camera on a slow mean-reverting walk.
GroundTruth simulate_match(const SimConfig& cfg);

// Renders detections, keypoint observations and noisy initial camera
// parameters from the ground truth.
Observations render_observations(const GroundTruth& gt, const PitchModel& model);

/// Minimap records of every identity visible in the frame (no noise).
std::vector<GsRecord> ground_truth_gamestate(const GroundTruth& gt);

/// One exact tracklet per identity over the full clip.
std::vector<Tracklet> perfect_tracklets(const GroundTruth& gt);

// Cuts each tracklet into `pieces` contiguous parts at seeded interior
// positions, dropping one record per cut so parts never overlap.
std::vector<Tracklet> fragment_tracklets(const std::vector<Tracklet>& tracklets, int pieces,
                                         uint64_t seed);

}  // namespace gsr

#endif  // GSR_SYNTHETIC_HPP
