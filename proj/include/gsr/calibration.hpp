#ifndef GSR_CALIBRATION_HPP
#define GSR_CALIBRATION_HPP

#include "gsr/geometry.hpp"
#include "gsr/pitch.hpp"

#include <span>
#include <vector>

namespace gsr {

/// One observed field keypoint in image space.
struct DetectedKeypoint {
    int idx = 0;       // 0..73, index into PitchModel::keypoints
    Vec2 pixel;
    double conf = 1.0;
};

struct RefinementConfig {
    // Offsets tried for pan/tilt/roll/fov (radians) and x/y/z (meters). Both
    // sets must contain 0 so keeping a parameter is always an option.
    std::vector<double> angle_deltas = {-0.15, -0.10, -0.05, 0.0, 0.05, 0.10, 0.15};
    std::vector<double> position_deltas = {-1.5, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5};
    int max_sweeps = 3;
    double outlier_threshold = 0.5;  // meters, planar distance to the fitted line
    double frame_width = 1920.0;
    double frame_height = 1080.0;
    // Charged per keypoint whose viewing ray misses the ground plane.
    double projection_penalty = 1000.0;
};

struct SmootherConfig {
    int window = 31;  // odd, 2*delay + 1
    int order = 2;
    double angle_clamp = 2.0 * M_PI / 180.0;  // pan/tilt/roll/fov
    double position_clamp = 2.0;              // x/y/z
    int delay = 15;                           // realized by the symmetric window
};

/// Best-fit planar line over the projected members of one collinearity group.
struct LineObservation {
    std::string group_id;
    Vec2 point;                // point on the fitted line
    Vec2 dir;                  // unit direction
    std::vector<int> inliers;  // indices into the input keypoint list
};

struct ObjectiveResult {
    double value = 0.0;
    int inliers = 0;
    bool empty = false;  // no usable keypoints
};

// Projects detected keypoints to the ground plane under params, fits a
// total-least-squares line per collinearity group with at least two present
// members, drops members farther than the outlier threshold and refits once.
std::vector<LineObservation> keypoints_to_lines(std::span<const DetectedKeypoint> kps,
                                                const CameraParams& params,
                                                const PitchModel& model,
                                                const RefinementConfig& config);

// Sum of distance_to_model over the ground-plane projections of all inlier
// keypoints; keypoints whose ray misses the ground add a fixed penalty.
ObjectiveResult refinement_objective(const CameraParams& params,
                                     std::span<const DetectedKeypoint> kps,
                                     const PitchModel& model,
                                     const RefinementConfig& config);

// Cyclic coordinate descent over (pan, tilt, roll, fov, x, y, z) with the
// configured delta sets; ties prefer the smallest |delta|, then the earlier
// list position. Never increases the objective.
CameraParams refine_params(const CameraParams& initial,
                           std::span<const DetectedKeypoint> kps,
                           const PitchModel& model,
                           const RefinementConfig& config);

// Channel-wise Savitzky-Golay smoothing with per-frame clamps. Sequences
// shorter than the window are returned unchanged.
std::vector<CameraParams> smooth_sequence(const std::vector<CameraParams>& seq,
                                          const SmootherConfig& config);

}  // namespace gsr

#endif  // GSR_CALIBRATION_HPP
