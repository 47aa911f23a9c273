#ifndef GSR_PITCH_HPP
#define GSR_PITCH_HPP

#include "gsr/geometry.hpp"

#include <string>
#include <vector>

namespace gsr {

enum class Side { left, right, none };

/// Straight pitch marking, stored as a world-space segment at z=0.
struct Segment {
    std::string id;
    Vec2 a;
    Vec2 b;
};

/// Circle or circular arc marking. theta0/theta1 bound the arc
/// counterclockwise; full circles ignore them.
struct Arc {
    std::string id;
    Vec2 center;
    double radius = 0.0;
    double theta0 = 0.0;
    double theta1 = 0.0;
    bool full = false;
};

/// Group of keypoints expected to be collinear, used for line fitting and
/// outlier rejection during camera refinement.
struct LineGroup {
    std::string id;
    std::vector<int> members;  // keypoint indices
};

// Canonical FIFA pitch: 105 x 68 m, penalty areas 40.32 x 16.5 m, goal areas
// 18.32 x 5.5 m, centre circle and penalty arcs of radius 9.15 m.
//
// The 74 keypoints are the intersections of the pitch markings with 23 grass
// stripes parallel to the halfway line, spaced 4.575 m (half the circle
// radius) so the count lands exactly on 74:
//   46 touchline crossings, 16 penalty-area side crossings, 4 goal-area side
//   crossings, 4 centre-circle crossings at x = +-4.575, the two tangent
//   points (+-9.15, 0), and (0, +-9.15) where the halfway stripe meets the
//   circle.
// Keypoints are sorted by (x, y); indices are stable.
struct PitchModel {
    double length = kPitchLength;
    double width = kPitchWidth;
    std::vector<Segment> segments;
    std::vector<Arc> arcs;
    std::vector<Vec2> keypoints;
    std::vector<LineGroup> groups;
};

PitchModel standard_pitch();

/// Minimum Euclidean distance from p to any marking (segment or arc).
double distance_to_model(const Vec2& p, const PitchModel& model);

/// Inclusive point-in-rectangle test against the side's penalty area.
bool in_penalty_area(const Vec2& p, Side side, const PitchModel& model);

std::string pitch_to_json(const PitchModel& model);
PitchModel pitch_from_json(const std::string& text);

const char* to_string(Side side);
Side side_from_string(const std::string& s);

}  // namespace gsr

#endif  // GSR_PITCH_HPP
