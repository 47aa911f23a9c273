#ifndef GSR_TRACKLET_HPP
#define GSR_TRACKLET_HPP

#include "gsr/pitch.hpp"
#include "gsr/tracking.hpp"

#include <optional>
#include <vector>

namespace gsr {

enum class Role { player, goalkeeper, referee, other };

/// One frame of a tracklet. Embeddings and attribute observations are absent
/// on interpolated frames.
struct TrackletRecord {
    int frame = 0;
    Vec2 pos = Vec2::Zero();
    std::optional<Eigen::VectorXd> reid;
    std::optional<Eigen::VectorXd> team;
    std::optional<JerseyReading> jersey;
    std::optional<Orientation> orient;
};

/// Temporally contiguous fragment of one identity's trajectory with its
/// resolved attributes. Frames are strictly increasing.
struct Tracklet {
    int id = 0;
    std::vector<TrackletRecord> records;
    Role role = Role::player;
    Side side = Side::none;
    std::optional<int> jersey;

    int start_frame() const { return records.empty() ? 0 : records.front().frame; }
    int end_frame() const { return records.empty() ? 0 : records.back().frame; }
};

/// Groups tracker output by track id into frame-sorted tracklets; ball
/// records become Role::other tracklets.
std::vector<Tracklet> build_tracklets(const std::vector<TrackRecord>& records);

}  // namespace gsr

#endif  // GSR_TRACKLET_HPP
