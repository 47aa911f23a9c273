#include "gsr/tracklet.hpp"

#include <algorithm>
#include <map>

namespace gsr {

std::vector<Tracklet> build_tracklets(const std::vector<TrackRecord>& records) {
    std::map<int, Tracklet> by_id;
    std::map<int, bool> is_ball;
    for (const auto& r : records) {
        Tracklet& t = by_id[r.track_id];
        t.id = r.track_id;
        TrackletRecord rec;
        rec.frame = r.frame;
        rec.pos = r.pos;
        rec.reid = r.reid;
        rec.team = r.team;
        rec.jersey = r.jersey;
        rec.orient = r.orient;
        t.records.push_back(std::move(rec));
        is_ball[r.track_id] = is_ball[r.track_id] || r.is_ball;
    }
    std::vector<Tracklet> out;
    out.reserve(by_id.size());
    for (auto& [id, t] : by_id) {
        std::sort(t.records.begin(), t.records.end(),
                  [](const TrackletRecord& a, const TrackletRecord& b) { return a.frame < b.frame; });
        if (is_ball[id]) {
            t.role = Role::other;
        }
        out.push_back(std::move(t));
    }
    return out;
}

}  // namespace gsr
