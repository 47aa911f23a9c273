#ifndef GSR_TEAMS_HPP
#define GSR_TEAMS_HPP

#include "gsr/pitch.hpp"
#include "gsr/tracklet.hpp"

#include <optional>
#include <span>
#include <vector>

namespace gsr {

/// One athlete observation used for team clustering.
struct AthleteSample {
    int frame = 0;
    Vec2 pos = Vec2::Zero();   // pitch coordinates, meters
    Eigen::VectorXd emb;       // unit-norm TeamID embedding
    int tracklet_id = 0;
};

struct TeamsConfig {
    double central_x = 30.0;            // |x| window for the main clustering
    double exclusion_threshold = 0.3;   // cosine distance to all main centroids
    int vote_stride = 5;                // frames between left/right votes
    double fallback_pan_threshold = 0.6;  // mean |pan| suggesting a single half
    double fallback_min_seconds = 10.0;   // clips shorter than this use the fallback
    double fps = 30.0;
    int max_iterations = 100;
};

/// Three k-means clusters ordered by descending size.
struct MainClusters {
    std::array<Eigen::VectorXd, 3> centroids;
    std::array<int, 3> sizes{};
    std::vector<int> assignment;  // per input sample, 0..2 after ordering
    bool degenerate = false;
};

/// The five kit centroids of a clip plus the left/right vote tally.
struct ClusterSet {
    Eigen::VectorXd team_left;
    Eigen::VectorXd team_right;
    Eigen::VectorXd referee;
    std::optional<Eigen::VectorXd> gk_left;
    std::optional<Eigen::VectorXd> gk_right;
    int votes_left = 0;
    int votes_right = 0;
    bool degenerate = false;
};

const char* to_string(Role role);
Role role_from_string(const std::string& s);

/// Samples with |x| < 30 m (strict), the centre strip of the pitch.
std::vector<AthleteSample> central_query(std::span<const AthleteSample> samples,
                                         double central_x = 30.0);

// Deterministic spherical k-means (k=3) with farthest-point seeding; the
// result does not depend on the sample order. Throws on fewer than 3 samples.
MainClusters cluster_main(std::span<const AthleteSample> samples, const TeamsConfig& config);

// Mean embedding of penalty-area samples far from every main centroid;
// empty when no sample survives the exclusion filter.
std::optional<Eigen::VectorXd> estimate_goalkeeper(std::span<const AthleteSample> samples,
                                                   const MainClusters& main, Side side,
                                                   const PitchModel& model,
                                                   const TeamsConfig& config);

// Frame-stride voting on the mean x of the reference (largest) cluster's
// members; returns the side assigned to that cluster. Throws when no frame
// produces a vote. Vote counts are written to the out parameters.
Side vote_left_right(std::span<const AthleteSample> samples, const MainClusters& main,
                     const TeamsConfig& config, int& votes_left, int& votes_right);

// Full team-detection pass: central query (or the short-clip/penalty-area
// fallback), 3-cluster estimation, goalkeeper clusters, left/right voting.
ClusterSet estimate_clusters(std::span<const AthleteSample> samples,
                             std::span<const CameraParams> cameras, const PitchModel& model,
                             const TeamsConfig& config);

/// Nearest-centroid assignment of a tracklet's mean team embedding.
std::pair<Role, Side> assign_tracklet(const Tracklet& tracklet, const ClusterSet& clusters);

/// Same assignment for a raw embedding.
std::pair<Role, Side> assign_embedding(const Eigen::VectorXd& emb, const ClusterSet& clusters);

/// Per-tracklet samples collected from records that carry a team embedding.
std::vector<AthleteSample> collect_samples(std::span<const Tracklet> tracklets);

}  // namespace gsr

#endif  // GSR_TEAMS_HPP
