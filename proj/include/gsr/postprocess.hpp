#ifndef GSR_POSTPROCESS_HPP
#define GSR_POSTPROCESS_HPP

#include "gsr/teams.hpp"
#include "gsr/tracklet.hpp"

#include <optional>
#include <span>
#include <vector>

namespace gsr {

struct MergeConfig {
    double max_speed = 12.0;          // m/s, physical feasibility bound
    double mean_threshold = 0.3;      // cosine distance between mean reid vectors
    double pairwise_threshold = 0.2;  // min cosine distance over the N x M matrix
    int max_gap = 90;                 // frames bridged by interpolation
    double fps = 30.0;
};

struct JerseyVoteConfig {
    double floor = 0.5;        // per-frame confidence floor
    double winner_mass = 0.6;  // required share of the vote mass
    // Confident observations of the winner needed before a number is
    // resolved at all; a single corrupted reading in its own split piece
    // must not mint a jersey.
    int min_count = 1;
    // Maximum length of a contradicting run that is treated as flicker and
    // blanked when the runs around it agree with each other.
    int denoise_max_run = 2;
};

struct PostprocessConfig {
    MergeConfig merge;
    JerseyVoteConfig jersey;
    bool drop_ball = true;  // exclude Role::other tracklets from the game state
};

/// Decoded two-head jersey reading.
struct DecodedJersey {
    int number = 0;  // 0..99
    double confidence = 0.0;
};

// first head none -> the second digit alone; otherwise 10*first + second.
DecodedJersey decode_jersey(const JerseyReading& reading);

// Confidence-weighted vote over per-frame decoded numbers; absent unless the
// winner holds the configured share of the mass. Ties pick the smaller number.
std::optional<int> aggregate_jersey(const Tracklet& tracklet, const JerseyVoteConfig& config);

// Blanks confident jersey observations that form a short run contradicted by
// agreeing confident runs on both sides (detector flicker); a real identity
// switch keeps its observations because the new number persists.
Tracklet denoise_jersey_observations(const Tracklet& tracklet, const JerseyVoteConfig& config);

// Cuts the tracklet wherever a confident jersey observation or a per-frame
// team-side observation contradicts the running value; unknown frames never
// cut. Pieces concatenate back to the input records exactly.
std::vector<Tracklet> split_by_attributes(const Tracklet& tracklet, const ClusterSet* clusters,
                                          const PostprocessConfig& config);

// later starts after earlier ends, and the gap is traversable at max speed.
bool feasible(const Tracklet& earlier, const Tracklet& later, const MergeConfig& config);

// Greedy chronological chaining of tracklets sharing (jersey, side).
std::vector<Tracklet> merge_by_jersey(std::vector<Tracklet> tracklets, const MergeConfig& config);

double reid_mean_distance(const Tracklet& a, const Tracklet& b);
double reid_pairwise_min(const Tracklet& a, const Tracklet& b);

// Merges jerseyless tracklets (or jerseyless-with-jerseyed pairs) by ReID
// similarity under the same feasibility and team constraints; repeated single
// passes in ascending mean-distance order until a fixpoint.
std::vector<Tracklet> merge_by_reid(std::vector<Tracklet> tracklets, const MergeConfig& config);

// Linear interpolation of interior gaps up to max_gap frames; filled records
// carry no embeddings or attribute observations.
Tracklet interpolate(const Tracklet& tracklet, const MergeConfig& config);

// The full pipeline: split, assign attributes, merge by jersey, merge by
// ReID, interpolate. Tracklet ids are renumbered sequentially.
std::vector<Tracklet> postprocess(std::span<const Tracklet> raw, const ClusterSet& clusters,
                                  const PostprocessConfig& config);

}  // namespace gsr

#endif  // GSR_POSTPROCESS_HPP
