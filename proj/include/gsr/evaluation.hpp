#ifndef GSR_EVALUATION_HPP
#define GSR_EVALUATION_HPP

#include "gsr/tracklet.hpp"

#include <optional>
#include <span>
#include <vector>

namespace gsr {

/// One scored minimap entry: who is where on the pitch in one frame.
struct GsRecord {
    int frame = 0;
    int id = 0;
    Vec2 pos = Vec2::Zero();
    Role role = Role::player;
    Side side = Side::none;
    std::optional<int> jersey;
};

struct ThresholdScores {
    double alpha = 0.0;
    double deta = 0.0;
    double assa = 0.0;
    double hota = 0.0;
};

/// Final scores in percent, the per-alpha breakdown retained.
struct EvalScores {
    double gs_hota = 0.0;
    double gs_deta = 0.0;
    double gs_assa = 0.0;
    std::vector<ThresholdScores> per_threshold;
};

struct EvalConfig {
    double tolerance = 5.0;          // meters, Gaussian kernel scale
    bool exclude_other_roles = true; // drop Role::other (ball etc.) before scoring
};

/// Gaussian localization similarity exp(-d^2 / (2 tau^2)), tau = 5 m.
double loc_sim(double distance, double tolerance = 5.0);

/// 1 when role, side and jersey (including both absent) match exactly.
bool id_sim(const GsRecord& a, const GsRecord& b);

// HOTA over the similarity S = LocSim * IdSim: per threshold alpha in
// {0.05, ..., 0.95}, a per-frame optimal bipartite matching among pairs with
// S >= alpha, DetA from TP/FP/FN, AssA from association overlaps, all
// averaged over alpha and reported x100. Throws on duplicate (frame, id).
EvalScores gs_hota(std::span<const GsRecord> gt, std::span<const GsRecord> pred,
                   const EvalConfig& config = {});

/// Flattens final tracklets into per-frame GsRecords.
std::vector<GsRecord> to_gamestate(std::span<const Tracklet> tracklets);

}  // namespace gsr

#endif  // GSR_EVALUATION_HPP
