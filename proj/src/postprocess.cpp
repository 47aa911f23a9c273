#include "gsr/postprocess.hpp"

#include "gsr/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
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

std::optional<Eigen::VectorXd> mean_reid(const Tracklet& t) {
    Eigen::VectorXd sum;
    int count = 0;
    for (const auto& rec : t.records) {
        if (!rec.reid) {
            continue;
        }
        if (count == 0) {
            sum = *rec.reid;
        } else {
            sum += *rec.reid;
        }
        ++count;
    }
    if (count == 0 || sum.norm() == 0.0) {
        return std::nullopt;
    }
    return sum.normalized();
}

Role majority_role(const std::vector<const Tracklet*>& parts) {
    std::map<Role, int> weight;
    for (const Tracklet* t : parts) {
        weight[t->role] += static_cast<int>(t->records.size());
    }
    Role best = parts.front()->role;
    int best_w = -1;
    for (const auto& [role, w] : weight) {
        if (w > best_w) {
            best_w = w;
            best = role;
        }
    }
    return best;
}

// Chains temporally disjoint same-key fragments with a min-cost assignment
// (successor per fragment), which realizes the minimum chain count and, among
// those, the smallest total time gap. Fragments arrive sorted by start frame.
std::vector<Tracklet> chain_fragments(std::vector<const Tracklet*> parts, const MergeConfig& config) {
    const int n = static_cast<int>(parts.size());
    if (n == 1) {
        return {*parts.front()};
    }
    Eigen::MatrixXd cost = Eigen::MatrixXd::Constant(n, n, kInfeasibleCost);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i != j && feasible(*parts[i], *parts[j], config)) {
                cost(i, j) = (parts[j]->start_frame() - parts[i]->end_frame()) / config.fps;
            }
        }
    }
    std::vector<int> successor(n, -1), has_pred(n, 0);
    for (const auto& [i, j] : solve_assignment(cost)) {
        successor[i] = j;
        has_pred[j] = 1;
    }
    std::vector<Tracklet> out;
    for (int i = 0; i < n; ++i) {
        if (has_pred[i]) {
            continue;  // not a chain head
        }
        std::vector<const Tracklet*> chain;
        for (int cur = i; cur != -1; cur = successor[cur]) {
            chain.push_back(parts[cur]);
        }
        Tracklet merged;
        merged.id = chain.front()->id;
        merged.jersey = chain.front()->jersey;
        merged.side = chain.front()->side;
        merged.role = majority_role(chain);
        for (const Tracklet* part : chain) {
            merged.records.insert(merged.records.end(), part->records.begin(), part->records.end());
        }
        out.push_back(std::move(merged));
    }
    return out;
}

}  // namespace

DecodedJersey decode_jersey(const JerseyReading& reading) {
    int first = 0;
    for (int i = 1; i < 10; ++i) {
        if (reading.first[i] > reading.first[first]) {
            first = i;
        }
    }
    int second = 0;
    for (int i = 1; i < 10; ++i) {
        if (reading.second[i] > reading.second[second]) {
            second = i;
        }
    }
    DecodedJersey out;
    out.number = first == 0 ? second : 10 * first + second;
    out.confidence = reading.first[first] * reading.second[second];
    return out;
}

std::optional<int> aggregate_jersey(const Tracklet& tracklet, const JerseyVoteConfig& config) {
    std::map<int, double> mass;
    std::map<int, int> votes;
    double total = 0.0;
    for (const auto& rec : tracklet.records) {
        if (!rec.jersey) {
            continue;
        }
        const DecodedJersey d = decode_jersey(*rec.jersey);
        if (d.confidence < config.floor) {
            continue;
        }
        mass[d.number] += d.confidence;
        ++votes[d.number];
        total += d.confidence;
    }
    if (total == 0.0) {
        return std::nullopt;
    }
    int winner = mass.begin()->first;  // std::map iteration: smaller number wins ties
    double winner_mass = mass.begin()->second;
    for (const auto& [number, m] : mass) {
        if (m > winner_mass) {
            winner = number;
            winner_mass = m;
        }
    }
    if (winner_mass < config.winner_mass * total || votes[winner] < config.min_count) {
        return std::nullopt;
    }
    return winner;
}

Tracklet denoise_jersey_observations(const Tracklet& tracklet, const JerseyVoteConfig& config) {
    // Runs of equal confident numbers, in record order.
    struct Run {
        int number;
        std::vector<size_t> records;
    };
    std::vector<Run> runs;
    for (size_t i = 0; i < tracklet.records.size(); ++i) {
        const auto& rec = tracklet.records[i];
        if (!rec.jersey) {
            continue;
        }
        const DecodedJersey d = decode_jersey(*rec.jersey);
        if (d.confidence < config.floor) {
            continue;
        }
        if (!runs.empty() && runs.back().number == d.number) {
            runs.back().records.push_back(i);
        } else {
            runs.push_back({d.number, {i}});
        }
    }
    Tracklet out = tracklet;
    for (size_t r = 0; r + 1 < runs.size(); ++r) {
        if (r == 0) {
            continue;
        }
        const bool short_run = static_cast<int>(runs[r].records.size()) <= config.denoise_max_run;
        if (short_run && runs[r - 1].number == runs[r + 1].number &&
            runs[r - 1].number != runs[r].number) {
            for (size_t idx : runs[r].records) {
                out.records[idx].jersey.reset();
            }
        }
    }
    return out;
}

std::vector<Tracklet> split_by_attributes(const Tracklet& tracklet, const ClusterSet* clusters,
                                          const PostprocessConfig& config) {
    std::vector<Tracklet> pieces;
    Tracklet current;
    current.id = tracklet.id;
    current.role = tracklet.role;
    std::optional<int> run_jersey;
    std::optional<Side> run_side;

    auto flush = [&]() {
        if (!current.records.empty()) {
            pieces.push_back(std::move(current));
            current = Tracklet{};
            current.id = tracklet.id;
            current.role = tracklet.role;
        }
        run_jersey.reset();
        run_side.reset();
    };

    for (const auto& rec : tracklet.records) {
        std::optional<int> jersey_obs;
        if (rec.jersey) {
            const DecodedJersey d = decode_jersey(*rec.jersey);
            if (d.confidence >= config.jersey.floor) {
                jersey_obs = d.number;
            }
        }
        std::optional<Side> side_obs;
        if (rec.team && clusters != nullptr) {
            side_obs = assign_embedding(*rec.team, *clusters).second;
        }
        const bool jersey_conflict = jersey_obs && run_jersey && *jersey_obs != *run_jersey;
        const bool side_conflict = side_obs && run_side && *side_obs != *run_side;
        if (jersey_conflict || side_conflict) {
            flush();
        }
        if (jersey_obs) run_jersey = jersey_obs;
        if (side_obs) run_side = side_obs;
        current.records.push_back(rec);
    }
    flush();
    return pieces;
}

bool feasible(const Tracklet& earlier, const Tracklet& later, const MergeConfig& config) {
    if (earlier.records.empty() || later.records.empty()) {
        return false;
    }
    if (later.start_frame() <= earlier.end_frame()) {
        return false;
    }
    const double gap_seconds = (later.start_frame() - earlier.end_frame()) / config.fps;
    const double dist = (later.records.front().pos - earlier.records.back().pos).norm();
    return dist <= config.max_speed * gap_seconds;
}

std::vector<Tracklet> merge_by_jersey(std::vector<Tracklet> tracklets, const MergeConfig& config) {
    std::map<std::pair<int, int>, std::vector<const Tracklet*>> keyed;
    std::vector<Tracklet> out;
    for (const auto& t : tracklets) {
        if (t.jersey && t.side != Side::none) {
            keyed[{*t.jersey, static_cast<int>(t.side)}].push_back(&t);
        } else {
            out.push_back(t);
        }
    }
    for (auto& [key, parts] : keyed) {
        std::sort(parts.begin(), parts.end(), [](const Tracklet* a, const Tracklet* b) {
            if (a->start_frame() != b->start_frame()) return a->start_frame() < b->start_frame();
            return a->id < b->id;
        });
        auto chained = chain_fragments(std::move(parts), config);
        for (auto& t : chained) {
            out.push_back(std::move(t));
        }
    }
    return out;
}

double reid_mean_distance(const Tracklet& a, const Tracklet& b) {
    const auto ma = mean_reid(a);
    const auto mb = mean_reid(b);
    if (!ma || !mb) {
        throw std::invalid_argument("reid distance undefined: tracklet without embeddings");
    }
    return cosine_distance(*ma, *mb);
}

double reid_pairwise_min(const Tracklet& a, const Tracklet& b) {
    double best = std::numeric_limits<double>::infinity();
    bool any = false;
    for (const auto& ra : a.records) {
        if (!ra.reid) continue;
        for (const auto& rb : b.records) {
            if (!rb.reid) continue;
            best = std::min(best, cosine_distance(*ra.reid, *rb.reid));
            any = true;
        }
    }
    if (!any) {
        throw std::invalid_argument("reid distance undefined: tracklet without embeddings");
    }
    return best;
}

std::vector<Tracklet> merge_by_reid(std::vector<Tracklet> tracklets, const MergeConfig& config) {
    // Successor links solved as an assignment, as in the jersey stage: each
    // tracklet gains at most one predecessor and one successor per pass,
    // maximizing the number of merges and preferring similar embeddings.
    // Passes repeat because merged tracklets have new mean embeddings.
    while (true) {
        const int n = static_cast<int>(tracklets.size());
        if (n < 2) {
            break;
        }
        Eigen::MatrixXd cost = Eigen::MatrixXd::Constant(n, n, kInfeasibleCost);
        int candidates = 0;
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                if (i == j) continue;
                const Tracklet& a = tracklets[i];
                const Tracklet& b = tracklets[j];
                if (a.jersey && b.jersey) {
                    continue;  // jersey stage already had its chance
                }
                if (a.side != b.side) {
                    continue;
                }
                if (!feasible(a, b, config)) {
                    continue;
                }
                if (!mean_reid(a) || !mean_reid(b)) {
                    continue;
                }
                const double mean_d = reid_mean_distance(a, b);
                if (mean_d < config.mean_threshold ||
                    reid_pairwise_min(a, b) < config.pairwise_threshold) {
                    cost(i, j) = mean_d;
                    ++candidates;
                }
            }
        }
        if (candidates == 0) {
            break;
        }
        std::vector<int> successor(n, -1), has_pred(n, 0);
        for (const auto& [i, j] : solve_assignment(cost)) {
            successor[i] = j;
            has_pred[j] = 1;
        }
        bool merged_any = false;
        std::vector<Tracklet> next;
        for (int i = 0; i < n; ++i) {
            if (has_pred[i]) {
                continue;
            }
            Tracklet merged = std::move(tracklets[i]);
            for (int cur = successor[i]; cur != -1; cur = successor[cur]) {
                const Tracklet& part = tracklets[cur];
                merged.records.insert(merged.records.end(), part.records.begin(), part.records.end());
                if (!merged.jersey) {
                    merged.jersey = part.jersey;
                }
                merged_any = true;
            }
            next.push_back(std::move(merged));
        }
        tracklets = std::move(next);
        if (!merged_any) {
            break;
        }
    }
    return tracklets;
}

Tracklet interpolate(const Tracklet& tracklet, const MergeConfig& config) {
    Tracklet out;
    out.id = tracklet.id;
    out.role = tracklet.role;
    out.side = tracklet.side;
    out.jersey = tracklet.jersey;
    for (size_t i = 0; i < tracklet.records.size(); ++i) {
        if (i > 0) {
            const auto& prev = tracklet.records[i - 1];
            const auto& next = tracklet.records[i];
            const int missing = next.frame - prev.frame - 1;
            if (missing > 0 && missing <= config.max_gap) {
                for (int f = prev.frame + 1; f < next.frame; ++f) {
                    const double t = static_cast<double>(f - prev.frame) / (next.frame - prev.frame);
                    TrackletRecord filled;
                    filled.frame = f;
                    filled.pos = prev.pos + t * (next.pos - prev.pos);
                    out.records.push_back(std::move(filled));
                }
            }
        }
        out.records.push_back(tracklet.records[i]);
    }
    return out;
}

std::vector<Tracklet> postprocess(std::span<const Tracklet> raw, const ClusterSet& clusters,
                                  const PostprocessConfig& config) {
    std::vector<Tracklet> pieces;
    for (const auto& t : raw) {
        if (t.role == Role::other) {
            if (!config.drop_ball) {
                pieces.push_back(t);
            }
            continue;
        }
        const Tracklet cleaned = denoise_jersey_observations(t, config.jersey);
        for (auto& piece : split_by_attributes(cleaned, &clusters, config)) {
            piece.jersey = aggregate_jersey(piece, config.jersey);
            const auto [role, side] = assign_tracklet(piece, clusters);
            piece.role = role;
            piece.side = side;
            pieces.push_back(std::move(piece));
        }
    }

    auto merged = merge_by_jersey(std::move(pieces), config.merge);
    merged = merge_by_reid(std::move(merged), config.merge);

    std::vector<Tracklet> out;
    out.reserve(merged.size());
    for (const auto& t : merged) {
        out.push_back(interpolate(t, config.merge));
    }
    std::sort(out.begin(), out.end(), [](const Tracklet& a, const Tracklet& b) {
        if (a.start_frame() != b.start_frame()) return a.start_frame() < b.start_frame();
        return a.id < b.id;
    });
    for (size_t i = 0; i < out.size(); ++i) {
        out[i].id = static_cast<int>(i) + 1;
    }
    return out;
}

}  // namespace gsr
