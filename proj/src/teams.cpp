#include "gsr/teams.hpp"

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

bool lex_less(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    const Eigen::Index n = std::min(a.size(), b.size());
    for (Eigen::Index i = 0; i < n; ++i) {
        if (a(i) != b(i)) return a(i) < b(i);
    }
    return a.size() < b.size();
}

// Canonical processing order, so the clustering result cannot depend on how
// the caller happened to order the samples.
std::vector<int> canonical_order(std::span<const AthleteSample> samples) {
    std::vector<int> order(samples.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int i, int j) {
        if (samples[i].frame != samples[j].frame) return samples[i].frame < samples[j].frame;
        if (samples[i].tracklet_id != samples[j].tracklet_id)
            return samples[i].tracklet_id < samples[j].tracklet_id;
        return lex_less(samples[i].emb, samples[j].emb);
    });
    return order;
}

}  // namespace

const char* to_string(Role role) {
    switch (role) {
        case Role::player: return "player";
        case Role::goalkeeper: return "goalkeeper";
        case Role::referee: return "referee";
        default: return "other";
    }
}

Role role_from_string(const std::string& s) {
    if (s == "player") return Role::player;
    if (s == "goalkeeper") return Role::goalkeeper;
    if (s == "referee") return Role::referee;
    if (s == "other") return Role::other;
    throw std::invalid_argument("unknown role: " + s);
}

std::vector<AthleteSample> central_query(std::span<const AthleteSample> samples, double central_x) {
    std::vector<AthleteSample> out;
    for (const auto& s : samples) {
        if (std::abs(s.pos.x()) < central_x) {
            out.push_back(s);
        }
    }
    return out;
}

MainClusters cluster_main(std::span<const AthleteSample> samples, const TeamsConfig& config) {
    if (samples.size() < 3) {
        throw std::invalid_argument("cluster_main requires at least 3 samples");
    }
    const auto order = canonical_order(samples);
    const int n = static_cast<int>(samples.size());
    const Eigen::Index dim = samples[order[0]].emb.size();

    // Farthest-point seeding from the global mean.
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(dim);
    for (int idx : order) mean += samples[idx].emb;
    mean /= static_cast<double>(n);

    auto farthest = [&](auto&& distance_to) {
        int best = order[0];
        double best_d = -1.0;
        for (int idx : order) {
            const double d = distance_to(samples[idx].emb);
            if (d > best_d + 1e-15) {
                best_d = d;
                best = idx;
            }
        }
        return best;
    };
    std::array<Eigen::VectorXd, 3> centroids;
    const int s0 = farthest([&](const Eigen::VectorXd& e) { return cosine_distance(e, mean); });
    centroids[0] = samples[s0].emb;
    const int s1 = farthest([&](const Eigen::VectorXd& e) { return cosine_distance(e, centroids[0]); });
    centroids[1] = samples[s1].emb;
    const int s2 = farthest([&](const Eigen::VectorXd& e) {
        return std::min(cosine_distance(e, centroids[0]), cosine_distance(e, centroids[1]));
    });
    centroids[2] = samples[s2].emb;

    std::vector<int> assign(n, 0);
    for (int iter = 0; iter < config.max_iterations; ++iter) {
        bool changed = false;
        for (int idx : order) {
            int best = 0;
            double best_d = cosine_distance(samples[idx].emb, centroids[0]);
            for (int c = 1; c < 3; ++c) {
                const double d = cosine_distance(samples[idx].emb, centroids[c]);
                if (d < best_d - 1e-15) {
                    best_d = d;
                    best = c;
                }
            }
            if (assign[idx] != best) {
                assign[idx] = best;
                changed = true;
            }
        }
        if (!changed && iter > 0) {
            break;
        }
        std::array<Eigen::VectorXd, 3> sums;
        std::array<int, 3> counts{};
        for (auto& s : sums) s = Eigen::VectorXd::Zero(dim);
        for (int idx : order) {
            sums[assign[idx]] += samples[idx].emb;
            ++counts[assign[idx]];
        }
        for (int c = 0; c < 3; ++c) {
            if (counts[c] > 0 && sums[c].norm() > 0.0) {
                centroids[c] = sums[c].normalized();
            }
        }
    }

    // Order clusters by descending size; stable for ties.
    std::array<int, 3> counts{};
    for (int a : assign) ++counts[a];
    std::array<int, 3> cluster_order = {0, 1, 2};
    std::stable_sort(cluster_order.begin(), cluster_order.end(),
                     [&](int a, int b) { return counts[a] > counts[b]; });

    MainClusters out;
    std::array<int, 3> remap{};
    for (int rank = 0; rank < 3; ++rank) {
        out.centroids[rank] = centroids[cluster_order[rank]];
        out.sizes[rank] = counts[cluster_order[rank]];
        remap[cluster_order[rank]] = rank;
    }
    out.assignment.resize(n);
    for (int i = 0; i < n; ++i) {
        out.assignment[i] = remap[assign[i]];
    }
    // Identical embeddings everywhere (or collapsed centroids) cannot separate
    // two teams.
    out.degenerate = cosine_distance(out.centroids[0], out.centroids[1]) < 1e-6 ||
                     out.sizes[1] == 0;
    return out;
}

std::optional<Eigen::VectorXd> estimate_goalkeeper(std::span<const AthleteSample> samples,
                                                   const MainClusters& main, Side side,
                                                   const PitchModel& model,
                                                   const TeamsConfig& config) {
    Eigen::VectorXd sum;
    int count = 0;
    for (const auto& s : samples) {
        if (!in_penalty_area(s.pos, side, model)) {
            continue;
        }
        bool far_from_all = true;
        for (const auto& c : main.centroids) {
            if (cosine_distance(s.emb, c) <= config.exclusion_threshold) {
                far_from_all = false;
                break;
            }
        }
        if (!far_from_all) {
            continue;
        }
        if (count == 0) {
            sum = s.emb;
        } else {
            sum += s.emb;
        }
        ++count;
    }
    if (count == 0) {
        return std::nullopt;
    }
    if (sum.norm() == 0.0) {
        return std::nullopt;
    }
    return sum.normalized();
}

Side vote_left_right(std::span<const AthleteSample> samples, const MainClusters& main,
                     const TeamsConfig& config, int& votes_left, int& votes_right) {
    // Gather the reference (largest) cluster's member positions per frame.
    std::map<int, std::pair<double, int>> frame_x;  // frame -> (sum x, count)
    double total_x = 0.0;
    int total_n = 0;
    for (size_t i = 0; i < samples.size(); ++i) {
        if (main.assignment[i] != 0) {
            continue;
        }
        auto& [sx, cnt] = frame_x[samples[i].frame];
        sx += samples[i].pos.x();
        ++cnt;
        total_x += samples[i].pos.x();
        ++total_n;
    }
    votes_left = 0;
    votes_right = 0;
    const int stride = std::max(1, config.vote_stride);
    for (const auto& [frame, acc] : frame_x) {
        if (frame % stride != 0) {
            continue;
        }
        const double mean_x = acc.first / acc.second;
        (mean_x < 0.0 ? votes_left : votes_right)++;
    }
    if (votes_left + votes_right == 0) {
        throw std::runtime_error("left/right voting produced no votes");
    }
    if (votes_left != votes_right) {
        return votes_left > votes_right ? Side::left : Side::right;
    }
    // Tie: fall back to the sign of the overall mean x.
    return (total_n > 0 && total_x / total_n < 0.0) ? Side::left : Side::right;
}

ClusterSet estimate_clusters(std::span<const AthleteSample> samples,
                             std::span<const CameraParams> cameras, const PitchModel& model,
                             const TeamsConfig& config) {
    // Short clips, or clips that pan over a single half, rarely show both
    // teams near the centre; fall back to everything outside the boxes.
    bool use_fallback = false;
    const int frames = samples.empty()
                           ? 0
                           : 1 + std::max_element(samples.begin(), samples.end(),
                                                  [](const auto& a, const auto& b) {
                                                      return a.frame < b.frame;
                                                  })->frame;
    if (frames < config.fallback_min_seconds * config.fps) {
        use_fallback = true;
    }
    if (!cameras.empty()) {
        double mean_abs_pan = 0.0;
        for (const auto& c : cameras) mean_abs_pan += std::abs(c.pan);
        mean_abs_pan /= static_cast<double>(cameras.size());
        if (mean_abs_pan > config.fallback_pan_threshold) {
            use_fallback = true;
        }
    }

    std::vector<AthleteSample> pool;
    if (use_fallback) {
        for (const auto& s : samples) {
            if (!in_penalty_area(s.pos, Side::left, model) &&
                !in_penalty_area(s.pos, Side::right, model)) {
                pool.push_back(s);
            }
        }
    } else {
        pool = central_query(samples, config.central_x);
    }
    if (pool.size() < 3) {
        pool.assign(samples.begin(), samples.end());  // last resort: everything
    }

    const MainClusters main = cluster_main(pool, config);

    int votes_left = 0, votes_right = 0;
    const Side largest_side = vote_left_right(pool, main, config, votes_left, votes_right);

    ClusterSet out;
    out.votes_left = votes_left;
    out.votes_right = votes_right;
    out.degenerate = main.degenerate;
    if (largest_side == Side::left) {
        out.team_left = main.centroids[0];
        out.team_right = main.centroids[1];
    } else {
        out.team_left = main.centroids[1];
        out.team_right = main.centroids[0];
    }
    out.referee = main.centroids[2];
    out.gk_left = estimate_goalkeeper(samples, main, Side::left, model, config);
    out.gk_right = estimate_goalkeeper(samples, main, Side::right, model, config);
    return out;
}

std::pair<Role, Side> assign_embedding(const Eigen::VectorXd& emb, const ClusterSet& clusters) {
    struct Candidate {
        const Eigen::VectorXd* centroid;
        Role role;
        Side side;
    };
    // Fixed label order breaks exact ties deterministically.
    std::vector<Candidate> candidates = {
        {&clusters.team_left, Role::player, Side::left},
        {&clusters.team_right, Role::player, Side::right},
        {&clusters.referee, Role::referee, Side::none},
    };
    if (clusters.gk_left) candidates.push_back({&*clusters.gk_left, Role::goalkeeper, Side::left});
    if (clusters.gk_right) candidates.push_back({&*clusters.gk_right, Role::goalkeeper, Side::right});

    const Candidate* best = &candidates.front();
    double best_d = cosine_distance(emb, *candidates.front().centroid);
    for (size_t i = 1; i < candidates.size(); ++i) {
        const double d = cosine_distance(emb, *candidates[i].centroid);
        if (d < best_d - 1e-15) {
            best_d = d;
            best = &candidates[i];
        }
    }
    return {best->role, best->side};
}

std::pair<Role, Side> assign_tracklet(const Tracklet& tracklet, const ClusterSet& clusters) {
    Eigen::VectorXd sum;
    int count = 0;
    for (const auto& rec : tracklet.records) {
        if (!rec.team) {
            continue;
        }
        if (count == 0) {
            sum = *rec.team;
        } else {
            sum += *rec.team;
        }
        ++count;
    }
    if (count == 0 || sum.norm() == 0.0) {
        return {Role::other, Side::none};
    }
    return assign_embedding(sum.normalized(), clusters);
}

std::vector<AthleteSample> collect_samples(std::span<const Tracklet> tracklets) {
    std::vector<AthleteSample> out;
    for (const auto& t : tracklets) {
        if (t.role == Role::other) {
            continue;  // ball
        }
        for (const auto& rec : t.records) {
            if (rec.team) {
                out.push_back({rec.frame, rec.pos, *rec.team, t.id});
            }
        }
    }
    return out;
}

}  // namespace gsr
