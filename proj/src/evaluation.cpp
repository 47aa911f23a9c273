#include "gsr/evaluation.hpp"

#include "gsr/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

namespace gsr {

namespace {

struct FrameData {
    std::vector<const GsRecord*> gt;
    std::vector<const GsRecord*> pred;
};

std::map<int, FrameData> group_frames(std::span<const GsRecord> gt, std::span<const GsRecord> pred,
                                      const EvalConfig& config) {
    std::map<int, FrameData> frames;
    std::set<std::pair<int, int>> seen_gt, seen_pred;
    for (const auto& r : gt) {
        if (config.exclude_other_roles && r.role == Role::other) {
            continue;
        }
        if (!seen_gt.insert({r.frame, r.id}).second) {
            throw std::invalid_argument("duplicate (frame, id) in ground truth");
        }
        frames[r.frame].gt.push_back(&r);
    }
    for (const auto& r : pred) {
        if (config.exclude_other_roles && r.role == Role::other) {
            continue;
        }
        if (!seen_pred.insert({r.frame, r.id}).second) {
            throw std::invalid_argument("duplicate (frame, id) in prediction");
        }
        frames[r.frame].pred.push_back(&r);
    }
    return frames;
}

}  // namespace

double loc_sim(double distance, double tolerance) {
    if (distance < 0.0) {
        throw std::domain_error("loc_sim requires a non-negative distance");
    }
    return std::exp(-distance * distance / (2.0 * tolerance * tolerance));
}

bool id_sim(const GsRecord& a, const GsRecord& b) {
    return a.role == b.role && a.side == b.side && a.jersey == b.jersey;
}

EvalScores gs_hota(std::span<const GsRecord> gt, std::span<const GsRecord> pred,
                   const EvalConfig& config) {
    const auto frames = group_frames(gt, pred, config);

    std::vector<double> alphas;
    for (int i = 1; i <= 19; ++i) {
        alphas.push_back(0.05 * i);
    }
    const int na = static_cast<int>(alphas.size());

    // Totals per identity, shared across thresholds.
    std::map<int, int> gt_count, pred_count;
    for (const auto& [frame, data] : frames) {
        for (const auto* r : data.gt) ++gt_count[r->id];
        for (const auto* r : data.pred) ++pred_count[r->id];
    }

    struct AlphaAccum {
        long long tp = 0, fp = 0, fn = 0;
        std::map<std::pair<int, int>, long long> matches;  // (gt id, pred id) -> frames
    };
    std::vector<AlphaAccum> acc(na);

    for (const auto& [frame, data] : frames) {
        const int ng = static_cast<int>(data.gt.size());
        const int np = static_cast<int>(data.pred.size());
        Eigen::MatrixXd sim = Eigen::MatrixXd::Zero(std::max(ng, 1), std::max(np, 1));
        for (int i = 0; i < ng; ++i) {
            for (int j = 0; j < np; ++j) {
                if (!id_sim(*data.gt[i], *data.pred[j])) {
                    continue;
                }
                sim(i, j) = loc_sim((data.gt[i]->pos - data.pred[j]->pos).norm(), config.tolerance);
            }
        }
        for (int a = 0; a < na; ++a) {
            const double alpha = alphas[a];
            int tp = 0;
            if (ng > 0 && np > 0) {
                // Maximum-total-similarity matching restricted to S >= alpha.
                Eigen::MatrixXd cost(ng, np);
                for (int i = 0; i < ng; ++i) {
                    for (int j = 0; j < np; ++j) {
                        cost(i, j) = sim(i, j) >= alpha ? 1.0 - sim(i, j) : kInfeasibleCost;
                    }
                }
                for (const auto& [i, j] : solve_assignment(cost)) {
                    ++tp;
                    ++acc[a].matches[{data.gt[i]->id, data.pred[j]->id}];
                }
            }
            acc[a].tp += tp;
            acc[a].fn += ng - tp;
            acc[a].fp += np - tp;
        }
    }

    EvalScores out;
    double sum_hota = 0.0, sum_deta = 0.0, sum_assa = 0.0;
    for (int a = 0; a < na; ++a) {
        const auto& ac = acc[a];
        const double det_den = static_cast<double>(ac.tp + ac.fn + ac.fp);
        const double deta = det_den > 0.0 ? ac.tp / det_den : 0.0;
        double assa = 0.0;
        if (ac.tp > 0) {
            double sum_ass = 0.0;
            for (const auto& [ids, tpa] : ac.matches) {
                const double fna = gt_count[ids.first] - tpa;
                const double fpa = pred_count[ids.second] - tpa;
                sum_ass += tpa * (tpa / (tpa + fna + fpa));
            }
            assa = sum_ass / static_cast<double>(ac.tp);
        }
        ThresholdScores ts;
        ts.alpha = alphas[a];
        ts.deta = 100.0 * deta;
        ts.assa = 100.0 * assa;
        ts.hota = 100.0 * std::sqrt(deta * assa);
        out.per_threshold.push_back(ts);
        sum_deta += deta;
        sum_assa += assa;
        sum_hota += std::sqrt(deta * assa);
    }
    out.gs_hota = 100.0 * sum_hota / na;
    out.gs_deta = 100.0 * sum_deta / na;
    out.gs_assa = 100.0 * sum_assa / na;
    return out;
}

std::vector<GsRecord> to_gamestate(std::span<const Tracklet> tracklets) {
    std::vector<GsRecord> out;
    for (const auto& t : tracklets) {
        for (const auto& rec : t.records) {
            GsRecord r;
            r.frame = rec.frame;
            r.id = t.id;
            r.pos = rec.pos;
            r.role = t.role;
            r.side = t.side;
            r.jersey = t.jersey;
            out.push_back(r);
        }
    }
    std::sort(out.begin(), out.end(), [](const GsRecord& a, const GsRecord& b) {
        if (a.frame != b.frame) return a.frame < b.frame;
        return a.id < b.id;
    });
    return out;
}

}  // namespace gsr
