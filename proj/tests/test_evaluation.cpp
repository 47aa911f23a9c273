#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gsr/evaluation.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <random>

using namespace gsr;

namespace {

GsRecord rec(int frame, int id, double x, double y, Role role = Role::player,
             Side side = Side::left, std::optional<int> jersey = std::nullopt) {
    GsRecord r;
    r.frame = frame;
    r.id = id;
    r.pos = Vec2(x, y);
    r.role = role;
    r.side = side;
    r.jersey = jersey;
    return r;
}

// Fully independent GS-HOTA oracle: per frame and threshold, exhaustively
// enumerate one-to-one matchings over pairs with S >= alpha, maximizing the
// match count and then the total similarity.
struct OracleScores {
    double hota, deta, assa;
};

OracleScores oracle_gs_hota(const std::vector<GsRecord>& gt, const std::vector<GsRecord>& pred) {
    std::map<int, std::vector<const GsRecord*>> gt_frames, pred_frames;
    for (const auto& r : gt) gt_frames[r.frame].push_back(&r);
    for (const auto& r : pred) pred_frames[r.frame].push_back(&r);
    std::map<int, int> gt_count, pred_count;
    for (const auto& r : gt) ++gt_count[r.id];
    for (const auto& r : pred) ++pred_count[r.id];

    std::set<int> frames;
    for (const auto& [f, v] : gt_frames) frames.insert(f);
    for (const auto& [f, v] : pred_frames) frames.insert(f);

    double sum_hota = 0.0, sum_deta = 0.0, sum_assa = 0.0;
    int na = 0;
    for (int ai = 1; ai <= 19; ++ai) {
        const double alpha = 0.05 * ai;
        long long tp = 0, fp = 0, fn = 0;
        std::map<std::pair<int, int>, long long> matches;
        for (int f : frames) {
            const auto& g = gt_frames[f];
            const auto& p = pred_frames[f];
            const int ng = static_cast<int>(g.size());
            const int np = static_cast<int>(p.size());
            // similarity
            std::vector<std::vector<double>> s(ng, std::vector<double>(np, 0.0));
            for (int i = 0; i < ng; ++i) {
                for (int j = 0; j < np; ++j) {
                    if (g[i]->role == p[j]->role && g[i]->side == p[j]->side &&
                        g[i]->jersey == p[j]->jersey) {
                        const double d = (g[i]->pos - p[j]->pos).norm();
                        s[i][j] = std::exp(-d * d / 50.0);
                    }
                }
            }
            // exhaustive matching: maximize (count, total similarity)
            std::vector<int> best_assign;
            int best_count = -1;
            double best_total = -1.0;
            std::vector<int> assign(ng, -1);
            std::vector<char> used(np, 0);
            std::function<void(int, int, double)> enumerate = [&](int i, int count, double total) {
                if (i == ng) {
                    if (count > best_count || (count == best_count && total > best_total)) {
                        best_count = count;
                        best_total = total;
                        best_assign = assign;
                    }
                    return;
                }
                enumerate(i + 1, count, total);  // gt i unmatched
                for (int j = 0; j < np; ++j) {
                    if (!used[j] && s[i][j] >= alpha) {
                        used[j] = 1;
                        assign[i] = j;
                        enumerate(i + 1, count + 1, total + s[i][j]);
                        assign[i] = -1;
                        used[j] = 0;
                    }
                }
            };
            enumerate(0, 0, 0.0);
            int frame_tp = 0;
            for (int i = 0; i < ng; ++i) {
                if (best_assign.size() > static_cast<size_t>(i) && best_assign[i] >= 0) {
                    ++frame_tp;
                    ++matches[{g[i]->id, p[best_assign[i]]->id}];
                }
            }
            tp += frame_tp;
            fn += ng - frame_tp;
            fp += np - frame_tp;
        }
        const double det_den = static_cast<double>(tp + fn + fp);
        const double deta = det_den > 0 ? tp / det_den : 0.0;
        double assa = 0.0;
        if (tp > 0) {
            double sum_ass = 0.0;
            for (const auto& [ids, tpa] : matches) {
                const double fna = gt_count[ids.first] - tpa;
                const double fpa = pred_count[ids.second] - tpa;
                sum_ass += tpa * (tpa / (tpa + fna + fpa));
            }
            assa = sum_ass / tp;
        }
        sum_deta += deta;
        sum_assa += assa;
        sum_hota += std::sqrt(deta * assa);
        ++na;
    }
    return {100.0 * sum_hota / na, 100.0 * sum_deta / na, 100.0 * sum_assa / na};
}

}  // namespace

TEST_CASE("localization similarity") {
    CHECK(loc_sim(0.0) == 1.0);
    CHECK(loc_sim(1e6) == doctest::Approx(0.0));
    CHECK(loc_sim(5.0) == doctest::Approx(std::exp(-0.5)).epsilon(1e-12));
    CHECK(loc_sim(5.0) == doctest::Approx(0.60653065971).epsilon(1e-9));
    for (double d = 0.0; d < 20.0; d += 0.5) {
        CHECK(loc_sim(d) >= loc_sim(d + 0.5));  // monotone decreasing
    }
    CHECK_THROWS_AS(loc_sim(-1.0), std::domain_error);
}

TEST_CASE("identification similarity") {
    const GsRecord a = rec(0, 1, 0, 0, Role::player, Side::left, 7);
    CHECK(id_sim(a, rec(0, 9, 3, 3, Role::player, Side::left, 7)));
    CHECK(!id_sim(a, rec(0, 9, 0, 0, Role::player, Side::left, std::nullopt)));
    CHECK(!id_sim(a, rec(0, 9, 0, 0, Role::player, Side::right, 7)));
    CHECK(!id_sim(a, rec(0, 9, 0, 0, Role::goalkeeper, Side::left, 7)));
    // Both jerseys absent still matches.
    const GsRecord ref = rec(0, 1, 0, 0, Role::referee, Side::none);
    CHECK(id_sim(ref, rec(0, 2, 1, 1, Role::referee, Side::none)));
}

TEST_CASE("gs-hota basics") {
    SUBCASE("perfect prediction scores 100") {
        std::vector<GsRecord> gt, pred;
        for (int f = 0; f < 5; ++f) {
            for (int i = 0; i < 4; ++i) {
                gt.push_back(rec(f, i + 1, 3.0 * i, f, Role::player, i % 2 ? Side::left : Side::right, i + 2));
                pred.push_back(rec(f, 100 + i, 3.0 * i, f, Role::player, i % 2 ? Side::left : Side::right, i + 2));
            }
        }
        const EvalScores s = gs_hota(gt, pred);
        CHECK(s.gs_hota == doctest::Approx(100.0).epsilon(1e-12));
        CHECK(s.gs_deta == doctest::Approx(100.0).epsilon(1e-12));
        CHECK(s.gs_assa == doctest::Approx(100.0).epsilon(1e-12));
    }
    SUBCASE("empty prediction scores 0") {
        std::vector<GsRecord> gt = {rec(0, 1, 0, 0), rec(1, 1, 1, 0)};
        const EvalScores s = gs_hota(gt, {});
        CHECK(s.gs_hota == 0.0);
        CHECK(s.gs_deta == 0.0);
    }
    SUBCASE("id mismatch everywhere scores 0") {
        std::vector<GsRecord> gt, pred;
        for (int f = 0; f < 3; ++f) {
            gt.push_back(rec(f, 1, f, 0, Role::player, Side::left, 7));
            pred.push_back(rec(f, 1, f, 0, Role::player, Side::left, 9));
        }
        CHECK(gs_hota(gt, pred).gs_hota == 0.0);
    }
    SUBCASE("20 m translation drives every pair below threshold") {
        // Distinct jerseys so only like-for-like pairs are candidates.
        std::vector<GsRecord> gt, pred;
        for (int f = 0; f < 4; ++f) {
            for (int i = 0; i < 3; ++i) {
                gt.push_back(rec(f, i + 1, 5.0 * i, 0, Role::player, Side::left, i + 2));
                pred.push_back(rec(f, i + 1, 5.0 * i + 20.0, 0, Role::player, Side::left, i + 2));
            }
        }
        CHECK(gs_hota(gt, pred).gs_hota == doctest::Approx(0.0));  // loc_sim(20) ~ 3e-4 < 0.05
    }
    SUBCASE("duplicate (frame, id) is rejected") {
        std::vector<GsRecord> gt = {rec(0, 1, 0, 0), rec(0, 1, 1, 1)};
        CHECK_THROWS_AS(gs_hota(gt, {}), std::invalid_argument);
    }
    SUBCASE("role other is excluded by default") {
        std::vector<GsRecord> gt = {rec(0, 1, 0, 0)};
        std::vector<GsRecord> pred = {rec(0, 1, 0, 0), rec(0, 2, 5, 5, Role::other, Side::none)};
        CHECK(gs_hota(gt, pred).gs_hota == doctest::Approx(100.0));
    }
}

TEST_CASE("identity swap matches the hand-enumerated oracle") {
    // 2 frames x 2 objects; the second frame swaps the predicted identities.
    std::vector<GsRecord> gt = {
        rec(0, 1, 0, 0, Role::player, Side::left, 7),
        rec(0, 2, 10, 0, Role::player, Side::left, 9),
        rec(1, 1, 0, 1, Role::player, Side::left, 7),
        rec(1, 2, 10, 1, Role::player, Side::left, 9),
    };
    std::vector<GsRecord> pred = {
        rec(0, 11, 0, 0, Role::player, Side::left, 7),
        rec(0, 12, 10, 0, Role::player, Side::left, 9),
        rec(1, 12, 0, 1, Role::player, Side::left, 7),
        rec(1, 11, 10, 1, Role::player, Side::left, 9),
    };
    // The attributes travel with the positions, so every frame still pairs
    // up (DetA 100), but each gt identity is covered by two predicted ids:
    // every match has TPA=1, FNA=1, FPA=1, hence AssA = 1/3.
    const EvalScores s = gs_hota(gt, pred);
    const OracleScores o = oracle_gs_hota(gt, pred);
    CHECK(s.gs_hota == doctest::Approx(o.hota).epsilon(1e-9));
    CHECK(s.gs_deta == doctest::Approx(o.deta).epsilon(1e-9));
    CHECK(s.gs_assa == doctest::Approx(o.assa).epsilon(1e-9));
    CHECK(s.gs_deta == doctest::Approx(100.0));
    CHECK(s.gs_assa == doctest::Approx(100.0 / 3.0));
}

TEST_CASE("random instances match the exhaustive oracle") {
    std::mt19937_64 rng(57);
    std::uniform_int_distribution<int> unframes(1, 3), unobj(0, 4), uid(1, 5), ujersey(0, 3);
    std::uniform_real_distribution<double> upos(-20.0, 20.0);
    std::uniform_int_distribution<int> urole(0, 2), uside(0, 2);

    for (int trial = 0; trial < 300; ++trial) {
        std::vector<GsRecord> gt, pred;
        const int frames = unframes(rng);
        for (int f = 0; f < frames; ++f) {
            std::set<int> used_gt, used_pred;
            const int ng = unobj(rng), np = unobj(rng);
            for (int i = 0; i < ng; ++i) {
                int id = uid(rng);
                if (!used_gt.insert(id).second) continue;
                const int j = ujersey(rng);
                gt.push_back(rec(f, id, upos(rng), upos(rng), static_cast<Role>(urole(rng)),
                                 static_cast<Side>(uside(rng)),
                                 j == 0 ? std::nullopt : std::optional<int>(j)));
            }
            for (int i = 0; i < np; ++i) {
                int id = uid(rng);
                if (!used_pred.insert(id).second) continue;
                const int j = ujersey(rng);
                pred.push_back(rec(f, id, upos(rng), upos(rng), static_cast<Role>(urole(rng)),
                                   static_cast<Side>(uside(rng)),
                                   j == 0 ? std::nullopt : std::optional<int>(j)));
            }
        }
        const EvalScores s = gs_hota(gt, pred);
        const OracleScores o = oracle_gs_hota(gt, pred);
        CHECK(s.gs_hota == doctest::Approx(o.hota).epsilon(1e-9));
        CHECK(s.gs_deta == doctest::Approx(o.deta).epsilon(1e-9));
        CHECK(s.gs_assa == doctest::Approx(o.assa).epsilon(1e-9));
    }
}

TEST_CASE("removing a correct prediction never raises deta") {
    std::mt19937_64 rng(61);
    std::uniform_real_distribution<double> upos(-10.0, 10.0);
    std::vector<GsRecord> gt, pred;
    for (int f = 0; f < 4; ++f) {
        for (int i = 0; i < 4; ++i) {
            const double x = upos(rng), y = upos(rng);
            gt.push_back(rec(f, i + 1, x, y, Role::player, Side::left, i + 2));
            pred.push_back(rec(f, i + 1, x + 0.3, y, Role::player, Side::left, i + 2));
        }
    }
    const double base = gs_hota(gt, pred).gs_deta;
    for (size_t drop = 0; drop < pred.size(); drop += 3) {
        std::vector<GsRecord> fewer = pred;
        fewer.erase(fewer.begin() + drop);
        CHECK(gs_hota(gt, fewer).gs_deta <= base + 1e-12);
    }
}

TEST_CASE("tracklets flatten to gamestate records") {
    Tracklet t;
    t.id = 3;
    t.role = Role::goalkeeper;
    t.side = Side::right;
    t.jersey = 1;
    for (int f = 0; f < 3; ++f) {
        TrackletRecord rec;
        rec.frame = f;
        rec.pos = Vec2(f, 0);
        t.records.push_back(rec);
    }
    const auto gs = to_gamestate(std::vector<Tracklet>{t});
    REQUIRE(gs.size() == 3);
    CHECK(gs[0].id == 3);
    CHECK(gs[1].role == Role::goalkeeper);
    CHECK(gs[2].jersey == 1);
}
