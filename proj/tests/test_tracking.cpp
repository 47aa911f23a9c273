#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gsr/tracking.hpp"

#include <algorithm>
#include <numeric>
#include <random>

using namespace gsr;

namespace {

Eigen::VectorXd unit_vector(std::mt19937_64& rng, int dim) {
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::VectorXd v(dim);
    for (int i = 0; i < dim; ++i) v(i) = g(rng);
    return v.normalized();
}

Detection make_det(int frame, const Vec2& pos, const Eigen::VectorXd& reid,
                   const Eigen::VectorXd& team, Orientation o = Orientation::up) {
    Detection d;
    d.frame = frame;
    d.pitch_pos = pos;
    d.reid = reid;
    d.team = team;
    d.orient = o;
    d.jersey.first[0] = 1.0;
    d.jersey.second[0] = 1.0;
    return d;
}

// Exhaustive minimum over all complete assignments of the padded square
// matrix, mirroring the solver's objective.
double brute_force_cost(const Eigen::MatrixXd& cost) {
    const int n = static_cast<int>(std::max(cost.rows(), cost.cols()));
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    a.topLeftCorner(cost.rows(), cost.cols()) = cost;
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
        double total = 0.0;
        for (int i = 0; i < n; ++i) total += a(i, perm[i]);
        best = std::min(best, total);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

double matching_cost(const Eigen::MatrixXd& cost, const std::vector<std::pair<int, int>>& pairs) {
    double total = 0.0;
    for (const auto& [i, j] : pairs) total += cost(i, j);
    return total;
}

}  // namespace

TEST_CASE("filter anomalies") {
    std::mt19937_64 rng(1);
    const auto r = unit_vector(rng, 8);
    std::vector<Detection> dets;
    for (int i = 0; i < 6; ++i) {
        Detection d = make_det(0, Vec2(i, 0), r, r);
        d.anomaly = (i % 2 == 1);
        dets.push_back(d);
    }
    SUBCASE("mixed flags keep the unflagged subsequence") {
        const auto out = filter_anomalies(dets);
        REQUIRE(out.size() == 3);
        CHECK(out[0].pitch_pos.x() == 0);
        CHECK(out[1].pitch_pos.x() == 2);
        CHECK(out[2].pitch_pos.x() == 4);
    }
    SUBCASE("no flags is the identity") {
        for (auto& d : dets) d.anomaly = false;
        CHECK(filter_anomalies(dets).size() == dets.size());
    }
    SUBCASE("all flagged gives empty") {
        for (auto& d : dets) d.anomaly = true;
        CHECK(filter_anomalies(dets).empty());
    }
}

TEST_CASE("kalman predict") {
    TrackerConfig cfg;
    std::mt19937_64 rng(2);
    TrackState t;
    t.mean << 3.0, -2.0, 1.0, 0.0;
    t.cov = Eigen::Matrix4d::Identity();
    t.gallery.push_back(unit_vector(rng, 8));

    SUBCASE("zero velocity keeps the position") {
        TrackState still = t;
        still.mean(2) = still.mean(3) = 0.0;
        const TrackState p = predict(still, 1.0, cfg);
        CHECK((p.position() - still.position()).norm() == 0.0);
    }
    SUBCASE("velocity advances the position") {
        const TrackState p = predict(t, 1.0, cfg);
        CHECK(p.mean(0) == doctest::Approx(4.0));
        CHECK(p.mean(1) == doctest::Approx(-2.0));
    }
    SUBCASE("covariance trace strictly increases") {
        const TrackState p = predict(t, 1.0 / 30.0, cfg);
        CHECK(p.cov.trace() > t.cov.trace());
    }
    SUBCASE("covariance stays symmetric positive definite over many cycles") {
        TrackState cur = t;
        for (int i = 0; i < 200; ++i) {
            cur = predict(cur, 1.0 / 30.0, cfg);
            Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> eig(cur.cov);
            CHECK(eig.eigenvalues().minCoeff() > 0.0);
            CHECK((cur.cov - cur.cov.transpose()).cwiseAbs().maxCoeff() < 1e-9);
        }
    }
    SUBCASE("dt must be positive") {
        CHECK_THROWS_AS(predict(t, 0.0, cfg), std::invalid_argument);
    }
}

TEST_CASE("association cost") {
    TrackerConfig cfg;
    std::mt19937_64 rng(3);
    const auto reid = unit_vector(rng, 16);
    const auto team = unit_vector(rng, 8);

    TrackState t;
    t.mean << 10.0, 5.0, 0.0, 0.0;
    t.cov = Eigen::Matrix4d::Identity() * 0.25;
    t.gallery.push_back(reid);
    t.team_sum = team;
    t.team_count = 1;
    t.last_orient = Orientation::left;

    SUBCASE("identical detection costs zero") {
        const Detection d = make_det(0, Vec2(10, 5), reid, team, Orientation::left);
        CHECK(association_cost(t, d, cfg) == doctest::Approx(0.0));
    }
    SUBCASE("opposite orientation is infeasible") {
        const Detection d = make_det(0, Vec2(10, 5), reid, team, Orientation::right);
        CHECK(association_cost(t, d, cfg) == kInfeasibleCost);
        // Adjacent orientations stay feasible.
        const Detection d2 = make_det(0, Vec2(10, 5), reid, team, Orientation::up);
        CHECK(association_cost(t, d2, cfg) < kInfeasibleCost);
    }
    SUBCASE("distant detection is gated out") {
        const Detection d = make_det(0, Vec2(60, 5), reid, team, Orientation::left);
        CHECK(association_cost(t, d, cfg) == kInfeasibleCost);
    }
    SUBCASE("team mismatch is gated out") {
        Eigen::VectorXd other = unit_vector(rng, 8);
        while (1.0 - other.dot(team) <= cfg.team_gate) {
            other = unit_vector(rng, 8);
        }
        const Detection d = make_det(0, Vec2(10, 5), reid, other, Orientation::left);
        CHECK(association_cost(t, d, cfg) == kInfeasibleCost);
    }
}

TEST_CASE("associate equals brute force on random instances") {
    std::mt19937_64 rng(4);
    std::uniform_int_distribution<int> usize(1, 5);
    std::uniform_real_distribution<double> ucost(0.0, 2.0);
    std::bernoulli_distribution infeasible(0.2);

    for (int trial = 0; trial < 1000; ++trial) {
        const int rows = usize(rng), cols = usize(rng);
        Eigen::MatrixXd cost(rows, cols);
        for (int i = 0; i < rows; ++i) {
            for (int j = 0; j < cols; ++j) {
                cost(i, j) = infeasible(rng) ? kInfeasibleCost : ucost(rng);
            }
        }
        const auto pairs = solve_assignment(cost);
        // One-to-one.
        std::vector<int> rs, cs;
        for (const auto& [i, j] : pairs) {
            rs.push_back(i);
            cs.push_back(j);
        }
        std::sort(rs.begin(), rs.end());
        std::sort(cs.begin(), cs.end());
        CHECK(std::adjacent_find(rs.begin(), rs.end()) == rs.end());
        CHECK(std::adjacent_find(cs.begin(), cs.end()) == cs.end());
        // Total cost matches the exhaustive optimum once dropped infeasible
        // pairs are accounted for (they sit in the padded problem at 1e12).
        const double oracle = brute_force_cost(cost);
        const int dropped =
            static_cast<int>(std::min(rows, cols) - static_cast<int>(pairs.size()));
        const double got = matching_cost(cost, pairs) + dropped * kInfeasibleCost;
        CHECK(got == doctest::Approx(oracle).epsilon(1e-9));
    }
}

TEST_CASE("associate resolves crossing players by appearance") {
    TrackerConfig cfg;
    std::mt19937_64 rng(5);
    const auto reid_a = unit_vector(rng, 16);
    const auto reid_b = unit_vector(rng, 16);
    const auto team = unit_vector(rng, 8);

    TrackState ta;
    ta.id = 1;
    ta.mean << 0.0, 0.0, 0.0, 0.0;
    ta.cov = Eigen::Matrix4d::Identity();
    ta.gallery.push_back(reid_a);
    ta.team_sum = team;
    ta.team_count = 1;
    TrackState tb = ta;
    tb.id = 2;
    tb.mean << 1.0, 0.0, 0.0, 0.0;
    tb.gallery.clear();
    tb.gallery.push_back(reid_b);

    // Detections sit between the two tracks, so motion alone is ambiguous;
    // the embeddings are swapped relative to positions.
    const Detection da = make_det(0, Vec2(0.9, 0.0), reid_a, team);
    const Detection db = make_det(0, Vec2(0.1, 0.0), reid_b, team);
    const Matching m = associate({ta, tb}, {da, db}, cfg);
    REQUIRE(m.pairs.size() == 2);
    for (const auto& [ti, dj] : m.pairs) {
        if (ti == 0) CHECK(dj == 0);  // track a takes the reid_a detection
        if (ti == 1) CHECK(dj == 1);
    }
}

TEST_CASE("tracker step basics") {
    TrackerConfig cfg;
    std::mt19937_64 rng(6);
    const auto team = unit_vector(rng, 8);
    const double dt = 1.0 / 30.0;

    SUBCASE("single persistent target yields one confirmed track, full coverage") {
        Tracker tracker(cfg);
        const auto reid = unit_vector(rng, 16);
        std::vector<TrackRecord> all;
        for (int f = 0; f < 100; ++f) {
            const Vec2 pos(0.1 * f, 2.0);
            const auto recs = tracker.step({make_det(f, pos, reid, team)}, dt);
            all.insert(all.end(), recs.begin(), recs.end());
        }
        CHECK(tracker.confirmed_count() == 1);
        CHECK(all.size() == 100);  // buffered tentative records flush on confirm
        std::set<int> ids;
        for (const auto& r : all) ids.insert(r.track_id);
        CHECK(ids.size() == 1);
    }
    SUBCASE("empty frames age tracks out") {
        Tracker tracker(cfg);
        const auto reid = unit_vector(rng, 16);
        for (int f = 0; f < 5; ++f) {
            tracker.step({make_det(f, Vec2(0, 0), reid, team)}, dt);
        }
        CHECK(tracker.confirmed_count() == 1);
        for (int f = 5; f < 5 + cfg.max_misses + 2; ++f) {
            tracker.step({}, dt);
        }
        CHECK(tracker.tracks().empty());
    }
    SUBCASE("22 noise-free players stay 22 tracks with zero switches") {
        Tracker tracker(cfg);
        std::vector<Eigen::VectorXd> reids, teams;
        std::vector<Vec2> pos, vel;
        std::uniform_real_distribution<double> ux(-50, 50), uy(-30, 30), uv(-5, 5);
        for (int i = 0; i < 22; ++i) {
            reids.push_back(unit_vector(rng, 16));
            teams.push_back(unit_vector(rng, 8));
            pos.emplace_back(ux(rng), uy(rng));
            vel.emplace_back(uv(rng), uv(rng));
        }
        std::map<int, std::set<int>> track_to_players;
        const int frames = 300;
        for (int f = 0; f < frames; ++f) {
            std::vector<Detection> dets;
            for (int i = 0; i < 22; ++i) {
                pos[i] += vel[i] * dt;
                // Smooth turns at the margins: bounded acceleration, as in a
                // real match (no instantaneous velocity reversals).
                if (std::abs(pos[i].x()) > 50.0) vel[i].x() -= 0.2 * dt * 30 * pos[i].x() / 50.0;
                if (std::abs(pos[i].y()) > 31.0) vel[i].y() -= 0.2 * dt * 30 * pos[i].y() / 31.0;
                dets.push_back(make_det(f, pos[i], reids[i], teams[i]));
            }
            for (const auto& rec : tracker.step(dets, dt)) {
                // Recover which player this record belongs to by embedding.
                for (int i = 0; i < 22; ++i) {
                    if ((rec.reid - reids[i]).norm() < 1e-9) {
                        track_to_players[rec.track_id].insert(i);
                        break;
                    }
                }
            }
        }
        CHECK(tracker.confirmed_count() == 22);
        for (const auto& [tid, players] : track_to_players) {
            CHECK(players.size() == 1);  // no identity switches
        }
    }
    SUBCASE("ball detections form a separate single track") {
        Tracker tracker(cfg);
        const auto reid = unit_vector(rng, 16);
        std::vector<TrackRecord> ball_recs;
        for (int f = 0; f < 10; ++f) {
            Detection ball = make_det(f, Vec2(0.2 * f, 0.0), reid, team);
            ball.cls = DetClass::ball;
            const auto recs = tracker.step({ball}, dt);
            for (const auto& r : recs) {
                if (r.is_ball) ball_recs.push_back(r);
            }
        }
        CHECK(ball_recs.size() == 10);
        std::set<int> ids;
        for (const auto& r : ball_recs) ids.insert(r.track_id);
        CHECK(ids.size() == 1);
        CHECK(tracker.confirmed_count() == 0);  // no athlete tracks
    }
}

TEST_CASE("orientation gate forbids 180-degree flips across a frame") {
    TrackerConfig cfg;
    cfg.orientation_gate = true;
    std::mt19937_64 rng(8);
    const auto reid = unit_vector(rng, 16);
    const auto team = unit_vector(rng, 8);
    Tracker tracker(cfg);
    const double dt = 1.0 / 30.0;

    Orientation prev = Orientation::left;
    tracker.step({make_det(0, Vec2(0, 0), reid, team, prev)}, dt);
    std::vector<Orientation> seq = {Orientation::left, Orientation::up, Orientation::right,
                                    Orientation::down, Orientation::left};
    int frame = 1;
    for (Orientation o : seq) {
        const auto recs = tracker.step({make_det(frame, Vec2(0.01 * frame, 0), reid, team, o)}, dt);
        for (const auto& r : recs) {
            CHECK(!opposite_orientation(prev, r.orient));
        }
        ++frame;
        prev = o;
    }
}
