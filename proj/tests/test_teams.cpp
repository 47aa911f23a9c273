#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gsr/teams.hpp"

#include <algorithm>
#include <random>

using namespace gsr;

namespace {

Eigen::VectorXd basis(int dim, int k) { return Eigen::VectorXd::Unit(dim, k); }

Eigen::VectorXd noisy(const Eigen::VectorXd& latent, double sigma, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, sigma);
    Eigen::VectorXd v = latent;
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) += g(rng);
    return v.normalized();
}

double cosdist(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return 1.0 - a.normalized().dot(b.normalized());
}

// Two teams of 40 samples each around the centre, 5 referees; positions put
// cluster 0 on the left.
std::vector<AthleteSample> blob_samples(std::mt19937_64& rng, double sigma, int dim = 16) {
    std::vector<AthleteSample> samples;
    int frame = 0;
    for (int i = 0; i < 40; ++i) {
        samples.push_back({frame, Vec2(-15.0 - (i % 10), i % 7 - 3.0), noisy(basis(dim, 0), sigma, rng), 1});
        samples.push_back({frame, Vec2(15.0 + (i % 10), i % 5 - 2.0), noisy(basis(dim, 1), sigma, rng), 2});
        if (i % 8 == 0) {
            samples.push_back({frame, Vec2(i % 9 - 4.0, 10.0), noisy(basis(dim, 2), sigma, rng), 3});
        }
        frame += (i % 2);
    }
    return samples;
}

}  // namespace

TEST_CASE("central query") {
    std::vector<AthleteSample> samples = {
        {0, Vec2(0.0, 0.0), basis(4, 0), 1},
        {0, Vec2(30.0, 0.0), basis(4, 0), 2},
        {0, Vec2(-29.9, 5.0), basis(4, 0), 3},
        {0, Vec2(45.0, 5.0), basis(4, 0), 4},
    };
    const auto kept = central_query(samples);
    REQUIRE(kept.size() == 2);
    CHECK(kept[0].tracklet_id == 1);
    CHECK(kept[1].tracklet_id == 3);  // strict inequality drops |x| = 30
}

TEST_CASE("main clustering") {
    TeamsConfig cfg;
    std::mt19937_64 rng(11);

    SUBCASE("three separated blobs are recovered") {
        const auto samples = blob_samples(rng, 0.05);
        const MainClusters mc = cluster_main(samples, cfg);
        CHECK(!mc.degenerate);
        CHECK(mc.sizes[0] == 40);
        CHECK(mc.sizes[1] == 40);
        CHECK(mc.sizes[2] == 5);
        // Two large clusters near the team latents, small one near the referee.
        const double d00 = cosdist(mc.centroids[0], basis(16, 0));
        const double d01 = cosdist(mc.centroids[0], basis(16, 1));
        CHECK(std::min(d00, d01) < 0.05);
        CHECK(cosdist(mc.centroids[2], basis(16, 2)) < 0.05);
    }
    SUBCASE("partition does not depend on sample order") {
        auto samples = blob_samples(rng, 0.05);
        const MainClusters a = cluster_main(samples, cfg);
        std::vector<AthleteSample> shuffled = samples;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        const MainClusters b = cluster_main(shuffled, cfg);
        for (size_t i = 0; i < samples.size(); ++i) {
            // Find the shuffled position of sample i.
            for (size_t j = 0; j < shuffled.size(); ++j) {
                if (shuffled[j].tracklet_id == samples[i].tracklet_id &&
                    shuffled[j].frame == samples[i].frame &&
                    (shuffled[j].emb - samples[i].emb).norm() == 0.0) {
                    CHECK(a.assignment[i] == b.assignment[j]);
                    break;
                }
            }
        }
    }
    SUBCASE("identical embeddings raise the degenerate flag") {
        std::vector<AthleteSample> same;
        for (int i = 0; i < 12; ++i) {
            same.push_back({i, Vec2(i - 6.0, 0.0), basis(8, 3), i});
        }
        const MainClusters mc = cluster_main(same, cfg);
        CHECK(mc.degenerate);
    }
    SUBCASE("fewer than three samples is an error") {
        std::vector<AthleteSample> two = {{0, Vec2(0, 0), basis(4, 0), 1},
                                          {0, Vec2(1, 0), basis(4, 1), 2}};
        CHECK_THROWS_AS(cluster_main(two, cfg), std::invalid_argument);
    }
}

TEST_CASE("goalkeeper estimation") {
    TeamsConfig cfg;
    const PitchModel model = standard_pitch();
    std::mt19937_64 rng(13);
    const auto samples = blob_samples(rng, 0.05);
    const MainClusters mc = cluster_main(samples, cfg);

    SUBCASE("keeper blob in the left box is recovered") {
        auto with_gk = samples;
        for (int i = 0; i < 10; ++i) {
            with_gk.push_back({i, Vec2(-48.0, i - 5.0), noisy(basis(16, 3), 0.05, rng), 99});
        }
        const auto gk = estimate_goalkeeper(with_gk, mc, Side::left, model, cfg);
        REQUIRE(gk.has_value());
        CHECK(cosdist(*gk, basis(16, 3)) < 0.05);
    }
    SUBCASE("box holding only outfield players yields no keeper") {
        auto crowd = samples;
        for (int i = 0; i < 6; ++i) {
            crowd.push_back({i, Vec2(-45.0, i - 3.0), noisy(basis(16, 0), 0.05, rng), 100});
        }
        CHECK(!estimate_goalkeeper(crowd, mc, Side::left, model, cfg).has_value());
    }
    SUBCASE("a single surviving sample becomes the centroid") {
        auto one = samples;
        const Eigen::VectorXd gk_emb = basis(16, 4);
        one.push_back({0, Vec2(44.0, 0.0), gk_emb, 101});
        const auto gk = estimate_goalkeeper(one, mc, Side::right, model, cfg);
        REQUIRE(gk.has_value());
        CHECK((gk->normalized() - gk_emb).norm() < 1e-12);
    }
}

TEST_CASE("left/right voting") {
    TeamsConfig cfg;
    cfg.vote_stride = 1;
    std::mt19937_64 rng(17);

    SUBCASE("cluster always on the left") {
        const auto samples = blob_samples(rng, 0.05);
        const MainClusters mc = cluster_main(samples, cfg);
        int vl = 0, vr = 0;
        const Side side = vote_left_right(samples, mc, cfg, vl, vr);
        // Cluster 0 members were generated at x < -15 or x > 15; whichever is
        // the reference cluster, the vote must be unanimous.
        CHECK(vl + vr > 0);
        CHECK((vl == 0 || vr == 0));
        CHECK((side == Side::left || side == Side::right));
    }
    SUBCASE("majority and tie-break rules") {
        // Hand-built: 12 samples of one cluster over 10 frames.
        std::vector<AthleteSample> samples;
        MainClusters mc;
        mc.centroids = {basis(4, 0), basis(4, 1), basis(4, 2)};
        mc.sizes = {10, 0, 0};
        // 7 frames with mean x < 0, 3 with mean x > 0.
        for (int f = 0; f < 10; ++f) {
            samples.push_back({f, Vec2(f < 7 ? -10.0 : 10.0, 0.0), basis(4, 0), f});
        }
        mc.assignment.assign(samples.size(), 0);
        int vl = 0, vr = 0;
        CHECK(vote_left_right(samples, mc, cfg, vl, vr) == Side::left);
        CHECK(vl == 7);
        CHECK(vr == 3);

        // 5-5 tie with total mean x = -1.2 resolves left.
        samples.clear();
        for (int f = 0; f < 10; ++f) {
            samples.push_back({f, Vec2(f < 5 ? -7.2 : 4.8, 0.0), basis(4, 0), f});
        }
        mc.assignment.assign(samples.size(), 0);
        CHECK(vote_left_right(samples, mc, cfg, vl, vr) == Side::left);
        CHECK(vl == 5);
        CHECK(vr == 5);
    }
    SUBCASE("no reference members is an error") {
        std::vector<AthleteSample> samples = {{0, Vec2(0, 0), basis(4, 1), 1}};
        MainClusters mc;
        mc.centroids = {basis(4, 0), basis(4, 1), basis(4, 2)};
        mc.assignment = {1};  // nothing in cluster 0
        int vl = 0, vr = 0;
        CHECK_THROWS_AS(vote_left_right(samples, mc, cfg, vl, vr), std::runtime_error);
    }
}

TEST_CASE("tracklet assignment") {
    ClusterSet clusters;
    clusters.team_left = basis(8, 0);
    clusters.team_right = basis(8, 1);
    clusters.referee = basis(8, 2);
    clusters.gk_left = basis(8, 3);
    clusters.gk_right = basis(8, 4);

    auto tracklet_with = [](const Eigen::VectorXd& emb) {
        Tracklet t;
        TrackletRecord rec;
        rec.frame = 0;
        rec.team = emb;
        t.records.push_back(rec);
        return t;
    };

    SUBCASE("exact centroids map to their labels") {
        CHECK(assign_tracklet(tracklet_with(basis(8, 0)), clusters) ==
              std::pair{Role::player, Side::left});
        CHECK(assign_tracklet(tracklet_with(basis(8, 1)), clusters) ==
              std::pair{Role::player, Side::right});
        CHECK(assign_tracklet(tracklet_with(basis(8, 2)), clusters) ==
              std::pair{Role::referee, Side::none});
        CHECK(assign_tracklet(tracklet_with(basis(8, 3)), clusters) ==
              std::pair{Role::goalkeeper, Side::left});
        CHECK(assign_tracklet(tracklet_with(basis(8, 4)), clusters) ==
              std::pair{Role::goalkeeper, Side::right});
    }
    SUBCASE("exact tie goes to the earlier label") {
        const Eigen::VectorXd mid = (basis(8, 0) + basis(8, 1)).normalized();
        CHECK(assign_tracklet(tracklet_with(mid), clusters) == std::pair{Role::player, Side::left});
    }
    SUBCASE("assignment is invariant under a common rotation") {
        std::mt19937_64 rng(23);
        std::normal_distribution<double> g(0.0, 1.0);
        Eigen::MatrixXd m(8, 8);
        for (int i = 0; i < 8; ++i) {
            for (int j = 0; j < 8; ++j) m(i, j) = g(rng);
        }
        const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(m).householderQ();
        for (int trial = 0; trial < 50; ++trial) {
            Eigen::VectorXd emb(8);
            for (int i = 0; i < 8; ++i) emb(i) = g(rng);
            emb.normalize();
            const auto before = assign_embedding(emb, clusters);
            ClusterSet rotated;
            rotated.team_left = q * clusters.team_left;
            rotated.team_right = q * clusters.team_right;
            rotated.referee = q * clusters.referee;
            rotated.gk_left = q * *clusters.gk_left;
            rotated.gk_right = q * *clusters.gk_right;
            CHECK(assign_embedding(q * emb, rotated) == before);
        }
    }
    SUBCASE("noisy tracklets are classified perfectly at 0.05 sigma") {
        std::mt19937_64 rng(29);
        int correct = 0, total = 0;
        for (int trial = 0; trial < 100; ++trial) {
            const int label = trial % 5;
            Tracklet t;
            for (int f = 0; f < 10; ++f) {
                TrackletRecord rec;
                rec.frame = f;
                rec.team = noisy(basis(8, label), 0.05, rng);
                t.records.push_back(rec);
            }
            const auto [role, side] = assign_tracklet(t, clusters);
            const std::pair<Role, Side> expected[5] = {
                {Role::player, Side::left},
                {Role::player, Side::right},
                {Role::referee, Side::none},
                {Role::goalkeeper, Side::left},
                {Role::goalkeeper, Side::right},
            };
            correct += (std::pair{role, side} == expected[label]) ? 1 : 0;
            ++total;
        }
        CHECK(correct == total);
    }
}

TEST_CASE("full cluster estimation on a synthetic layout") {
    TeamsConfig cfg;
    cfg.vote_stride = 1;
    const PitchModel model = standard_pitch();
    std::mt19937_64 rng(31);

    // 600 frames, left team around x=-20, right team around x=+20, referees
    // centre, keepers in their boxes.
    std::vector<AthleteSample> samples;
    for (int f = 0; f < 600; f += 5) {
        for (int p = 0; p < 8; ++p) {
            samples.push_back({f, Vec2(-20.0 + p, p - 4.0), noisy(basis(16, 0), 0.05, rng), p});
            samples.push_back({f, Vec2(20.0 - p, 4.0 - p), noisy(basis(16, 1), 0.05, rng), 20 + p});
        }
        samples.push_back({f, Vec2(0.0, 6.0), noisy(basis(16, 2), 0.05, rng), 40});
        samples.push_back({f, Vec2(-48.0, 2.0), noisy(basis(16, 3), 0.05, rng), 50});
        samples.push_back({f, Vec2(48.0, -2.0), noisy(basis(16, 4), 0.05, rng), 51});
    }
    std::vector<CameraParams> cams(600);
    for (auto& c : cams) {
        c.pan = 0.05;
        c.tilt = 1.2;
        c.fov = 1.0;
        c.y = 70;
        c.z = -20;
    }

    const ClusterSet clusters = estimate_clusters(samples, cams, model, cfg);
    CHECK(!clusters.degenerate);
    CHECK(cosdist(clusters.team_left, basis(16, 0)) < 0.05);
    CHECK(cosdist(clusters.team_right, basis(16, 1)) < 0.05);
    CHECK(cosdist(clusters.referee, basis(16, 2)) < 0.05);
    REQUIRE(clusters.gk_left.has_value());
    REQUIRE(clusters.gk_right.has_value());
    CHECK(cosdist(*clusters.gk_left, basis(16, 3)) < 0.05);
    CHECK(cosdist(*clusters.gk_right, basis(16, 4)) < 0.05);
    CHECK(clusters.votes_left > 0);
}
