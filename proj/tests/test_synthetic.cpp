#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gsr/synthetic.hpp"

#include <cmath>
#include <random>

using namespace gsr;

TEST_CASE("camera sampling") {
    std::mt19937_64 rng(3);
    double mean_fov = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const CameraParams cam = sample_camera(rng);
        REQUIRE(cam.x >= -60.0);
        REQUIRE(cam.x <= 60.0);
        REQUIRE(cam.y >= 40.0);
        REQUIRE(cam.y <= 110.0);
        REQUIRE(cam.z >= -40.0);
        REQUIRE(cam.z <= -10.0);
        REQUIRE(cam.roll == 0.0);
        REQUIRE(cam.fov >= 0.4);
        REQUIRE(cam.fov <= 1.3);
        // Centre ray must hit the pitch rectangle.
        const Mat3 rot = rotation_from_angles(cam.pan, cam.tilt, cam.roll);
        const Vec3 axis = rot.row(2);
        REQUIRE(axis.z() > 0.0);
        const double depth = -cam.z / axis.z();
        const Vec3 hit = cam.position() + depth * axis;
        REQUIRE(std::abs(hit.x()) <= 52.5 + 1e-9);
        REQUIRE(std::abs(hit.y()) <= 34.0 + 1e-9);
        mean_fov += cam.fov;
    }
    CHECK(mean_fov / 10000.0 == doctest::Approx(0.85).epsilon(0.05));

    SUBCASE("deterministic under a fixed seed") {
        std::mt19937_64 a(42), b(42);
        for (int i = 0; i < 10; ++i) {
            CHECK(sample_camera(a).to_array() == sample_camera(b).to_array());
        }
    }
}

TEST_CASE("match simulation") {
    SimConfig cfg;
    cfg.seed = 9;
    cfg.duration_seconds = 20.0;
    const GroundTruth gt = simulate_match(cfg);

    SUBCASE("shape and identity bookkeeping") {
        CHECK(gt.identities.size() == 25);  // 2x11 + 3 referees
        CHECK(gt.positions.size() == 600);
        CHECK(gt.cameras.size() == 600);
        int keepers = 0, refs = 0;
        for (const auto& ident : gt.identities) {
            keepers += ident.role == Role::goalkeeper ? 1 : 0;
            refs += ident.role == Role::referee ? 1 : 0;
            if (ident.role == Role::referee) {
                CHECK(!ident.jersey.has_value());
            } else {
                CHECK(ident.jersey.has_value());
            }
        }
        CHECK(keepers == 2);
        CHECK(refs == 3);
    }
    SUBCASE("speed bound holds everywhere") {
        for (const auto& frame : gt.velocities) {
            for (const auto& v : frame) {
                CHECK(v.norm() <= cfg.max_speed + 1e-9);
            }
        }
    }
    SUBCASE("goalkeepers stay in their boxes at least 80% of frames") {
        const PitchModel model = standard_pitch();
        for (size_t i = 0; i < gt.identities.size(); ++i) {
            if (gt.identities[i].role != Role::goalkeeper) {
                continue;
            }
            int inside = 0;
            for (const auto& frame : gt.positions) {
                inside += in_penalty_area(frame[i], gt.identities[i].side, model) ? 1 : 0;
            }
            CHECK(inside >= static_cast<int>(0.8 * gt.positions.size()));
        }
    }
    SUBCASE("identical seeds give identical output") {
        const GroundTruth gt2 = simulate_match(cfg);
        CHECK(gt2.positions == gt.positions);
        for (size_t f = 0; f < gt.cameras.size(); ++f) {
            CHECK(gt2.cameras[f].to_array() == gt.cameras[f].to_array());
        }
    }
    SUBCASE("kit latents are mutually orthogonal") {
        // Collect the distinct team latents.
        std::vector<Eigen::VectorXd> kits;
        for (const auto& ident : gt.identities) {
            bool seen = false;
            for (const auto& k : kits) {
                if ((k - ident.team_latent).norm() < 1e-12) seen = true;
            }
            if (!seen) kits.push_back(ident.team_latent);
        }
        REQUIRE(kits.size() == 5);
        for (size_t a = 0; a < kits.size(); ++a) {
            for (size_t b = a + 1; b < kits.size(); ++b) {
                CHECK(std::abs(kits[a].dot(kits[b])) < 1e-9);
            }
        }
    }
}

TEST_CASE("rendering") {
    const PitchModel model = standard_pitch();
    SimConfig cfg;
    cfg.seed = 21;
    cfg.duration_seconds = 5.0;

    SUBCASE("zero noise lands detections exactly on the projected truth") {
        const GroundTruth gt = simulate_match(cfg);
        const Observations obs = render_observations(gt, model);
        REQUIRE(!obs.detections.empty());
        for (const auto& det : obs.detections) {
            // Identify the source by reid latent.
            int ident = -1;
            for (size_t i = 0; i < gt.identities.size(); ++i) {
                if ((det.reid - gt.identities[i].reid_latent).norm() < 1e-12) {
                    ident = static_cast<int>(i);
                    break;
                }
            }
            REQUIRE(ident >= 0);
            const Vec2 truth = gt.positions[det.frame][ident];
            const Vec2 feet(det.bbox[0] + det.bbox[2] / 2.0, det.bbox[1] + det.bbox[3]);
            const Vec3 back = pixel_to_pitch(gt.cameras[det.frame], feet, cfg.frame_width,
                                             cfg.frame_height);
            CHECK((Vec2(back.x(), back.y()) - truth).norm() < 1e-6);
            // Jersey reading decodes to the identity's number.
            if (gt.identities[ident].jersey) {
                int first = 0, second = 0;
                for (int i = 1; i < 10; ++i) {
                    if (det.jersey.first[i] > det.jersey.first[first]) first = i;
                    if (det.jersey.second[i] > det.jersey.second[second]) second = i;
                }
                const int number = first == 0 ? second : 10 * first + second;
                CHECK(number == *gt.identities[ident].jersey);
            }
        }
        // Initial cameras equal the truth at zero camera noise.
        for (size_t f = 0; f < obs.initial_cameras.size(); ++f) {
            CHECK(obs.initial_cameras[f].to_array() == gt.cameras[f].to_array());
        }
    }
    SUBCASE("full dropout empties the detection stream") {
        SimConfig wipe = cfg;
        wipe.noise.dropout = 1.0;
        const GroundTruth gt = simulate_match(wipe);
        const Observations obs = render_observations(gt, model);
        CHECK(obs.detections.empty());
        CHECK(!obs.keypoints[0].empty());  // keypoints are not subject to dropout
    }
    SUBCASE("noisy embeddings still classify to the nearest latent") {
        SimConfig noisy = cfg;
        noisy.noise.embedding_sigma = 0.05;
        const GroundTruth gt = simulate_match(noisy);
        const Observations obs = render_observations(gt, model);
        int correct = 0, total = 0;
        for (const auto& det : obs.detections) {
            int best = -1;
            double best_d = 1e9;
            for (size_t i = 0; i < gt.identities.size(); ++i) {
                const double d = (det.reid - gt.identities[i].reid_latent).norm();
                if (d < best_d) {
                    best_d = d;
                    best = static_cast<int>(i);
                }
            }
            const Vec2 feet(det.bbox[0] + det.bbox[2] / 2.0, det.bbox[1] + det.bbox[3]);
            const auto back = try_pixel_to_pitch(gt.cameras[det.frame], feet, cfg.frame_width,
                                                 cfg.frame_height);
            REQUIRE(back.has_value());
            const Vec2 truth = gt.positions[det.frame][best];
            correct += ((Vec2(back->x(), back->y()) - truth).norm() < 0.5) ? 1 : 0;
            ++total;
        }
        CHECK(total > 100);
        CHECK(correct >= static_cast<int>(0.99 * total));
    }
    SUBCASE("pixel noise is unbiased") {
        SimConfig noisy = cfg;
        noisy.seed = 33;
        noisy.duration_seconds = 20.0;
        noisy.noise.pixel_sigma = 2.0;
        const GroundTruth gt = simulate_match(noisy);
        const Observations obs = render_observations(gt, model);
        // Keypoint observations vs exact projections.
        double sum_dx = 0.0, sum_dy = 0.0;
        int n = 0;
        for (size_t f = 0; f < obs.keypoints.size(); ++f) {
            for (const auto& kp : obs.keypoints[f]) {
                const Vec2 exact = ndc_to_pixel(
                    world_to_ndc(gt.cameras[f], Vec3(model.keypoints[kp.idx].x(),
                                                     model.keypoints[kp.idx].y(), 0.0)),
                    noisy.frame_width, noisy.frame_height);
                sum_dx += kp.pixel.x() - exact.x();
                sum_dy += kp.pixel.y() - exact.y();
                ++n;
            }
        }
        REQUIRE(n > 10000);
        const double bound = 3.0 * 2.0 / std::sqrt(static_cast<double>(n));
        CHECK(std::abs(sum_dx / n) < bound);
        CHECK(std::abs(sum_dy / n) < bound);
    }
}

TEST_CASE("tracklet fragmentation") {
    SimConfig cfg;
    cfg.seed = 5;
    cfg.duration_seconds = 30.0;
    cfg.referees = 0;
    const GroundTruth gt = simulate_match(cfg);
    const auto perfect = perfect_tracklets(gt);
    REQUIRE(perfect.size() == 22);

    SUBCASE("one piece is the identity") {
        const auto out = fragment_tracklets(perfect, 1, 7);
        REQUIRE(out.size() == 22);
        for (size_t i = 0; i < out.size(); ++i) {
            CHECK(out[i].records.size() == perfect[i].records.size());
        }
    }
    SUBCASE("22 tracks x 10 pieces gives 220 tracklets") {
        const auto out = fragment_tracklets(perfect, 10, 7);
        CHECK(out.size() == 220);
        // Pieces of one track never overlap and drop one frame per cut.
        size_t total_records = 0;
        for (const auto& t : out) total_records += t.records.size();
        CHECK(total_records == 22 * (perfect[0].records.size() - 9));
    }
    SUBCASE("deterministic under the seed") {
        const auto a = fragment_tracklets(perfect, 10, 7);
        const auto b = fragment_tracklets(perfect, 10, 7);
        REQUIRE(a.size() == b.size());
        for (size_t i = 0; i < a.size(); ++i) {
            CHECK(a[i].start_frame() == b[i].start_frame());
            CHECK(a[i].records.size() == b[i].records.size());
        }
    }
    SUBCASE("more pieces than frames degrades gracefully") {
        Tracklet tiny;
        tiny.id = 1;
        for (int f = 0; f < 5; ++f) {
            TrackletRecord rec;
            rec.frame = f;
            tiny.records.push_back(rec);
        }
        const auto out = fragment_tracklets({tiny}, 100, 3);
        CHECK(out.size() == 3);  // (5+1)/2 pieces at most
    }
}

TEST_CASE("ground truth gamestate lists visible identities") {
    SimConfig cfg;
    cfg.seed = 13;
    cfg.duration_seconds = 5.0;
    const GroundTruth gt = simulate_match(cfg);
    const auto gs = ground_truth_gamestate(gt);
    REQUIRE(!gs.empty());
    // Every record's identity must project inside the frame.
    for (const auto& r : gs) {
        const Vec3 ndc = world_to_ndc(gt.cameras[r.frame], Vec3(r.pos.x(), r.pos.y(), 0.0));
        REQUIRE(ndc.z() > 0.0);
        const Vec2 px = ndc_to_pixel(ndc, cfg.frame_width, cfg.frame_height);
        CHECK(px.x() >= 0.0);
        CHECK(px.x() <= cfg.frame_width);
        CHECK(px.y() >= 0.0);
        CHECK(px.y() <= cfg.frame_height);
    }
    // With the zero-noise renderer, detections and gamestate agree in count.
    const Observations obs = render_observations(gt, standard_pitch());
    CHECK(obs.detections.size() == gs.size());
}
