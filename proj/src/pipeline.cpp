#include "gsr/pipeline.hpp"

#include "gsr/pitch.hpp"
#include "gsr/postprocess.hpp"
#include "gsr/synthetic.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <future>
#include <map>
#include <thread>

namespace gsr {

namespace fs = std::filesystem;

std::vector<CameraParams> refine_sequence(const PipelineConfig& config,
                                          const std::vector<CameraParams>& initial,
                                          const std::vector<std::vector<DetectedKeypoint>>& keypoints,
                                          const PitchModel& model) {
    if (initial.size() != keypoints.size()) {
        throw std::invalid_argument("camera and keypoint streams disagree on frame count");
    }
    const int n = static_cast<int>(initial.size());
    std::vector<CameraParams> refined(n);

    int workers = config.threads > 0 ? config.threads
                                     : static_cast<int>(std::thread::hardware_concurrency());
    workers = std::max(1, std::min(workers, n == 0 ? 1 : n));

    // Frames are independent; a blocked range per worker keeps the result
    // deterministic regardless of the worker count.
    std::vector<std::future<void>> futures;
    std::atomic<int> next_block{0};
    const int block = 16;
    auto worker = [&]() {
        while (true) {
            const int b = next_block.fetch_add(1);
            const int lo = b * block;
            if (lo >= n) {
                break;
            }
            const int hi = std::min(n, lo + block);
            for (int f = lo; f < hi; ++f) {
                refined[f] = refine_params(initial[f], keypoints[f], model, config.refinement);
            }
        }
    };
    for (int w = 0; w < workers; ++w) {
        futures.push_back(std::async(std::launch::async, worker));
    }
    for (auto& f : futures) {
        f.get();
    }
    return smooth_sequence(refined, config.smoother);
}

std::vector<Tracklet> track_detections(const PipelineConfig& config,
                                       const std::vector<Detection>& dets,
                                       const std::vector<CameraParams>& cameras) {
    // Group by frame; every camera frame is stepped even when empty so track
    // ages advance correctly.
    std::vector<std::vector<Detection>> frames(cameras.size());
    for (const auto& d : dets) {
        if (d.frame < 0 || d.frame >= static_cast<int>(cameras.size())) {
            continue;
        }
        frames[d.frame].push_back(d);
    }

    Tracker tracker(config.tracker);
    const double dt = 1.0 / config.fps;
    std::vector<TrackRecord> records;
    for (size_t f = 0; f < frames.size(); ++f) {
        auto frame_dets = filter_anomalies(frames[f]);
        // Pitch coordinates from the bbox bottom centre through the camera.
        std::vector<Detection> usable;
        usable.reserve(frame_dets.size());
        for (auto& d : frame_dets) {
            const Vec2 feet(d.bbox[0] + d.bbox[2] / 2.0, d.bbox[1] + d.bbox[3]);
            const auto hit =
                try_pixel_to_pitch(cameras[f], feet, config.frame_width, config.frame_height);
            if (!hit) {
                continue;  // above the horizon under this camera
            }
            d.pitch_pos = Vec2(hit->x(), hit->y());
            // Ground footprint of one pixel at this range scales the
            // measurement noise the tracker assumes for the detection.
            const auto step_x = try_pixel_to_pitch(cameras[f], feet + Vec2(1.0, 0.0),
                                                   config.frame_width, config.frame_height);
            const auto step_y = try_pixel_to_pitch(cameras[f], feet + Vec2(0.0, 1.0),
                                                   config.frame_width, config.frame_height);
            double footprint = 0.0;
            if (step_x) footprint = std::max(footprint, (*step_x - *hit).norm());
            if (step_y) footprint = std::max(footprint, (*step_y - *hit).norm());
            d.pos_sigma = config.tracker.pixel_noise_px * footprint;
            usable.push_back(std::move(d));
        }
        const auto emitted = tracker.step(usable, dt);
        records.insert(records.end(), emitted.begin(), emitted.end());
    }
    return build_tracklets(records);
}

void stage_synth(const PipelineConfig& config, const fs::path& out_dir) {
    fs::create_directories(out_dir);
    const PitchModel model = standard_pitch();
    const GroundTruth gt = simulate_match(config.sim);
    const Observations obs = render_observations(gt, model);
    write_detections(out_dir / "detections.jsonl", obs.detections);
    write_keypoints(out_dir / "keypoints.jsonl", obs.keypoints);
    write_cameras(out_dir / "camera.jsonl", obs.initial_cameras, false);
    write_gamestate(out_dir / "gt_gamestate.jsonl", ground_truth_gamestate(gt));
}

void stage_calibrate(const PipelineConfig& config, const fs::path& keypoints_in,
                     const fs::path& camera_in, const fs::path& camera_out) {
    const auto keypoints = read_keypoints(keypoints_in);
    const auto cameras = read_cameras(camera_in);
    const PitchModel model = standard_pitch();
    const auto refined = refine_sequence(config, cameras, keypoints, model);
    write_cameras(camera_out, refined, true);
}

void stage_track(const PipelineConfig& config, const fs::path& detections_in,
                 const fs::path& camera_in, const fs::path& tracklets_out) {
    const auto dets = read_detections(detections_in);
    const auto cameras = read_cameras(camera_in);
    const auto tracklets = track_detections(config, dets, cameras);
    write_tracklets(tracklets_out, tracklets);
}

void stage_teams(const PipelineConfig& config, const fs::path& tracklets_in,
                 const std::optional<fs::path>& camera_in, const fs::path& clusters_out) {
    const auto tracklets = read_tracklets(tracklets_in);
    std::vector<CameraParams> cameras;
    if (camera_in) {
        cameras = read_cameras(*camera_in);
    }
    const PitchModel model = standard_pitch();
    const auto samples = collect_samples(tracklets);
    const ClusterSet clusters = estimate_clusters(samples, cameras, model, config.teams);
    std::vector<TeamAssignment> assignments;
    for (const auto& t : tracklets) {
        if (t.role == Role::other) {
            assignments.push_back({t.id, Role::other, Side::none});
            continue;
        }
        const auto [role, side] = assign_tracklet(t, clusters);
        assignments.push_back({t.id, role, side});
    }
    write_clusters(clusters_out, clusters, assignments);
}

void stage_postprocess(const PipelineConfig& config, const fs::path& tracklets_in,
                       const fs::path& clusters_in, const fs::path& gamestate_out,
                       const std::optional<fs::path>& camera_in) {
    const auto tracklets = read_tracklets(tracklets_in);
    const auto [clusters, assignments] = read_clusters(clusters_in);
    const auto merged = postprocess(tracklets, clusters, config.postprocess);
    auto records = to_gamestate(merged);
    if (camera_in) {
        const auto cameras = read_cameras(*camera_in);
        std::vector<GsRecord> visible;
        visible.reserve(records.size());
        for (const auto& r : records) {
            if (r.frame < 0 || r.frame >= static_cast<int>(cameras.size())) {
                continue;
            }
            const Vec3 ndc = world_to_ndc(cameras[r.frame], Vec3(r.pos.x(), r.pos.y(), 0.0));
            if (ndc.z() <= 0.0) {
                continue;
            }
            const Vec2 px = ndc_to_pixel(ndc, config.frame_width, config.frame_height);
            if (px.x() < 0.0 || px.x() > config.frame_width || px.y() < 0.0 ||
                px.y() > config.frame_height) {
                continue;
            }
            visible.push_back(r);
        }
        records = std::move(visible);
    }
    write_gamestate(gamestate_out, records);
}

EvalScores stage_eval(const PipelineConfig& config, const fs::path& gt_in, const fs::path& pred_in,
                      const fs::path& scores_out) {
    const auto gt = read_gamestate(gt_in);
    const auto pred = read_gamestate(pred_in);
    const EvalScores scores = gs_hota(gt, pred, config.eval);
    write_scores(scores_out, scores);
    return scores;
}

std::optional<EvalScores> stage_run_all(const PipelineConfig& config, const fs::path& in_dir,
                                        const fs::path& out_dir) {
    fs::create_directories(out_dir);
    stage_calibrate(config, in_dir / "keypoints.jsonl", in_dir / "camera.jsonl",
                    out_dir / "camera_refined.jsonl");
    stage_track(config, in_dir / "detections.jsonl", out_dir / "camera_refined.jsonl",
                out_dir / "tracklets.jsonl");
    stage_teams(config, out_dir / "tracklets.jsonl", out_dir / "camera_refined.jsonl",
                out_dir / "clusters.json");
    stage_postprocess(config, out_dir / "tracklets.jsonl", out_dir / "clusters.json",
                      out_dir / "gamestate.jsonl", out_dir / "camera_refined.jsonl");
    const fs::path gt = in_dir / "gt_gamestate.jsonl";
    if (fs::exists(gt)) {
        return stage_eval(config, gt, out_dir / "gamestate.jsonl", out_dir / "scores.json");
    }
    return std::nullopt;
}

void stage_render(const fs::path& gamestate_in, const fs::path& out_dir, int first, int last) {
    const auto records = read_gamestate(gamestate_in);
    fs::create_directories(out_dir);
    const PitchModel model = standard_pitch();
    std::map<int, std::vector<GsRecord>> frames;
    for (const auto& r : records) {
        frames[r.frame].push_back(r);
    }
    for (const auto& [frame, list] : frames) {
        if (frame < first || frame > last) {
            continue;
        }
        char name[32];
        std::snprintf(name, sizeof(name), "frame_%06d.svg", frame);
        std::ofstream f(out_dir / name);
        f << render_minimap_svg(model, list);
    }
}

}  // namespace gsr
