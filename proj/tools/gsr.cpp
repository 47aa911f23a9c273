#include "gsr/pipeline.hpp"
#include "gsr/pitch.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace {

// Exit codes: 0 ok, 2 config error, 3 missing file, 4 schema violation,
// 5 other runtime failure.
constexpr int kExitConfig = 2;
constexpr int kExitMissing = 3;
constexpr int kExitSchema = 4;
constexpr int kExitRuntime = 5;

gsr::PipelineConfig load_or_default(const std::string& config_path, uint64_t seed_override,
                                    int threads_override, bool verbose) {
    gsr::PipelineConfig config;
    if (!config_path.empty()) {
        config = gsr::load_config(config_path);
        if (verbose) {
            std::cerr << "loaded config from " << config_path << "\n";
        }
    }
    if (seed_override != 0) {
        config.sim.seed = seed_override;
    }
    if (threads_override > 0) {
        config.threads = threads_override;
    }
    config.propagate();
    return config;
}

void print_scores(const gsr::EvalScores& s) {
    std::printf("GS-HOTA %.4f  GS-DetA %.4f  GS-AssA %.4f\n", s.gs_hota, s.gs_deta, s.gs_assa);
    for (const auto& t : s.per_threshold) {
        std::printf("  alpha %.2f  DetA %7.3f  AssA %7.3f  HOTA %7.3f\n", t.alpha, t.deta, t.assa,
                    t.hota);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Game-state reconstruction pipeline for broadcast football"};
    app.require_subcommand(1);

    std::string config_path;
    uint64_t seed = 0;
    int threads = 0;
    bool verbose = false;
    app.add_option("--config", config_path, "pipeline config JSON");
    app.add_option("--seed", seed, "override sim.seed");
    app.add_option("--threads", threads, "worker threads for refinement (0 = hardware)");
    app.add_flag("--verbose", verbose, "chatty stderr");

    auto* synth = app.add_subcommand("synth", "generate a synthetic clip with ground truth");
    std::string synth_out;
    synth->add_option("--out", synth_out, "output directory")->required();

    auto* calibrate = app.add_subcommand("calibrate", "refine and smooth camera parameters");
    std::string cal_kps, cal_cam, cal_out;
    calibrate->add_option("--keypoints", cal_kps, "keypoints.jsonl")->required();
    calibrate->add_option("--camera", cal_cam, "initial camera.jsonl")->required();
    calibrate->add_option("--out", cal_out, "refined camera output")->required();

    auto* track = app.add_subcommand("track", "raw tracking in pitch coordinates");
    std::string trk_dets, trk_cam, trk_out;
    track->add_option("--detections", trk_dets, "detections.jsonl")->required();
    track->add_option("--camera", trk_cam, "refined camera.jsonl")->required();
    track->add_option("--out", trk_out, "tracklets output")->required();

    auto* teams = app.add_subcommand("teams", "estimate kit clusters and team sides");
    std::string tm_tracklets, tm_cam, tm_out;
    teams->add_option("--tracklets", tm_tracklets, "tracklets.jsonl")->required();
    teams->add_option("--camera", tm_cam, "camera.jsonl (enables the pan-based fallback)");
    teams->add_option("--out", tm_out, "clusters output")->required();

    auto* post = app.add_subcommand("postprocess", "split/merge tracklets into the game state");
    std::string pp_tracklets, pp_clusters, pp_out, pp_cam;
    post->add_option("--tracklets", pp_tracklets, "tracklets.jsonl")->required();
    post->add_option("--clusters", pp_clusters, "clusters.json")->required();
    post->add_option("--camera", pp_cam, "camera.jsonl (drops records the camera cannot see)");
    post->add_option("--out", pp_out, "gamestate output")->required();

    auto* eval = app.add_subcommand("eval", "score a prediction with GS-HOTA");
    std::string ev_gt, ev_pred, ev_out;
    eval->add_option("--gt", ev_gt, "ground-truth gamestate.jsonl")->required();
    eval->add_option("--pred", ev_pred, "predicted gamestate.jsonl")->required();
    eval->add_option("--out", ev_out, "scores.json")->required();

    auto* run_all = app.add_subcommand("run-all", "full pipeline over a dataset directory");
    std::string ra_in, ra_out;
    run_all->add_option("--in", ra_in, "dataset directory (from synth)")->required();
    run_all->add_option("--out", ra_out, "output directory")->required();

    auto* render = app.add_subcommand("render", "SVG minimap per frame");
    std::string rd_gamestate, rd_out, rd_frames = "0:0";
    render->add_option("--gamestate", rd_gamestate, "gamestate.jsonl")->required();
    render->add_option("--out", rd_out, "output directory")->required();
    render->add_option("--frames", rd_frames, "frame range first:last");

    auto* pitch_cmd = app.add_subcommand("pitch", "dump the canonical pitch model");
    std::string pitch_out;
    pitch_cmd->add_option("--out", pitch_out, "pitch model JSON")->required();

    auto* config_cmd = app.add_subcommand("config", "dump the default config with every knob");
    std::string config_out;
    config_cmd->add_option("--out", config_out, "config JSON path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        const gsr::PipelineConfig config = load_or_default(config_path, seed, threads, verbose);

        if (synth->parsed()) {
            gsr::stage_synth(config, synth_out);
            if (verbose) std::cerr << "synthetic clip written to " << synth_out << "\n";
        } else if (calibrate->parsed()) {
            gsr::stage_calibrate(config, cal_kps, cal_cam, cal_out);
        } else if (track->parsed()) {
            gsr::stage_track(config, trk_dets, trk_cam, trk_out);
        } else if (teams->parsed()) {
            std::optional<std::filesystem::path> cam;
            if (!tm_cam.empty()) cam = tm_cam;
            gsr::stage_teams(config, tm_tracklets, cam, tm_out);
        } else if (post->parsed()) {
            std::optional<std::filesystem::path> cam;
            if (!pp_cam.empty()) cam = pp_cam;
            gsr::stage_postprocess(config, pp_tracklets, pp_clusters, pp_out, cam);
        } else if (eval->parsed()) {
            print_scores(gsr::stage_eval(config, ev_gt, ev_pred, ev_out));
        } else if (run_all->parsed()) {
            const auto scores = gsr::stage_run_all(config, ra_in, ra_out);
            if (scores) {
                print_scores(*scores);
            } else if (verbose) {
                std::cerr << "no gt_gamestate.jsonl in " << ra_in << ", skipping eval\n";
            }
        } else if (render->parsed()) {
            int first = 0, last = 0;
            if (std::sscanf(rd_frames.c_str(), "%d:%d", &first, &last) != 2) {
                throw gsr::ConfigError("--frames must be first:last");
            }
            gsr::stage_render(rd_gamestate, rd_out, first, last);
        } else if (pitch_cmd->parsed()) {
            std::ofstream f(pitch_out);
            if (!f) throw std::runtime_error("cannot write " + pitch_out);
            f << gsr::pitch_to_json(gsr::standard_pitch());
        } else if (config_cmd->parsed()) {
            std::ofstream f(config_out);
            if (!f) throw std::runtime_error("cannot write " + config_out);
            f << gsr::config_to_json_text(config);
        }
    } catch (const gsr::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const gsr::MissingFileError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitMissing;
    } catch (const gsr::SchemaError& e) {
        std::cerr << "schema violation: " << e.what() << "\n";
        return kExitSchema;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return 0;
}
