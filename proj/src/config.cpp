#include "gsr/config.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace gsr {

namespace {

using nlohmann::json;

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    for (const auto& [key, value] : j.items()) {
        if (!allowed.count(key)) {
            throw ConfigError("unknown config key '" + where + key + "'");
        }
    }
}

double num(const json& j, const char* key, double fallback) {
    return j.contains(key) ? j.at(key).get<double>() : fallback;
}

int integer(const json& j, const char* key, int fallback) {
    return j.contains(key) ? j.at(key).get<int>() : fallback;
}

bool boolean(const json& j, const char* key, bool fallback) {
    return j.contains(key) ? j.at(key).get<bool>() : fallback;
}

std::vector<double> num_list(const json& j, const char* key, std::vector<double> fallback) {
    if (!j.contains(key)) {
        return fallback;
    }
    return j.at(key).get<std::vector<double>>();
}

}  // namespace

void PipelineConfig::propagate() {
    refinement.frame_width = frame_width;
    refinement.frame_height = frame_height;
    teams.fps = fps;
    postprocess.merge.fps = fps;
    sim.fps = fps;
    sim.frame_width = frame_width;
    sim.frame_height = frame_height;
}

PipelineConfig config_from_json_text(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) {
        throw ConfigError("config is not valid JSON");
    }
    check_keys(j, {"fps", "frame_width", "frame_height", "threads", "refinement", "smoother",
                   "tracker", "teams", "postprocess", "sim", "eval"},
               "");

    PipelineConfig c;
    c.fps = num(j, "fps", c.fps);
    c.frame_width = num(j, "frame_width", c.frame_width);
    c.frame_height = num(j, "frame_height", c.frame_height);
    c.threads = integer(j, "threads", c.threads);

    if (j.contains("refinement")) {
        const json& r = j.at("refinement");
        check_keys(r, {"angle_deltas", "position_deltas", "max_sweeps", "outlier_threshold",
                       "projection_penalty"},
                   "refinement.");
        c.refinement.angle_deltas = num_list(r, "angle_deltas", c.refinement.angle_deltas);
        c.refinement.position_deltas = num_list(r, "position_deltas", c.refinement.position_deltas);
        c.refinement.max_sweeps = integer(r, "max_sweeps", c.refinement.max_sweeps);
        c.refinement.outlier_threshold = num(r, "outlier_threshold", c.refinement.outlier_threshold);
        c.refinement.projection_penalty = num(r, "projection_penalty", c.refinement.projection_penalty);
        for (const auto& deltas : {c.refinement.angle_deltas, c.refinement.position_deltas}) {
            if (std::find(deltas.begin(), deltas.end(), 0.0) == deltas.end()) {
                throw ConfigError("refinement delta sets must contain 0");
            }
        }
    }
    if (j.contains("smoother")) {
        const json& s = j.at("smoother");
        check_keys(s, {"window", "order", "angle_clamp", "position_clamp", "delay"}, "smoother.");
        c.smoother.window = integer(s, "window", c.smoother.window);
        c.smoother.order = integer(s, "order", c.smoother.order);
        c.smoother.angle_clamp = num(s, "angle_clamp", c.smoother.angle_clamp);
        c.smoother.position_clamp = num(s, "position_clamp", c.smoother.position_clamp);
        c.smoother.delay = integer(s, "delay", c.smoother.delay);
        if (c.smoother.window % 2 == 0 || c.smoother.window <= c.smoother.order) {
            throw ConfigError("smoother window must be odd and exceed the order");
        }
    }
    if (j.contains("tracker")) {
        const json& t = j.at("tracker");
        check_keys(t, {"process_noise", "measurement_noise", "pixel_noise_px",
                       "initial_velocity_std", "gate", "appearance_weight", "max_misses",
                       "confirm_hits", "gallery_size", "team_gate", "orientation_gate", "spawn_gate",
                       "spawn_appearance_gate"},
                   "tracker.");
        c.tracker.process_noise = num(t, "process_noise", c.tracker.process_noise);
        c.tracker.measurement_noise = num(t, "measurement_noise", c.tracker.measurement_noise);
        c.tracker.pixel_noise_px = num(t, "pixel_noise_px", c.tracker.pixel_noise_px);
        c.tracker.initial_velocity_std = num(t, "initial_velocity_std", c.tracker.initial_velocity_std);
        c.tracker.gate = num(t, "gate", c.tracker.gate);
        c.tracker.appearance_weight = num(t, "appearance_weight", c.tracker.appearance_weight);
        c.tracker.max_misses = integer(t, "max_misses", c.tracker.max_misses);
        c.tracker.confirm_hits = integer(t, "confirm_hits", c.tracker.confirm_hits);
        c.tracker.gallery_size = integer(t, "gallery_size", c.tracker.gallery_size);
        c.tracker.team_gate = num(t, "team_gate", c.tracker.team_gate);
        c.tracker.orientation_gate = boolean(t, "orientation_gate", c.tracker.orientation_gate);
        c.tracker.spawn_gate = num(t, "spawn_gate", c.tracker.spawn_gate);
        c.tracker.spawn_appearance_gate =
            num(t, "spawn_appearance_gate", c.tracker.spawn_appearance_gate);
    }
    if (j.contains("teams")) {
        const json& t = j.at("teams");
        check_keys(t, {"central_x", "exclusion_threshold", "vote_stride", "fallback_pan_threshold",
                       "fallback_min_seconds", "max_iterations"},
                   "teams.");
        c.teams.central_x = num(t, "central_x", c.teams.central_x);
        c.teams.exclusion_threshold = num(t, "exclusion_threshold", c.teams.exclusion_threshold);
        c.teams.vote_stride = integer(t, "vote_stride", c.teams.vote_stride);
        c.teams.fallback_pan_threshold = num(t, "fallback_pan_threshold", c.teams.fallback_pan_threshold);
        c.teams.fallback_min_seconds = num(t, "fallback_min_seconds", c.teams.fallback_min_seconds);
        c.teams.max_iterations = integer(t, "max_iterations", c.teams.max_iterations);
    }
    if (j.contains("postprocess")) {
        const json& p = j.at("postprocess");
        check_keys(p, {"max_speed", "mean_threshold", "pairwise_threshold", "max_gap",
                       "jersey_floor", "jersey_winner_mass", "jersey_min_count", "jersey_denoise_max_run",
                       "drop_ball"},
                   "postprocess.");
        c.postprocess.merge.max_speed = num(p, "max_speed", c.postprocess.merge.max_speed);
        c.postprocess.merge.mean_threshold = num(p, "mean_threshold", c.postprocess.merge.mean_threshold);
        c.postprocess.merge.pairwise_threshold =
            num(p, "pairwise_threshold", c.postprocess.merge.pairwise_threshold);
        c.postprocess.merge.max_gap = integer(p, "max_gap", c.postprocess.merge.max_gap);
        c.postprocess.jersey.floor = num(p, "jersey_floor", c.postprocess.jersey.floor);
        c.postprocess.jersey.winner_mass = num(p, "jersey_winner_mass", c.postprocess.jersey.winner_mass);
        c.postprocess.jersey.min_count = integer(p, "jersey_min_count", c.postprocess.jersey.min_count);
        c.postprocess.jersey.denoise_max_run =
            integer(p, "jersey_denoise_max_run", c.postprocess.jersey.denoise_max_run);
        c.postprocess.drop_ball = boolean(p, "drop_ball", c.postprocess.drop_ball);
    }
    if (j.contains("sim")) {
        const json& s = j.at("sim");
        check_keys(s, {"seed", "duration_seconds", "players_per_team", "referees", "reid_dim",
                       "team_dim", "max_speed", "noise"},
                   "sim.");
        c.sim.seed = s.contains("seed") ? s.at("seed").get<uint64_t>() : c.sim.seed;
        c.sim.duration_seconds = num(s, "duration_seconds", c.sim.duration_seconds);
        c.sim.players_per_team = integer(s, "players_per_team", c.sim.players_per_team);
        c.sim.referees = integer(s, "referees", c.sim.referees);
        c.sim.reid_dim = integer(s, "reid_dim", c.sim.reid_dim);
        c.sim.team_dim = integer(s, "team_dim", c.sim.team_dim);
        c.sim.max_speed = num(s, "max_speed", c.sim.max_speed);
        if (s.contains("noise")) {
            const json& n = s.at("noise");
            check_keys(n, {"pixel_sigma", "embedding_sigma", "jersey_confusion", "dropout", "camera"},
                       "sim.noise.");
            c.sim.noise.pixel_sigma = num(n, "pixel_sigma", c.sim.noise.pixel_sigma);
            c.sim.noise.embedding_sigma = num(n, "embedding_sigma", c.sim.noise.embedding_sigma);
            c.sim.noise.jersey_confusion = num(n, "jersey_confusion", c.sim.noise.jersey_confusion);
            c.sim.noise.dropout = num(n, "dropout", c.sim.noise.dropout);
            for (double rate : {c.sim.noise.jersey_confusion, c.sim.noise.dropout}) {
                if (rate < 0.0 || rate > 1.0) {
                    throw ConfigError("sim noise rates must lie in [0,1]");
                }
            }
            if (n.contains("camera")) {
                const json& cam = n.at("camera");
                check_keys(cam, {"angle_sigma", "fov_sigma", "position_sigma"}, "sim.noise.camera.");
                c.sim.noise.camera.angle_sigma = num(cam, "angle_sigma", c.sim.noise.camera.angle_sigma);
                c.sim.noise.camera.fov_sigma = num(cam, "fov_sigma", c.sim.noise.camera.fov_sigma);
                c.sim.noise.camera.position_sigma =
                    num(cam, "position_sigma", c.sim.noise.camera.position_sigma);
            }
        }
    }
    if (j.contains("eval")) {
        const json& e = j.at("eval");
        check_keys(e, {"tolerance", "exclude_other_roles"}, "eval.");
        c.eval.tolerance = num(e, "tolerance", c.eval.tolerance);
        c.eval.exclude_other_roles = boolean(e, "exclude_other_roles", c.eval.exclude_other_roles);
    }

    c.propagate();
    return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) {
        throw ConfigError("cannot open config file: " + path.string());
    }
    std::stringstream buf;
    buf << f.rdbuf();
    return config_from_json_text(buf.str());
}

std::string config_to_json_text(const PipelineConfig& c) {
    json j;
    j["fps"] = c.fps;
    j["frame_width"] = c.frame_width;
    j["frame_height"] = c.frame_height;
    j["threads"] = c.threads;
    j["refinement"] = {
        {"angle_deltas", c.refinement.angle_deltas},
        {"position_deltas", c.refinement.position_deltas},
        {"max_sweeps", c.refinement.max_sweeps},
        {"outlier_threshold", c.refinement.outlier_threshold},
        {"projection_penalty", c.refinement.projection_penalty},
    };
    j["smoother"] = {
        {"window", c.smoother.window},
        {"order", c.smoother.order},
        {"angle_clamp", c.smoother.angle_clamp},
        {"position_clamp", c.smoother.position_clamp},
        {"delay", c.smoother.delay},
    };
    j["tracker"] = {
        {"process_noise", c.tracker.process_noise},
        {"measurement_noise", c.tracker.measurement_noise},
        {"pixel_noise_px", c.tracker.pixel_noise_px},
        {"initial_velocity_std", c.tracker.initial_velocity_std},
        {"gate", c.tracker.gate},
        {"appearance_weight", c.tracker.appearance_weight},
        {"max_misses", c.tracker.max_misses},
        {"confirm_hits", c.tracker.confirm_hits},
        {"gallery_size", c.tracker.gallery_size},
        {"team_gate", c.tracker.team_gate},
        {"orientation_gate", c.tracker.orientation_gate},
        {"spawn_gate", c.tracker.spawn_gate},
        {"spawn_appearance_gate", c.tracker.spawn_appearance_gate},
    };
    j["teams"] = {
        {"central_x", c.teams.central_x},
        {"exclusion_threshold", c.teams.exclusion_threshold},
        {"vote_stride", c.teams.vote_stride},
        {"fallback_pan_threshold", c.teams.fallback_pan_threshold},
        {"fallback_min_seconds", c.teams.fallback_min_seconds},
        {"max_iterations", c.teams.max_iterations},
    };
    j["postprocess"] = {
        {"max_speed", c.postprocess.merge.max_speed},
        {"mean_threshold", c.postprocess.merge.mean_threshold},
        {"pairwise_threshold", c.postprocess.merge.pairwise_threshold},
        {"max_gap", c.postprocess.merge.max_gap},
        {"jersey_floor", c.postprocess.jersey.floor},
        {"jersey_winner_mass", c.postprocess.jersey.winner_mass},
        {"jersey_min_count", c.postprocess.jersey.min_count},
        {"jersey_denoise_max_run", c.postprocess.jersey.denoise_max_run},
        {"drop_ball", c.postprocess.drop_ball},
    };
    j["sim"] = {
        {"seed", c.sim.seed},
        {"duration_seconds", c.sim.duration_seconds},
        {"players_per_team", c.sim.players_per_team},
        {"referees", c.sim.referees},
        {"reid_dim", c.sim.reid_dim},
        {"team_dim", c.sim.team_dim},
        {"max_speed", c.sim.max_speed},
        {"noise",
         {
             {"pixel_sigma", c.sim.noise.pixel_sigma},
             {"embedding_sigma", c.sim.noise.embedding_sigma},
             {"jersey_confusion", c.sim.noise.jersey_confusion},
             {"dropout", c.sim.noise.dropout},
             {"camera",
              {
                  {"angle_sigma", c.sim.noise.camera.angle_sigma},
                  {"fov_sigma", c.sim.noise.camera.fov_sigma},
                  {"position_sigma", c.sim.noise.camera.position_sigma},
              }},
         }},
    };
    j["eval"] = {
        {"tolerance", c.eval.tolerance},
        {"exclude_other_roles", c.eval.exclude_other_roles},
    };
    return j.dump(2) + "\n";
}

}  // namespace gsr
