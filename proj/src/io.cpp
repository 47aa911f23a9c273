#include "gsr/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace gsr {

namespace {

using nlohmann::json;

std::string jersey_key_first(int i) { return i == 0 ? "none" : std::to_string(i); }

void append_double(std::string& out, double v) { out += format_double(v); }

void append_vector(std::string& out, const Eigen::VectorXd& v) {
    out += '[';
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        append_double(out, v(i));
    }
    out += ']';
}

void append_jersey(std::string& out, const JerseyReading& j) {
    out += "\"jersey_first\":{";
    for (int i = 0; i < 10; ++i) {
        if (i) out += ',';
        out += '"';
        out += jersey_key_first(i);
        out += "\":";
        append_double(out, j.first[i]);
    }
    out += "},\"jersey_second\":{";
    for (int i = 0; i < 10; ++i) {
        if (i) out += ',';
        out += '"';
        out += std::to_string(i);
        out += "\":";
        append_double(out, j.second[i]);
    }
    out += '}';
}

void atomic_write(const std::filesystem::path& path, const std::string& content) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) {
            throw std::runtime_error("cannot open for writing: " + tmp.string());
        }
        f << content;
    }
    std::filesystem::rename(tmp, path);
}

std::vector<std::pair<int, json>> read_jsonl(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) {
        throw MissingFileError(path.string());
    }
    std::vector<std::pair<int, json>> lines;
    std::string line;
    int number = 0;
    while (std::getline(f, line)) {
        ++number;
        if (line.empty()) {
            continue;
        }
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded()) {
            throw SchemaError(path.string(), number, "malformed JSON");
        }
        lines.emplace_back(number, std::move(j));
    }
    return lines;
}

double require_number(const json& j, const char* key, const std::string& file, int line) {
    if (!j.contains(key) || !j.at(key).is_number()) {
        throw SchemaError(file, line, std::string("missing or non-numeric field '") + key + "'");
    }
    return j.at(key).get<double>();
}

std::string require_string(const json& j, const char* key, const std::string& file, int line) {
    if (!j.contains(key) || !j.at(key).is_string()) {
        throw SchemaError(file, line, std::string("missing or non-string field '") + key + "'");
    }
    return j.at(key).get<std::string>();
}

Eigen::VectorXd require_unit_vector(const json& j, const char* key, const std::string& file,
                                    int line) {
    if (!j.contains(key) || !j.at(key).is_array() || j.at(key).empty()) {
        throw SchemaError(file, line, std::string("missing or empty embedding '") + key + "'");
    }
    const auto& arr = j.at(key);
    Eigen::VectorXd v(arr.size());
    for (size_t i = 0; i < arr.size(); ++i) {
        if (!arr[i].is_number()) {
            throw SchemaError(file, line, std::string("non-numeric entry in '") + key + "'");
        }
        v(static_cast<Eigen::Index>(i)) = arr[i].get<double>();
    }
    if (std::abs(v.norm() - 1.0) > 1e-6) {
        throw SchemaError(file, line, std::string("embedding '") + key + "' is not unit norm");
    }
    return v;
}

JerseyReading require_jersey(const json& j, const std::string& file, int line) {
    JerseyReading r;
    if (!j.contains("jersey_first") || !j.contains("jersey_second")) {
        throw SchemaError(file, line, "missing jersey head distributions");
    }
    double sum_first = 0.0, sum_second = 0.0;
    for (int i = 0; i < 10; ++i) {
        const std::string kf = jersey_key_first(i);
        const std::string ks = std::to_string(i);
        if (!j.at("jersey_first").contains(kf) || !j.at("jersey_second").contains(ks)) {
            throw SchemaError(file, line, "incomplete jersey head distribution");
        }
        r.first[i] = j.at("jersey_first").at(kf).get<double>();
        r.second[i] = j.at("jersey_second").at(ks).get<double>();
        sum_first += r.first[i];
        sum_second += r.second[i];
    }
    if (std::abs(sum_first - 1.0) > 1e-6 || std::abs(sum_second - 1.0) > 1e-6) {
        throw SchemaError(file, line, "jersey head distribution does not sum to 1");
    }
    return r;
}

}  // namespace

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_detections(const std::filesystem::path& path, const std::vector<Detection>& dets) {
    std::string out;
    out.reserve(dets.size() * 512);
    for (const auto& d : dets) {
        out += "{\"frame\":" + std::to_string(d.frame) + ",\"bbox\":[";
        for (int i = 0; i < 4; ++i) {
            if (i) out += ',';
            append_double(out, d.bbox[i]);
        }
        out += "],\"class\":\"";
        out += d.cls == DetClass::ball ? "ball" : "athlete";
        out += "\",\"conf\":";
        append_double(out, d.conf);
        out += ",\"reid\":";
        append_vector(out, d.reid);
        out += ",\"team\":";
        append_vector(out, d.team);
        out += ',';
        append_jersey(out, d.jersey);
        out += ",\"orient\":\"";
        out += to_string(d.orient);
        out += "\",\"anomaly\":";
        out += d.anomaly ? "true" : "false";
        out += "}\n";
    }
    atomic_write(path, out);
}

std::vector<Detection> read_detections(const std::filesystem::path& path) {
    std::vector<Detection> dets;
    for (const auto& [line, j] : read_jsonl(path)) {
        Detection d;
        d.frame = static_cast<int>(require_number(j, "frame", path.string(), line));
        if (!j.contains("bbox") || !j.at("bbox").is_array() || j.at("bbox").size() != 4) {
            throw SchemaError(path.string(), line, "bbox must be [x,y,w,h]");
        }
        for (int i = 0; i < 4; ++i) {
            d.bbox[i] = j.at("bbox")[i].get<double>();
        }
        const std::string cls = require_string(j, "class", path.string(), line);
        if (cls == "athlete") {
            d.cls = DetClass::athlete;
        } else if (cls == "ball") {
            d.cls = DetClass::ball;
        } else {
            throw SchemaError(path.string(), line, "unknown class: " + cls);
        }
        d.conf = require_number(j, "conf", path.string(), line);
        if (d.conf < 0.0 || d.conf > 1.0) {
            throw SchemaError(path.string(), line, "conf outside [0,1]");
        }
        d.reid = require_unit_vector(j, "reid", path.string(), line);
        d.team = require_unit_vector(j, "team", path.string(), line);
        d.jersey = require_jersey(j, path.string(), line);
        try {
            d.orient = orientation_from_string(require_string(j, "orient", path.string(), line));
        } catch (const std::invalid_argument& e) {
            throw SchemaError(path.string(), line, e.what());
        }
        if (!j.contains("anomaly") || !j.at("anomaly").is_boolean()) {
            throw SchemaError(path.string(), line, "missing boolean field 'anomaly'");
        }
        d.anomaly = j.at("anomaly").get<bool>();
        dets.push_back(std::move(d));
    }
    return dets;
}

void write_keypoints(const std::filesystem::path& path,
                     const std::vector<std::vector<DetectedKeypoint>>& frames) {
    std::string out;
    for (size_t f = 0; f < frames.size(); ++f) {
        out += "{\"frame\":" + std::to_string(f) + ",\"points\":[";
        for (size_t k = 0; k < frames[f].size(); ++k) {
            if (k) out += ',';
            const auto& kp = frames[f][k];
            out += "{\"idx\":" + std::to_string(kp.idx) + ",\"x\":";
            append_double(out, kp.pixel.x());
            out += ",\"y\":";
            append_double(out, kp.pixel.y());
            out += ",\"conf\":";
            append_double(out, kp.conf);
            out += '}';
        }
        out += "]}\n";
    }
    atomic_write(path, out);
}

std::vector<std::vector<DetectedKeypoint>> read_keypoints(const std::filesystem::path& path) {
    std::vector<std::vector<DetectedKeypoint>> frames;
    for (const auto& [line, j] : read_jsonl(path)) {
        const int frame = static_cast<int>(require_number(j, "frame", path.string(), line));
        if (frame != static_cast<int>(frames.size())) {
            throw SchemaError(path.string(), line, "keypoint frames must be contiguous from 0");
        }
        std::vector<DetectedKeypoint> kps;
        if (!j.contains("points") || !j.at("points").is_array()) {
            throw SchemaError(path.string(), line, "missing points array");
        }
        for (const auto& p : j.at("points")) {
            DetectedKeypoint kp;
            kp.idx = static_cast<int>(require_number(p, "idx", path.string(), line));
            if (kp.idx < 0 || kp.idx >= 74) {
                throw SchemaError(path.string(), line, "keypoint idx outside 0..73");
            }
            kp.pixel = Vec2(require_number(p, "x", path.string(), line),
                            require_number(p, "y", path.string(), line));
            kp.conf = require_number(p, "conf", path.string(), line);
            if (kp.conf < 0.0 || kp.conf > 1.0) {
                throw SchemaError(path.string(), line, "keypoint conf outside [0,1]");
            }
            kps.push_back(kp);
        }
        frames.push_back(std::move(kps));
    }
    return frames;
}

void write_cameras(const std::filesystem::path& path, const std::vector<CameraParams>& cams,
                   bool refined) {
    std::string out;
    for (size_t f = 0; f < cams.size(); ++f) {
        const auto& c = cams[f];
        out += "{\"frame\":" + std::to_string(f) + ",\"x\":";
        append_double(out, c.x);
        out += ",\"y\":";
        append_double(out, c.y);
        out += ",\"z\":";
        append_double(out, c.z);
        out += ",\"pan\":";
        append_double(out, c.pan);
        out += ",\"tilt\":";
        append_double(out, c.tilt);
        out += ",\"roll\":";
        append_double(out, c.roll);
        out += ",\"fov\":";
        append_double(out, c.fov);
        out += ",\"refined\":";
        out += refined ? "true" : "false";
        out += "}\n";
    }
    atomic_write(path, out);
}

std::vector<CameraParams> read_cameras(const std::filesystem::path& path) {
    std::vector<CameraParams> cams;
    for (const auto& [line, j] : read_jsonl(path)) {
        const int frame = static_cast<int>(require_number(j, "frame", path.string(), line));
        if (frame != static_cast<int>(cams.size())) {
            throw SchemaError(path.string(), line, "camera frames must be contiguous from 0");
        }
        CameraParams c;
        c.x = require_number(j, "x", path.string(), line);
        c.y = require_number(j, "y", path.string(), line);
        c.z = require_number(j, "z", path.string(), line);
        c.pan = require_number(j, "pan", path.string(), line);
        c.tilt = require_number(j, "tilt", path.string(), line);
        c.roll = require_number(j, "roll", path.string(), line);
        c.fov = require_number(j, "fov", path.string(), line);
        if (c.fov <= 0.0 || c.fov >= M_PI) {
            throw SchemaError(path.string(), line, "fov outside (0, pi)");
        }
        cams.push_back(c);
    }
    return cams;
}

void write_gamestate(const std::filesystem::path& path, const std::vector<GsRecord>& records) {
    std::string out;
    out.reserve(records.size() * 96);
    for (const auto& r : records) {
        out += "{\"frame\":" + std::to_string(r.frame) + ",\"id\":" + std::to_string(r.id) +
               ",\"x\":";
        append_double(out, r.pos.x());
        out += ",\"y\":";
        append_double(out, r.pos.y());
        out += ",\"role\":\"";
        out += to_string(r.role);
        out += "\",\"side\":\"";
        out += to_string(r.side);
        out += "\",\"jersey\":";
        out += r.jersey ? std::to_string(*r.jersey) : "null";
        out += "}\n";
    }
    atomic_write(path, out);
}

std::vector<GsRecord> read_gamestate(const std::filesystem::path& path) {
    std::vector<GsRecord> records;
    for (const auto& [line, j] : read_jsonl(path)) {
        GsRecord r;
        r.frame = static_cast<int>(require_number(j, "frame", path.string(), line));
        r.id = static_cast<int>(require_number(j, "id", path.string(), line));
        r.pos = Vec2(require_number(j, "x", path.string(), line),
                     require_number(j, "y", path.string(), line));
        try {
            r.role = role_from_string(require_string(j, "role", path.string(), line));
            r.side = side_from_string(require_string(j, "side", path.string(), line));
        } catch (const std::invalid_argument& e) {
            throw SchemaError(path.string(), line, e.what());
        }
        if (!j.contains("jersey")) {
            throw SchemaError(path.string(), line, "missing field 'jersey'");
        }
        if (!j.at("jersey").is_null()) {
            const int number = j.at("jersey").get<int>();
            if (number < 0 || number > 99) {
                throw SchemaError(path.string(), line, "jersey outside 0..99");
            }
            r.jersey = number;
        }
        records.push_back(r);
    }
    return records;
}

void write_tracklets(const std::filesystem::path& path, const std::vector<Tracklet>& tracklets) {
    std::string out;
    for (const auto& t : tracklets) {
        for (const auto& rec : t.records) {
            out += "{\"tid\":" + std::to_string(t.id) + ",\"frame\":" + std::to_string(rec.frame) +
                   ",\"x\":";
            append_double(out, rec.pos.x());
            out += ",\"y\":";
            append_double(out, rec.pos.y());
            out += ",\"reid\":";
            if (rec.reid) {
                append_vector(out, *rec.reid);
            } else {
                out += "null";
            }
            out += ",\"team\":";
            if (rec.team) {
                append_vector(out, *rec.team);
            } else {
                out += "null";
            }
            out += ',';
            if (rec.jersey) {
                append_jersey(out, *rec.jersey);
            } else {
                out += "\"jersey_first\":null,\"jersey_second\":null";
            }
            out += ",\"orient\":";
            if (rec.orient) {
                out += '"';
                out += to_string(*rec.orient);
                out += '"';
            } else {
                out += "null";
            }
            out += ",\"ball\":";
            out += t.role == Role::other ? "true" : "false";
            out += "}\n";
        }
    }
    atomic_write(path, out);
}

std::vector<Tracklet> read_tracklets(const std::filesystem::path& path) {
    std::map<int, Tracklet> by_id;
    for (const auto& [line, j] : read_jsonl(path)) {
        const int tid = static_cast<int>(require_number(j, "tid", path.string(), line));
        Tracklet& t = by_id[tid];
        t.id = tid;
        TrackletRecord rec;
        rec.frame = static_cast<int>(require_number(j, "frame", path.string(), line));
        rec.pos = Vec2(require_number(j, "x", path.string(), line),
                       require_number(j, "y", path.string(), line));
        if (j.contains("reid") && !j.at("reid").is_null()) {
            rec.reid = require_unit_vector(j, "reid", path.string(), line);
        }
        if (j.contains("team") && !j.at("team").is_null()) {
            rec.team = require_unit_vector(j, "team", path.string(), line);
        }
        if (j.contains("jersey_first") && !j.at("jersey_first").is_null()) {
            rec.jersey = require_jersey(j, path.string(), line);
        }
        if (j.contains("orient") && !j.at("orient").is_null()) {
            try {
                rec.orient = orientation_from_string(j.at("orient").get<std::string>());
            } catch (const std::invalid_argument& e) {
                throw SchemaError(path.string(), line, e.what());
            }
        }
        if (j.contains("ball") && j.at("ball").is_boolean() && j.at("ball").get<bool>()) {
            t.role = Role::other;
        }
        t.records.push_back(std::move(rec));
    }
    std::vector<Tracklet> out;
    for (auto& [id, t] : by_id) {
        std::sort(t.records.begin(), t.records.end(),
                  [](const TrackletRecord& a, const TrackletRecord& b) { return a.frame < b.frame; });
        out.push_back(std::move(t));
    }
    return out;
}

void write_clusters(const std::filesystem::path& path, const ClusterSet& clusters,
                    const std::vector<TeamAssignment>& assignments) {
    json j;
    auto vec = [](const Eigen::VectorXd& v) {
        json arr = json::array();
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            arr.push_back(v(i));
        }
        return arr;
    };
    j["team_left"] = vec(clusters.team_left);
    j["team_right"] = vec(clusters.team_right);
    j["referee"] = vec(clusters.referee);
    j["gk_left"] = clusters.gk_left ? vec(*clusters.gk_left) : json(nullptr);
    j["gk_right"] = clusters.gk_right ? vec(*clusters.gk_right) : json(nullptr);
    j["votes_left"] = clusters.votes_left;
    j["votes_right"] = clusters.votes_right;
    j["degenerate"] = clusters.degenerate;
    j["assignments"] = json::array();
    for (const auto& a : assignments) {
        j["assignments"].push_back(
            {{"tid", a.tracklet_id}, {"role", to_string(a.role)}, {"side", to_string(a.side)}});
    }
    atomic_write(path, j.dump(2) + "\n");
}

std::pair<ClusterSet, std::vector<TeamAssignment>> read_clusters(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) {
        throw MissingFileError(path.string());
    }
    std::stringstream buf;
    buf << f.rdbuf();
    json j = json::parse(buf.str(), nullptr, false);
    if (j.is_discarded()) {
        throw SchemaError(path.string(), 1, "malformed JSON");
    }
    auto vec = [&](const char* key) {
        const auto& arr = j.at(key);
        Eigen::VectorXd v(arr.size());
        for (size_t i = 0; i < arr.size(); ++i) {
            v(static_cast<Eigen::Index>(i)) = arr[i].get<double>();
        }
        return v;
    };
    ClusterSet c;
    c.team_left = vec("team_left");
    c.team_right = vec("team_right");
    c.referee = vec("referee");
    if (!j.at("gk_left").is_null()) c.gk_left = vec("gk_left");
    if (!j.at("gk_right").is_null()) c.gk_right = vec("gk_right");
    c.votes_left = j.value("votes_left", 0);
    c.votes_right = j.value("votes_right", 0);
    c.degenerate = j.value("degenerate", false);
    std::vector<TeamAssignment> assignments;
    for (const auto& a : j.at("assignments")) {
        assignments.push_back({a.at("tid").get<int>(),
                               role_from_string(a.at("role").get<std::string>()),
                               side_from_string(a.at("side").get<std::string>())});
    }
    return {std::move(c), std::move(assignments)};
}

void write_scores(const std::filesystem::path& path, const EvalScores& scores) {
    json j;
    j["gs_hota"] = scores.gs_hota;
    j["gs_deta"] = scores.gs_deta;
    j["gs_assa"] = scores.gs_assa;
    j["per_threshold"] = json::array();
    for (const auto& t : scores.per_threshold) {
        j["per_threshold"].push_back(
            {{"alpha", t.alpha}, {"deta", t.deta}, {"assa", t.assa}, {"hota", t.hota}});
    }
    atomic_write(path, j.dump(2) + "\n");
}

}  // namespace gsr
