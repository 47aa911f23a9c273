#include "gsr/pitch.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace gsr {

namespace {

constexpr double kCircleRadius = 9.15;
constexpr double kPenaltyDepth = 16.5;
constexpr double kPenaltyHalfWidth = 20.16;
constexpr double kGoalAreaDepth = 5.5;
constexpr double kGoalAreaHalfWidth = 9.16;
constexpr double kPenaltySpotX = 52.5 - 11.0;
constexpr double kStripeSpacing = kCircleRadius / 2.0;  // 4.575 m, 23 stripes
constexpr int kStripeMax = 11;

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
    const Vec2 ab = b - a;
    const double len2 = ab.squaredNorm();
    if (len2 == 0.0) {
        return (p - a).norm();
    }
    const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
    return (p - (a + t * ab)).norm();
}

double point_arc_distance(const Vec2& p, const Arc& arc) {
    const Vec2 d = p - arc.center;
    const double r = d.norm();
    if (arc.full) {
        return std::abs(r - arc.radius);
    }
    double theta = std::atan2(d.y(), d.x());
    // Bring theta into [theta0, theta0 + 2pi).
    while (theta < arc.theta0) theta += 2.0 * M_PI;
    if (theta <= arc.theta1) {
        return std::abs(r - arc.radius);
    }
    const Vec2 e0 = arc.center + arc.radius * Vec2(std::cos(arc.theta0), std::sin(arc.theta0));
    const Vec2 e1 = arc.center + arc.radius * Vec2(std::cos(arc.theta1), std::sin(arc.theta1));
    return std::min((p - e0).norm(), (p - e1).norm());
}

struct KeypointBuild {
    Vec2 p;
    int stripe;
    std::vector<std::string> extra_groups;
};

}  // namespace

PitchModel standard_pitch() {
    PitchModel m;
    const double hl = m.length / 2.0;  // 52.5
    const double hw = m.width / 2.0;   // 34

    m.segments = {
        {"touchline_top", {-hl, hw}, {hl, hw}},
        {"touchline_bottom", {-hl, -hw}, {hl, -hw}},
        {"goal_line_left", {-hl, -hw}, {-hl, hw}},
        {"goal_line_right", {hl, -hw}, {hl, hw}},
        {"halfway", {0.0, -hw}, {0.0, hw}},
        {"penalty_left_front", {-hl + kPenaltyDepth, -kPenaltyHalfWidth}, {-hl + kPenaltyDepth, kPenaltyHalfWidth}},
        {"penalty_left_top", {-hl, kPenaltyHalfWidth}, {-hl + kPenaltyDepth, kPenaltyHalfWidth}},
        {"penalty_left_bottom", {-hl, -kPenaltyHalfWidth}, {-hl + kPenaltyDepth, -kPenaltyHalfWidth}},
        {"penalty_right_front", {hl - kPenaltyDepth, -kPenaltyHalfWidth}, {hl - kPenaltyDepth, kPenaltyHalfWidth}},
        {"penalty_right_top", {hl - kPenaltyDepth, kPenaltyHalfWidth}, {hl, kPenaltyHalfWidth}},
        {"penalty_right_bottom", {hl - kPenaltyDepth, -kPenaltyHalfWidth}, {hl, -kPenaltyHalfWidth}},
        {"goal_area_left_front", {-hl + kGoalAreaDepth, -kGoalAreaHalfWidth}, {-hl + kGoalAreaDepth, kGoalAreaHalfWidth}},
        {"goal_area_left_top", {-hl, kGoalAreaHalfWidth}, {-hl + kGoalAreaDepth, kGoalAreaHalfWidth}},
        {"goal_area_left_bottom", {-hl, -kGoalAreaHalfWidth}, {-hl + kGoalAreaDepth, -kGoalAreaHalfWidth}},
        {"goal_area_right_front", {hl - kGoalAreaDepth, -kGoalAreaHalfWidth}, {hl - kGoalAreaDepth, kGoalAreaHalfWidth}},
        {"goal_area_right_top", {hl - kGoalAreaDepth, kGoalAreaHalfWidth}, {hl, kGoalAreaHalfWidth}},
        {"goal_area_right_bottom", {hl - kGoalAreaDepth, -kGoalAreaHalfWidth}, {hl, -kGoalAreaHalfWidth}},
    };

    // Penalty arcs keep only the portion outside the penalty area.
    const double arc_half = std::acos((kPenaltyDepth - 11.0) / kCircleRadius);
    m.arcs = {
        {"centre_circle", {0.0, 0.0}, kCircleRadius, 0.0, 0.0, true},
        {"penalty_arc_left", {-kPenaltySpotX, 0.0}, kCircleRadius, -arc_half, arc_half, false},
        {"penalty_arc_right", {kPenaltySpotX, 0.0}, kCircleRadius, M_PI - arc_half, M_PI + arc_half, false},
    };

    std::vector<KeypointBuild> build;
    for (int k = -kStripeMax; k <= kStripeMax; ++k) {
        const double x = k * kStripeSpacing;
        const int ak = std::abs(k);
        build.push_back({{x, hw}, k, {"touchline_top"}});
        build.push_back({{x, -hw}, k, {"touchline_bottom"}});
        if (ak >= 8) {  // 36 < |x| < 52.5
            const char* top = k < 0 ? "penalty_left_top" : "penalty_right_top";
            const char* bot = k < 0 ? "penalty_left_bottom" : "penalty_right_bottom";
            build.push_back({{x, kPenaltyHalfWidth}, k, {top}});
            build.push_back({{x, -kPenaltyHalfWidth}, k, {bot}});
        }
        if (ak == 11) {  // 47 < |x| < 52.5; goal-area sides hold one crossing each
            build.push_back({{x, kGoalAreaHalfWidth}, k, {}});
            build.push_back({{x, -kGoalAreaHalfWidth}, k, {}});
        }
        if (ak == 1) {
            const double y = std::sqrt(kCircleRadius * kCircleRadius - x * x);
            build.push_back({{x, y}, k, {}});
            build.push_back({{x, -y}, k, {}});
        }
        if (ak == 2) {  // stripe tangent to the centre circle
            build.push_back({{x, 0.0}, k, {}});
        }
        if (k == 0) {  // halfway stripe crosses the circle
            build.push_back({{x, kCircleRadius}, k, {}});
            build.push_back({{x, -kCircleRadius}, k, {}});
        }
    }

    std::sort(build.begin(), build.end(), [](const KeypointBuild& a, const KeypointBuild& b) {
        if (a.p.x() != b.p.x()) return a.p.x() < b.p.x();
        return a.p.y() < b.p.y();
    });

    std::map<std::string, std::vector<int>> group_members;
    for (size_t i = 0; i < build.size(); ++i) {
        m.keypoints.push_back(build[i].p);
        group_members["stripe_" + std::to_string(build[i].stripe)].push_back(static_cast<int>(i));
        for (const auto& g : build[i].extra_groups) {
            group_members[g].push_back(static_cast<int>(i));
        }
    }
    // Stable group order: touchlines, penalty sides, stripes left to right.
    const std::vector<std::string> named = {
        "touchline_top", "touchline_bottom",
        "penalty_left_top", "penalty_left_bottom",
        "penalty_right_top", "penalty_right_bottom",
    };
    for (const auto& id : named) {
        m.groups.push_back({id, group_members.at(id)});
    }
    for (int k = -kStripeMax; k <= kStripeMax; ++k) {
        const std::string id = "stripe_" + std::to_string(k);
        m.groups.push_back({id, group_members.at(id)});
    }
    return m;
}

double distance_to_model(const Vec2& p, const PitchModel& model) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& s : model.segments) {
        best = std::min(best, point_segment_distance(p, s.a, s.b));
    }
    for (const auto& a : model.arcs) {
        best = std::min(best, point_arc_distance(p, a));
    }
    return best;
}

bool in_penalty_area(const Vec2& p, Side side, const PitchModel& model) {
    const double hl = model.length / 2.0;
    if (side == Side::left) {
        return p.x() >= -hl && p.x() <= -hl + kPenaltyDepth && std::abs(p.y()) <= kPenaltyHalfWidth;
    }
    if (side == Side::right) {
        return p.x() <= hl && p.x() >= hl - kPenaltyDepth && std::abs(p.y()) <= kPenaltyHalfWidth;
    }
    return false;
}

std::string pitch_to_json(const PitchModel& model) {
    nlohmann::json j;
    j["length"] = model.length;
    j["width"] = model.width;
    for (const auto& s : model.segments) {
        j["segments"].push_back({{"id", s.id}, {"a", {s.a.x(), s.a.y()}}, {"b", {s.b.x(), s.b.y()}}});
    }
    for (const auto& a : model.arcs) {
        j["arcs"].push_back({{"id", a.id},
                             {"center", {a.center.x(), a.center.y()}},
                             {"radius", a.radius},
                             {"theta0", a.theta0},
                             {"theta1", a.theta1},
                             {"full", a.full}});
    }
    for (const auto& p : model.keypoints) {
        j["keypoints"].push_back({p.x(), p.y()});
    }
    for (const auto& g : model.groups) {
        j["groups"].push_back({{"id", g.id}, {"members", g.members}});
    }
    return j.dump(2);
}

PitchModel pitch_from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    PitchModel m;
    m.length = j.at("length").get<double>();
    m.width = j.at("width").get<double>();
    for (const auto& s : j.at("segments")) {
        m.segments.push_back({s.at("id").get<std::string>(),
                              {s.at("a")[0].get<double>(), s.at("a")[1].get<double>()},
                              {s.at("b")[0].get<double>(), s.at("b")[1].get<double>()}});
    }
    for (const auto& a : j.at("arcs")) {
        m.arcs.push_back({a.at("id").get<std::string>(),
                          {a.at("center")[0].get<double>(), a.at("center")[1].get<double>()},
                          a.at("radius").get<double>(),
                          a.at("theta0").get<double>(),
                          a.at("theta1").get<double>(),
                          a.at("full").get<bool>()});
    }
    for (const auto& p : j.at("keypoints")) {
        m.keypoints.push_back({p[0].get<double>(), p[1].get<double>()});
    }
    for (const auto& g : j.at("groups")) {
        m.groups.push_back({g.at("id").get<std::string>(), g.at("members").get<std::vector<int>>()});
    }
    return m;
}

const char* to_string(Side side) {
    switch (side) {
        case Side::left: return "left";
        case Side::right: return "right";
        default: return "none";
    }
}

Side side_from_string(const std::string& s) {
    if (s == "left") return Side::left;
    if (s == "right") return Side::right;
    if (s == "none") return Side::none;
    throw std::invalid_argument("unknown side: " + s);
}

}  // namespace gsr
