#include "gsr/pipeline.hpp"

#include <cmath>
#include <sstream>

namespace gsr {

namespace {

constexpr double kScale = 10.0;  // px per meter

double sx(double x) { return (x + 52.5) * kScale; }
double sy(double y) { return (34.0 - y) * kScale; }

const char* fill_for(const GsRecord& r) {
    switch (r.role) {
        case Role::player:
            return r.side == Side::left ? "#e63946" : "#4361ee";
        case Role::goalkeeper:
            return r.side == Side::left ? "#9d1d28" : "#1d2f9e";
        case Role::referee:
            return "#f4a261";
        default:
            return "#888888";
    }
}

}  // namespace

std::string render_minimap_svg(const PitchModel& model, const std::vector<GsRecord>& frame_records) {
    std::ostringstream svg;
    const double w = model.length * kScale;
    const double h = model.width * kScale;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
        << "\" viewBox=\"0 0 " << w << " " << h << "\">\n";
    svg << "  <rect width=\"" << w << "\" height=\"" << h << "\" fill=\"#2e7d32\"/>\n";

    for (const auto& s : model.segments) {
        svg << "  <line x1=\"" << sx(s.a.x()) << "\" y1=\"" << sy(s.a.y()) << "\" x2=\""
            << sx(s.b.x()) << "\" y2=\"" << sy(s.b.y())
            << "\" stroke=\"white\" stroke-width=\"2\"/>\n";
    }
    for (const auto& a : model.arcs) {
        if (a.full) {
            svg << "  <circle cx=\"" << sx(a.center.x()) << "\" cy=\"" << sy(a.center.y())
                << "\" r=\"" << a.radius * kScale
                << "\" fill=\"none\" stroke=\"white\" stroke-width=\"2\"/>\n";
        } else {
            const double x0 = sx(a.center.x() + a.radius * std::cos(a.theta0));
            const double y0 = sy(a.center.y() + a.radius * std::sin(a.theta0));
            const double x1 = sx(a.center.x() + a.radius * std::cos(a.theta1));
            const double y1 = sy(a.center.y() + a.radius * std::sin(a.theta1));
            // World y flips in svg space, so the sweep direction flips too.
            svg << "  <path d=\"M " << x0 << ' ' << y0 << " A " << a.radius * kScale << ' '
                << a.radius * kScale << " 0 0 0 " << x1 << ' ' << y1
                << "\" fill=\"none\" stroke=\"white\" stroke-width=\"2\"/>\n";
        }
    }

    for (const auto& r : frame_records) {
        svg << "  <circle cx=\"" << sx(r.pos.x()) << "\" cy=\"" << sy(r.pos.y())
            << "\" r=\"9\" fill=\"" << fill_for(r) << "\" stroke=\"white\" stroke-width=\"1.5\"/>\n";
        if (r.jersey) {
            svg << "  <text x=\"" << sx(r.pos.x()) << "\" y=\"" << sy(r.pos.y()) + 3.5
                << "\" font-family=\"sans-serif\" font-size=\"10\" fill=\"white\" "
                   "text-anchor=\"middle\">"
                << *r.jersey << "</text>\n";
        }
    }
    svg << "</svg>\n";
    return svg.str();
}

}  // namespace gsr
