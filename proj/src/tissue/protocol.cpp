#include "deap/tissue/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "deap/core/error.hpp"

namespace deap::tissue {

std::string to_string(StimulusKind k) {
    switch (k) {
        case StimulusKind::S1Plane: return "s1_plane";
        case StimulusKind::S2CrossField: return "s2_cross_field";
        case StimulusKind::Burst: return "burst";
    }
    return "s1_plane";
}

StimulusKind stimulus_kind_from_string(const std::string& s) {
    if (s == "s1_plane") return StimulusKind::S1Plane;
    if (s == "s2_cross_field") return StimulusKind::S2CrossField;
    if (s == "burst") return StimulusKind::Burst;
    throw FormatError("unknown stimulus kind: " + s);
}

Region Region::rect(double x0, double y0, double x1, double y1) {
    Region r;
    r.shape = Shape::Rect;
    r.x0 = x0;
    r.y0 = y0;
    r.x1 = x1;
    r.y1 = y1;
    return r;
}

Region Region::disc(double cx, double cy, double radius_mm) {
    Region r;
    r.shape = Shape::Disc;
    r.cx = cx;
    r.cy = cy;
    r.radius_mm = radius_mm;
    return r;
}

Mask Region::rasterize(int nx, int ny, double dx_mm) const {
    Mask m(ny, nx, false);
    for (int r = 0; r < ny; ++r) {
        for (int c = 0; c < nx; ++c) {
            const double fx = (c + 0.5) / nx, fy = (r + 0.5) / ny;
            bool in = false;
            if (shape == Shape::Rect) {
                in = fx >= x0 && fx <= x1 && fy >= y0 && fy <= y1;
            } else {
                const double dx = (fx - cx) * nx * dx_mm, dy = (fy - cy) * ny * dx_mm;
                in = std::hypot(dx, dy) <= radius_mm;
            }
            m.set(r, c, in);
        }
    }
    return m;
}

void StimulusProtocol::validate() const {
    for (std::size_t i = 0; i < events.size(); ++i) {
        const auto& e = events[i];
        if (!(e.amplitude > 0.0)) throw PreconditionError("stimulus event " + std::to_string(i) + ": amplitude must be > 0");
        if (!(e.duration_ms > 0.0)) throw PreconditionError("stimulus event " + std::to_string(i) + ": duration must be > 0");
        if (!(e.onset_ms >= 0.0)) throw PreconditionError("stimulus event " + std::to_string(i) + ": onset must be >= 0");
        if (i > 0 && e.onset_ms < events[i - 1].onset_ms)
            throw PreconditionError("stimulus onsets must be non-decreasing (event " + std::to_string(i) + ")");
    }
}

void to_json(nlohmann::json& j, const StimulusProtocol& p) {
    j = nlohmann::json::array();
    for (const auto& e : p.events) {
        nlohmann::json r;
        if (e.region.shape == Region::Shape::Rect) {
            r = {{"shape", "rect"}, {"x0", e.region.x0}, {"y0", e.region.y0}, {"x1", e.region.x1}, {"y1", e.region.y1}};
        } else {
            r = {{"shape", "disc"}, {"cx", e.region.cx}, {"cy", e.region.cy}, {"radius_mm", e.region.radius_mm}};
        }
        j.push_back({{"kind", to_string(e.kind)},
                     {"onset_ms", e.onset_ms},
                     {"duration_ms", e.duration_ms},
                     {"amplitude", e.amplitude},
                     {"region", r}});
    }
}

void from_json(const nlohmann::json& j, StimulusProtocol& p) {
    p.events.clear();
    for (const auto& item : j) {
        StimulusEvent e;
        e.kind = stimulus_kind_from_string(item.at("kind").get<std::string>());
        e.onset_ms = item.at("onset_ms").get<double>();
        e.duration_ms = item.at("duration_ms").get<double>();
        e.amplitude = item.at("amplitude").get<double>();
        const auto& r = item.at("region");
        if (r.at("shape").get<std::string>() == "rect") {
            e.region = Region::rect(r.at("x0"), r.at("y0"), r.at("x1"), r.at("y1"));
        } else {
            e.region = Region::disc(r.at("cx"), r.at("cy"), r.at("radius_mm"));
        }
        p.events.push_back(e);
    }
}

Region edge_strip(Side side, double width_fraction) {
    switch (side) {
        case Side::Left: return Region::rect(0.0, 0.0, width_fraction, 1.0);
        case Side::Right: return Region::rect(1.0 - width_fraction, 0.0, 1.0, 1.0);
        case Side::Top: return Region::rect(0.0, 0.0, 1.0, width_fraction);
        case Side::Bottom: return Region::rect(0.0, 1.0 - width_fraction, 1.0, 1.0);
    }
    return Region::rect(0.0, 0.0, width_fraction, 1.0);
}

Region apply_symmetry(const Region& region, int op) {
    auto map = [op](double x, double y) {
        if (op & 1) std::swap(x, y);
        if (op & 2) x = 1.0 - x;
        if (op & 4) y = 1.0 - y;
        return std::pair{x, y};
    };
    Region out = region;
    if (region.shape == Region::Shape::Rect) {
        const auto [ax, ay] = map(region.x0, region.y0);
        const auto [bx, by] = map(region.x1, region.y1);
        out.x0 = std::min(ax, bx);
        out.x1 = std::max(ax, bx);
        out.y0 = std::min(ay, by);
        out.y1 = std::max(ay, by);
    } else {
        const auto [cx, cy] = map(region.cx, region.cy);
        out.cx = cx;
        out.cy = cy;
    }
    return out;
}

StimulusProtocol apply_symmetry(const StimulusProtocol& protocol, int op) {
    StimulusProtocol out = protocol;
    for (auto& e : out.events) e.region = apply_symmetry(e.region, op);
    return out;
}

StimulusProtocol plane_wave_protocol(Side side, double onset_ms) {
    StimulusProtocol p;
    StimulusEvent e;
    e.kind = StimulusKind::S1Plane;
    e.onset_ms = onset_ms;
    e.region = edge_strip(side);
    p.events.push_back(e);
    return p;
}

StimulusProtocol s1s2_protocol(double s2_delay_ms, double s2_extent_x, double s2_extent_y) {
    StimulusProtocol p = plane_wave_protocol(Side::Left, 0.0);
    StimulusEvent s2;
    s2.kind = StimulusKind::S2CrossField;
    s2.onset_ms = s2_delay_ms;
    s2.region = Region::rect(0.0, 0.0, s2_extent_x, s2_extent_y);
    p.events.push_back(s2);
    return p;
}

StimulusProtocol periodic_pacing_protocol(double cycle_ms, double duration_ms, Side side) {
    require(cycle_ms > 0.0, "periodic pacing: cycle length must be > 0");
    StimulusProtocol p;
    for (double t = 0.0; t < duration_ms; t += cycle_ms) {
        StimulusEvent e;
        e.kind = StimulusKind::S1Plane;
        e.onset_ms = t;
        e.region = edge_strip(side);
        p.events.push_back(e);
    }
    return p;
}

StimulusProtocol burst_protocol(Region site, double start_ms, double cycle_ms, int n_beats) {
    StimulusProtocol p;
    for (int b = 0; b < n_beats; ++b) {
        StimulusEvent e;
        e.kind = StimulusKind::Burst;
        e.onset_ms = start_ms + b * cycle_ms;
        e.region = site;
        p.events.push_back(e);
    }
    return p;
}

}  // namespace deap::tissue
