#pragma once

#include <string>
#include <vector>

#include "deap/core/grid.hpp"
#include "json.hpp"

namespace deap::tissue {

enum class StimulusKind { S1Plane, S2CrossField, Burst };

std::string to_string(StimulusKind k);
StimulusKind stimulus_kind_from_string(const std::string& s);

/// Stimulated area. Rect bounds are fractions of the sheet extent (x along
/// columns, y along rows); a disc is a fractional centre plus a radius in mm.
struct Region {
    enum class Shape { Rect, Disc };
    Shape shape = Shape::Rect;
    double x0 = 0.0, y0 = 0.0, x1 = 1.0, y1 = 1.0;
    double cx = 0.5, cy = 0.5, radius_mm = 1.0;

    static Region rect(double x0, double y0, double x1, double y1);
    static Region disc(double cx, double cy, double radius_mm);
    Mask rasterize(int nx, int ny, double dx_mm) const;
};

struct StimulusEvent {
    StimulusKind kind = StimulusKind::S1Plane;
    double onset_ms = 0.0;
    double duration_ms = 4.0;
    double amplitude = 0.5;  ///< added to du/dt, dimensionless
    Region region;
};

struct StimulusProtocol {
    std::vector<StimulusEvent> events;

    void validate() const;
    bool empty() const { return events.empty(); }
};

void to_json(nlohmann::json& j, const StimulusProtocol& p);
void from_json(const nlohmann::json& j, StimulusProtocol& p);

enum class Side { Left, Right, Top, Bottom };

/// Strip stimulus along one edge of the sheet.
Region edge_strip(Side side, double width_fraction = 0.03);

StimulusProtocol plane_wave_protocol(Side side = Side::Left, double onset_ms = 0.0);

/// Maps a region through one of the 8 symmetries of the unit square:
/// bit 0 transposes x/y, bit 1 mirrors x, bit 2 mirrors y (applied in that order).
Region apply_symmetry(const Region& region, int op);
StimulusProtocol apply_symmetry(const StimulusProtocol& protocol, int op);

/// S1 plane wave from the left edge followed by an S2 applied to the lower
/// half of the sheet left of `s2_extent_x` after `s2_delay_ms`.
StimulusProtocol s1s2_protocol(double s2_delay_ms = 152.0, double s2_extent_x = 0.5, double s2_extent_y = 0.5);

/// Plane pacing from one edge at a fixed cycle length for the whole duration.
StimulusProtocol periodic_pacing_protocol(double cycle_ms, double duration_ms, Side side = Side::Left);

/// High-frequency burst from a disc site: n_beats at cycle_ms starting at start_ms.
StimulusProtocol burst_protocol(Region site, double start_ms, double cycle_ms, int n_beats);

}  // namespace deap::tissue
