#pragma once

#include <string>
#include <vector>

#include "deap/core/error.hpp"
#include "deap/core/grid.hpp"
#include "json.hpp"

namespace deap::sensing {

/// Rigid array-frame -> tissue-frame transform: rotate about the array origin,
/// then translate.
struct Pose {
    double rotation_deg = 0.0;
    double tx_mm = 0.0;
    double ty_mm = 0.0;

    Vec2 apply(Vec2 p) const;
    Vec2 invert(Vec2 p) const;
};

void to_json(nlohmann::json& j, const Pose& p);
void from_json(const nlohmann::json& j, Pose& p);

struct ElectrodeArray {
    std::string name;
    std::vector<Vec2> positions;  ///< array-local frame, mm
    double height_mm = 1.0;       ///< standoff above the sheet
    Pose pose;

    std::size_t size() const { return positions.size(); }
    std::vector<Vec2> posed_positions() const;
    double max_radius_mm() const;
    Vec2 center() const { return {pose.tx_mm, pose.ty_mm}; }
};

void to_json(nlohmann::json& j, const ElectrodeArray& a);
void from_json(const nlohmann::json& j, ElectrodeArray& a);

inline constexpr int kArrayElectrodes = 20;

/// Five spines at 90 + k*72 degrees with electrodes at 3, 6, 9 and 12 mm.
ElectrodeArray build_pentagon_array();

/// Archimedean spiral r = 2 + 1.2*phi mm for r in [2, 12] mm, sampled at 20
/// points equally spaced in arc length.
ElectrodeArray build_spiral_array();

/// "pentagon" or "spiral".
ElectrodeArray array_by_name(const std::string& name);

/// Footprint disc: array centre, radius = max electrode radius + 2 mm.
struct Footprint {
    Vec2 center;
    double radius_mm = 0.0;
};

inline constexpr double kFootprintMarginMm = 2.0;

Footprint footprint(const ElectrodeArray& array);
Mask footprint_mask(const GridGeometry& grid, const Footprint& fp);

class RegistrationError : public PreconditionError {
public:
    RegistrationError(int electrode, const std::string& what) : PreconditionError(what), electrode_(electrode) {}
    int electrode() const { return electrode_; }

private:
    int electrode_;
};

struct Registration {
    std::vector<GridIndex> grid_coords;  ///< continuous (row, col) per electrode
    std::vector<Vec2> tissue_mm;
    Pose pose;
};

/// Places the posed array on the grid. Every electrode must lie inside the
/// sheet with at least `margin_mm` to spare.
Registration register_array(const ElectrodeArray& array, const GridGeometry& grid,
                            double margin_mm = kFootprintMarginMm);

}  // namespace deap::sensing
