#include "deap/sensing/array.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace deap::sensing {

namespace {
double deg2rad(double d) { return d * std::numbers::pi / 180.0; }
}  // namespace

Vec2 Pose::apply(Vec2 p) const {
    const double a = deg2rad(rotation_deg);
    const double c = std::cos(a), s = std::sin(a);
    return {c * p.x - s * p.y + tx_mm, s * p.x + c * p.y + ty_mm};
}

Vec2 Pose::invert(Vec2 p) const {
    const double a = deg2rad(rotation_deg);
    const double c = std::cos(a), s = std::sin(a);
    const double x = p.x - tx_mm, y = p.y - ty_mm;
    return {c * x + s * y, -s * x + c * y};
}

void to_json(nlohmann::json& j, const Pose& p) {
    j = nlohmann::json{{"rotation_deg", p.rotation_deg}, {"tx_mm", p.tx_mm}, {"ty_mm", p.ty_mm}};
}

void from_json(const nlohmann::json& j, Pose& p) {
    p.rotation_deg = j.value("rotation_deg", 0.0);
    p.tx_mm = j.value("tx_mm", 0.0);
    p.ty_mm = j.value("ty_mm", 0.0);
}

std::vector<Vec2> ElectrodeArray::posed_positions() const {
    std::vector<Vec2> out;
    out.reserve(positions.size());
    for (const auto& p : positions) out.push_back(pose.apply(p));
    return out;
}

double ElectrodeArray::max_radius_mm() const {
    double r = 0.0;
    for (const auto& p : positions) r = std::max(r, norm(p));
    return r;
}

void to_json(nlohmann::json& j, const ElectrodeArray& a) {
    nlohmann::json pos = nlohmann::json::array();
    for (const auto& p : a.positions) pos.push_back({p.x, p.y});
    j = nlohmann::json{{"name", a.name}, {"positions_mm", pos}, {"height_mm", a.height_mm}, {"pose", a.pose}};
}

void from_json(const nlohmann::json& j, ElectrodeArray& a) {
    a.name = j.at("name").get<std::string>();
    a.positions.clear();
    for (const auto& p : j.at("positions_mm")) a.positions.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    a.height_mm = j.value("height_mm", 1.0);
    a.pose = j.value("pose", Pose{});
}

ElectrodeArray build_pentagon_array() {
    ElectrodeArray a;
    a.name = "pentagon";
    for (int spine = 0; spine < 5; ++spine) {
        const double ang = deg2rad(90.0 + 72.0 * spine);
        for (double r : {3.0, 6.0, 9.0, 12.0}) a.positions.push_back({r * std::cos(ang), r * std::sin(ang)});
    }
    return a;
}

ElectrodeArray build_spiral_array() {
    constexpr double r0 = 2.0, pitch = 1.2, r_max = 12.0;
    const double phi_max = (r_max - r0) / pitch;
    // Arc length table s(phi), ds = sqrt(r^2 + pitch^2) dphi.
    constexpr int n = 20000;
    std::vector<double> s(n + 1, 0.0);
    auto speed = [&](double phi) { return std::hypot(r0 + pitch * phi, pitch); };
    const double h = phi_max / n;
    for (int i = 1; i <= n; ++i) s[i] = s[i - 1] + 0.5 * h * (speed((i - 1) * h) + speed(i * h));

    ElectrodeArray a;
    a.name = "spiral";
    int j = 0;
    for (int e = 0; e < kArrayElectrodes; ++e) {
        const double target = s[n] * e / (kArrayElectrodes - 1);
        while (j < n && s[j + 1] < target) ++j;
        double phi = phi_max;
        if (j < n) {
            const double frac = (target - s[j]) / (s[j + 1] - s[j]);
            phi = (j + frac) * h;
        }
        const double r = r0 + pitch * phi;
        a.positions.push_back({r * std::cos(phi), r * std::sin(phi)});
    }
    return a;
}

ElectrodeArray array_by_name(const std::string& name) {
    if (name == "pentagon") return build_pentagon_array();
    if (name == "spiral") return build_spiral_array();
    throw PreconditionError("unknown electrode array: " + name + " (expected pentagon or spiral)");
}

Footprint footprint(const ElectrodeArray& array) {
    return {array.center(), array.max_radius_mm() + kFootprintMarginMm};
}

Mask footprint_mask(const GridGeometry& grid, const Footprint& fp) {
    Mask m(grid.rows, grid.cols, false);
    for (int r = 0; r < grid.rows; ++r)
        for (int c = 0; c < grid.cols; ++c) m.set(r, c, norm(grid.cell_center(r, c) - fp.center) <= fp.radius_mm);
    return m;
}

Registration register_array(const ElectrodeArray& array, const GridGeometry& grid, double margin_mm) {
    Registration reg;
    reg.pose = array.pose;
    // Sheet edges sit half a cell beyond the outer cell centres.
    const double half = 0.5 * grid.pitch_mm;
    const double xmin = grid.x0_mm - half, xmax = grid.x0_mm + (grid.cols - 1) * grid.pitch_mm + half;
    const double ymin = grid.y0_mm - half, ymax = grid.y0_mm + (grid.rows - 1) * grid.pitch_mm + half;
    for (std::size_t e = 0; e < array.size(); ++e) {
        const Vec2 p = array.pose.apply(array.positions[e]);
        if (p.x < xmin + margin_mm || p.x > xmax - margin_mm || p.y < ymin + margin_mm || p.y > ymax - margin_mm) {
            std::ostringstream msg;
            msg << "electrode " << e << " at (" << p.x << ", " << p.y << ") mm lies outside the sheet or within "
                << margin_mm << " mm of its edge";
            throw RegistrationError(static_cast<int>(e), msg.str());
        }
        reg.tissue_mm.push_back(p);
        reg.grid_coords.push_back(grid.to_index(p));
    }
    return reg;
}

}  // namespace deap::sensing
