#include "deap/sensing/forward.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "deap/core/error.hpp"
#include "deap/core/parallel.hpp"
#include "deap/core/rng.hpp"
#include "deap/io/container.hpp"
#include "deap/io/files.hpp"

namespace deap::sensing {

void to_json(nlohmann::json& j, const NoiseSpec& n) {
    // JSON has no infinity; a null SNR means noise off.
    j = nlohmann::json{{"snr_db", n.has_white_noise() ? nlohmann::json(n.snr_db) : nlohmann::json(nullptr)},
                       {"line_amplitude", n.line_amplitude},
                       {"line_hz", n.line_hz}};
}

void from_json(const nlohmann::json& j, NoiseSpec& n) {
    NoiseSpec d;
    if (j.contains("snr_db"))
        n.snr_db = j.at("snr_db").is_null() ? std::numeric_limits<double>::infinity() : j.at("snr_db").get<double>();
    else
        n.snr_db = d.snr_db;
    n.line_amplitude = j.value("line_amplitude", d.line_amplitude);
    n.line_hz = j.value("line_hz", d.line_hz);
}

nlohmann::json EgmRecording::sidecar() const {
    return nlohmann::json{{"kind", "egm"},
                          {"episode_id", episode_id},
                          {"array", array},
                          {"n_channels", n_channels},
                          {"n_samples", n_samples},
                          {"fs_hz", fs_hz},
                          {"noise", noise},
                          {"measured_snr_db", std::isfinite(measured_snr_db) ? nlohmann::json(measured_snr_db)
                                                                              : nlohmann::json(nullptr)},
                          {"noise_seed", noise_seed}};
}

std::vector<double> clean_potentials(const Movie& vm, std::span<const Vec2> sites_mm, double height_mm,
                                     double gain) {
    require(height_mm > 0.0, "clean_potentials: height_mm must be > 0");
    const GridGeometry& g = vm.geom;
    const std::size_t n_cells = g.cells();
    const int n_e = static_cast<int>(sites_mm.size());

    // Row e holds -gain / dist3d(e, cell); the dx^2 of the source term cancels
    // the 1/dx^2 of the Laplacian, leaving sums of neighbour differences.
    Eigen::MatrixXd weights(n_e, static_cast<Eigen::Index>(n_cells));
    for (int e = 0; e < n_e; ++e)
        for (int r = 0; r < g.rows; ++r)
            for (int c = 0; c < g.cols; ++c) {
                const Vec2 d = g.cell_center(r, c) - sites_mm[e];
                const double dist = std::sqrt(d.x * d.x + d.y * d.y + height_mm * height_mm);
                weights(e, static_cast<Eigen::Index>(g.index(r, c))) = -gain / dist;
            }

    std::vector<double> out(static_cast<std::size_t>(n_e) * vm.n_frames, 0.0);
    parallel_for(static_cast<std::size_t>(vm.n_frames), [&](std::size_t t) {
        const auto f = vm.frame(static_cast<int>(t));
        Eigen::VectorXd lap(static_cast<Eigen::Index>(n_cells));
        for (int r = 0; r < g.rows; ++r)
            for (int c = 0; c < g.cols; ++c) {
                const double u = f[g.index(r, c)];
                double s = 0.0;
                // No-flux: a missing neighbour contributes a zero difference.
                if (r > 0) s += f[g.index(r - 1, c)] - u;
                if (r + 1 < g.rows) s += f[g.index(r + 1, c)] - u;
                if (c > 0) s += f[g.index(r, c - 1)] - u;
                if (c + 1 < g.cols) s += f[g.index(r, c + 1)] - u;
                lap[static_cast<Eigen::Index>(g.index(r, c))] = s;
            }
        const Eigen::VectorXd phi = weights * lap;
        for (int e = 0; e < n_e; ++e) out[static_cast<std::size_t>(e) * vm.n_frames + t] = phi[e];
    });
    return out;
}

double add_noise(EgmRecording& rec, const NoiseSpec& noise, std::uint64_t seed) {
    rec.noise = noise;
    rec.noise_seed = seed;
    rec.measured_snr_db = std::numeric_limits<double>::infinity();
    if (rec.n_channels == 0 || rec.n_samples == 0) return rec.measured_snr_db;

    double signal_power = 0.0;
    for (int ch = 0; ch < rec.n_channels; ++ch) {
        const auto x = rec.channel(ch);
        double mean = 0.0;
        for (double v : x) mean += v;
        mean /= x.size();
        for (double v : x) signal_power += (v - mean) * (v - mean);
    }
    signal_power /= static_cast<double>(rec.traces.size());

    if (noise.has_white_noise()) {
        const double sigma = std::sqrt(signal_power / std::pow(10.0, noise.snr_db / 10.0));
        double noise_power = 0.0;
        for (int ch = 0; ch < rec.n_channels; ++ch) {
            Rng rng(Rng::derive(seed, static_cast<std::uint64_t>(ch)));
            for (double& v : rec.channel(ch)) {
                const double n = sigma * rng.normal();
                v += n;
                noise_power += n * n;
            }
        }
        noise_power /= static_cast<double>(rec.traces.size());
        if (noise_power > 0.0 && signal_power > 0.0)
            rec.measured_snr_db = 10.0 * std::log10(signal_power / noise_power);
    }
    if (noise.line_amplitude != 0.0) {
        const double w = 2.0 * std::numbers::pi * noise.line_hz / rec.fs_hz;
        for (int ch = 0; ch < rec.n_channels; ++ch) {
            auto x = rec.channel(ch);
            for (int t = 0; t < rec.n_samples; ++t) x[t] += noise.line_amplitude * std::sin(w * t);
        }
    }
    return rec.measured_snr_db;
}

EgmRecording forward_egm(const Movie& vm, const std::string& episode_id, const ElectrodeArray& array,
                         const NoiseSpec& noise, std::uint64_t seed) {
    require(std::abs(vm.dt_ms - 1.0) < 1e-9, "forward_egm: movie must be sampled at 1 ms");
    const Registration reg = register_array(array, vm.geom);
    EgmRecording rec;
    rec.n_channels = static_cast<int>(array.size());
    rec.n_samples = vm.n_frames;
    rec.fs_hz = 1000.0;
    rec.episode_id = episode_id;
    rec.array = array;
    rec.traces = clean_potentials(vm, reg.tissue_mm, array.height_mm);
    add_noise(rec, noise, seed);
    return rec;
}

EgmRecording forward_egm(const tissue::Episode& episode, const ElectrodeArray& array, const NoiseSpec& noise,
                         std::uint64_t seed) {
    return forward_egm(episode.vm, episode.id, array, noise, seed);
}

double calibrate_forward_gain() {
    const tissue::Episode ep = tissue::run_episode(tissue::plane_wave_protocol(tissue::Side::Left, 5.0),
                                                   tissue::ModelParams{}, tissue::TissueSpec{}, 0, 500.0,
                                                   "calibration");
    const Vec2 probe{0.0, 0.0};
    const auto phi = clean_potentials(ep.vm, std::span<const Vec2>(&probe, 1), 1.0, 1.0);
    const auto [lo, hi] = std::minmax_element(phi.begin(), phi.end());
    return *hi - *lo;
}

namespace {
std::filesystem::path payload_path(const std::filesystem::path& dir, const std::string& id) {
    return dir / (id + ".egm.deap");
}
std::filesystem::path sidecar_path(const std::filesystem::path& dir, const std::string& id) {
    return dir / (id + ".egm.json");
}
}  // namespace

void save_recording(const std::filesystem::path& dir, const std::string& id, const EgmRecording& rec) {
    io::ensure_directory(dir);
    io::ContainerHeader h;
    h.nx = static_cast<std::uint32_t>(rec.n_samples);
    h.ny = static_cast<std::uint32_t>(rec.n_channels);
    h.n_frames = 1;
    h.dt_ms = static_cast<float>(1000.0 / rec.fs_hz);
    h.dx_mm = 0.0f;
    std::vector<float> payload(rec.traces.begin(), rec.traces.end());
    io::write_container(payload_path(dir, id), h, payload);
    auto side = rec.sidecar();
    side["id"] = id;
    io::write_json(sidecar_path(dir, id), side);
}

EgmRecording load_recording(const std::filesystem::path& dir, const std::string& id) {
    const auto c = io::read_container(payload_path(dir, id));
    const auto side = io::read_json(sidecar_path(dir, id));
    EgmRecording rec;
    try {
        rec.n_samples = static_cast<int>(c.header.nx);
        rec.n_channels = static_cast<int>(c.header.ny);
        if (c.header.n_frames != 1) throw FormatError("EGM container must hold one frame");
        if (side.at("n_channels").get<int>() != rec.n_channels || side.at("n_samples").get<int>() != rec.n_samples)
            throw FormatError("EGM sidecar shape disagrees with payload");
        rec.fs_hz = side.value("fs_hz", 1000.0);
        rec.episode_id = side.value("episode_id", std::string{});
        rec.array = side.at("array").get<ElectrodeArray>();
        rec.noise = side.value("noise", NoiseSpec{});
        const auto& m = side.at("measured_snr_db");
        rec.measured_snr_db = m.is_null() ? std::numeric_limits<double>::infinity() : m.get<double>();
        rec.noise_seed = side.value("noise_seed", std::uint64_t{0});
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("bad EGM sidecar " + sidecar_path(dir, id).string() + ": " + e.what());
    }
    if (static_cast<int>(rec.array.size()) != rec.n_channels)
        throw FormatError("EGM sidecar array size disagrees with channel count");
    rec.traces.assign(c.payload.begin(), c.payload.end());
    return rec;
}

void export_recording_csv(const std::filesystem::path& path, const EgmRecording& rec) {
    std::vector<std::string> header{"t_ms"};
    for (int ch = 0; ch < rec.n_channels; ++ch) header.push_back("e" + std::to_string(ch));
    std::vector<std::vector<std::string>> rows;
    rows.reserve(rec.n_samples);
    for (int t = 0; t < rec.n_samples; ++t) {
        std::vector<std::string> row{io::format_double(t * 1000.0 / rec.fs_hz)};
        for (int ch = 0; ch < rec.n_channels; ++ch)
            row.push_back(io::format_double(rec.traces[static_cast<std::size_t>(ch) * rec.n_samples + t], 8));
        rows.push_back(std::move(row));
    }
    io::write_csv(path, header, rows);
}

}  // namespace deap::sensing
