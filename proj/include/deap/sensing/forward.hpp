#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "deap/core/grid.hpp"
#include "deap/sensing/array.hpp"
#include "deap/tissue/episode.hpp"

namespace deap::sensing {

/// Gain that gives a unit peak-to-peak deflection for a clean plane wave on
/// the default 128 x 128, 0.25 mm sheet seen from 1 mm above its centre.
/// Computed once by calibrate_forward_gain() and frozen. Negative so that the
/// passing wavefront is a positive-then-negative deflection whose steepest
/// downslope marks local activation.
inline constexpr double kForwardGain = -0.50848342430875326;

struct NoiseSpec {
    double snr_db = 20.0;  ///< infinity disables white noise
    double line_amplitude = 0.0;
    double line_hz = 50.0;

    bool has_white_noise() const { return std::isfinite(snr_db); }
};

void to_json(nlohmann::json& j, const NoiseSpec& n);
void from_json(const nlohmann::json& j, NoiseSpec& n);

/// Unipolar traces, channel-major: traces[ch * n_samples + t].
struct EgmRecording {
    int n_channels = 0;
    int n_samples = 0;
    double fs_hz = 1000.0;
    std::vector<double> traces;
    NoiseSpec noise;
    double measured_snr_db = std::numeric_limits<double>::infinity();
    std::string episode_id;
    ElectrodeArray array;  ///< geometry and pose the traces were taken with
    std::uint64_t noise_seed = 0;

    std::span<const double> channel(int ch) const {
        return {traces.data() + static_cast<std::size_t>(ch) * n_samples, static_cast<std::size_t>(n_samples)};
    }
    std::span<double> channel(int ch) {
        return {traces.data() + static_cast<std::size_t>(ch) * n_samples, static_cast<std::size_t>(n_samples)};
    }
    nlohmann::json sidecar() const;
};

/// Noise-free potentials of a movie at tissue-frame electrode sites:
///   phi(e, t) = -gain * sum_cells lap(u)(cell, t) * dx^2 / dist3d(e, cell)
/// with a no-flux 5-point Laplacian. Linear in the movie.
std::vector<double> clean_potentials(const Movie& vm, std::span<const Vec2> sites_mm, double height_mm,
                                     double gain = kForwardGain);

/// Adds white Gaussian noise at the requested SNR (relative to the mean power
/// of the mean-removed clean traces) and optional line interference.
/// Returns the measured SNR of the white-noise component.
double add_noise(EgmRecording& rec, const NoiseSpec& noise, std::uint64_t seed);

EgmRecording forward_egm(const tissue::Episode& episode, const ElectrodeArray& array, const NoiseSpec& noise,
                         std::uint64_t seed);
EgmRecording forward_egm(const Movie& vm, const std::string& episode_id, const ElectrodeArray& array,
                         const NoiseSpec& noise, std::uint64_t seed);

/// Peak-to-peak of the central probe for a simulated plane wave with unit
/// gain; |kForwardGain| is its reciprocal.
double calibrate_forward_gain();

/// <dir>/<id>.egm.deap + <id>.egm.json; csv adds one column per electrode.
void save_recording(const std::filesystem::path& dir, const std::string& id, const EgmRecording& rec);
EgmRecording load_recording(const std::filesystem::path& dir, const std::string& id);
void export_recording_csv(const std::filesystem::path& path, const EgmRecording& rec);

}  // namespace deap::sensing
