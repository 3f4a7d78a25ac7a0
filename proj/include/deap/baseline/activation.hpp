#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "deap/sensing/forward.hpp"

namespace deap::baseline {

inline constexpr double kBlankingMs = 50.0;
inline constexpr double kThresholdFraction = 0.4;
inline constexpr double kSilentAfterMs = 500.0;
inline constexpr double kMinTraceMs = 200.0;
inline constexpr const char* kMethodTag = "max_negative_slope";

struct DetectionOptions {
    double blanking_ms = kBlankingMs;
    double threshold_fraction = kThresholdFraction;
    /// Half-width of the least-squares slope estimator.
    int slope_halfwidth = 5;
    /// Lower bound on the threshold in units of the slope noise, estimated
    /// from the MAD of second differences, so pure noise does not trigger.
    double noise_floor_sigmas = 5.0;
};

struct ChannelActivations {
    std::vector<double> times_ms;  ///< strictly increasing, sample-aligned
    double threshold = 0.0;        ///< |d phi/dt| threshold used, per ms
    bool silent = false;
};

/// Per-electrode activation times of one recording.
struct ActivationTable {
    std::vector<ChannelActivations> channels;
    double blanking_ms = kBlankingMs;
    double threshold_fraction = kThresholdFraction;
    std::string method = kMethodTag;
    double fs_hz = 1000.0;
    int n_samples = 0;

    std::size_t silent_count() const;
    nlohmann::json summary() const;
};

/// Least-squares slope over 2*halfwidth+1 samples, per ms; samples whose
/// window does not fit are 0. halfwidth 1 is the central difference.
std::vector<double> derivative(std::span<const double> x, double fs_hz, int halfwidth = 1);

/// Robust white-noise sigma of a trace from the MAD of its second differences.
double noise_sigma(std::span<const double> x);

/// Activations at local minima of d phi/dt that fall below
///   -max(fraction * robust_max, noise_floor_sigmas * slope_noise)
/// where robust_max is the median magnitude of the strongest local minima
/// (one per 250 ms of trace). Candidates are accepted strongest first and
/// suppress anything within blanking_ms.
ChannelActivations detect_channel(std::span<const double> x, double fs_hz, const DetectionOptions& opt = {});

ActivationTable detect_activations(const sensing::EgmRecording& rec, const DetectionOptions& opt = {});

/// electrode,time_ms rows.
void write_activation_csv(const std::filesystem::path& path, const ActivationTable& table);
ActivationTable read_activation_csv(const std::filesystem::path& path, int n_channels, int n_samples,
                                    double fs_hz = 1000.0);

}  // namespace deap::baseline
