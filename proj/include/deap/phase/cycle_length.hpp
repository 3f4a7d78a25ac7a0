#pragma once

#include <string>
#include <vector>

#include "deap/core/grid.hpp"

namespace deap::phase {

/// Episodes with a dominant cycle longer than this are atrial tachycardia and
/// are excluded from fibrillation analysis.
inline constexpr double kTachycardiaCycleMs = 200.0;
inline constexpr double kMinAutocorrPeak = 0.3;
inline constexpr double kMinCycleDurationMs = 1000.0;

enum class RhythmClass { Fibrillation, Tachycardia, Unclassifiable };

std::string to_string(RhythmClass c);

struct CycleLengthResult {
    RhythmClass rhythm = RhythmClass::Unclassifiable;
    double cycle_length_ms = 0.0;
    double peak = 0.0;  ///< normalized autocorrelation at the chosen lag
};

/// Normalized autocorrelation r[k], k = 0..max_lag, of a mean-subtracted
/// series. Empty when the series has zero variance.
std::vector<double> autocorrelation(const std::vector<double>& series, int max_lag);

/// Dominant cycle length from the first prominent autocorrelation peak of the
/// spatially averaged, mean-subtracted Vm. Requires >= 1 s of frames.
CycleLengthResult cycle_length_filter(const Movie& vm);

}  // namespace deap::phase
