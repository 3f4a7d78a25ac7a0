#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "deap/core/grid.hpp"
#include "deap/tissue/model.hpp"
#include "deap/tissue/protocol.hpp"

namespace deap::tissue {

enum class RhythmLabel { Sinus, Fibrillation, Tachycardia, NonCapture };

std::string to_string(RhythmLabel l);
RhythmLabel rhythm_label_from_string(const std::string& s);

/// Sheet description; the diffusion map is generated from the episode seed
/// unless given explicitly.
struct TissueSpec {
    int nx = 128;
    int ny = 128;
    double dx_mm = 0.25;
    int n_patches = 0;
    double severity = 0.0;
    std::optional<std::vector<double>> diffusion;
};

void to_json(nlohmann::json& j, const TissueSpec& s);
void from_json(const nlohmann::json& j, TissueSpec& s);

inline constexpr double kMinEpisodeMs = 500.0;

/// Simulated recording. vm holds u min-max normalised per episode to [0, 1]
/// at exactly 1 ms per frame; frame i is the state at t = warmup_ms + i ms,
/// with stimulus onsets measured from the start of the simulation.
struct Episode {
    std::string id;
    std::uint64_t seed = 0;
    ModelParams params;
    TissueSpec tissue;
    StimulusProtocol protocol;
    Movie vm;
    RhythmLabel label = RhythmLabel::Sinus;
    bool non_capture = false;
    double cycle_length_ms = 0.0;
    double u_min = 0.0;
    double u_max = 0.0;
    int steps_per_ms = 1;
    double warmup_ms = 0.0;

    nlohmann::json sidecar() const;
};

/// Integration steps per millisecond: the smallest count whose step satisfies
/// the stability bound and stays <= 0.05 time units.
int steps_per_ms(const TissueGrid& grid, const ModelParams& params);

/// Deterministic in (protocol, params, tissue, seed). The first warmup_ms are
/// simulated but not recorded, so induction transients can be skipped.
Episode run_episode(const StimulusProtocol& protocol, const ModelParams& params, const TissueSpec& tissue,
                    std::uint64_t seed, double duration_ms, std::string id = "episode", double warmup_ms = 0.0);

/// Writes <dir>/<id>.deap and <dir>/<id>.json.
void save_episode(const std::filesystem::path& dir, const Episode& ep);
Episode load_episode(const std::filesystem::path& dir, const std::string& id);

}  // namespace deap::tissue
