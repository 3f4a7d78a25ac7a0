#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include "deap/core/error.hpp"
#include "deap/nn/train.hpp"
#include "deap/sensing/array.hpp"
#include "deap/sensing/forward.hpp"
#include "deap/tissue/corpus.hpp"
#include "deap/tissue/model.hpp"
#include "json.hpp"

namespace deap::cli {

/// A config field that is unknown or does not parse. `field` is the
/// section.key path.
class ConfigError : public Error {
public:
    ConfigError(std::string field, const std::string& what)
        : Error("config field '" + field + "': " + what), field_(std::move(field)) {}
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

struct SimulateConfig {
    int n_episodes = 40;
    /// fibrillation | s1s2 | plane | pacing | burst | rest
    std::string protocol = "fibrillation";
    double duration_ms = 2000.0;
    double warmup_ms = 0.0;  ///< non-corpus protocols
    double pacing_cycle_ms = 250.0;
    double s2_delay_ms = 152.0;
    int max_attempts_factor = 4;
    tissue::CorpusOptions corpus;
};

struct SensingConfig {
    std::string array = "pentagon";
    double height_mm = 1.0;
    sensing::Pose pose;
    /// Per-recording random rotation and shift; `pose` is then ignored.
    bool random_pose = true;
    double max_shift_mm = 1.5;
    int poses_per_episode = 1;
    sensing::NoiseSpec noise;
};

struct DatasetConfig {
    std::uint64_t split_seed = 11;
};

struct EvalConfig {
    int pvi_radius = 3;
    bool truth_as_estimate = false;
    double isochrone_window_ms = 150.0;
    double isochrone_step_ms = 10.0;
};

struct BaselineConfig {
    double blanking_ms = 50.0;
    double threshold_fraction = 0.4;
    double apd90_ms = 120.0;
};

/// Effective configuration of a run. Every field has a default; an INI file
/// and then command-line overrides are layered on top.
struct RunConfig {
    std::uint64_t seed = 1;
    std::filesystem::path out = "run";
    int threads = 0;  ///< 0 keeps the process default
    tissue::ModelParams model;
    SimulateConfig simulate;
    SensingConfig sensing;
    BaselineConfig baseline;
    DatasetConfig dataset;
    nn::TrainConfig train;
    EvalConfig eval;

    nlohmann::json to_json() const;
    /// SHA-256 of the canonical JSON form.
    std::string hash() const;
};

/// section.key -> value
using Overrides = std::map<std::string, std::string>;

/// Defaults, then the INI file (if any), then overrides. Unknown keys and
/// malformed values raise ConfigError naming the field.
RunConfig load_config(const std::filesystem::path& ini, const Overrides& overrides = {});
RunConfig config_from_json(const nlohmann::json& j);

/// Parses "section.key=value".
std::pair<std::string, std::string> parse_override(const std::string& s);

/// Keys understood by load_config, as section.key.
std::vector<std::string> known_fields();

}  // namespace deap::cli
