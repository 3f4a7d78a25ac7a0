#pragma once

#include <cstdint>
#include <string>

#include "deap/tissue/episode.hpp"

namespace deap::tissue {

/// Randomised re-entry induction. Candidates that do not classify as
/// fibrillation are expected to be discarded by the caller.
struct CorpusOptions {
    double duration_ms = 2000.0;
    double warmup_min_ms = 400.0;
    double warmup_max_ms = 600.0;
    double s2_delay_min_ms = 146.0;
    double s2_delay_max_ms = 158.0;
    double extent_min = 0.35;
    double extent_max = 0.65;
    double figure_of_eight_prob = 0.25;
    double heterogeneity_prob = 0.5;
    int patches_min = 3;
    int patches_max = 8;
    double severity_min = 0.3;
    double severity_max = 0.8;
    int nx = 128;
    int ny = 128;
    double dx_mm = 0.25;
};

void to_json(nlohmann::json& j, const CorpusOptions& o);
void from_json(const nlohmann::json& j, CorpusOptions& o);

struct EpisodePlan {
    std::string id;
    std::uint64_t seed = 0;
    StimulusProtocol protocol;
    TissueSpec tissue;
    ModelParams params;
    double warmup_ms = 0.0;
    double duration_ms = 0.0;
};

/// Candidate `attempt` of a corpus: a cross-field S2 (or a mid-band S2 giving a
/// figure-of-eight) under a random square symmetry, optionally on patchy
/// tissue. Deterministic in (corpus_seed, attempt).
EpisodePlan plan_fibrillation_episode(std::uint64_t corpus_seed, int attempt, const CorpusOptions& opt = {},
                                      const ModelParams& params = {});

Episode run_plan(const EpisodePlan& plan);

}  // namespace deap::tissue
