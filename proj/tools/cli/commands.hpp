#pragma once

#include "cli/config.hpp"

namespace deap::cli {

/// Run-directory layout: one subdirectory per stage, each with a manifest.
namespace stage {
inline constexpr const char* kEpisodes = "episodes";
inline constexpr const char* kRecordings = "recordings";
inline constexpr const char* kBaseline = "baseline";
inline constexpr const char* kModel = "model";
inline constexpr const char* kInferred = "inferred";
inline constexpr const char* kAnalysis = "analysis";
inline constexpr const char* kEval = "eval";
inline constexpr const char* kReport = "report";
}  // namespace stage

void cmd_simulate(const RunConfig& cfg);
void cmd_sense(const RunConfig& cfg);
void cmd_baseline(const RunConfig& cfg);
void cmd_train(const RunConfig& cfg);
/// Infers the test-split recordings, or every recording.
void cmd_infer(const RunConfig& cfg, bool all_recordings = false);
void cmd_analyze(const RunConfig& cfg);
void cmd_eval(const RunConfig& cfg);
void cmd_report(const RunConfig& cfg);

}  // namespace deap::cli
