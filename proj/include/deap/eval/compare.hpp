#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "deap/baseline/activation.hpp"
#include "deap/baseline/template.hpp"
#include "deap/nn/dataset.hpp"
#include "deap/nn/model.hpp"
#include "deap/phase/pvi.hpp"

namespace deap::eval {

struct CompareOptions {
    int pvi_radius = 3;
    baseline::DetectionOptions detection;
    baseline::ApTemplate ap;
    /// Score the truth itself in place of the learned estimate.
    bool truth_as_estimate = false;
};

/// One held-out recording. Frame metrics are means over frames of the
/// in-mask RMSE and Pearson correlation; PS error is the distance in cells
/// between the mean positions of the dominant truth and estimate tracks
/// (NaN when either has none).
struct EpisodeScore {
    std::string episode_id;
    std::string recording_id;
    bool ok = true;
    std::string failure;
    std::string label;
    double cycle_length_ms = 0.0;
    std::size_t mask_cells = 0;
    double ssim_deap = 0.0;
    double ssim_baseline = 0.0;
    double rmse_deap = 0.0;
    double rmse_baseline = 0.0;
    double corr_deap = 0.0;
    double corr_baseline = 0.0;
    double ps_error_deap = 0.0;
    double ps_error_baseline = 0.0;
};

struct Quartiles {
    double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0, mean = 0.0;
    std::size_t n = 0;
};

/// Linear-interpolated quartiles of the finite values.
Quartiles quartiles(std::vector<double> v);

struct ComparisonReport {
    std::vector<EpisodeScore> rows;
    int pvi_radius = 3;
    bool truth_as_estimate = false;

    std::vector<const EpisodeScore*> succeeded() const;
    double mean_ssim_deap() const;
    double mean_ssim_baseline() const;
    /// Share of successful rows where the learned estimate scores higher.
    double win_rate() const;
    nlohmann::json to_json() const;
    void write_csv(const std::filesystem::path& path) const;
};

/// Products of scoring one estimate against the truth on a shared mask.
struct MapPair {
    phase::PviMap truth;
    phase::PviMap estimate;
};

/// Baseline pseudo-Vm on the recording's ROI grid.
Movie baseline_roi_movie(const sensing::EgmRecording& rec, int grid, const CompareOptions& opt = {});

/// Scores aligned movies (same geometry and frame count) on `footprint`
/// intersected with the cells where all three pvi maps are defined.
EpisodeScore score_movies(const Movie& truth, const Movie& deap, const Movie& base, const Mask& footprint,
                          const CompareOptions& opt = {}, MapPair* deap_maps = nullptr,
                          MapPair* base_maps = nullptr);

/// Runs sensing-side pipelines for each held-out recording: baseline
/// mapping and learned inference, pvi on both and on the truth, SSIM, frame
/// metrics and PS error. Failures are recorded in the row and the run goes on.
ComparisonReport compare_pipelines(const std::vector<const nn::SensedEpisode*>& episodes,
                                   const nn::ReconstructionModel& model, const CompareOptions& opt = {});

/// Keeps frames [offset, offset + n) of a movie.
Movie crop_frames(const Movie& m, int offset, int n);

}  // namespace deap::eval
