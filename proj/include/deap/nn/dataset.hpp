#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "deap/nn/layers.hpp"
#include "deap/sensing/forward.hpp"
#include "deap/sensing/roi.hpp"
#include "deap/tissue/episode.hpp"
#include "json.hpp"

namespace deap::nn {

inline constexpr int kWindow = 96;
inline constexpr int kTrainStride = 4;
inline constexpr int kEvalStride = 1;
inline constexpr std::size_t kMinEpisodes = 10;

/// One recording paired with its ground truth on the ROI grid. Several
/// recordings (poses) may share one source episode.
struct SensedEpisode {
    std::string episode_id;
    std::string recording_id;
    tissue::RhythmLabel label = tissue::RhythmLabel::Sinus;
    double cycle_length_ms = 0.0;
    sensing::EgmRecording rec;
    Movie target;  ///< ROI grid, array-local frame, 1 ms frames
};

/// Forward model plus ROI resampling of the truth. The tissue movie is not
/// retained.
SensedEpisode sense_episode(const tissue::Episode& episode, const sensing::ElectrodeArray& array,
                            const sensing::NoiseSpec& noise, std::uint64_t noise_seed, std::string recording_id,
                            int roi_size = sensing::kRoiSize);

/// Per-channel z-score statistics.
struct NormStats {
    std::vector<double> mean;
    std::vector<double> sd;
};

void to_json(nlohmann::json& j, const NormStats& n);
void from_json(const nlohmann::json& j, NormStats& n);

/// Episode-level assignment; val and test take floor(15%) each.
struct DatasetSplit {
    std::uint64_t seed = 0;
    std::vector<std::string> train;
    std::vector<std::string> val;
    std::vector<std::string> test;
    std::vector<std::string> excluded;  ///< not fibrillation
    int train_stride = kTrainStride;
    int eval_stride = kEvalStride;

    /// Throws if any id appears in two splits.
    void validate() const;
};

void to_json(nlohmann::json& j, const DatasetSplit& s);
void from_json(const nlohmann::json& j, DatasetSplit& s);

/// Deterministic shuffle of the sorted unique ids, then val, test, train.
DatasetSplit split_episodes(std::vector<std::string> episode_ids, std::uint64_t seed);

struct WindowRef {
    int item = 0;
    int start = 0;  ///< first sample; the target is frame start + window/2
};

struct Dataset {
    DatasetSplit split;
    NormStats norm;
    int window = kWindow;
    int channels = 0;
    int grid = 0;
    std::vector<SensedEpisode> items;
    std::vector<std::vector<float>> inputs;  ///< z-scored traces per item, channel-major
    std::vector<int> train_items, val_items, test_items;

    std::vector<WindowRef> windows(const std::vector<int>& item_ids, int stride) const;
    /// Columns of x are flattened 20 x W inputs, columns of y G x G targets.
    template <typename T>
    void fill_batch(const std::vector<WindowRef>& refs, std::size_t begin, std::size_t end, Mat<T>& x,
                    Mat<T>& y) const;
};

/// Drops non-fibrillation items (recorded in split.excluded), refuses fewer
/// than 10 source episodes, splits by source episode and z-scores with
/// train-only statistics.
Dataset build_dataset(std::vector<SensedEpisode> items, std::uint64_t split_seed, int window = kWindow);

NormStats compute_norm(const std::vector<const sensing::EgmRecording*>& recs);
std::vector<float> normalise(const sensing::EgmRecording& rec, const NormStats& norm);

}  // namespace deap::nn
