#pragma once

#include <filesystem>

#include "deap/nn/dataset.hpp"
#include "deap/nn/network.hpp"
#include "deap/sensing/roi.hpp"

namespace deap::nn {

/// Trained weights with everything needed to apply them to a new recording.
struct ReconstructionModel {
    Architecture arch;
    NormStats norm;
    Blobs weights;
    nlohmann::json manifest;  ///< training seed, split, config, history, build id

    std::size_t parameter_count() const;
    Network<float> network() const;
};

/// Weight file: "DEAP" | u16 version | "NNWT" | u32 n_blobs, then per blob
/// u32 name length, name bytes, u64 count and count little-endian f64 values.
/// The JSON manifest (architecture, normalisation, training record) sits
/// beside it as <stem>.json.
void save_model(const std::filesystem::path& path, const ReconstructionModel& model);
ReconstructionModel load_model(const std::filesystem::path& path);

/// Frame i of the result is the estimate at sample i + window/2.
inline int frame_offset(const Architecture& a) { return a.window / 2; }

/// Sliding-window inference at 1 ms stride on the recording's ROI grid;
/// n_frames = n_samples - window + 1. Deterministic for any thread count.
Movie infer_roi_movie(const ReconstructionModel& model, const sensing::EgmRecording& rec);

/// ROI estimate mapped back onto a tissue grid inside the footprint; other
/// cells are NaN.
Movie infer_movie(const ReconstructionModel& model, const sensing::EgmRecording& rec, const GridGeometry& tissue);

}  // namespace deap::nn
