#include "deap/nn/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "deap/core/error.hpp"
#include "deap/core/rng.hpp"

namespace deap::nn {

SensedEpisode sense_episode(const tissue::Episode& episode, const sensing::ElectrodeArray& array,
                            const sensing::NoiseSpec& noise, std::uint64_t noise_seed, std::string recording_id,
                            int roi_size) {
    SensedEpisode s;
    s.episode_id = episode.id;
    s.recording_id = std::move(recording_id);
    s.label = episode.label;
    s.cycle_length_ms = episode.cycle_length_ms;
    s.rec = sensing::forward_egm(episode, array, noise, noise_seed);
    s.target = sensing::resample_to_roi(episode.vm, sensing::make_roi(array, roi_size));
    return s;
}

void to_json(nlohmann::json& j, const NormStats& n) { j = nlohmann::json{{"mean", n.mean}, {"sd", n.sd}}; }

void from_json(const nlohmann::json& j, NormStats& n) {
    n.mean = j.at("mean").get<std::vector<double>>();
    n.sd = j.at("sd").get<std::vector<double>>();
    if (n.mean.size() != n.sd.size()) throw FormatError("normalisation stats: mean/sd length mismatch");
}

void DatasetSplit::validate() const {
    std::set<std::string> seen;
    for (const auto* part : {&train, &val, &test})
        for (const auto& id : *part)
            if (!seen.insert(id).second) throw PreconditionError("episode " + id + " appears in more than one split");
}

void to_json(nlohmann::json& j, const DatasetSplit& s) {
    j = nlohmann::json{{"seed", s.seed},     {"train", s.train},       {"val", s.val},
                       {"test", s.test},     {"excluded", s.excluded}, {"train_stride", s.train_stride},
                       {"eval_stride", s.eval_stride}};
}

void from_json(const nlohmann::json& j, DatasetSplit& s) {
    s.seed = j.at("seed").get<std::uint64_t>();
    s.train = j.at("train").get<std::vector<std::string>>();
    s.val = j.at("val").get<std::vector<std::string>>();
    s.test = j.at("test").get<std::vector<std::string>>();
    s.excluded = j.value("excluded", std::vector<std::string>{});
    s.train_stride = j.value("train_stride", kTrainStride);
    s.eval_stride = j.value("eval_stride", kEvalStride);
}

DatasetSplit split_episodes(std::vector<std::string> ids, std::uint64_t seed) {
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    if (ids.size() < kMinEpisodes)
        throw PreconditionError("dataset needs at least " + std::to_string(kMinEpisodes) + " episodes, got " +
                                std::to_string(ids.size()));
    Rng rng(seed);
    for (std::size_t i = ids.size(); i > 1; --i) std::swap(ids[i - 1], ids[rng.below(i)]);
    const std::size_t n_val = ids.size() * 15 / 100;
    const std::size_t n_test = ids.size() * 15 / 100;
    DatasetSplit s;
    s.seed = seed;
    s.val.assign(ids.begin(), ids.begin() + n_val);
    s.test.assign(ids.begin() + n_val, ids.begin() + n_val + n_test);
    s.train.assign(ids.begin() + n_val + n_test, ids.end());
    for (auto* part : {&s.train, &s.val, &s.test}) std::sort(part->begin(), part->end());
    return s;
}

NormStats compute_norm(const std::vector<const sensing::EgmRecording*>& recs) {
    require(!recs.empty(), "normalisation needs at least one recording");
    const int nch = recs.front()->n_channels;
    NormStats n;
    n.mean.assign(nch, 0.0);
    n.sd.assign(nch, 0.0);
    std::vector<double> count(nch, 0.0);
    for (const auto* r : recs) {
        require(r->n_channels == nch, "normalisation: recordings differ in channel count");
        for (int ch = 0; ch < nch; ++ch)
            for (double v : r->channel(ch)) {
                n.mean[ch] += v;
                count[ch] += 1.0;
            }
    }
    for (int ch = 0; ch < nch; ++ch) n.mean[ch] /= count[ch];
    for (const auto* r : recs)
        for (int ch = 0; ch < nch; ++ch)
            for (double v : r->channel(ch)) n.sd[ch] += (v - n.mean[ch]) * (v - n.mean[ch]);
    for (int ch = 0; ch < nch; ++ch) {
        n.sd[ch] = std::sqrt(n.sd[ch] / count[ch]);
        if (!(n.sd[ch] > 0.0)) n.sd[ch] = 1.0;
    }
    return n;
}

std::vector<float> normalise(const sensing::EgmRecording& rec, const NormStats& norm) {
    if (static_cast<int>(norm.mean.size()) != rec.n_channels)
        throw PreconditionError("recording has " + std::to_string(rec.n_channels) +
                                " channels, normalisation expects " + std::to_string(norm.mean.size()));
    std::vector<float> out(rec.traces.size());
    for (int ch = 0; ch < rec.n_channels; ++ch) {
        const auto x = rec.channel(ch);
        for (int t = 0; t < rec.n_samples; ++t)
            out[static_cast<std::size_t>(ch) * rec.n_samples + t] =
                static_cast<float>((x[t] - norm.mean[ch]) / norm.sd[ch]);
    }
    return out;
}

Dataset build_dataset(std::vector<SensedEpisode> items, std::uint64_t split_seed, int window) {
    Dataset ds;
    ds.window = window;
    std::vector<std::string> kept_ids;
    std::set<std::string> excluded;
    for (auto& it : items) {
        if (it.label == tissue::RhythmLabel::Fibrillation) {
            if (it.rec.n_samples != it.target.n_frames)
                throw PreconditionError("recording " + it.recording_id + " does not match its episode length");
            if (it.rec.n_samples < window)
                throw PreconditionError("recording " + it.recording_id + " is shorter than one window");
            kept_ids.push_back(it.episode_id);
            ds.items.push_back(std::move(it));
        } else {
            excluded.insert(it.episode_id);
        }
    }
    ds.split = split_episodes(kept_ids, split_seed);
    ds.split.excluded.assign(excluded.begin(), excluded.end());
    ds.split.validate();
    require(!ds.items.empty(), "dataset is empty");
    ds.channels = ds.items.front().rec.n_channels;
    ds.grid = ds.items.front().target.geom.rows;

    const std::set<std::string> tr(ds.split.train.begin(), ds.split.train.end());
    const std::set<std::string> va(ds.split.val.begin(), ds.split.val.end());
    std::vector<const sensing::EgmRecording*> train_recs;
    for (int i = 0; i < static_cast<int>(ds.items.size()); ++i) {
        const auto& id = ds.items[i].episode_id;
        require(ds.items[i].rec.n_channels == ds.channels && ds.items[i].target.geom.rows == ds.grid &&
                    ds.items[i].target.geom.cols == ds.grid,
                "dataset items differ in shape");
        if (tr.count(id)) {
            ds.train_items.push_back(i);
            train_recs.push_back(&ds.items[i].rec);
        } else if (va.count(id)) {
            ds.val_items.push_back(i);
        } else {
            ds.test_items.push_back(i);
        }
    }
    ds.norm = compute_norm(train_recs);
    for (const auto& it : ds.items) ds.inputs.push_back(normalise(it.rec, ds.norm));
    return ds;
}

std::vector<WindowRef> Dataset::windows(const std::vector<int>& item_ids, int stride) const {
    std::vector<WindowRef> out;
    for (int i : item_ids)
        for (int s = 0; s + window <= items[i].rec.n_samples; s += stride) out.push_back({i, s});
    return out;
}

template <typename T>
void Dataset::fill_batch(const std::vector<WindowRef>& refs, std::size_t begin, std::size_t end, Mat<T>& x,
                         Mat<T>& y) const {
    const Eigen::Index n = static_cast<Eigen::Index>(end - begin);
    x.resize(static_cast<Eigen::Index>(channels) * window, n);
    y.resize(static_cast<Eigen::Index>(grid) * grid, n);
    for (Eigen::Index b = 0; b < n; ++b) {
        const WindowRef& w = refs[begin + b];
        const auto& in = inputs[w.item];
        const int ns = items[w.item].rec.n_samples;
        for (int ch = 0; ch < channels; ++ch)
            for (int t = 0; t < window; ++t)
                x(ch * window + t, b) = static_cast<T>(in[static_cast<std::size_t>(ch) * ns + w.start + t]);
        const auto frame = items[w.item].target.frame(w.start + window / 2);
        for (Eigen::Index k = 0; k < y.rows(); ++k) y(k, b) = static_cast<T>(frame[k]);
    }
}

template void Dataset::fill_batch<float>(const std::vector<WindowRef>&, std::size_t, std::size_t, Mat<float>&,
                                         Mat<float>&) const;
template void Dataset::fill_batch<double>(const std::vector<WindowRef>&, std::size_t, std::size_t, Mat<double>&,
                                          Mat<double>&) const;

}  // namespace deap::nn
