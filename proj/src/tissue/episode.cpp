#include "deap/tissue/episode.hpp"

#include <algorithm>
#include <cmath>

#include "deap/core/error.hpp"
#include "deap/io/container.hpp"
#include "deap/io/files.hpp"
#include "deap/phase/cycle_length.hpp"

namespace deap::tissue {

std::string to_string(RhythmLabel l) {
    switch (l) {
        case RhythmLabel::Sinus: return "sinus";
        case RhythmLabel::Fibrillation: return "fibrillation";
        case RhythmLabel::Tachycardia: return "tachycardia";
        case RhythmLabel::NonCapture: return "non-capture";
    }
    return "sinus";
}

RhythmLabel rhythm_label_from_string(const std::string& s) {
    if (s == "sinus") return RhythmLabel::Sinus;
    if (s == "fibrillation") return RhythmLabel::Fibrillation;
    if (s == "tachycardia") return RhythmLabel::Tachycardia;
    if (s == "non-capture") return RhythmLabel::NonCapture;
    throw FormatError("unknown rhythm label: " + s);
}

void to_json(nlohmann::json& j, const TissueSpec& s) {
    j = nlohmann::json{{"nx", s.nx},
                       {"ny", s.ny},
                       {"dx_mm", s.dx_mm},
                       {"n_patches", s.n_patches},
                       {"severity", s.severity},
                       {"explicit_diffusion", s.diffusion.has_value()}};
}

void from_json(const nlohmann::json& j, TissueSpec& s) {
    TissueSpec d;
    s.nx = j.value("nx", d.nx);
    s.ny = j.value("ny", d.ny);
    s.dx_mm = j.value("dx_mm", d.dx_mm);
    s.n_patches = j.value("n_patches", d.n_patches);
    s.severity = j.value("severity", d.severity);
}

int steps_per_ms(const TissueGrid& grid, const ModelParams& params) {
    const double limit = std::min(max_stable_dt(grid, params), 0.05);
    // dt = 1 ms / (time_scale_ms * n) in time units.
    int n = static_cast<int>(std::ceil(1.0 / (params.time_scale_ms * limit) - 1e-12));
    return std::max(n, 1);
}

nlohmann::json Episode::sidecar() const {
    return nlohmann::json{{"kind", "episode"},
                          {"id", id},
                          {"seed", seed},
                          {"params", params},
                          {"tissue", tissue},
                          {"protocol", protocol},
                          {"label", to_string(label)},
                          {"non_capture", non_capture},
                          {"cycle_length_ms", cycle_length_ms},
                          {"u_min", u_min},
                          {"u_max", u_max},
                          {"steps_per_ms", steps_per_ms},
                          {"warmup_ms", warmup_ms},
                          {"n_frames", vm.n_frames},
                          {"dt_ms", vm.dt_ms}};
}

Episode run_episode(const StimulusProtocol& protocol, const ModelParams& params, const TissueSpec& tissue,
                    std::uint64_t seed, double duration_ms, std::string id, double warmup_ms) {
    protocol.validate();
    params.validate();
    if (duration_ms < kMinEpisodeMs) throw PreconditionError("run_episode: duration_ms must be >= 500");
    require(warmup_ms >= 0.0, "run_episode: warmup_ms must be >= 0");

    TissueGrid grid = TissueGrid::resting(tissue.nx, tissue.ny, tissue.dx_mm);
    if (tissue.diffusion) {
        grid.diffusion = *tissue.diffusion;
    } else {
        grid.diffusion = make_heterogeneity(seed, tissue.n_patches, tissue.severity, tissue.nx, tissue.ny, tissue.dx_mm);
    }
    grid.validate();

    const int n_sub = steps_per_ms(grid, params);
    Stepper stepper(grid, params, 1.0 / (params.time_scale_ms * n_sub));

    std::vector<Mask> masks;
    for (const auto& e : protocol.events) masks.push_back(e.region.rasterize(grid.nx, grid.ny, grid.dx_mm));

    const int n_frames = static_cast<int>(std::floor(duration_ms));
    const std::size_t cells = grid.cells();
    Episode ep;
    ep.id = std::move(id);
    ep.seed = seed;
    ep.params = params;
    ep.tissue = tissue;
    ep.protocol = protocol;
    ep.steps_per_ms = n_sub;
    ep.warmup_ms = std::floor(warmup_ms);
    ep.vm = Movie(grid.geometry(), n_frames, 1.0);

    auto record = [&](int frame) {
        auto dst = ep.vm.frame(frame);
        for (std::size_t i = 0; i < cells; ++i) dst[i] = static_cast<float>(grid.u[i]);
    };

    const int warmup = static_cast<int>(ep.warmup_ms);
    const int total_ms = warmup + n_frames;
    if (warmup == 0) record(0);

    const double first_onset = protocol.empty() ? 0.0 : protocol.events.front().onset_ms;
    double peak_after_stim = 0.0;
    std::vector<double> stim(cells, 0.0);
    for (int ms = 0; ms + 1 < total_ms; ++ms) {
        for (int s = 0; s < n_sub; ++s) {
            const double t = ms + static_cast<double>(s) / n_sub;
            bool any = false;
            for (std::size_t e = 0; e < protocol.events.size(); ++e) {
                const auto& ev = protocol.events[e];
                if (t < ev.onset_ms || t >= ev.onset_ms + ev.duration_ms) continue;
                if (!any) std::fill(stim.begin(), stim.end(), 0.0);
                any = true;
                for (std::size_t i = 0; i < cells; ++i)
                    if (masks[e].on[i]) stim[i] += ev.amplitude;
            }
            stepper.advance(grid, any ? std::span<const double>(stim) : std::span<const double>());
        }
        if (ms + 1 >= warmup) record(ms + 1 - warmup);
        if (!protocol.empty() && ms + 1 >= first_onset) {
            peak_after_stim = std::max(peak_after_stim, *std::max_element(grid.u.begin(), grid.u.end()));
        }
    }

    // Per-episode min-max normalisation.
    const auto [lo_it, hi_it] = std::minmax_element(ep.vm.data.begin(), ep.vm.data.end());
    ep.u_min = *lo_it;
    ep.u_max = *hi_it;
    const double range = ep.u_max - ep.u_min;
    for (auto& v : ep.vm.data) {
        const double x = range > 0.0 ? (v - ep.u_min) / range : v - ep.u_min;
        v = static_cast<float>(std::clamp(x, 0.0, 1.0));
    }

    ep.non_capture = !protocol.empty() && peak_after_stim <= 0.5;
    if (ep.non_capture) {
        ep.label = RhythmLabel::NonCapture;
    } else if (n_frames * ep.vm.dt_ms >= phase::kMinCycleDurationMs) {
        const auto cl = phase::cycle_length_filter(ep.vm);
        ep.cycle_length_ms = cl.cycle_length_ms;
        switch (cl.rhythm) {
            case phase::RhythmClass::Fibrillation: ep.label = RhythmLabel::Fibrillation; break;
            case phase::RhythmClass::Tachycardia: ep.label = RhythmLabel::Tachycardia; break;
            case phase::RhythmClass::Unclassifiable: ep.label = RhythmLabel::Sinus; break;
        }
    }
    return ep;
}

void save_episode(const std::filesystem::path& dir, const Episode& ep) {
    io::ensure_directory(dir);
    io::write_movie(dir / (ep.id + ".deap"), ep.vm);
    io::write_json(dir / (ep.id + ".json"), ep.sidecar());
}

Episode load_episode(const std::filesystem::path& dir, const std::string& id) {
    const auto meta = io::read_json(dir / (id + ".json"));
    Episode ep;
    try {
        ep.id = meta.at("id").get<std::string>();
        ep.seed = meta.at("seed").get<std::uint64_t>();
        ep.params = meta.at("params").get<ModelParams>();
        ep.tissue = meta.at("tissue").get<TissueSpec>();
        ep.protocol = meta.at("protocol").get<StimulusProtocol>();
        ep.label = rhythm_label_from_string(meta.at("label").get<std::string>());
        ep.non_capture = meta.at("non_capture").get<bool>();
        ep.cycle_length_ms = meta.at("cycle_length_ms").get<double>();
        ep.u_min = meta.at("u_min").get<double>();
        ep.u_max = meta.at("u_max").get<double>();
        ep.steps_per_ms = meta.at("steps_per_ms").get<int>();
        ep.warmup_ms = meta.value("warmup_ms", 0.0);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("episode sidecar " + (dir / (id + ".json")).string() + ": " + e.what());
    }
    ep.vm = io::read_movie(dir / (id + ".deap"));
    if (ep.vm.geom.rows != ep.tissue.ny || ep.vm.geom.cols != ep.tissue.nx)
        throw FormatError("episode " + id + ": container shape does not match sidecar");
    return ep;
}

}  // namespace deap::tissue
