#include "deap/tissue/corpus.hpp"

#include <cstdio>

#include "deap/core/rng.hpp"

namespace deap::tissue {

void to_json(nlohmann::json& j, const CorpusOptions& o) {
    j = nlohmann::json{{"duration_ms", o.duration_ms},
                       {"warmup_min_ms", o.warmup_min_ms},
                       {"warmup_max_ms", o.warmup_max_ms},
                       {"s2_delay_min_ms", o.s2_delay_min_ms},
                       {"s2_delay_max_ms", o.s2_delay_max_ms},
                       {"extent_min", o.extent_min},
                       {"extent_max", o.extent_max},
                       {"figure_of_eight_prob", o.figure_of_eight_prob},
                       {"heterogeneity_prob", o.heterogeneity_prob},
                       {"patches_min", o.patches_min},
                       {"patches_max", o.patches_max},
                       {"severity_min", o.severity_min},
                       {"severity_max", o.severity_max},
                       {"nx", o.nx},
                       {"ny", o.ny},
                       {"dx_mm", o.dx_mm}};
}

void from_json(const nlohmann::json& j, CorpusOptions& o) {
    CorpusOptions d;
    o.duration_ms = j.value("duration_ms", d.duration_ms);
    o.warmup_min_ms = j.value("warmup_min_ms", d.warmup_min_ms);
    o.warmup_max_ms = j.value("warmup_max_ms", d.warmup_max_ms);
    o.s2_delay_min_ms = j.value("s2_delay_min_ms", d.s2_delay_min_ms);
    o.s2_delay_max_ms = j.value("s2_delay_max_ms", d.s2_delay_max_ms);
    o.extent_min = j.value("extent_min", d.extent_min);
    o.extent_max = j.value("extent_max", d.extent_max);
    o.figure_of_eight_prob = j.value("figure_of_eight_prob", d.figure_of_eight_prob);
    o.heterogeneity_prob = j.value("heterogeneity_prob", d.heterogeneity_prob);
    o.patches_min = j.value("patches_min", d.patches_min);
    o.patches_max = j.value("patches_max", d.patches_max);
    o.severity_min = j.value("severity_min", d.severity_min);
    o.severity_max = j.value("severity_max", d.severity_max);
    o.nx = j.value("nx", d.nx);
    o.ny = j.value("ny", d.ny);
    o.dx_mm = j.value("dx_mm", d.dx_mm);
}

EpisodePlan plan_fibrillation_episode(std::uint64_t corpus_seed, int attempt, const CorpusOptions& opt,
                                      const ModelParams& params) {
    EpisodePlan plan;
    plan.seed = Rng::derive(corpus_seed, static_cast<std::uint64_t>(attempt));
    Rng rng(plan.seed);
    char id[32];
    std::snprintf(id, sizeof id, "ep%04d", attempt);
    plan.id = id;
    plan.params = params;
    plan.duration_ms = opt.duration_ms;
    plan.warmup_ms = rng.uniform(opt.warmup_min_ms, opt.warmup_max_ms);

    const double delay = rng.uniform(opt.s2_delay_min_ms, opt.s2_delay_max_ms);
    const double ex = rng.uniform(opt.extent_min, opt.extent_max);
    const double ey = rng.uniform(opt.extent_min, opt.extent_max);
    StimulusProtocol p = s1s2_protocol(delay, ex, ey);
    if (rng.uniform() < opt.figure_of_eight_prob) {
        // Mid-band S2: one core at each end of the band's free edge.
        const double half = 0.5 * rng.uniform(0.3, 0.5);
        const double mid = rng.uniform(0.45, 0.55);
        p.events.back().region = Region::rect(0.0, mid - half, ex, mid + half);
    }
    plan.protocol = apply_symmetry(p, static_cast<int>(rng.below(8)));

    plan.tissue.nx = opt.nx;
    plan.tissue.ny = opt.ny;
    plan.tissue.dx_mm = opt.dx_mm;
    if (rng.uniform() < opt.heterogeneity_prob) {
        plan.tissue.n_patches =
            opt.patches_min + static_cast<int>(rng.below(static_cast<std::uint64_t>(opt.patches_max - opt.patches_min + 1)));
        plan.tissue.severity = rng.uniform(opt.severity_min, opt.severity_max);
    }
    return plan;
}

Episode run_plan(const EpisodePlan& plan) {
    return run_episode(plan.protocol, plan.params, plan.tissue, plan.seed, plan.duration_ms, plan.id, plan.warmup_ms);
}

}  // namespace deap::tissue
