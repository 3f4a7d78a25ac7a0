#include "deap/baseline/template.hpp"

#include <cmath>
#include <numbers>

#include "deap/core/parallel.hpp"

namespace deap::baseline {

double ApTemplate::tau_ms() const { return apd90_ms / std::numbers::ln10; }

double ApTemplate::operator()(double elapsed_ms) const {
    if (!std::isfinite(elapsed_ms)) return 0.0;
    if (elapsed_ms < -upstroke_ms) return 0.0;
    if (elapsed_ms < 0.0) return 1.0 + elapsed_ms / upstroke_ms;
    return std::exp(-elapsed_ms / tau_ms());
}

Movie activation_movie(const Movie& elapsed, const ApTemplate& ap) {
    Movie out(elapsed.geom, elapsed.n_frames, elapsed.dt_ms);
    parallel_for(static_cast<std::size_t>(elapsed.n_frames), [&](std::size_t t) {
        const auto src = elapsed.frame(static_cast<int>(t));
        auto dst = out.frame(static_cast<int>(t));
        for (std::size_t i = 0; i < src.size(); ++i) dst[i] = static_cast<float>(ap(src[i]));
    });
    return out;
}

Movie activation_movie(const ActivationField& field, const ApTemplate& ap) {
    return activation_movie(field.elapsed, ap);
}

}  // namespace deap::baseline
