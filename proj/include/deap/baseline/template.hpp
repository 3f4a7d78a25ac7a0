#pragma once

#include "deap/baseline/interpolate.hpp"

namespace deap::baseline {

/// Stereotyped action potential keyed by elapsed time since activation: the
/// upstroke occupies the millisecond before activation, so template(0) = 1,
/// followed by an exponential decay reaching 0.1 at APD90.
struct ApTemplate {
    double apd90_ms = 120.0;
    double upstroke_ms = 1.0;

    double tau_ms() const;
    double operator()(double elapsed_ms) const;
};

/// pseudo-Vm = template(elapsed); undefined (NaN) cells map to 0.
Movie activation_movie(const ActivationField& field, const ApTemplate& ap = {});
Movie activation_movie(const Movie& elapsed, const ApTemplate& ap = {});

}  // namespace deap::baseline
