#pragma once

#include <vector>

#include "deap/phase/phase.hpp"

namespace deap::phase {

/// Phase singularity located at the centre of a 2x2 plaquette, in continuous
/// (row, col) grid coordinates. chirality is +1 for counter-clockwise phase
/// winding in the (x, y) tissue frame.
struct PhaseSingularity {
    int frame = 0;
    double row = 0.0;
    double col = 0.0;
    int chirality = 0;
};

struct PsTrack {
    int id = 0;
    int chirality = 0;
    std::vector<PhaseSingularity> points;

    int first_frame() const { return points.front().frame; }
    int last_frame() const { return points.back().frame; }
    double lifetime_ms(double dt_ms) const { return (last_frame() - first_frame() + 1) * dt_ms; }
    GridIndex mean_position() const;
};

struct LinkOptions {
    int max_gap_frames = 2;
    double max_jump_cells = 3.0;
};

/// Frame-to-frame change of total topological charge, with the cause that
/// explains it when one can be found.
struct ChargeEvent {
    int frame = 0;
    int delta = 0;
    bool near_boundary = false;
};

struct SingularityResult {
    std::vector<std::vector<PhaseSingularity>> per_frame;  ///< indexed from phase.valid_begin
    std::vector<PsTrack> tracks;
    int first_frame = 0;

    const PsTrack* longest_track() const;
    std::vector<int> total_charge() const;
};

/// Singularities in one frame: plaquettes whose four cells are in the mask and
/// whose wrapped phase differences around the loop sum to +-2*pi.
std::vector<PhaseSingularity> singularities_in_frame(const PhaseMovie& phase, int frame);

SingularityResult find_singularities(const PhaseMovie& phase, const LinkOptions& options = {});

/// Non-zero changes of total charge between consecutive valid frames.
/// near_boundary is set when a singularity that appeared or vanished in that
/// step sits within `boundary_cells` of the mask edge.
std::vector<ChargeEvent> charge_events(const PhaseMovie& phase, const SingularityResult& result,
                                       double boundary_cells = 2.0);

}  // namespace deap::phase
