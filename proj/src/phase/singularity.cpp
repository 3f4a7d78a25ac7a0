#include "deap/phase/singularity.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <tuple>

namespace deap::phase {

GridIndex PsTrack::mean_position() const {
    GridIndex m;
    for (const auto& p : points) {
        m.row += p.row;
        m.col += p.col;
    }
    m.row /= static_cast<double>(points.size());
    m.col /= static_cast<double>(points.size());
    return m;
}

const PsTrack* SingularityResult::longest_track() const {
    const PsTrack* best = nullptr;
    for (const auto& t : tracks) {
        if (!best || t.points.back().frame - t.points.front().frame >
                         best->points.back().frame - best->points.front().frame)
            best = &t;
    }
    return best;
}

std::vector<int> SingularityResult::total_charge() const {
    std::vector<int> q;
    q.reserve(per_frame.size());
    for (const auto& f : per_frame) {
        int s = 0;
        for (const auto& p : f) s += p.chirality;
        q.push_back(s);
    }
    return q;
}

std::vector<PhaseSingularity> singularities_in_frame(const PhaseMovie& phase, int frame) {
    const auto& g = phase.geom;
    std::vector<PhaseSingularity> out;
    for (int r = 0; r + 1 < g.rows; ++r) {
        for (int c = 0; c + 1 < g.cols; ++c) {
            if (!phase.mask.at(r, c) || !phase.mask.at(r, c + 1) || !phase.mask.at(r + 1, c + 1) ||
                !phase.mask.at(r + 1, c))
                continue;
            // Counter-clockwise in (x, y): (r,c) -> (r,c+1) -> (r+1,c+1) -> (r+1,c).
            const double a = phase.at(frame, r, c);
            const double b = phase.at(frame, r, c + 1);
            const double d = phase.at(frame, r + 1, c + 1);
            const double e = phase.at(frame, r + 1, c);
            const double winding = wrap_angle(b - a) + wrap_angle(d - b) + wrap_angle(e - d) + wrap_angle(a - e);
            const int charge = static_cast<int>(std::lround(winding / (2.0 * std::numbers::pi)));
            if (charge != 0) out.push_back({frame, r + 0.5, c + 0.5, charge > 0 ? 1 : -1});
        }
    }
    return out;
}

SingularityResult find_singularities(const PhaseMovie& phase, const LinkOptions& options) {
    SingularityResult res;
    res.first_frame = phase.valid_begin;
    std::vector<std::size_t> active;  // indices into res.tracks

    for (int f = phase.valid_begin; f < phase.valid_end; ++f) {
        auto ps = singularities_in_frame(phase, f);

        active.erase(std::remove_if(active.begin(), active.end(),
                                    [&](std::size_t k) {
                                        return f - res.tracks[k].last_frame() > options.max_gap_frames + 1;
                                    }),
                     active.end());

        std::vector<std::tuple<double, std::size_t, std::size_t>> pairs;  // (dist, track, ps)
        for (std::size_t k : active) {
            const auto& last = res.tracks[k].points.back();
            for (std::size_t i = 0; i < ps.size(); ++i) {
                if (ps[i].chirality != res.tracks[k].chirality) continue;
                const double d = std::hypot(ps[i].row - last.row, ps[i].col - last.col);
                if (d <= options.max_jump_cells) pairs.emplace_back(d, k, i);
            }
        }
        std::sort(pairs.begin(), pairs.end());
        std::vector<bool> ps_used(ps.size(), false);
        std::vector<std::size_t> track_used;
        for (const auto& [d, k, i] : pairs) {
            if (ps_used[i] || std::find(track_used.begin(), track_used.end(), k) != track_used.end()) continue;
            ps_used[i] = true;
            track_used.push_back(k);
            res.tracks[k].points.push_back(ps[i]);
        }
        for (std::size_t i = 0; i < ps.size(); ++i) {
            if (ps_used[i]) continue;
            PsTrack t;
            t.id = static_cast<int>(res.tracks.size());
            t.chirality = ps[i].chirality;
            t.points.push_back(ps[i]);
            res.tracks.push_back(std::move(t));
            active.push_back(res.tracks.size() - 1);
        }
        res.per_frame.push_back(std::move(ps));
    }
    return res;
}

namespace {

bool near_mask_edge(const Mask& mask, double row, double col, double cells) {
    const int reach = static_cast<int>(std::ceil(cells)) + 1;
    const int r0 = static_cast<int>(std::floor(row)), c0 = static_cast<int>(std::floor(col));
    for (int r = r0 - reach; r <= r0 + reach + 1; ++r) {
        for (int c = c0 - reach; c <= c0 + reach + 1; ++c) {
            if (std::hypot(r - row, c - col) > cells + 1.0) continue;
            if (r < 0 || c < 0 || r >= mask.rows || c >= mask.cols || !mask.at(r, c)) return true;
        }
    }
    return false;
}

}  // namespace

std::vector<ChargeEvent> charge_events(const PhaseMovie& phase, const SingularityResult& result,
                                       double boundary_cells) {
    std::vector<ChargeEvent> events;
    const auto q = result.total_charge();
    for (std::size_t i = 1; i < q.size(); ++i) {
        const int delta = q[i] - q[i - 1];
        if (delta == 0) continue;
        ChargeEvent ev;
        ev.frame = result.first_frame + static_cast<int>(i);
        ev.delta = delta;
        // Singularities present in only one of the two frames (within linking distance).
        auto unmatched = [&](const std::vector<PhaseSingularity>& a, const std::vector<PhaseSingularity>& b) {
            for (const auto& p : a) {
                bool found = false;
                for (const auto& s : b)
                    if (s.chirality == p.chirality && std::hypot(s.row - p.row, s.col - p.col) <= 3.0) found = true;
                if (!found && near_mask_edge(phase.mask, p.row, p.col, boundary_cells)) return true;
            }
            return false;
        };
        ev.near_boundary = unmatched(result.per_frame[i], result.per_frame[i - 1]) ||
                           unmatched(result.per_frame[i - 1], result.per_frame[i]);
        events.push_back(ev);
    }
    return events;
}

}  // namespace deap::phase
