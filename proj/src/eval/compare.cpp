#include "deap/eval/compare.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "deap/eval/ssim.hpp"
#include "deap/io/files.hpp"
#include "deap/phase/singularity.hpp"

namespace deap::eval {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Map2D frame_map(const Movie& m, int t) {
    Map2D out(m.geom);
    const auto f = m.frame(t);
    for (std::size_t i = 0; i < f.size(); ++i) out.v[i] = f[i];
    return out;
}

void frame_metrics(const Movie& truth, const Movie& est, const Mask& mask, double& rmse, double& corr) {
    double s_rmse = 0.0, s_corr = 0.0;
    int n_corr = 0;
    for (int t = 0; t < truth.n_frames; ++t) {
        const Map2D a = frame_map(truth, t), b = frame_map(est, t);
        s_rmse += masked_rmse(a, b, mask);
        const double c = masked_correlation(a, b, mask);
        if (std::isfinite(c)) {
            s_corr += c;
            ++n_corr;
        }
    }
    rmse = s_rmse / truth.n_frames;
    corr = n_corr ? s_corr / n_corr : kNaN;
}

double ps_error(const phase::PhaseMovie& truth, const phase::PhaseMovie& est) {
    const auto rt = phase::find_singularities(truth);
    const auto re = phase::find_singularities(est);
    const auto* a = rt.longest_track();
    const auto* b = re.longest_track();
    if (!a || !b) return kNaN;
    const GridIndex pa = a->mean_position(), pb = b->mean_position();
    return std::hypot(pa.row - pb.row, pa.col - pb.col);
}

double mean_of(const std::vector<const EpisodeScore*>& rows, double EpisodeScore::*field) {
    if (rows.empty()) return kNaN;
    double s = 0.0;
    for (const auto* r : rows) s += r->*field;
    return s / rows.size();
}

nlohmann::json num(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

nlohmann::json quartiles_json(const Quartiles& q) {
    return {{"n", q.n},        {"min", num(q.min)}, {"q1", num(q.q1)},   {"median", num(q.median)},
            {"q3", num(q.q3)}, {"max", num(q.max)}, {"mean", num(q.mean)}};
}

}  // namespace

Quartiles quartiles(std::vector<double> v) {
    v.erase(std::remove_if(v.begin(), v.end(), [](double x) { return !std::isfinite(x); }), v.end());
    Quartiles q;
    q.n = v.size();
    if (v.empty()) {
        q.min = q.q1 = q.median = q.q3 = q.max = q.mean = kNaN;
        return q;
    }
    std::sort(v.begin(), v.end());
    auto at = [&](double p) {
        const double pos = p * (v.size() - 1);
        const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
        const std::size_t hi = std::min(lo + 1, v.size() - 1);
        return v[lo] + (pos - lo) * (v[hi] - v[lo]);
    };
    q.min = v.front();
    q.max = v.back();
    q.q1 = at(0.25);
    q.median = at(0.5);
    q.q3 = at(0.75);
    double s = 0.0;
    for (double x : v) s += x;
    q.mean = s / v.size();
    return q;
}

std::vector<const EpisodeScore*> ComparisonReport::succeeded() const {
    std::vector<const EpisodeScore*> out;
    for (const auto& r : rows)
        if (r.ok) out.push_back(&r);
    return out;
}

double ComparisonReport::mean_ssim_deap() const { return mean_of(succeeded(), &EpisodeScore::ssim_deap); }
double ComparisonReport::mean_ssim_baseline() const { return mean_of(succeeded(), &EpisodeScore::ssim_baseline); }

double ComparisonReport::win_rate() const {
    const auto ok = succeeded();
    if (ok.empty()) return kNaN;
    std::size_t wins = 0;
    for (const auto* r : ok)
        if (r->ssim_deap > r->ssim_baseline) ++wins;
    return static_cast<double>(wins) / ok.size();
}

nlohmann::json ComparisonReport::to_json() const {
    nlohmann::json rj = nlohmann::json::array();
    std::vector<double> sd, sb;
    for (const auto& r : rows) {
        rj.push_back({{"episode_id", r.episode_id},
                      {"recording_id", r.recording_id},
                      {"ok", r.ok},
                      {"failure", r.failure},
                      {"label", r.label},
                      {"cycle_length_ms", num(r.cycle_length_ms)},
                      {"mask_cells", r.mask_cells},
                      {"ssim_deap", num(r.ssim_deap)},
                      {"ssim_baseline", num(r.ssim_baseline)},
                      {"rmse_deap", num(r.rmse_deap)},
                      {"rmse_baseline", num(r.rmse_baseline)},
                      {"corr_deap", num(r.corr_deap)},
                      {"corr_baseline", num(r.corr_baseline)},
                      {"ps_error_deap", num(r.ps_error_deap)},
                      {"ps_error_baseline", num(r.ps_error_baseline)}});
        if (r.ok) {
            sd.push_back(r.ssim_deap);
            sb.push_back(r.ssim_baseline);
        }
    }
    return {{"pvi_radius_cells", pvi_radius},
            {"truth_as_estimate", truth_as_estimate},
            {"rows", rj},
            {"n_rows", rows.size()},
            {"n_failed", rows.size() - succeeded().size()},
            {"mean_ssim_deap", num(mean_ssim_deap())},
            {"mean_ssim_baseline", num(mean_ssim_baseline())},
            {"win_rate", num(win_rate())},
            {"ssim_deap_summary", quartiles_json(quartiles(sd))},
            {"ssim_baseline_summary", quartiles_json(quartiles(sb))}};
}

void ComparisonReport::write_csv(const std::filesystem::path& path) const {
    std::vector<std::vector<std::string>> out;
    auto f = [](double v) { return std::isfinite(v) ? io::format_double(v) : std::string("nan"); };
    for (const auto& r : rows)
        out.push_back({r.episode_id, r.recording_id, r.ok ? "1" : "0", r.label, f(r.ssim_deap), f(r.ssim_baseline),
                       f(r.rmse_deap), f(r.rmse_baseline), f(r.corr_deap), f(r.corr_baseline), f(r.ps_error_deap),
                       f(r.ps_error_baseline), std::to_string(r.mask_cells)});
    io::write_csv(path,
                  {"episode_id", "recording_id", "ok", "label", "ssim_deap", "ssim_baseline", "rmse_deap",
                   "rmse_baseline", "corr_deap", "corr_baseline", "ps_error_deap", "ps_error_baseline",
                   "mask_cells"},
                  out);
}

Movie crop_frames(const Movie& m, int offset, int n) {
    require(offset >= 0 && n >= 0 && offset + n <= m.n_frames, "crop_frames: range outside the movie");
    Movie out(m.geom, n, m.dt_ms);
    std::copy(m.data.begin() + m.cells() * offset, m.data.begin() + m.cells() * (offset + n), out.data.begin());
    return out;
}

Movie baseline_roi_movie(const sensing::EgmRecording& rec, int grid, const CompareOptions& opt) {
    const sensing::Roi roi = sensing::make_roi(rec.array, grid);
    const Mask fp = sensing::roi_footprint_mask(roi, rec.array);
    const auto table = baseline::detect_activations(rec, opt.detection);
    const baseline::ElapsedInterpolator interp(rec.array.positions, roi.local, fp);
    return baseline::activation_movie(baseline::build_activation_field(table, interp), opt.ap);
}

EpisodeScore score_movies(const Movie& truth, const Movie& deap, const Movie& base, const Mask& footprint,
                          const CompareOptions& opt, MapPair* deap_maps, MapPair* base_maps) {
    require(truth.geom.same_shape(deap.geom) && truth.geom.same_shape(base.geom) &&
                truth.n_frames == deap.n_frames && truth.n_frames == base.n_frames,
            "score_movies: movies must share geometry and length");
    EpisodeScore s;
    const phase::PviOptions po{opt.pvi_radius, -1, -1};
    const auto ph_t = phase::compute_phase(truth, footprint);
    const auto ph_d = phase::compute_phase(deap, footprint);
    const auto ph_b = phase::compute_phase(base, footprint);
    const auto pv_t = phase::phase_variance_index(ph_t, po);
    const auto pv_d = phase::phase_variance_index(ph_d, po);
    const auto pv_b = phase::phase_variance_index(ph_b, po);
    const Mask mask = mask_and(mask_and(footprint, pv_t.mask()), mask_and(pv_d.mask(), pv_b.mask()));
    s.mask_cells = mask.count();
    s.ssim_deap = ssim(pv_t.values, pv_d.values, mask);
    s.ssim_baseline = ssim(pv_t.values, pv_b.values, mask);
    frame_metrics(truth, deap, footprint, s.rmse_deap, s.corr_deap);
    frame_metrics(truth, base, footprint, s.rmse_baseline, s.corr_baseline);
    s.ps_error_deap = ps_error(ph_t, ph_d);
    s.ps_error_baseline = ps_error(ph_t, ph_b);
    if (deap_maps) *deap_maps = {pv_t, pv_d};
    if (base_maps) *base_maps = {pv_t, pv_b};
    return s;
}

ComparisonReport compare_pipelines(const std::vector<const nn::SensedEpisode*>& episodes,
                                   const nn::ReconstructionModel& model, const CompareOptions& opt) {
    ComparisonReport report;
    report.pvi_radius = opt.pvi_radius;
    report.truth_as_estimate = opt.truth_as_estimate;
    std::vector<const nn::SensedEpisode*> sorted = episodes;
    std::sort(sorted.begin(), sorted.end(),
              [](const auto* a, const auto* b) { return a->recording_id < b->recording_id; });
    for (const auto* ep : sorted) {
        EpisodeScore row;
        try {
            const int grid = model.arch.grid;
            const int offset = nn::frame_offset(model.arch);
            const int n = ep->rec.n_samples - model.arch.window + 1;
            const Movie truth = crop_frames(ep->target, offset, n);
            const Movie deap = opt.truth_as_estimate ? truth : nn::infer_roi_movie(model, ep->rec);
            const Movie base = crop_frames(baseline_roi_movie(ep->rec, grid, opt), offset, n);
            const sensing::Roi roi = sensing::make_roi(ep->rec.array, grid);
            row = score_movies(truth, deap, base, sensing::roi_footprint_mask(roi, ep->rec.array), opt);
        } catch (const std::exception& e) {
            row = EpisodeScore{};
            row.ok = false;
            row.failure = e.what();
        }
        row.episode_id = ep->episode_id;
        row.recording_id = ep->recording_id;
        row.label = tissue::to_string(ep->label);
        row.cycle_length_ms = ep->cycle_length_ms;
        report.rows.push_back(std::move(row));
    }
    return report;
}

}  // namespace deap::eval
