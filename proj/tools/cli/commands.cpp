#include "cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <set>

#include "cli/manifest.hpp"
#include "deap/baseline/activation.hpp"
#include "deap/core/rng.hpp"
#include "deap/eval/compare.hpp"
#include "deap/eval/figures.hpp"
#include "deap/io/container.hpp"
#include "deap/io/files.hpp"
#include "deap/nn/model.hpp"
#include "deap/nn/train.hpp"
#include "deap/phase/cycle_length.hpp"
#include "deap/phase/isochrone.hpp"
#include "deap/phase/pvi.hpp"
#include "deap/phase/singularity.hpp"
#include "deap/sensing/roi.hpp"
#include "deap/tissue/corpus.hpp"

namespace deap::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::uint64_t kPoseStream = 99;
constexpr std::uint64_t kNoiseStream = 199;
constexpr int kStripFrames = 6;
constexpr int kReportRecordings = 3;

std::string rel(const char* stage, const std::string& file) { return std::string(stage) + "/" + file; }

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

void log(const std::string& line) { std::cerr << line << std::endl; }

json ps_stats(const Movie& vm) {
    try {
        const auto ph = phase::compute_phase(vm);
        const auto res = phase::find_singularities(ph);
        double longest = 0.0, total = 0.0;
        int over_300 = 0;
        for (const auto& t : res.tracks) {
            const double life = t.lifetime_ms(vm.dt_ms);
            longest = std::max(longest, life);
            total += life;
            if (life >= 300.0) ++over_300;
        }
        return {{"n_tracks", res.tracks.size()},
                {"longest_lifetime_ms", longest},
                {"mean_lifetime_ms", res.tracks.empty() ? 0.0 : total / res.tracks.size()},
                {"tracks_over_300ms", over_300}};
    } catch (const PreconditionError& e) {
        return {{"unavailable", e.what()}};
    }
}

tissue::Episode simulate_one(const RunConfig& cfg, int i) {
    const auto& s = cfg.simulate;
    const std::uint64_t seed = Rng::derive(cfg.seed, static_cast<std::uint64_t>(i));
    char id[32];
    std::snprintf(id, sizeof id, "ep%04d", i);
    tissue::TissueSpec spec;
    spec.nx = s.corpus.nx;
    spec.ny = s.corpus.ny;
    spec.dx_mm = s.corpus.dx_mm;
    tissue::StimulusProtocol p;
    if (s.protocol == "s1s2")
        p = tissue::s1s2_protocol(s.s2_delay_ms);
    else if (s.protocol == "plane")
        p = tissue::plane_wave_protocol(tissue::Side::Left, 5.0);
    else if (s.protocol == "pacing")
        p = tissue::periodic_pacing_protocol(s.pacing_cycle_ms, s.warmup_ms + s.duration_ms);
    else if (s.protocol == "burst")
        p = tissue::burst_protocol(tissue::Region::disc(0.5, 0.5, 2.0), 5.0, 100.0, 10);
    return tissue::run_episode(p, cfg.model, spec, seed, s.duration_ms, id, s.warmup_ms);
}

struct RecordingEntry {
    std::string id;
    std::string episode_id;
    std::string label;
    double cycle_length_ms = 0.0;
};

std::vector<RecordingEntry> recording_entries(const json& sense_manifest) {
    std::vector<RecordingEntry> out;
    for (const auto& r : sense_manifest.at("recordings"))
        out.push_back({r.at("id").get<std::string>(), r.at("episode_id").get<std::string>(),
                       r.at("label").get<std::string>(), r.at("cycle_length_ms").get<double>()});
    return out;
}

fs::path recording_dir(const RunConfig& cfg) { return cfg.out / stage::kRecordings; }

Movie load_truth(const RunConfig& cfg, const sensing::EgmRecording& rec, const std::string& id) {
    Movie m = io::read_movie(recording_dir(cfg) / (id + ".truth.deap"));
    const sensing::Roi roi = sensing::make_roi(rec.array, m.geom.rows);
    m.geom = roi.local;
    return m;
}

Movie load_roi_movie(const fs::path& path, const GridGeometry& local) {
    Movie m = io::read_movie(path);
    m.geom = local;
    return m;
}

eval::CompareOptions compare_options(const RunConfig& cfg) {
    eval::CompareOptions o;
    o.pvi_radius = cfg.eval.pvi_radius;
    o.detection.blanking_ms = cfg.baseline.blanking_ms;
    o.detection.threshold_fraction = cfg.baseline.threshold_fraction;
    o.ap.apd90_ms = cfg.baseline.apd90_ms;
    o.truth_as_estimate = cfg.eval.truth_as_estimate;
    return o;
}

/// Truth, learned and baseline movies of one recording on the ROI grid,
/// aligned to the frames the model estimates.
struct Aligned {
    sensing::EgmRecording rec;
    sensing::Roi roi;
    Mask footprint;
    Movie truth, deap, base;
    int offset = 0;
};

Aligned load_aligned(const RunConfig& cfg, const std::string& id, int offset) {
    Aligned a;
    a.rec = sensing::load_recording(recording_dir(cfg), id);
    a.offset = offset;
    const Movie truth = load_truth(cfg, a.rec, id);
    a.roi = sensing::make_roi(a.rec.array, truth.geom.rows);
    a.footprint = sensing::roi_footprint_mask(a.roi, a.rec.array);
    a.deap = load_roi_movie(cfg.out / stage::kInferred / (id + ".vm.deap"), a.roi.local);
    const Movie base = load_roi_movie(cfg.out / stage::kBaseline / (id + ".vm.deap"), a.roi.local);
    a.truth = eval::crop_frames(truth, offset, a.deap.n_frames);
    a.base = eval::crop_frames(base, offset, a.deap.n_frames);
    return a;
}

Map2D frame_map(const Movie& m, int t) {
    Map2D out(m.geom);
    const auto f = m.frame(t);
    for (std::size_t i = 0; i < f.size(); ++i) out.v[i] = f[i];
    return out;
}

Map2D masked(Map2D m, const Mask& mask) {
    for (std::size_t i = 0; i < m.v.size(); ++i)
        if (!mask.on[i]) m.v[i] = std::numeric_limits<double>::quiet_NaN();
    return m;
}

double isochrone_start(const RunConfig& cfg, int n_frames) {
    return std::max(0.0, std::floor(0.5 * (n_frames - cfg.eval.isochrone_window_ms)));
}

}  // namespace

void cmd_simulate(const RunConfig& cfg) {
    const Stopwatch total;
    const fs::path dir = cfg.out / stage::kEpisodes;
    io::ensure_directory(dir);
    Manifest man(stage::kEpisodes, cfg);
    json episodes = json::array();
    const auto& s = cfg.simulate;

    auto record = [&](const tissue::Episode& ep, double seconds) {
        tissue::save_episode(dir, ep);
        man.add_output(cfg.out, rel(stage::kEpisodes, ep.id + ".deap"));
        man.add_output(cfg.out, rel(stage::kEpisodes, ep.id + ".json"));
        json e{{"id", ep.id},
               {"seed", ep.seed},
               {"label", tissue::to_string(ep.label)},
               {"cycle_length_ms", ep.cycle_length_ms},
               {"n_patches", ep.tissue.n_patches},
               {"ps_lifetime", ps_stats(ep.vm)},
               {"seconds", seconds}};
        episodes.push_back(e);
        log("simulate: " + ep.id + " " + tissue::to_string(ep.label) + " CL " +
            io::format_double(ep.cycle_length_ms, 4) + " ms (" + io::format_double(seconds, 3) + " s)");
    };

    int attempts = 0;
    if (s.protocol == "fibrillation") {
        const int max_attempts = s.n_episodes * s.max_attempts_factor;
        int got = 0;
        while (got < s.n_episodes && attempts < max_attempts) {
            const Stopwatch sw;
            const auto plan = tissue::plan_fibrillation_episode(cfg.seed, attempts++, s.corpus, cfg.model);
            const auto ep = tissue::run_plan(plan);
            if (ep.label != tissue::RhythmLabel::Fibrillation) {
                log("simulate: " + plan.id + " discarded (" + tissue::to_string(ep.label) + ")");
                continue;
            }
            record(ep, sw.seconds());
            ++got;
        }
        if (got < s.n_episodes)
            throw Error("simulate: only " + std::to_string(got) + " fibrillation episodes in " +
                        std::to_string(max_attempts) + " attempts");
    } else {
        for (int i = 0; i < s.n_episodes; ++i) {
            const Stopwatch sw;
            const auto ep = simulate_one(cfg, i);
            record(ep, sw.seconds());
            ++attempts;
        }
    }
    man.extra()["episodes"] = episodes;
    man.extra()["attempts"] = attempts;
    man.time("total", total.seconds());
    man.write(cfg.out);
}

void cmd_sense(const RunConfig& cfg) {
    const Stopwatch total;
    const json up = verify_stage(cfg.out, stage::kEpisodes);
    const fs::path in_dir = cfg.out / stage::kEpisodes;
    const fs::path dir = recording_dir(cfg);
    io::ensure_directory(dir);
    Manifest man(stage::kRecordings, cfg);
    man.add_inputs_from(up);
    const auto& sc = cfg.sensing;
    json recs = json::array();
    for (const auto& e : up.at("episodes")) {
        const std::string eid = e.at("id").get<std::string>();
        const tissue::Episode ep = tissue::load_episode(in_dir, eid);
        for (int k = 0; k < sc.poses_per_episode; ++k) {
            sensing::ElectrodeArray arr = sensing::array_by_name(sc.array);
            arr.height_mm = sc.height_mm;
            if (sc.random_pose) {
                Rng r(Rng::derive(ep.seed, kPoseStream + k));
                arr.pose.rotation_deg = r.uniform(0.0, 360.0);
                arr.pose.tx_mm = r.uniform(-sc.max_shift_mm, sc.max_shift_mm);
                arr.pose.ty_mm = r.uniform(-sc.max_shift_mm, sc.max_shift_mm);
            } else {
                arr.pose = sc.pose;
            }
            const std::string rid = eid + "_p" + std::to_string(k);
            const auto se =
                nn::sense_episode(ep, arr, sc.noise, Rng::derive(ep.seed, kNoiseStream + k), rid);
            sensing::save_recording(dir, rid, se.rec);
            io::write_movie(dir / (rid + ".truth.deap"), se.target);
            for (const char* ext : {".egm.deap", ".egm.json", ".truth.deap"})
                man.add_output(cfg.out, rel(stage::kRecordings, rid + ext));
            recs.push_back({{"id", rid},
                            {"episode_id", eid},
                            {"label", tissue::to_string(ep.label)},
                            {"cycle_length_ms", ep.cycle_length_ms},
                            {"pose", arr.pose},
                            {"measured_snr_db", num(se.rec.measured_snr_db)}});
            log("sense: " + rid);
        }
    }
    man.extra()["recordings"] = recs;
    man.time("total", total.seconds());
    man.write(cfg.out);
}

void cmd_baseline(const RunConfig& cfg) {
    const Stopwatch total;
    const json up = verify_stage(cfg.out, stage::kRecordings);
    const fs::path dir = cfg.out / stage::kBaseline;
    io::ensure_directory(dir);
    Manifest man(stage::kBaseline, cfg);
    man.add_inputs_from(up);
    const auto opt = compare_options(cfg);
    json rows = json::array();
    for (const auto& r : recording_entries(up)) {
        const auto rec = sensing::load_recording(recording_dir(cfg), r.id);
        const auto table = baseline::detect_activations(rec, opt.detection);
        baseline::write_activation_csv(dir / (r.id + ".act.csv"), table);
        const Movie vm = eval::baseline_roi_movie(rec, sensing::kRoiSize, opt);
        io::write_movie(dir / (r.id + ".vm.deap"), vm);
        man.add_output(cfg.out, rel(stage::kBaseline, r.id + ".act.csv"));
        man.add_output(cfg.out, rel(stage::kBaseline, r.id + ".vm.deap"));
        json s = table.summary();
        s["id"] = r.id;
        rows.push_back(s);
        log("baseline: " + r.id + " silent channels " + std::to_string(table.silent_count()));
    }
    man.extra()["recordings"] = rows;
    man.time("total", total.seconds());
    man.write(cfg.out);
}

void cmd_train(const RunConfig& cfg) {
    const Stopwatch total;
    const json up = verify_stage(cfg.out, stage::kRecordings);
    const fs::path dir = cfg.out / stage::kModel;
    io::ensure_directory(dir);
    Manifest man(stage::kModel, cfg);
    man.add_inputs_from(up);

    std::vector<nn::SensedEpisode> items;
    for (const auto& r : recording_entries(up)) {
        nn::SensedEpisode se;
        se.episode_id = r.episode_id;
        se.recording_id = r.id;
        se.label = tissue::rhythm_label_from_string(r.label);
        se.cycle_length_ms = r.cycle_length_ms;
        se.rec = sensing::load_recording(recording_dir(cfg), r.id);
        se.target = load_truth(cfg, se.rec, r.id);
        items.push_back(std::move(se));
    }
    const nn::Dataset ds = nn::build_dataset(std::move(items), cfg.dataset.split_seed);
    log("train: " + std::to_string(ds.split.train.size()) + " train / " + std::to_string(ds.split.val.size()) +
        " val / " + std::to_string(ds.split.test.size()) + " test episodes, " +
        std::to_string(ds.split.excluded.size()) + " excluded");

    nn::Architecture arch;
    arch.channels = ds.channels;
    arch.window = ds.window;
    arch.grid = ds.grid;
    nn::Network<float> net(arch);
    net.init(cfg.train.seed);
    const Stopwatch sw;
    const auto result = nn::train(net, ds, cfg.train, [](const nn::EpochRecord& e) {
        log("train: epoch " + std::to_string(e.epoch) + " train " + io::format_double(e.train_loss) + " val " +
            io::format_double(e.val_loss) + " (" + io::format_double(e.seconds, 3) + " s)");
    });
    man.time("training", sw.seconds());

    nn::ReconstructionModel model;
    model.arch = arch;
    model.norm = ds.norm;
    model.weights = net.export_blobs();
    model.manifest = {{"split", ds.split}, {"train_config", cfg.train}, {"result", result}, {"tool", kToolVersion}};
    nn::save_model(dir / "model.bin", model);
    io::write_json(dir / "split.json", ds.split);
    std::vector<std::vector<std::string>> hist;
    for (const auto& e : result.history)
        hist.push_back({std::to_string(e.epoch), io::format_double(e.train_loss), io::format_double(e.val_loss)});
    io::write_csv(dir / "history.csv", {"epoch", "train_loss", "val_loss"}, hist);
    for (const char* f : {"model.bin", "model.json", "split.json", "history.csv"})
        man.add_output(cfg.out, rel(stage::kModel, f));
    man.extra()["parameter_count"] = model.parameter_count();
    man.extra()["best_val_loss"] = result.best_val_loss;
    man.extra()["best_epoch"] = result.best_epoch;
    man.time("total", total.seconds());
    man.write(cfg.out);
}

void cmd_infer(const RunConfig& cfg, bool all_recordings) {
    const Stopwatch total;
    const json up = verify_stage(cfg.out, stage::kRecordings);
    const json up_model = verify_stage(cfg.out, stage::kModel);
    const fs::path dir = cfg.out / stage::kInferred;
    io::ensure_directory(dir);
    Manifest man(stage::kInferred, cfg);
    man.add_inputs_from(up);
    man.add_inputs_from(up_model);
    const auto model = nn::load_model(cfg.out / stage::kModel / "model.bin");
    const auto split = model.manifest.at("split").get<nn::DatasetSplit>();
    const std::set<std::string> held(split.test.begin(), split.test.end());
    json recs = json::array();
    for (const auto& r : recording_entries(up)) {
        if (!all_recordings && !held.count(r.episode_id)) continue;
        const auto rec = sensing::load_recording(recording_dir(cfg), r.id);
        const Movie vm = nn::infer_roi_movie(model, rec);
        io::write_movie(dir / (r.id + ".vm.deap"), vm);
        man.add_output(cfg.out, rel(stage::kInferred, r.id + ".vm.deap"));
        recs.push_back({{"id", r.id}, {"episode_id", r.episode_id}, {"n_frames", vm.n_frames}});
        log("infer: " + r.id + " " + std::to_string(vm.n_frames) + " frames");
    }
    man.extra()["recordings"] = recs;
    man.extra()["frame_offset"] = nn::frame_offset(model.arch);
    man.time("total", total.seconds());
    man.write(cfg.out);
}

void cmd_analyze(const RunConfig& cfg) {
    const Stopwatch total;
    const json up_inf = verify_stage(cfg.out, stage::kInferred);
    const json up_base = verify_stage(cfg.out, stage::kBaseline);
    const json up_rec = verify_stage(cfg.out, stage::kRecordings);
    const fs::path dir = cfg.out / stage::kAnalysis;
    io::ensure_directory(dir);
    Manifest man(stage::kAnalysis, cfg);
    for (const auto* up : {&up_inf, &up_base, &up_rec}) man.add_inputs_from(*up);
    const int offset = up_inf.at("frame_offset").get<int>();
    json out = json::array();
    for (const auto& r : up_inf.at("recordings")) {
        const std::string id = r.at("id").get<std::string>();
        const Aligned a = load_aligned(cfg, id, offset);
        json row{{"id", id}};
        try {
            const auto cl = phase::cycle_length_filter(a.truth);
            row["truth_cycle_length_ms"] = cl.cycle_length_ms;
            row["truth_rhythm"] = phase::to_string(cl.rhythm);
        } catch (const PreconditionError& e) {
            row["truth_rhythm"] = std::string("unavailable: ") + e.what();
        }
        const std::pair<const char*, const Movie*> kinds[] = {
            {"truth", &a.truth}, {"deap", &a.deap}, {"baseline", &a.base}};
        for (const auto& [kind, movie] : kinds) {
            json k;
            try {
                const auto ph = phase::compute_phase(*movie, a.footprint);
                const auto pv = phase::phase_variance_index(ph, {cfg.eval.pvi_radius, -1, -1});
                const auto sing = phase::find_singularities(ph);
                const double t0 = isochrone_start(cfg, movie->n_frames);
                const auto iso = phase::isochronal_map(*movie, a.footprint, t0, t0 + cfg.eval.isochrone_window_ms,
                                                       cfg.eval.isochrone_step_ms);
                const std::string stem = id + "." + kind;
                io::write_map(dir / (stem + ".pvi.deap"), pv.values);
                io::write_map(dir / (stem + ".iso.deap"), iso.activation_ms);
                man.add_output(cfg.out, rel(stage::kAnalysis, stem + ".pvi.deap"));
                man.add_output(cfg.out, rel(stage::kAnalysis, stem + ".iso.deap"));
                k["ps_tracks"] = sing.tracks.size();
                if (const auto* t = sing.longest_track()) {
                    const GridIndex p = t->mean_position();
                    k["longest_ps_lifetime_ms"] = t->lifetime_ms(movie->dt_ms);
                    k["longest_ps_position"] = {p.row, p.col};
                }
                k["isochrone_t0_ms"] = t0;
            } catch (const Error& e) {
                k["failure"] = e.what();
            }
            row[kind] = k;
        }
        out.push_back(row);
        log("analyze: " + id);
    }
    man.extra()["recordings"] = out;
    man.time("total", total.seconds());
    man.write(cfg.out);
}

void cmd_eval(const RunConfig& cfg) {
    const Stopwatch total;
    const json up_inf = verify_stage(cfg.out, stage::kInferred);
    const json up_base = verify_stage(cfg.out, stage::kBaseline);
    const json up_rec = verify_stage(cfg.out, stage::kRecordings);
    const fs::path dir = cfg.out / stage::kEval;
    io::ensure_directory(dir);
    Manifest man(stage::kEval, cfg);
    for (const auto* up : {&up_inf, &up_base, &up_rec}) man.add_inputs_from(*up);
    const int offset = up_inf.at("frame_offset").get<int>();
    const auto opt = compare_options(cfg);
    std::map<std::string, RecordingEntry> meta;
    for (const auto& r : recording_entries(up_rec)) meta[r.id] = r;

    eval::ComparisonReport report;
    report.pvi_radius = opt.pvi_radius;
    report.truth_as_estimate = opt.truth_as_estimate;
    std::vector<std::string> ids;
    for (const auto& r : up_inf.at("recordings")) ids.push_back(r.at("id").get<std::string>());
    std::sort(ids.begin(), ids.end());
    for (const auto& id : ids) {
        eval::EpisodeScore row;
        try {
            const Aligned a = load_aligned(cfg, id, offset);
            row = eval::score_movies(a.truth, opt.truth_as_estimate ? a.truth : a.deap, a.base, a.footprint, opt);
        } catch (const std::exception& e) {
            row = eval::EpisodeScore{};
            row.ok = false;
            row.failure = e.what();
        }
        const auto& m = meta.at(id);
        row.recording_id = id;
        row.episode_id = m.episode_id;
        row.label = m.label;
        row.cycle_length_ms = m.cycle_length_ms;
        log("eval: " + id + (row.ok ? " ssim deap " + io::format_double(row.ssim_deap, 3) + " baseline " +
                                          io::format_double(row.ssim_baseline, 3)
                                    : " failed: " + row.failure));
        report.rows.push_back(std::move(row));
    }
    io::write_json(dir / "report.json", report.to_json());
    report.write_csv(dir / "report.csv");
    io::write_text(dir / "scatter.svg", eval::scatter_svg(report));
    io::write_text(dir / "violin.svg", eval::violin_svg(report));
    for (const char* f : {"report.json", "report.csv", "scatter.svg", "violin.svg"})
        man.add_output(cfg.out, rel(stage::kEval, f));
    man.extra()["mean_ssim_deap"] = num(report.mean_ssim_deap());
    man.extra()["mean_ssim_baseline"] = num(report.mean_ssim_baseline());
    man.extra()["win_rate"] = num(report.win_rate());
    man.time("total", total.seconds());
    man.write(cfg.out);
}

void cmd_report(const RunConfig& cfg) {
    const Stopwatch total;
    const json up_eval = verify_stage(cfg.out, stage::kEval);
    const json up_an = verify_stage(cfg.out, stage::kAnalysis);
    const json up_inf = verify_stage(cfg.out, stage::kInferred);
    const fs::path dir = cfg.out / stage::kReport;
    io::ensure_directory(dir);
    Manifest man(stage::kReport, cfg);
    for (const auto* up : {&up_eval, &up_an, &up_inf}) man.add_inputs_from(*up);
    const json rep = io::read_json(cfg.out / stage::kEval / "report.json");
    const int offset = up_inf.at("frame_offset").get<int>();

    auto emit = [&](const std::string& name, const std::string& text) {
        io::write_text(dir / name, text);
        man.add_output(cfg.out, rel(stage::kReport, name));
    };
    for (const char* f : {"scatter.svg", "violin.svg"}) emit(f, io::read_text(cfg.out / stage::kEval / f));

    std::string html =
        "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\"><title>DEAP run report</title>\n"
        "<style>body{font-family:sans-serif;margin:2em}table{border-collapse:collapse}"
        "td,th{border:1px solid #ccc;padding:2px 6px;text-align:right}img{margin:4px}</style></head><body>\n";
    html += "<h1>Reconstruction vs activation mapping</h1>\n";
    auto fmt = [](const json& v) { return v.is_number() ? io::format_double(v.get<double>(), 4) : std::string("n/a"); };
    html += "<p>Recordings: " + std::to_string(rep.at("n_rows").get<std::size_t>()) + ", failed: " +
            std::to_string(rep.at("n_failed").get<std::size_t>()) + ". Mean pvi-SSIM learned " +
            fmt(rep.at("mean_ssim_deap")) + ", baseline " + fmt(rep.at("mean_ssim_baseline")) + ", win rate " +
            fmt(rep.at("win_rate")) + ".</p>\n";
    html += "<h2>pvi-SSIM per recording</h2>\n<img src=\"scatter.svg\"><img src=\"violin.svg\">\n";
    html += "<table><tr><th>recording</th><th>SSIM learned</th><th>SSIM baseline</th><th>RMSE learned</th>"
            "<th>RMSE baseline</th><th>PS error learned</th><th>PS error baseline</th></tr>\n";
    for (const auto& r : rep.at("rows")) {
        html += "<tr><td>" + r.at("recording_id").get<std::string>() + "</td>";
        if (!r.at("ok").get<bool>()) {
            html += "<td colspan=\"6\">failed: " + r.at("failure").get<std::string>() + "</td></tr>\n";
            continue;
        }
        for (const char* k : {"ssim_deap", "ssim_baseline", "rmse_deap", "rmse_baseline", "ps_error_deap",
                              "ps_error_baseline"})
            html += "<td>" + fmt(r.at(k)) + "</td>";
        html += "</tr>\n";
    }
    html += "</table>\n";

    int shown = 0;
    for (const auto& r : rep.at("rows")) {
        if (shown >= kReportRecordings) break;
        if (!r.at("ok").get<bool>()) continue;
        ++shown;
        const std::string id = r.at("recording_id").get<std::string>();
        const Aligned a = load_aligned(cfg, id, offset);
        html += "<h2>" + id + "</h2>\n<h3>Frames</h3>\n";
        const std::pair<const char*, const Movie*> kinds[] = {
            {"truth", &a.truth}, {"deap", &a.deap}, {"baseline", &a.base}};
        for (const auto& [kind, movie] : kinds) {
            std::vector<Map2D> frames;
            std::vector<std::string> caps;
            for (int k = 0; k < kStripFrames; ++k) {
                const int t = (movie->n_frames - 1) / 2 + 20 * k;
                if (t >= movie->n_frames) break;
                frames.push_back(masked(frame_map(*movie, t), a.footprint));
                caps.push_back(std::string(kind) + " t=" + std::to_string(t + a.offset) + " ms");
            }
            const std::string name = id + "." + kind + ".frames.svg";
            emit(name, eval::frame_strip_svg(frames, caps));
            html += "<div><img src=\"" + name + "\"></div>\n";
        }
        html += "<h3>Phase variance index and isochrones</h3>\n<div>";
        for (const auto& [kind, movie] : kinds) {
            const fs::path pvi_path = cfg.out / stage::kAnalysis / (id + "." + kind + ".pvi.deap");
            if (!fs::exists(pvi_path)) continue;
            Map2D pvi = io::read_map(pvi_path);
            pvi.geom = a.roi.local;
            const std::string stem = id + "." + kind;
            emit(stem + ".pvi.svg", eval::heatmap_svg(pvi, 0.0, 1.0, std::string(kind) + " pvi"));
            eval::write_pgm(dir / (stem + ".pvi.pgm"), pvi, 0.0, 1.0);
            man.add_output(cfg.out, rel(stage::kReport, stem + ".pvi.pgm"));
            html += "<img src=\"" + stem + ".pvi.svg\">";
        }
        html += "</div>\n<div>";
        for (const auto& [kind, movie] : kinds) {
            const double t0 = isochrone_start(cfg, movie->n_frames);
            try {
                const auto iso = phase::isochronal_map(*movie, a.footprint, t0, t0 + cfg.eval.isochrone_window_ms,
                                                       cfg.eval.isochrone_step_ms);
                const std::string name = id + "." + kind + ".iso.svg";
                emit(name, eval::isochrone_svg(iso, std::string(kind) + " isochrones"));
                html += "<img src=\"" + name + "\">";
            } catch (const Error&) {
            }
        }
        html += "</div>\n";
    }
    html += "</body></html>\n";
    emit("index.html", html);
    man.time("total", total.seconds());
    man.write(cfg.out);
}

}  // namespace deap::cli
