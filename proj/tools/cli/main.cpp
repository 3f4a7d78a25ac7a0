#include <iostream>

#include "CLI11.hpp"
#include "cli/commands.hpp"
#include "cli/manifest.hpp"
#include "deap/core/parallel.hpp"

using namespace deap;

int main(int argc, char** argv) {
    CLI::App app{"Electrogram-to-membrane-potential reconstruction pipeline"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::string out;
    std::uint64_t seed = 0;
    int threads = 0;
    std::vector<std::string> sets;
    app.add_option("-c,--config", config_path, "INI config file");
    app.add_option("-o,--out", out, "run directory");
    app.add_option("--seed", seed, "master seed");
    app.add_option("--threads", threads, "worker cap (also DEAP_THREADS)")->check(CLI::PositiveNumber);
    app.add_option("--set", sets, "override, section.key=value (repeatable)");

    int n = 0;
    std::string protocol;
    double duration = 0.0;
    auto* sim = app.add_subcommand("simulate", "simulate tissue episodes");
    sim->add_option("-n,--n", n, "number of episodes");
    sim->add_option("--protocol", protocol, "fibrillation | s1s2 | plane | pacing | burst | rest");
    sim->add_option("--duration", duration, "recorded duration per episode, ms");
    app.add_subcommand("sense", "forward electrograms and ROI ground truth");
    app.add_subcommand("baseline", "activation-time detection and interpolated activation maps");
    int epochs = 0;
    auto* tr = app.add_subcommand("train", "train the reconstruction network");
    tr->add_option("--epochs", epochs, "maximum epochs");
    bool all = false;
    auto* inf = app.add_subcommand("infer", "reconstruct membrane-potential movies");
    inf->add_flag("--all", all, "every recording instead of the test split");
    app.add_subcommand("analyze", "phase, singularities, pvi and isochrones");
    bool truth_as_estimate = false;
    auto* ev = app.add_subcommand("eval", "score reconstructions against the truth");
    ev->add_flag("--truth-as-estimate", truth_as_estimate, "score the truth in place of the learned estimate");
    app.add_subcommand("report", "static HTML report with figures");
    auto* pipe = app.add_subcommand("pipeline", "run every stage in order");
    pipe->add_flag("--truth-as-estimate", truth_as_estimate, "score the truth in place of the learned estimate");

    CLI11_PARSE(app, argc, argv);

    try {
        cli::Overrides ov;
        for (const auto& s : sets) ov.insert_or_assign(cli::parse_override(s).first, cli::parse_override(s).second);
        if (!out.empty()) ov["run.out"] = out;
        if (app.count("--seed")) ov["run.seed"] = std::to_string(seed);
        if (app.count("--threads")) ov["run.threads"] = std::to_string(threads);
        if (sim->count("--n")) ov["simulate.n_episodes"] = std::to_string(n);
        if (sim->count("--protocol")) ov["simulate.protocol"] = protocol;
        if (sim->count("--duration")) ov["simulate.duration_ms"] = std::to_string(duration);
        if (tr->count("--epochs")) ov["train.max_epochs"] = std::to_string(epochs);
        if (truth_as_estimate) ov["eval.truth_as_estimate"] = "true";
        const cli::RunConfig cfg = cli::load_config(config_path, ov);
        if (cfg.threads > 0) set_thread_count(cfg.threads);

        const std::string cmd = app.get_subcommands().front()->get_name();
        if (cmd == "simulate" || cmd == "pipeline") cli::cmd_simulate(cfg);
        if (cmd == "sense" || cmd == "pipeline") cli::cmd_sense(cfg);
        if (cmd == "baseline" || cmd == "pipeline") cli::cmd_baseline(cfg);
        if (cmd == "train" || cmd == "pipeline") cli::cmd_train(cfg);
        if (cmd == "infer" || cmd == "pipeline") cli::cmd_infer(cfg, all);
        if (cmd == "analyze" || cmd == "pipeline") cli::cmd_analyze(cfg);
        if (cmd == "eval" || cmd == "pipeline") cli::cmd_eval(cfg);
        if (cmd == "report" || cmd == "pipeline") cli::cmd_report(cfg);
    } catch (const cli::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const cli::ArtifactError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
