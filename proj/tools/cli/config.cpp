#include "cli/config.hpp"

#include <charconv>
#include <cmath>
#include <functional>
#include <limits>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "deap/io/files.hpp"

namespace deap::cli {

namespace {

using nlohmann::json;

struct Field {
    std::string name;  // section.key
    std::function<void(const std::string&)> set;
    std::function<json()> get;
};

double parse_double(const std::string& field, const std::string& s) {
    if (s == "inf" || s == "+inf" || s == "infinity") return std::numeric_limits<double>::infinity();
    double v = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size() || std::isnan(v))
        throw ConfigError(field, "expected a number, got '" + s + "'");
    return v;
}

template <typename I>
I parse_int(const std::string& field, const std::string& s) {
    I v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) throw ConfigError(field, "expected an integer, got '" + s + "'");
    return v;
}

bool parse_bool(const std::string& field, const std::string& s) {
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    throw ConfigError(field, "expected true or false, got '" + s + "'");
}

json number_json(double v) {
    if (std::isfinite(v)) return v;
    return v > 0 ? "inf" : "-inf";
}

std::vector<Field> bind(RunConfig& c) {
    std::vector<Field> f;
    auto dbl = [&f](std::string name, double& ref) {
        f.push_back({name, [name, &ref](const std::string& s) { ref = parse_double(name, s); },
                     [&ref] { return number_json(ref); }});
    };
    auto integer = [&f](std::string name, int& ref) {
        f.push_back({name, [name, &ref](const std::string& s) { ref = parse_int<int>(name, s); },
                     [&ref] { return json(ref); }});
    };
    auto u64 = [&f](std::string name, std::uint64_t& ref) {
        f.push_back({name, [name, &ref](const std::string& s) { ref = parse_int<std::uint64_t>(name, s); },
                     [&ref] { return json(ref); }});
    };
    auto boolean = [&f](std::string name, bool& ref) {
        f.push_back({name, [name, &ref](const std::string& s) { ref = parse_bool(name, s); },
                     [&ref] { return json(ref); }});
    };
    auto str = [&f](std::string name, std::string& ref) {
        f.push_back({name, [&ref](const std::string& s) { ref = s; }, [&ref] { return json(ref); }});
    };

    u64("run.seed", c.seed);
    f.push_back({"run.out", [&c](const std::string& s) { c.out = s; }, [&c] { return json(c.out.string()); }});
    integer("run.threads", c.threads);

    dbl("model.k", c.model.k);
    dbl("model.a", c.model.a);
    dbl("model.eps0", c.model.eps0);
    dbl("model.mu1", c.model.mu1);
    dbl("model.mu2", c.model.mu2);
    dbl("model.D0", c.model.D0);
    dbl("model.time_scale_ms", c.model.time_scale_ms);
    dbl("model.length_scale_mm", c.model.length_scale_mm);

    auto& s = c.simulate;
    integer("simulate.n_episodes", s.n_episodes);
    str("simulate.protocol", s.protocol);
    dbl("simulate.duration_ms", s.duration_ms);
    dbl("simulate.warmup_ms", s.warmup_ms);
    dbl("simulate.pacing_cycle_ms", s.pacing_cycle_ms);
    dbl("simulate.s2_delay_ms", s.s2_delay_ms);
    integer("simulate.max_attempts_factor", s.max_attempts_factor);
    integer("simulate.nx", s.corpus.nx);
    integer("simulate.ny", s.corpus.ny);
    dbl("simulate.dx_mm", s.corpus.dx_mm);
    dbl("simulate.warmup_min_ms", s.corpus.warmup_min_ms);
    dbl("simulate.warmup_max_ms", s.corpus.warmup_max_ms);
    dbl("simulate.s2_delay_min_ms", s.corpus.s2_delay_min_ms);
    dbl("simulate.s2_delay_max_ms", s.corpus.s2_delay_max_ms);
    dbl("simulate.extent_min", s.corpus.extent_min);
    dbl("simulate.extent_max", s.corpus.extent_max);
    dbl("simulate.figure_of_eight_prob", s.corpus.figure_of_eight_prob);
    dbl("simulate.heterogeneity_prob", s.corpus.heterogeneity_prob);
    integer("simulate.patches_min", s.corpus.patches_min);
    integer("simulate.patches_max", s.corpus.patches_max);
    dbl("simulate.severity_min", s.corpus.severity_min);
    dbl("simulate.severity_max", s.corpus.severity_max);

    auto& e = c.sensing;
    str("sensing.array", e.array);
    dbl("sensing.height_mm", e.height_mm);
    dbl("sensing.rotation_deg", e.pose.rotation_deg);
    dbl("sensing.tx_mm", e.pose.tx_mm);
    dbl("sensing.ty_mm", e.pose.ty_mm);
    boolean("sensing.random_pose", e.random_pose);
    dbl("sensing.max_shift_mm", e.max_shift_mm);
    integer("sensing.poses_per_episode", e.poses_per_episode);
    dbl("sensing.snr_db", e.noise.snr_db);
    dbl("sensing.line_amplitude", e.noise.line_amplitude);
    dbl("sensing.line_hz", e.noise.line_hz);

    dbl("baseline.blanking_ms", c.baseline.blanking_ms);
    dbl("baseline.threshold_fraction", c.baseline.threshold_fraction);
    dbl("baseline.apd90_ms", c.baseline.apd90_ms);

    u64("dataset.split_seed", c.dataset.split_seed);

    auto& t = c.train;
    dbl("train.learning_rate", t.learning_rate);
    integer("train.batch_size", t.batch_size);
    integer("train.max_epochs", t.max_epochs);
    integer("train.patience", t.patience);
    u64("train.seed", t.seed);
    integer("train.train_stride", t.train_stride);
    integer("train.val_stride", t.val_stride);

    integer("eval.pvi_radius", c.eval.pvi_radius);
    boolean("eval.truth_as_estimate", c.eval.truth_as_estimate);
    dbl("eval.isochrone_window_ms", c.eval.isochrone_window_ms);
    dbl("eval.isochrone_step_ms", c.eval.isochrone_step_ms);
    return f;
}

void check(bool cond, const std::string& field, const std::string& what) {
    if (!cond) throw ConfigError(field, what);
}

void validate(const RunConfig& c) {
    check(c.threads >= 0, "run.threads", "must be >= 0");
    try {
        c.model.validate();
    } catch (const PreconditionError& e) {
        throw ConfigError("model", e.what());
    }
    const auto& s = c.simulate;
    check(s.n_episodes >= 1, "simulate.n_episodes", "must be >= 1");
    static const char* protocols[] = {"fibrillation", "s1s2", "plane", "pacing", "burst", "rest"};
    bool known = false;
    for (const char* p : protocols) known = known || s.protocol == p;
    check(known, "simulate.protocol", "unknown protocol '" + s.protocol + "'");
    check(s.duration_ms >= tissue::kMinEpisodeMs, "simulate.duration_ms", "must be >= 500");
    check(s.warmup_ms >= 0, "simulate.warmup_ms", "must be >= 0");
    check(s.pacing_cycle_ms > 0, "simulate.pacing_cycle_ms", "must be > 0");
    check(s.max_attempts_factor >= 1, "simulate.max_attempts_factor", "must be >= 1");
    check(s.corpus.nx >= 16 && s.corpus.ny >= 16, "simulate.nx", "grid must be at least 16 x 16");
    check(s.corpus.dx_mm > 0, "simulate.dx_mm", "must be > 0");
    check(s.corpus.warmup_min_ms <= s.corpus.warmup_max_ms, "simulate.warmup_min_ms", "exceeds warmup_max_ms");
    check(s.corpus.patches_min >= 0 && s.corpus.patches_min <= s.corpus.patches_max, "simulate.patches_min",
          "must be in [0, patches_max]");
    check(s.corpus.severity_min >= 0 && s.corpus.severity_max < 1, "simulate.severity_max", "must be in [0, 1)");

    const auto& e = c.sensing;
    check(e.array == "pentagon" || e.array == "spiral", "sensing.array", "expected pentagon or spiral");
    check(e.height_mm > 0, "sensing.height_mm", "must be > 0");
    check(e.poses_per_episode >= 1, "sensing.poses_per_episode", "must be >= 1");
    check(e.max_shift_mm >= 0, "sensing.max_shift_mm", "must be >= 0");
    check(e.noise.line_amplitude >= 0, "sensing.line_amplitude", "must be >= 0");

    check(c.baseline.blanking_ms > 0, "baseline.blanking_ms", "must be > 0");
    check(c.baseline.threshold_fraction > 0 && c.baseline.threshold_fraction < 1, "baseline.threshold_fraction",
          "must be in (0, 1)");
    check(c.baseline.apd90_ms > 0, "baseline.apd90_ms", "must be > 0");
    try {
        c.train.validate();
    } catch (const PreconditionError& ex) {
        throw ConfigError("train", ex.what());
    }
    check(c.eval.pvi_radius >= 1, "eval.pvi_radius", "must be >= 1");
    check(c.eval.isochrone_window_ms >= 50, "eval.isochrone_window_ms", "must be >= 50");
    check(c.eval.isochrone_step_ms > 0, "eval.isochrone_step_ms", "must be > 0");
}

Field* find(std::vector<Field>& fields, const std::string& name) {
    for (auto& f : fields)
        if (f.name == name) return &f;
    return nullptr;
}

}  // namespace

nlohmann::json RunConfig::to_json() const {
    json j = json::object();
    auto fields = bind(const_cast<RunConfig&>(*this));
    for (const auto& f : fields) {
        const auto dot = f.name.find('.');
        j[f.name.substr(0, dot)][f.name.substr(dot + 1)] = f.get();
    }
    return j;
}

std::string RunConfig::hash() const { return io::sha256_string(to_json().dump()); }

std::pair<std::string, std::string> parse_override(const std::string& s) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError(s, "override must look like section.key=value");
    return {s.substr(0, eq), s.substr(eq + 1)};
}

std::vector<std::string> known_fields() {
    RunConfig c;
    std::vector<std::string> names;
    for (const auto& f : bind(c)) names.push_back(f.name);
    return names;
}

RunConfig load_config(const std::filesystem::path& ini, const Overrides& overrides) {
    RunConfig c;
    auto fields = bind(c);
    if (!ini.empty()) {
        if (!std::filesystem::exists(ini)) throw IoError("config file not found: " + ini.string());
        boost::property_tree::ptree tree;
        try {
            boost::property_tree::ini_parser::read_ini(ini.string(), tree);
        } catch (const boost::property_tree::ini_parser_error& e) {
            throw ConfigError(ini.string(), e.what());
        }
        for (const auto& [section, body] : tree) {
            if (body.empty()) throw ConfigError(section, "keys must sit inside a [section]");
            for (const auto& [key, value] : body) {
                const std::string name = section + "." + key;
                Field* f = find(fields, name);
                if (!f) throw ConfigError(name, "unknown field");
                f->set(value.get_value<std::string>());
            }
        }
    }
    for (const auto& [name, value] : overrides) {
        Field* f = find(fields, name);
        if (!f) throw ConfigError(name, "unknown field");
        f->set(value);
    }
    c.simulate.corpus.duration_ms = c.simulate.duration_ms;
    validate(c);
    return c;
}

RunConfig config_from_json(const nlohmann::json& j) {
    RunConfig c;
    auto fields = bind(c);
    for (const auto& [section, body] : j.items()) {
        for (const auto& [key, value] : body.items()) {
            const std::string name = section + "." + key;
            Field* f = find(fields, name);
            if (!f) throw ConfigError(name, "unknown field");
            if (value.is_string())
                f->set(value.get<std::string>());
            else if (value.is_boolean())
                f->set(value.get<bool>() ? "true" : "false");
            else
                f->set(value.dump());
        }
    }
    c.simulate.corpus.duration_ms = c.simulate.duration_ms;
    validate(c);
    return c;
}

}  // namespace deap::cli
