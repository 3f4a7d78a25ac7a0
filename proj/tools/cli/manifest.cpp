#include "cli/manifest.hpp"

#include "deap/io/files.hpp"

namespace deap::cli {

namespace fs = std::filesystem;

Manifest::Manifest(std::string stage, const RunConfig& config)
    : stage_(std::move(stage)), config_(config.to_json()), config_hash_(config.hash()), seed_(config.seed) {}

void Manifest::add_input(const fs::path& run_dir, const std::string& rel) {
    inputs_[rel] = io::sha256_file(run_dir / rel);
}

void Manifest::add_output(const fs::path& run_dir, const std::string& rel) {
    outputs_[rel] = io::sha256_file(run_dir / rel);
}

void Manifest::add_inputs_from(const nlohmann::json& upstream) {
    for (const auto& [rel, hash] : upstream.at("outputs").items()) inputs_[rel] = hash.get<std::string>();
}

void Manifest::write(const fs::path& run_dir) const {
    nlohmann::json j{{"stage", stage_},
                     {"tool", kToolVersion},
                     {"seed", seed_},
                     {"config_hash", config_hash_},
                     {"config", config_},
                     {"inputs", inputs_},
                     {"outputs", outputs_},
                     {"timings_s", timings_}};
    for (const auto& [k, v] : extra_.items()) j[k] = v;
    io::write_json(run_dir / stage_ / kManifestName, j);
}

nlohmann::json verify_stage(const fs::path& run_dir, const std::string& stage) {
    const fs::path path = run_dir / stage / kManifestName;
    const std::string id = stage + "/" + kManifestName;
    if (!fs::exists(path)) throw ArtifactError(id, "n/a", "missing; run the '" + stage + "' stage first");
    nlohmann::json m;
    try {
        m = io::read_json(path);
    } catch (const std::exception& e) {
        throw ArtifactError(id, "n/a", std::string("unreadable: ") + e.what());
    }
    if (!m.contains("outputs") || !m["outputs"].is_object()) throw ArtifactError(id, "n/a", "no outputs listed");
    for (const auto& [rel, hash] : m["outputs"].items()) {
        const std::string expected = hash.get<std::string>();
        const fs::path file = run_dir / rel;
        if (!fs::exists(file)) throw ArtifactError(rel, expected, "missing");
        if (io::sha256_file(file) != expected) throw ArtifactError(rel, expected, "content hash mismatch");
    }
    return m;
}

}  // namespace deap::cli
