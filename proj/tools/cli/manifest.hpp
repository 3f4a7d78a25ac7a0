#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <string>

#include "cli/config.hpp"
#include "deap/core/error.hpp"
#include "json.hpp"

namespace deap::cli {

/// An upstream artifact is missing or its bytes do not match the hash its
/// stage recorded.
class ArtifactError : public Error {
public:
    ArtifactError(std::string artifact, std::string expected, const std::string& what)
        : Error("artifact " + artifact + " (expected sha256 " + expected + "): " + what),
          artifact_(std::move(artifact)),
          expected_(std::move(expected)) {}
    const std::string& artifact() const { return artifact_; }
    const std::string& expected() const { return expected_; }

private:
    std::string artifact_;
    std::string expected_;
};

inline constexpr const char* kManifestName = "manifest.json";
inline constexpr const char* kToolVersion = "deap 1.0.0";

/// Per-stage record written next to the stage outputs. Paths are relative to
/// the run directory.
class Manifest {
public:
    Manifest(std::string stage, const RunConfig& config);

    void add_input(const std::filesystem::path& run_dir, const std::string& rel);
    void add_output(const std::filesystem::path& run_dir, const std::string& rel);
    void add_inputs_from(const nlohmann::json& upstream);
    void time(const std::string& what, double seconds) { timings_[what] = seconds; }
    nlohmann::json& extra() { return extra_; }

    /// Writes <run_dir>/<stage>/manifest.json.
    void write(const std::filesystem::path& run_dir) const;

private:
    std::string stage_;
    nlohmann::json config_;
    std::string config_hash_;
    std::uint64_t seed_;
    std::map<std::string, std::string> inputs_, outputs_;
    std::map<std::string, double> timings_;
    nlohmann::json extra_ = nlohmann::json::object();
};

/// Loads <run_dir>/<stage>/manifest.json and checks every listed output
/// against its recorded hash.
nlohmann::json verify_stage(const std::filesystem::path& run_dir, const std::string& stage);

/// Wall-clock seconds since construction.
class Stopwatch {
public:
    Stopwatch() : t0_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
    }

private:
    std::chrono::steady_clock::time_point t0_;
};

}  // namespace deap::cli
