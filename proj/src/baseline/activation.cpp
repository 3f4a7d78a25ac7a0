#include "deap/baseline/activation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "deap/core/error.hpp"
#include "deap/core/parallel.hpp"
#include "deap/io/files.hpp"

namespace deap::baseline {

namespace {

double median_of(std::vector<double> v) {
    if (v.empty()) return 0.0;
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + mid, v.end());
    double m = v[mid];
    if (v.size() % 2 == 0) m = 0.5 * (m + *std::max_element(v.begin(), v.begin() + mid));
    return m;
}

}  // namespace

std::size_t ActivationTable::silent_count() const {
    return static_cast<std::size_t>(std::count_if(channels.begin(), channels.end(),
                                                  [](const ChannelActivations& c) { return c.silent; }));
}

nlohmann::json ActivationTable::summary() const {
    nlohmann::json counts = nlohmann::json::array();
    nlohmann::json silent = nlohmann::json::array();
    for (std::size_t ch = 0; ch < channels.size(); ++ch) {
        counts.push_back(channels[ch].times_ms.size());
        if (channels[ch].silent) silent.push_back(ch);
    }
    return nlohmann::json{{"method", method},
                          {"blanking_ms", blanking_ms},
                          {"threshold_fraction", threshold_fraction},
                          {"fs_hz", fs_hz},
                          {"n_samples", n_samples},
                          {"detections_per_channel", counts},
                          {"silent_channels", silent}};
}

std::vector<double> derivative(std::span<const double> x, double fs_hz, int halfwidth) {
    require(halfwidth >= 1, "derivative: halfwidth must be >= 1");
    const std::size_t m = static_cast<std::size_t>(halfwidth);
    std::vector<double> d(x.size(), 0.0);
    double k2 = 0.0;
    for (int k = 1; k <= halfwidth; ++k) k2 += 2.0 * k * k;
    const double scale = fs_hz / 1000.0 / k2;
    for (std::size_t t = m; t + m < x.size(); ++t) {
        double s = 0.0;
        for (int k = 1; k <= halfwidth; ++k) s += k * (x[t + k] - x[t - k]);
        d[t] = s * scale;
    }
    return d;
}

double noise_sigma(std::span<const double> x) {
    if (x.size() < 3) return 0.0;
    std::vector<double> dd;
    dd.reserve(x.size() - 2);
    for (std::size_t t = 1; t + 1 < x.size(); ++t) dd.push_back(std::abs(x[t + 1] - 2.0 * x[t] + x[t - 1]));
    // Var of a white second difference is 6 sigma^2.
    return 1.4826 * median_of(std::move(dd)) / std::sqrt(6.0);
}

ChannelActivations detect_channel(std::span<const double> x, double fs_hz, const DetectionOptions& opt) {
    const double dt_ms = 1000.0 / fs_hz;
    const double length_ms = x.size() * dt_ms;
    if (length_ms < kMinTraceMs) throw PreconditionError("detect_activations: trace shorter than 200 ms");
    ChannelActivations out;
    const auto d = derivative(x, fs_hz, opt.slope_halfwidth);

    std::vector<std::size_t> cand;
    for (std::size_t t = 1; t + 1 < d.size(); ++t)
        if (d[t] < 0.0 && d[t] < d[t - 1] && d[t] <= d[t + 1]) cand.push_back(t);

    if (!cand.empty()) {
        std::vector<double> mags;
        for (auto t : cand) mags.push_back(-d[t]);
        std::sort(mags.begin(), mags.end(), std::greater<>());
        const std::size_t m = std::max<std::size_t>(1, static_cast<std::size_t>(length_ms / 250.0));
        mags.resize(std::min(m, mags.size()));
        const double robust_max = median_of(mags);

        double k2 = 0.0;
        for (int k = 1; k <= opt.slope_halfwidth; ++k) k2 += 2.0 * k * k;
        const double slope_noise = noise_sigma(x) / std::sqrt(k2) * fs_hz / 1000.0;

        out.threshold = std::max(opt.threshold_fraction * robust_max, opt.noise_floor_sigmas * slope_noise);

        std::vector<std::size_t> strong;
        for (auto t : cand)
            if (-d[t] >= out.threshold && out.threshold > 0.0) strong.push_back(t);
        // Strongest first; ties resolve to the earlier sample.
        std::stable_sort(strong.begin(), strong.end(), [&](std::size_t a, std::size_t b) { return d[a] < d[b]; });
        std::vector<std::size_t> kept;
        for (auto t : strong) {
            bool clear = true;
            for (auto k : kept)
                if (std::abs(static_cast<double>(t) - static_cast<double>(k)) * dt_ms < opt.blanking_ms) {
                    clear = false;
                    break;
                }
            if (clear) kept.push_back(t);
        }
        std::sort(kept.begin(), kept.end());
        for (auto t : kept) out.times_ms.push_back(t * dt_ms);
    }
    out.silent = out.times_ms.empty() && length_ms > kSilentAfterMs;
    return out;
}

ActivationTable detect_activations(const sensing::EgmRecording& rec, const DetectionOptions& opt) {
    ActivationTable table;
    table.blanking_ms = opt.blanking_ms;
    table.threshold_fraction = opt.threshold_fraction;
    table.fs_hz = rec.fs_hz;
    table.n_samples = rec.n_samples;
    table.channels.resize(rec.n_channels);
    parallel_for(static_cast<std::size_t>(rec.n_channels), [&](std::size_t ch) {
        table.channels[ch] = detect_channel(rec.channel(static_cast<int>(ch)), rec.fs_hz, opt);
    });
    return table;
}

void write_activation_csv(const std::filesystem::path& path, const ActivationTable& table) {
    std::vector<std::vector<std::string>> rows;
    for (std::size_t ch = 0; ch < table.channels.size(); ++ch)
        for (double t : table.channels[ch].times_ms) rows.push_back({std::to_string(ch), io::format_double(t)});
    io::write_csv(path, {"electrode", "time_ms"}, rows);
}

ActivationTable read_activation_csv(const std::filesystem::path& path, int n_channels, int n_samples,
                                    double fs_hz) {
    ActivationTable table;
    table.fs_hz = fs_hz;
    table.n_samples = n_samples;
    table.channels.resize(n_channels);
    std::istringstream in(io::read_text(path));
    std::string line;
    std::getline(in, line);
    if (line != "electrode,time_ms") throw FormatError("activation table: unexpected header in " + path.string());
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw FormatError("activation table: malformed row '" + line + "'");
        int ch = 0;
        double t = 0.0;
        try {
            ch = std::stoi(line.substr(0, comma));
            t = std::stod(line.substr(comma + 1));
        } catch (const std::exception&) {
            throw FormatError("activation table: malformed row '" + line + "'");
        }
        if (ch < 0 || ch >= n_channels) throw FormatError("activation table: electrode out of range");
        table.channels[ch].times_ms.push_back(t);
    }
    for (auto& c : table.channels) c.silent = c.times_ms.empty() && n_samples * 1000.0 / fs_hz > kSilentAfterMs;
    return table;
}

}  // namespace deap::baseline
