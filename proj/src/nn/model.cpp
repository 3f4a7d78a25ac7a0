#include "deap/nn/model.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>

#include "deap/core/error.hpp"
#include "deap/core/parallel.hpp"
#include "deap/io/files.hpp"

namespace deap::nn {

namespace {

constexpr char kMagic[4] = {'D', 'E', 'A', 'P'};
constexpr char kTag[4] = {'N', 'N', 'W', 'T'};
constexpr std::uint16_t kVersion = 1;

template <typename U>
void put(std::ostream& out, U v) {
    unsigned char b[sizeof(U)];
    std::memcpy(b, &v, sizeof(U));
    if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(U));
    out.write(reinterpret_cast<const char*>(b), sizeof(U));
}

template <typename U>
U get(std::istream& in, const std::filesystem::path& path) {
    unsigned char b[sizeof(U)];
    if (!in.read(reinterpret_cast<char*>(b), sizeof(U))) throw FormatError("truncated model file " + path.string());
    if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(U));
    U v;
    std::memcpy(&v, b, sizeof(U));
    return v;
}

std::filesystem::path manifest_path(const std::filesystem::path& path) {
    auto p = path;
    return p.replace_extension(".json");
}

}  // namespace

std::size_t ReconstructionModel::parameter_count() const {
    std::size_t n = 0;
    for (const auto& [name, v] : weights) n += v.size();
    return n;
}

Network<float> ReconstructionModel::network() const {
    Network<float> net(arch);
    net.import_blobs(weights);
    return net;
}

void save_model(const std::filesystem::path& path, const ReconstructionModel& model) {
    if (path.has_parent_path()) io::ensure_directory(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write model file " + path.string());
    out.write(kMagic, 4);
    put<std::uint16_t>(out, kVersion);
    out.write(kTag, 4);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(model.weights.size()));
    for (const auto& [name, v] : model.weights) {
        put<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
        out.write(name.data(), static_cast<std::streamsize>(name.size()));
        put<std::uint64_t>(out, v.size());
        for (double d : v) put<double>(out, d);
    }
    if (!out) throw IoError("failed writing model file " + path.string());
    out.close();

    nlohmann::json m = model.manifest;
    m["architecture"] = model.arch;
    m["normalisation"] = model.norm;
    m["parameter_count"] = model.parameter_count();
    m["weights_file"] = path.filename().string();
    m["weights_sha256"] = io::sha256_file(path);
    io::write_json(manifest_path(path), m);
}

ReconstructionModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open model file " + path.string());
    char magic[4], tag[4];
    if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) throw FormatError("bad magic in " + path.string());
    const auto version = get<std::uint16_t>(in, path);
    if (version != kVersion) throw FormatError("unsupported model version " + std::to_string(version));
    if (!in.read(tag, 4) || std::memcmp(tag, kTag, 4) != 0) throw FormatError("not a weight file: " + path.string());
    ReconstructionModel model;
    const auto n = get<std::uint32_t>(in, path);
    for (std::uint32_t i = 0; i < n; ++i) {
        const auto len = get<std::uint32_t>(in, path);
        if (len > 4096) throw FormatError("implausible blob name length in " + path.string());
        std::string name(len, '\0');
        if (!in.read(name.data(), len)) throw FormatError("truncated model file " + path.string());
        const auto count = get<std::uint64_t>(in, path);
        if (count > (std::uint64_t{1} << 28)) throw FormatError("implausible blob size in " + path.string());
        std::vector<double> v(count);
        for (auto& d : v) d = get<double>(in, path);
        model.weights.emplace(std::move(name), std::move(v));
    }
    if (in.peek() != std::char_traits<char>::eof()) throw FormatError("trailing bytes in " + path.string());

    model.manifest = io::read_json(manifest_path(path));
    try {
        model.arch = model.manifest.at("architecture").get<Architecture>();
        model.norm = model.manifest.at("normalisation").get<NormStats>();
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("bad model manifest " + manifest_path(path).string() + ": " + e.what());
    }
    model.arch.validate();
    (void)model.network();  // checks every blob against the architecture
    return model;
}

Movie infer_roi_movie(const ReconstructionModel& model, const sensing::EgmRecording& rec) {
    const Architecture& a = model.arch;
    if (rec.n_channels != a.channels)
        throw PreconditionError("recording has " + std::to_string(rec.n_channels) + " channels, model expects " +
                                std::to_string(a.channels));
    if (rec.n_samples < a.window)
        throw PreconditionError("recording has " + std::to_string(rec.n_samples) + " samples, shorter than the " +
                                std::to_string(a.window) + "-sample window");
    const sensing::Roi roi = sensing::make_roi(rec.array, a.grid);
    const std::vector<float> in = normalise(rec, model.norm);
    const int n_frames = rec.n_samples - a.window + 1;
    Movie out(roi.local, n_frames, 1000.0 / rec.fs_hz);

    constexpr int kChunk = 128;
    const int n_chunks = (n_frames + kChunk - 1) / kChunk;
    const std::size_t workers = std::min<std::size_t>(thread_count(), static_cast<std::size_t>(n_chunks));
    std::vector<Network<float>> nets;
    for (std::size_t w = 0; w < std::max<std::size_t>(workers, 1); ++w) nets.push_back(model.network());
    // Each worker owns a contiguous block of chunks and its own network copy.
    parallel_for(nets.size(), [&](std::size_t w) {
        const int c0 = static_cast<int>(w * n_chunks / nets.size());
        const int c1 = static_cast<int>((w + 1) * n_chunks / nets.size());
        Mat<float> x;
        for (int c = c0; c < c1; ++c) {
            const int f0 = c * kChunk, f1 = std::min(n_frames, f0 + kChunk);
            x.resize(static_cast<Eigen::Index>(a.channels) * a.window, f1 - f0);
            for (int f = f0; f < f1; ++f)
                for (int ch = 0; ch < a.channels; ++ch)
                    for (int t = 0; t < a.window; ++t)
                        x(ch * a.window + t, f - f0) = in[static_cast<std::size_t>(ch) * rec.n_samples + f + t];
            const Mat<float> y = nets[w].forward(x);
            for (int f = f0; f < f1; ++f) {
                auto frame = out.frame(f);
                for (Eigen::Index k = 0; k < y.rows(); ++k) frame[k] = std::clamp(y(k, f - f0), 0.0f, 1.0f);
            }
        }
    });
    return out;
}

Movie infer_movie(const ReconstructionModel& model, const sensing::EgmRecording& rec, const GridGeometry& tissue) {
    const Movie roi_movie = infer_roi_movie(model, rec);
    const sensing::Roi roi = sensing::make_roi(rec.array, model.arch.grid);
    const Mask mask = sensing::footprint_mask(tissue, sensing::footprint(rec.array));
    return sensing::roi_to_tissue(roi_movie, roi, tissue, mask);
}

}  // namespace deap::nn
