#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "deap/core/grid.hpp"

namespace deap::io {

inline constexpr char kMagic[4] = {'D', 'E', 'A', 'P'};
inline constexpr std::uint16_t kContainerVersion = 1;

/// Fixed header of the little-endian frame container:
///   "DEAP" | u16 version | u32 nx | u32 ny | u32 n_frames | f32 dt_ms | f32 dx_mm
/// followed by nx*ny*n_frames f32 values, frame-major and row-major.
struct ContainerHeader {
    std::uint32_t nx = 0;
    std::uint32_t ny = 0;
    std::uint32_t n_frames = 0;
    float dt_ms = 1.0f;
    float dx_mm = 0.0f;

    std::size_t payload_size() const {
        return static_cast<std::size_t>(nx) * ny * n_frames;
    }
};

struct Container {
    ContainerHeader header;
    std::vector<float> payload;
};

void write_container(const std::filesystem::path& path, const ContainerHeader& header,
                     std::span<const float> payload);
Container read_container(const std::filesystem::path& path);
ContainerHeader read_container_header(const std::filesystem::path& path);

/// Movies round-trip through the container; the grid comes back centred on
/// the origin unless the caller restores an origin from the sidecar.
void write_movie(const std::filesystem::path& path, const Movie& movie);
Movie read_movie(const std::filesystem::path& path);

/// Single-frame maps; NaN cells are preserved.
void write_map(const std::filesystem::path& path, const Map2D& map);
Map2D read_map(const std::filesystem::path& path);

}  // namespace deap::io
