#include "deap/io/container.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>

#include "deap/core/error.hpp"

namespace deap::io {
namespace {

static_assert(sizeof(float) == 4);

template <typename T>
void put_le(std::ostream& os, T value) {
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
    os.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T get_le(std::istream& is, const std::filesystem::path& path) {
    unsigned char bytes[sizeof(T)];
    if (!is.read(reinterpret_cast<char*>(bytes), sizeof(T)))
        throw FormatError("truncated container header: " + path.string());
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
    T value;
    std::memcpy(&value, bytes, sizeof(T));
    return value;
}

ContainerHeader read_header(std::istream& is, const std::filesystem::path& path) {
    char magic[4];
    if (!is.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
        throw FormatError("bad magic (expected DEAP): " + path.string());
    const auto version = get_le<std::uint16_t>(is, path);
    if (version != kContainerVersion)
        throw FormatError("unsupported container version " + std::to_string(version) + ": " + path.string());
    ContainerHeader h;
    h.nx = get_le<std::uint32_t>(is, path);
    h.ny = get_le<std::uint32_t>(is, path);
    h.n_frames = get_le<std::uint32_t>(is, path);
    h.dt_ms = get_le<float>(is, path);
    h.dx_mm = get_le<float>(is, path);
    return h;
}

}  // namespace

void write_container(const std::filesystem::path& path, const ContainerHeader& header,
                     std::span<const float> payload) {
    if (payload.size() != header.payload_size())
        throw PreconditionError("container payload size does not match header");
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open for writing: " + path.string());
    os.write(kMagic, 4);
    put_le(os, kContainerVersion);
    put_le(os, header.nx);
    put_le(os, header.ny);
    put_le(os, header.n_frames);
    put_le(os, header.dt_ms);
    put_le(os, header.dx_mm);
    if constexpr (std::endian::native == std::endian::little) {
        os.write(reinterpret_cast<const char*>(payload.data()),
                 static_cast<std::streamsize>(payload.size() * sizeof(float)));
    } else {
        for (float v : payload) put_le(os, v);
    }
    if (!os) throw IoError("write failed: " + path.string());
}

ContainerHeader read_container_header(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open: " + path.string());
    return read_header(is, path);
}

Container read_container(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open: " + path.string());
    Container c;
    c.header = read_header(is, path);
    c.payload.resize(c.header.payload_size());
    if constexpr (std::endian::native == std::endian::little) {
        const auto bytes = static_cast<std::streamsize>(c.payload.size() * sizeof(float));
        if (!is.read(reinterpret_cast<char*>(c.payload.data()), bytes))
            throw FormatError("truncated container payload: " + path.string());
    } else {
        for (auto& v : c.payload) v = get_le<float>(is, path);
    }
    if (is.peek() != std::char_traits<char>::eof())
        throw FormatError("trailing bytes after container payload: " + path.string());
    return c;
}

void write_movie(const std::filesystem::path& path, const Movie& movie) {
    ContainerHeader h;
    h.nx = static_cast<std::uint32_t>(movie.geom.cols);
    h.ny = static_cast<std::uint32_t>(movie.geom.rows);
    h.n_frames = static_cast<std::uint32_t>(movie.n_frames);
    h.dt_ms = static_cast<float>(movie.dt_ms);
    h.dx_mm = static_cast<float>(movie.geom.pitch_mm);
    write_container(path, h, movie.data);
}

Movie read_movie(const std::filesystem::path& path) {
    Container c = read_container(path);
    Movie m;
    m.geom = GridGeometry::centered(static_cast<int>(c.header.ny), static_cast<int>(c.header.nx),
                                    c.header.dx_mm);
    m.n_frames = static_cast<int>(c.header.n_frames);
    m.dt_ms = c.header.dt_ms;
    m.data = std::move(c.payload);
    return m;
}

void write_map(const std::filesystem::path& path, const Map2D& map) {
    ContainerHeader h;
    h.nx = static_cast<std::uint32_t>(map.geom.cols);
    h.ny = static_cast<std::uint32_t>(map.geom.rows);
    h.n_frames = 1;
    h.dt_ms = 0.0f;
    h.dx_mm = static_cast<float>(map.geom.pitch_mm);
    std::vector<float> payload(map.v.begin(), map.v.end());
    write_container(path, h, payload);
}

Map2D read_map(const std::filesystem::path& path) {
    Container c = read_container(path);
    if (c.header.n_frames != 1) throw FormatError("expected a single-frame map: " + path.string());
    Map2D m(GridGeometry::centered(static_cast<int>(c.header.ny), static_cast<int>(c.header.nx),
                                   c.header.dx_mm));
    for (std::size_t i = 0; i < m.v.size(); ++i) m.v[i] = c.payload[i];
    return m;
}

}  // namespace deap::io
