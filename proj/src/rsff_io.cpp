#include "rsflow/rsff_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "rsflow/errors.hpp"

namespace rsflow {
namespace {

constexpr char kMagic[4] = {'R', 'S', 'F', 'F'};
constexpr std::uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <class T>
T to_little(T v) {
    if constexpr (std::endian::native == std::endian::big) {
        unsigned char b[sizeof(T)];
        std::memcpy(b, &v, sizeof(T));
        for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
        std::memcpy(&v, b, sizeof(T));
    }
    return v;
}

template <class T>
void put(std::ostream& out, T v) {
    v = to_little(v);
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw ContractError("RSFF: truncated file");
    return to_little(v);
}

}  // namespace

void write_rsff(std::ostream& out, const VectorField& field, double time) {
    const Grid& g = field.grid();
    out.write(kMagic, 4);
    put<std::uint32_t>(out, kVersion);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(g.dim()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(field.ncomp()));
    for (int a = 0; a < g.dim(); ++a) put<std::uint32_t>(out, static_cast<std::uint32_t>(g.dims(a)));
    for (int a = 0; a < g.dim(); ++a) put<double>(out, g.length(a));
    put<double>(out, time);
    for (int c = 0; c < field.ncomp(); ++c) {
        if constexpr (std::endian::native == std::endian::little) {
            auto v = field[c].values();
            out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size_bytes()));
        } else {
            for (double v : field[c].values()) put<double>(out, v);
        }
    }
    if (!out) throw std::runtime_error("RSFF: write failed");
}

void write_rsff(const std::filesystem::path& path, const VectorField& field, double time) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("RSFF: cannot open " + path.string() + " for writing");
    write_rsff(out, field, time);
}

FieldFile read_rsff(std::istream& in) {
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0) throw ContractError("RSFF: bad magic");
    if (get<std::uint32_t>(in) != kVersion) throw ContractError("RSFF: unsupported version");
    const auto d = get<std::uint32_t>(in);
    const auto ncomp = get<std::uint32_t>(in);
    if (d < 1 || d > 16) throw ContractError("RSFF: implausible dimension");
    std::vector<int> dims(d);
    std::vector<double> length(d);
    for (auto& n : dims) n = static_cast<int>(get<std::uint32_t>(in));
    for (auto& l : length) l = get<double>(in);
    const double time = get<double>(in);
    Grid grid(dims, length);
    std::vector<ScalarField> comps;
    comps.reserve(ncomp);
    for (std::uint32_t c = 0; c < ncomp; ++c) {
        std::vector<double> values(grid.size());
        in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(values.size() * sizeof(double)));
        if (!in) throw ContractError("RSFF: truncated data");
        for (auto& v : values) v = to_little(v);
        comps.emplace_back(grid, std::move(values));
    }
    return {VectorField(grid, std::move(comps)), time};
}

FieldFile read_rsff(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ContractError("RSFF: cannot open " + path.string());
    return read_rsff(in);
}

}  // namespace rsflow
