#include "yauyau/io.hpp"

#include "yauyau/errors.hpp"

#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

namespace yauyau::io {

namespace {

constexpr char kMagic[8] = {'Y', 'Y', 'D', 'E', 'N', 'S', '0', '1'};

static_assert(std::endian::native == std::endian::little, "density dumps assume a little-endian host");

template <typename T>
void put(std::ofstream& os, T v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get(std::ifstream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!is) throw Error("truncated density file");
    return v;
}

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode = std::ios::out) {
    std::ofstream os(path, mode);
    if (!os) throw Error("cannot write " + path.string());
    return os;
}

} // namespace

std::string format_double(double v) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

void write_timed_csv(const std::filesystem::path& path, const std::vector<std::string>& header, const Matrix& m,
                     double step) {
    auto os = open_out(path);
    std::string line;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) line += ',';
        line += header[i];
    }
    line += '\n';
    os << line;
    for (std::size_t r = 0; r < m.rows(); ++r) {
        line = format_double(static_cast<double>(r) * step);
        for (double v : m.row(r)) {
            line += ',';
            line += format_double(v);
        }
        line += '\n';
        os << line;
    }
    if (!os) throw Error("failed writing " + path.string());
}

Matrix read_csv(const std::filesystem::path& path, std::vector<std::string>* header) {
    std::ifstream is(path);
    if (!is) throw Error("cannot read " + path.string());
    std::string line;
    std::getline(is, line);
    if (header != nullptr) {
        header->clear();
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) header->push_back(cell);
    }
    std::vector<double> values;
    std::size_t cols = 0, rows = 0;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::size_t n = 0;
        const char* p = line.data();
        const char* end = p + line.size();
        while (p <= end) {
            double v = 0.0;
            auto [next, ec] = std::from_chars(p, end, v);
            if (ec != std::errc()) throw Error("bad number in " + path.string() + " row " + std::to_string(rows + 1));
            values.push_back(v);
            ++n;
            p = next + 1;
        }
        if (rows == 0) cols = n;
        if (n != cols) throw Error("ragged row in " + path.string());
        ++rows;
    }
    Matrix m(rows, cols);
    std::memcpy(m.values().data(), values.data(), values.size() * sizeof(double));
    return m;
}

void write_density(const std::filesystem::path& path, const SpatialGrid& grid, std::span<const double> values) {
    if (values.size() != grid.size()) throw std::invalid_argument("density length does not match the grid");
    auto os = open_out(path, std::ios::out | std::ios::binary);
    os.write(kMagic, sizeof kMagic);
    put<std::uint32_t>(os, static_cast<std::uint32_t>(grid.dim()));
    put<std::uint32_t>(os, static_cast<std::uint32_t>(grid.ns()));
    put<double>(os, grid.ds());
    for (int d = 0; d < grid.dim(); ++d) put<double>(os, grid.lo());
    for (int d = 0; d < grid.dim(); ++d) put<double>(os, grid.hi());
    os.write(reinterpret_cast<const char*>(values.data()), static_cast<std::streamsize>(values.size() * sizeof(double)));
    if (!os) throw Error("failed writing " + path.string());
}

DensityDump read_density(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("cannot read " + path.string());
    char magic[8];
    is.read(magic, sizeof magic);
    if (!is || std::memcmp(magic, kMagic, sizeof kMagic) != 0) throw Error("not a density file: " + path.string());
    DensityDump d;
    d.dim = get<std::uint32_t>(is);
    d.ns = get<std::uint32_t>(is);
    d.ds = get<double>(is);
    if (d.dim < 1 || d.dim > 6) throw Error("density file has an invalid dimension");
    for (unsigned i = 0; i < d.dim; ++i) d.lo.push_back(get<double>(is));
    for (unsigned i = 0; i < d.dim; ++i) d.hi.push_back(get<double>(is));
    std::size_t n = 1;
    for (unsigned i = 0; i < d.dim; ++i) n *= d.ns;
    d.values.resize(n);
    is.read(reinterpret_cast<char*>(d.values.data()), static_cast<std::streamsize>(n * sizeof(double)));
    if (!is) throw Error("truncated density file");
    return d;
}

} // namespace yauyau::io
