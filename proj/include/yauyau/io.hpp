#pragma once

#include "yauyau/grid.hpp"
#include "yauyau/matrix.hpp"

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace yauyau::io {

// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

// Header line, then one line per matrix row prefixed by r*step.
void write_timed_csv(const std::filesystem::path& path, const std::vector<std::string>& header, const Matrix& m,
                     double step);
// Reads a numeric CSV with a header line; returns the rows.
Matrix read_csv(const std::filesystem::path& path, std::vector<std::string>* header = nullptr);

// Binary density dump, little-endian:
//   char[8] "YYDENS01", u32 D, u32 Ns, f64 ds, f64 lo[D], f64 hi[D], f64 values[Ns^D]
// lo/hi are the first and last node on each axis; values follow the grid's
// row-major flattening.
void write_density(const std::filesystem::path& path, const SpatialGrid& grid, std::span<const double> values);

struct DensityDump {
    unsigned dim = 0;
    unsigned ns = 0;
    double ds = 0.0;
    std::vector<double> lo;
    std::vector<double> hi;
    std::vector<double> values;
};
DensityDump read_density(const std::filesystem::path& path);

} // namespace yauyau::io
