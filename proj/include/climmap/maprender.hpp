#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "climmap/errors.hpp"
#include "climmap/perf.hpp"

namespace climmap {

struct GridSpec {
    double lon_min = -12.0;
    double lon_max = 45.0;
    double lat_min = 33.0;
    double lat_max = 72.0;
    double cell = 0.25;           // degrees per cell
    double idw_power = 2.0;
    int neighbors = 8;
    double max_distance_km = 500.0;

    void validate() const;
    std::size_t n_cols() const;
    std::size_t n_rows() const;
};

// Rectangular raster; rows run north-to-south, columns west-to-east.
struct MapGrid {
    GridSpec spec;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values; // row-major
    std::vector<bool> mask;     // true = no data

    double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
    bool masked(std::size_t r, std::size_t c) const { return mask[r * cols + c]; }
};

struct StationValue {
    double lon = 0.0;
    double lat = 0.0;
    double value = 0.0;
};

struct Rgb {
    std::uint8_t r = 0, g = 0, b = 0;
    bool operator==(const Rgb&) const = default;
};

// Piecewise-linear 7-anchor scale over [vmin, vmax].
struct ColorScale {
    double vmin = 0.0;
    double vmax = 1.0;

    static const std::array<Rgb, 7>& anchors();
    Rgb map(double value) const;        // clamps outside the domain
    static Rgb at_t(double t);          // t in [0, 1]

    static ColorScale from_range(double vmin, double vmax);
    static ColorScale symmetric(double max_abs); // [-M, M]; M <= 0 falls back to [-1, 1]
};

inline constexpr Rgb kMaskColor{200, 200, 200};

// Great-circle distance, Earth radius 6371.0088 km.
double haversine_km(double lon_a, double lat_a, double lon_b, double lat_b);

// k-nearest inverse-distance weighting onto the grid. Stations within 1 km of
// a cell center set it exactly; cells farther than max_distance_km from every
// station are masked. Duplicate coordinates are mean-merged (count reported
// via n_merged when non-null).
MapGrid interpolate(const std::vector<StationValue>& stations, const GridSpec& spec,
                    std::size_t* n_merged = nullptr);

// One pixel per cell, gray mask, 3x3 black station markers, right-margin color
// bar with vmin/vmax labels. Deterministic byte output.
void render_png(const MapGrid& grid, const ColorScale& scale,
                const std::vector<std::pair<double, double>>& stations,
                const std::filesystem::path& out);

// Numeric twin of the PNG: '#' extent line, then rows north-to-south, masked
// cells as NA.
void write_grid_csv(const MapGrid& grid, const std::filesystem::path& path);

struct RenderedMaps {
    std::vector<std::filesystem::path> pngs;      // 5 entries
    std::vector<std::filesystem::path> grid_csvs; // 5 entries
    double masked_fraction = 0.0;
};

// The five canonical maps: Past, NearFuture, FarFuture, DiffNearPast,
// DiffFarPast. Period maps share one color domain; difference maps use
// symmetric domains.
RenderedMaps render_five(const MapTable& table, const GridSpec& spec, const std::string& name,
                         const std::filesystem::path& out_dir);

// Minimal 8-bit RGB PNG writer (always filter 0).
void write_png_rgb(const std::filesystem::path& path, std::size_t width, std::size_t height,
                   const std::vector<std::uint8_t>& rgb);

} // namespace climmap
