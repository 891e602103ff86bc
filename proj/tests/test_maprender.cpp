#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "climmap/maprender.hpp"
#include "png_decode.hpp"

using namespace climmap;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    static fs::path dir = [] {
        fs::path p = fs::temp_directory_path() / "climmap_test_maprender";
        fs::remove_all(p);
        fs::create_directories(p);
        return p;
    }();
    return dir;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

GridSpec small_grid() {
    GridSpec g;
    g.lon_min = 0.0;
    g.lon_max = 10.0;
    g.lat_min = 45.0;
    g.lat_max = 55.0;
    g.cell = 0.5;
    return g;
}

} // namespace

TEST_CASE("haversine: identity, symmetry, quarter circumference") {
    CHECK(haversine_km(5.0, 52.0, 5.0, 52.0) == 0.0);
    CHECK(haversine_km(1.0, 2.0, 3.0, 4.0) == haversine_km(3.0, 4.0, 1.0, 2.0));
    CHECK(std::abs(haversine_km(0.0, 0.0, 90.0, 0.0) - 10007.557221) < 0.01);
}

TEST_CASE("interpolate: single station fills all unmasked cells") {
    GridSpec g = small_grid();
    const MapGrid grid = interpolate({{5.0, 50.0, 7.25}}, g);
    bool any_unmasked = false;
    for (std::size_t r = 0; r < grid.rows; ++r)
        for (std::size_t c = 0; c < grid.cols; ++c)
            if (!grid.masked(r, c)) {
                any_unmasked = true;
                CHECK(grid.at(r, c) == doctest::Approx(7.25).epsilon(1e-14));
            }
    CHECK(any_unmasked);
}

TEST_CASE("interpolate: mask beyond max distance") {
    GridSpec g = small_grid();
    g.max_distance_km = 100.0;
    const MapGrid grid = interpolate({{5.0, 50.0, 1.0}}, g);
    // the far corner is several hundred km away
    CHECK(grid.masked(0, 0));
    // the cell at the station is not
    const std::size_t row = static_cast<std::size_t>((g.lat_max - 50.0) / g.cell);
    const std::size_t col = static_cast<std::size_t>((5.0 - g.lon_min) / g.cell);
    CHECK_FALSE(grid.masked(row, col));
}

TEST_CASE("interpolate: midpoint of two stations is their mean") {
    GridSpec g;
    g.lon_min = -1.125;
    g.lon_max = 1.125;
    g.lat_min = 49.875;
    g.lat_max = 50.125;
    g.cell = 0.25;
    const MapGrid grid = interpolate({{-1.0, 50.0, 0.0}, {1.0, 50.0, 10.0}}, g);
    // center cell is equidistant from both stations
    const std::size_t c = grid.cols / 2;
    CHECK(grid.at(0, c) == doctest::Approx(5.0).epsilon(1e-9));
}

TEST_CASE("interpolate: exactness within 1 km of a station") {
    GridSpec g = small_grid();
    // place a station exactly at a cell center
    const double lon = g.lon_min + 4.5 * g.cell;
    const double lat = g.lat_max - 4.5 * g.cell;
    const MapGrid grid = interpolate({{lon, lat, 7.3}, {lon + 3.0, lat - 3.0, 100.0}}, g);
    CHECK(grid.at(4, 4) == 7.3);
}

TEST_CASE("interpolate: convex bounds and translation equivariance") {
    GridSpec g = small_grid();
    std::vector<StationValue> st = {
        {1.0, 46.0, -3.0}, {9.0, 54.0, 12.0}, {4.0, 50.0, 5.0}, {7.0, 47.5, 2.0}};
    const MapGrid grid = interpolate(st, g);

    std::vector<StationValue> shifted = st;
    for (auto& s : shifted)
        s.value += 42.0;
    const MapGrid grid2 = interpolate(shifted, g);

    for (std::size_t r = 0; r < grid.rows; ++r) {
        for (std::size_t c = 0; c < grid.cols; ++c) {
            if (grid.masked(r, c))
                continue;
            CHECK(grid.at(r, c) >= -3.0);
            CHECK(grid.at(r, c) <= 12.0);
            CHECK(std::abs(grid2.at(r, c) - grid.at(r, c) - 42.0) < 1e-12);
        }
    }
}

TEST_CASE("interpolate: duplicate coordinates mean-merged") {
    GridSpec g = small_grid();
    std::size_t merged = 0;
    const MapGrid grid = interpolate({{5.0, 50.0, 0.0}, {5.0, 50.0, 10.0}}, g, &merged);
    CHECK(merged == 1);
    for (std::size_t i = 0; i < grid.values.size(); ++i)
        if (!grid.mask[i])
            CHECK(grid.values[i] == doctest::Approx(5.0).epsilon(1e-14));
}

TEST_CASE("interpolate: empty station list rejected") {
    CHECK_THROWS_AS(interpolate({}, small_grid()), EmptyError);
}

TEST_CASE("color scale endpoints and midpoint") {
    const ColorScale s = ColorScale::from_range(0.0, 1.0);
    CHECK(s.map(0.0) == Rgb{0, 0, 131});
    CHECK(s.map(1.0) == Rgb{84, 0, 0});
    CHECK(s.map(-5.0) == Rgb{0, 0, 131}); // clamped
    // symmetric scale: zero maps to the midpoint color
    const ColorScale sym = ColorScale::symmetric(3.0);
    CHECK(sym.map(0.0) == ColorScale::at_t(0.5));
    // degenerate symmetric domain falls back to a valid scale
    const ColorScale flat = ColorScale::symmetric(0.0);
    CHECK(flat.map(0.0) == ColorScale::at_t(0.5));
}

TEST_CASE("render_png: deterministic bytes and decodable raster") {
    GridSpec g = small_grid();
    const MapGrid grid = interpolate({{5.0, 50.0, 7.25}}, g);
    const ColorScale scale = ColorScale::from_range(0.0, 10.0);

    const fs::path p1 = temp_dir() / "map1.png";
    const fs::path p2 = temp_dir() / "map2.png";
    render_png(grid, scale, {}, p1);
    render_png(grid, scale, {}, p2);
    CHECK(read_file(p1) == read_file(p2));

    const auto png = climmap_test::decode_png(p1.string());
    CHECK(png.height >= grid.rows);
    CHECK(png.width > grid.cols);
    // an unmasked cell carries the scale color of 7.25
    for (std::size_t r = 0; r < grid.rows; ++r)
        for (std::size_t c = 0; c < grid.cols; ++c)
            if (!grid.masked(r, c)) {
                const Rgb expected = scale.map(grid.at(r, c));
                CHECK(png.r(c, r) == expected.r);
                CHECK(png.g(c, r) == expected.g);
                CHECK(png.b(c, r) == expected.b);
            } else {
                CHECK(png.r(c, r) == kMaskColor.r);
            }
}

TEST_CASE("grid csv matches the png raster through the scale") {
    GridSpec g = small_grid();
    std::vector<StationValue> st = {{2.0, 47.0, 1.0}, {8.0, 53.0, 9.0}};
    const MapGrid grid = interpolate(st, g);
    const fs::path csv = temp_dir() / "grid.csv";
    write_grid_csv(grid, csv);

    std::ifstream in(csv);
    std::string line;
    std::getline(in, line);
    CHECK(line.rfind("# ", 0) == 0);
    std::size_t r = 0;
    while (std::getline(in, line)) {
        std::size_t c = 0, pos = 0;
        while (pos <= line.size()) {
            std::size_t comma = line.find(',', pos);
            if (comma == std::string::npos)
                comma = line.size();
            const std::string tok = line.substr(pos, comma - pos);
            if (tok == "NA") {
                CHECK(grid.masked(r, c));
            } else {
                // values serialize at 9 significant digits
                CHECK(std::abs(std::stod(tok) - grid.at(r, c)) <
                      1e-8 * (1.0 + std::abs(grid.at(r, c))));
            }
            ++c;
            pos = comma + 1;
        }
        CHECK(c == grid.cols);
        ++r;
    }
    CHECK(r == grid.rows);
}

TEST_CASE("render_five: file names, shared period scale, midpoint diffs") {
    MapTable table;
    table.rows = {{"a", 2.0, 47.0, 1.0, 1.0, 1.0, 0.0, 0.0},
                  {"b", 8.0, 53.0, 9.0, 9.0, 9.0, 0.0, 0.0}};
    GridSpec g = small_grid();
    const fs::path dir = temp_dir() / "five";
    fs::create_directories(dir);
    const RenderedMaps maps = render_five(table, g, "demo", dir);

    REQUIRE(maps.pngs.size() == 5);
    REQUIRE(maps.grid_csvs.size() == 5);
    const char* names[] = {"demo_Past.png", "demo_NearFuture.png", "demo_FarFuture.png",
                           "demo_DiffNearPast.png", "demo_DiffFarPast.png"};
    for (int i = 0; i < 5; ++i) {
        CHECK(maps.pngs[i].filename().string() == names[i]);
        CHECK(fs::exists(maps.pngs[i]));
        CHECK(fs::exists(maps.grid_csvs[i]));
    }

    // identical periods: both diff maps uniformly at the colormap midpoint
    const Rgb mid = ColorScale::at_t(0.5);
    for (int i = 3; i < 5; ++i) {
        const auto png = climmap_test::decode_png(maps.pngs[i].string());
        const MapGrid ref = interpolate({{2.0, 47.0, 0.0}, {8.0, 53.0, 0.0}}, g);
        for (std::size_t r = 0; r < ref.rows; ++r)
            for (std::size_t c = 0; c < ref.cols; ++c)
                if (!ref.masked(r, c)) {
                    // station markers overprint; skip black pixels
                    if (png.r(c, r) == 0 && png.g(c, r) == 0 && png.b(c, r) == 0)
                        continue;
                    CHECK(png.r(c, r) == mid.r);
                    CHECK(png.g(c, r) == mid.g);
                    CHECK(png.b(c, r) == mid.b);
                }
    }

    // shared period domain: station b's value renders identically in all period maps
    const auto past = climmap_test::decode_png(maps.pngs[0].string());
    const auto far = climmap_test::decode_png(maps.pngs[2].string());
    CHECK(past.rgb == far.rgb);
}
