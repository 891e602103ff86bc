#include "climmap/maprender.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <numeric>

#include <zlib.h>

namespace climmap {

namespace fs = std::filesystem;

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kEarthRadiusKm = 6371.0088;
constexpr double kExactnessKm = 1.0;
} // namespace

void GridSpec::validate() const {
    if (!(lon_min < lon_max))
        throw ConfigError("grid: lon_min must be < lon_max");
    if (!(lat_min < lat_max))
        throw ConfigError("grid: lat_min must be < lat_max");
    if (!(cell > 0.0))
        throw ConfigError("grid: cell must be positive");
    if (neighbors < 1)
        throw ConfigError("grid: neighbors must be >= 1");
    if (!(idw_power > 0.0))
        throw ConfigError("grid: idw_power must be positive");
}

std::size_t GridSpec::n_cols() const {
    return static_cast<std::size_t>(std::ceil((lon_max - lon_min) / cell - 1e-12));
}

std::size_t GridSpec::n_rows() const {
    return static_cast<std::size_t>(std::ceil((lat_max - lat_min) / cell - 1e-12));
}

double haversine_km(double lon_a, double lat_a, double lon_b, double lat_b) {
    const double to_rad = kPi / 180.0;
    const double dlat = (lat_b - lat_a) * to_rad;
    const double dlon = (lon_b - lon_a) * to_rad;
    const double s1 = std::sin(dlat / 2.0);
    const double s2 = std::sin(dlon / 2.0);
    const double a =
        s1 * s1 + std::cos(lat_a * to_rad) * std::cos(lat_b * to_rad) * s2 * s2;
    return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(a)));
}

MapGrid interpolate(const std::vector<StationValue>& stations, const GridSpec& spec,
                    std::size_t* n_merged) {
    spec.validate();
    if (stations.empty())
        throw EmptyError("no stations to interpolate");

    // Mean-merge duplicate coordinates.
    std::map<std::pair<double, double>, std::pair<double, std::size_t>> merged;
    for (const auto& s : stations) {
        auto& slot = merged[{s.lon, s.lat}];
        slot.first += s.value;
        slot.second += 1;
    }
    if (n_merged)
        *n_merged = stations.size() - merged.size();
    std::vector<StationValue> pts;
    pts.reserve(merged.size());
    for (const auto& [coord, acc] : merged)
        pts.push_back({coord.first, coord.second, acc.first / static_cast<double>(acc.second)});

    MapGrid grid;
    grid.spec = spec;
    grid.rows = spec.n_rows();
    grid.cols = spec.n_cols();
    grid.values.assign(grid.rows * grid.cols, 0.0);
    grid.mask.assign(grid.rows * grid.cols, true);

    const int k = std::min<int>(spec.neighbors, static_cast<int>(pts.size()));
    std::vector<std::pair<double, std::size_t>> dist(pts.size());

    for (std::size_t r = 0; r < grid.rows; ++r) {
        const double lat = spec.lat_max - (static_cast<double>(r) + 0.5) * spec.cell;
        for (std::size_t c = 0; c < grid.cols; ++c) {
            const double lon = spec.lon_min + (static_cast<double>(c) + 0.5) * spec.cell;
            for (std::size_t i = 0; i < pts.size(); ++i)
                dist[i] = {haversine_km(lon, lat, pts[i].lon, pts[i].lat), i};
            std::partial_sort(dist.begin(), dist.begin() + k, dist.end());

            const std::size_t cell_idx = r * grid.cols + c;
            if (dist[0].first > spec.max_distance_km)
                continue; // masked
            grid.mask[cell_idx] = false;
            if (dist[0].first < kExactnessKm) {
                grid.values[cell_idx] = pts[dist[0].second].value;
                continue;
            }
            double wsum = 0.0, vsum = 0.0;
            for (int i = 0; i < k; ++i) {
                const double w = std::pow(dist[i].first, -spec.idw_power);
                wsum += w;
                vsum += w * pts[dist[i].second].value;
            }
            grid.values[cell_idx] = vsum / wsum;
        }
    }
    return grid;
}

const std::array<Rgb, 7>& ColorScale::anchors() {
    static const std::array<Rgb, 7> a = {Rgb{0, 0, 131},   Rgb{0, 60, 170}, Rgb{5, 255, 255},
                                         Rgb{255, 255, 0}, Rgb{250, 120, 0}, Rgb{190, 0, 0},
                                         Rgb{84, 0, 0}};
    return a;
}

Rgb ColorScale::at_t(double t) {
    t = std::clamp(t, 0.0, 1.0);
    const auto& a = anchors();
    const double pos = t * 6.0;
    const std::size_t lo = std::min<std::size_t>(static_cast<std::size_t>(pos), 5);
    const double f = pos - static_cast<double>(lo);
    auto lerp = [f](std::uint8_t x, std::uint8_t y) {
        return static_cast<std::uint8_t>(std::lround(x + f * (static_cast<double>(y) - x)));
    };
    return {lerp(a[lo].r, a[lo + 1].r), lerp(a[lo].g, a[lo + 1].g), lerp(a[lo].b, a[lo + 1].b)};
}

Rgb ColorScale::map(double value) const {
    if (!(vmax > vmin))
        return at_t(0.0);
    return at_t((value - vmin) / (vmax - vmin));
}

ColorScale ColorScale::from_range(double vmin, double vmax) {
    return {vmin, vmax};
}

ColorScale ColorScale::symmetric(double max_abs) {
    if (!(max_abs > 0.0))
        max_abs = 1.0;
    return {-max_abs, max_abs};
}

// ---- PNG writing -----------------------------------------------------------

namespace {

void put_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

void put_chunk(std::vector<std::uint8_t>& out, const char* type,
               const std::vector<std::uint8_t>& payload) {
    put_be32(out, static_cast<std::uint32_t>(payload.size()));
    const std::size_t crc_start = out.size();
    out.insert(out.end(), type, type + 4);
    out.insert(out.end(), payload.begin(), payload.end());
    const auto crc = crc32(0, out.data() + crc_start, static_cast<uInt>(out.size() - crc_start));
    put_be32(out, static_cast<std::uint32_t>(crc));
}

} // namespace

void write_png_rgb(const fs::path& path, std::size_t width, std::size_t height,
                   const std::vector<std::uint8_t>& rgb) {
    if (width == 0 || height == 0 || rgb.size() != width * height * 3)
        throw ArgumentError("write_png_rgb: bad image dimensions");

    // Raw stream: one filter byte (0) per scanline.
    std::vector<std::uint8_t> raw;
    raw.reserve(height * (1 + width * 3));
    for (std::size_t y = 0; y < height; ++y) {
        raw.push_back(0);
        const std::uint8_t* row = rgb.data() + y * width * 3;
        raw.insert(raw.end(), row, row + width * 3);
    }

    uLongf bound = compressBound(static_cast<uLong>(raw.size()));
    std::vector<std::uint8_t> deflated(bound);
    if (compress2(deflated.data(), &bound, raw.data(), static_cast<uLong>(raw.size()), 6) != Z_OK)
        throw IoError("PNG deflate failed");
    deflated.resize(bound);

    std::vector<std::uint8_t> out;
    static const std::uint8_t sig[8] = {137, 80, 78, 71, 13, 10, 26, 10};
    out.insert(out.end(), sig, sig + 8);

    std::vector<std::uint8_t> ihdr;
    put_be32(ihdr, static_cast<std::uint32_t>(width));
    put_be32(ihdr, static_cast<std::uint32_t>(height));
    ihdr.push_back(8); // bit depth
    ihdr.push_back(2); // color type: truecolor
    ihdr.push_back(0); // compression
    ihdr.push_back(0); // filter
    ihdr.push_back(0); // interlace
    put_chunk(out, "IHDR", ihdr);
    put_chunk(out, "IDAT", deflated);
    put_chunk(out, "IEND", {});

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f)
        throw IoError("cannot open " + path.string() + " for writing");
    f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
    if (!f)
        throw IoError("write failed: " + path.string());
}

// ---- tiny 5x7 bitmap font for the color bar labels --------------------------

namespace {

struct Glyph {
    char ch;
    std::uint8_t rows[7]; // 5 LSBs used, bit 4 = leftmost column
};

const Glyph kFont[] = {
    {'0', {0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E}},
    {'1', {0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E}},
    {'2', {0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F}},
    {'3', {0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E}},
    {'4', {0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02}},
    {'5', {0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E}},
    {'6', {0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E}},
    {'7', {0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08}},
    {'8', {0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E}},
    {'9', {0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C}},
    {'-', {0x00, 0x00, 0x00, 0x1F, 0x00, 0x00, 0x00}},
    {'+', {0x00, 0x04, 0x04, 0x1F, 0x04, 0x04, 0x00}},
    {'.', {0x00, 0x00, 0x00, 0x00, 0x00, 0x0C, 0x0C}},
    {'e', {0x00, 0x00, 0x0E, 0x11, 0x1F, 0x10, 0x0E}},
};

const Glyph* find_glyph(char ch) {
    for (const Glyph& g : kFont)
        if (g.ch == ch)
            return &g;
    return nullptr;
}

void draw_text(std::vector<std::uint8_t>& img, std::size_t width, std::size_t height,
               std::size_t x, std::size_t y, const std::string& text) {
    for (char ch : text) {
        const Glyph* g = find_glyph(ch);
        if (g) {
            for (int r = 0; r < 7; ++r) {
                for (int c = 0; c < 5; ++c) {
                    if (!(g->rows[r] & (0x10 >> c)))
                        continue;
                    const std::size_t px = x + static_cast<std::size_t>(c);
                    const std::size_t py = y + static_cast<std::size_t>(r);
                    if (px >= width || py >= height)
                        continue;
                    std::uint8_t* p = img.data() + (py * width + px) * 3;
                    p[0] = p[1] = p[2] = 0;
                }
            }
        }
        x += 6;
    }
}

std::string label_text(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

} // namespace

void render_png(const MapGrid& grid, const ColorScale& scale,
                const std::vector<std::pair<double, double>>& stations, const fs::path& out) {
    if (grid.rows == 0 || grid.cols == 0)
        throw ArgumentError("render_png: empty grid");

    constexpr std::size_t kGap = 8;
    constexpr std::size_t kBarWidth = 20;
    constexpr std::size_t kTextGap = 4;
    constexpr std::size_t kTextWidth = 68;
    const std::size_t width = grid.cols + kGap + kBarWidth + kTextGap + kTextWidth;
    const std::size_t height = std::max<std::size_t>(grid.rows, 16);

    std::vector<std::uint8_t> img(width * height * 3, 255);

    for (std::size_t r = 0; r < grid.rows; ++r) {
        for (std::size_t c = 0; c < grid.cols; ++c) {
            const Rgb color = grid.masked(r, c) ? kMaskColor : scale.map(grid.at(r, c));
            std::uint8_t* p = img.data() + (r * width + c) * 3;
            p[0] = color.r;
            p[1] = color.g;
            p[2] = color.b;
        }
    }

    // 3x3 station markers
    const GridSpec& gs = grid.spec;
    for (const auto& [lon, lat] : stations) {
        const double fc = (lon - gs.lon_min) / gs.cell - 0.5;
        const double fr = (gs.lat_max - lat) / gs.cell - 0.5;
        const long col = std::lround(fc);
        const long row = std::lround(fr);
        for (long dr = -1; dr <= 1; ++dr) {
            for (long dc = -1; dc <= 1; ++dc) {
                const long r = row + dr, c = col + dc;
                if (r < 0 || c < 0 || r >= static_cast<long>(grid.rows) ||
                    c >= static_cast<long>(grid.cols))
                    continue;
                std::uint8_t* p =
                    img.data() + (static_cast<std::size_t>(r) * width + static_cast<std::size_t>(c)) * 3;
                p[0] = p[1] = p[2] = 0;
            }
        }
    }

    // vertical color bar, vmax at top
    const std::size_t bar_x = grid.cols + kGap;
    for (std::size_t y = 0; y < height; ++y) {
        const double t = height > 1 ? 1.0 - static_cast<double>(y) / (height - 1) : 0.0;
        const Rgb color = ColorScale::at_t(t);
        for (std::size_t x = bar_x; x < bar_x + kBarWidth; ++x) {
            std::uint8_t* p = img.data() + (y * width + x) * 3;
            p[0] = color.r;
            p[1] = color.g;
            p[2] = color.b;
        }
    }

    const std::size_t text_x = bar_x + kBarWidth + kTextGap;
    draw_text(img, width, height, text_x, 1, label_text(scale.vmax));
    draw_text(img, width, height, text_x, height - 8, label_text(scale.vmin));

    write_png_rgb(out, width, height, img);
}

void write_grid_csv(const MapGrid& grid, const fs::path& path) {
    std::string body = "# ";
    char buf[48];
    const GridSpec& gs = grid.spec;
    const double header_vals[] = {gs.lon_min, gs.lon_max, gs.lat_min, gs.lat_max, gs.cell};
    for (std::size_t i = 0; i < 5; ++i) {
        if (i)
            body += ',';
        std::snprintf(buf, sizeof(buf), "%.9g", header_vals[i]);
        body += buf;
    }
    body += '\n';
    for (std::size_t r = 0; r < grid.rows; ++r) {
        for (std::size_t c = 0; c < grid.cols; ++c) {
            if (c)
                body += ',';
            if (grid.masked(r, c)) {
                body += "NA";
            } else {
                std::snprintf(buf, sizeof(buf), "%.9g", grid.at(r, c));
                body += buf;
            }
        }
        body += '\n';
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("cannot open " + path.string() + " for writing");
    out.write(body.data(), static_cast<std::streamsize>(body.size()));
    if (!out)
        throw IoError("write failed: " + path.string());
}

RenderedMaps render_five(const MapTable& table, const GridSpec& spec, const std::string& name,
                         const fs::path& out_dir) {
    if (table.rows.empty())
        throw EmptyError("map table is empty");

    std::vector<std::pair<double, double>> coords;
    coords.reserve(table.rows.size());
    for (const MapRow& r : table.rows)
        coords.emplace_back(r.lon, r.lat);

    auto column = [&](double MapRow::*field) {
        std::vector<StationValue> vals;
        vals.reserve(table.rows.size());
        for (const MapRow& r : table.rows)
            vals.push_back({r.lon, r.lat, r.*field});
        return vals;
    };

    struct Layer {
        const char* suffix;
        double MapRow::*field;
        bool is_diff;
    };
    const Layer layers[] = {{"Past", &MapRow::p_past, false},
                            {"NearFuture", &MapRow::p_near, false},
                            {"FarFuture", &MapRow::p_far, false},
                            {"DiffNearPast", &MapRow::d_near, true},
                            {"DiffFarPast", &MapRow::d_far, true}};

    // Period maps share one color domain for comparability.
    double period_min = table.rows[0].p_past, period_max = period_min;
    for (const MapRow& r : table.rows) {
        for (double v : {r.p_past, r.p_near, r.p_far}) {
            period_min = std::min(period_min, v);
            period_max = std::max(period_max, v);
        }
    }

    RenderedMaps out;
    for (const Layer& layer : layers) {
        const std::vector<StationValue> vals = column(layer.field);
        const MapGrid grid = interpolate(vals, spec);

        ColorScale scale;
        if (layer.is_diff) {
            double m = 0.0;
            for (const StationValue& v : vals)
                m = std::max(m, std::abs(v.value));
            scale = ColorScale::symmetric(m);
        } else {
            scale = ColorScale::from_range(period_min, period_max);
        }

        const fs::path png = out_dir / (name + "_" + layer.suffix + ".png");
        const fs::path csv = out_dir / (name + "_" + layer.suffix + ".grid.csv");
        render_png(grid, scale, coords, png);
        write_grid_csv(grid, csv);
        out.pngs.push_back(png);
        out.grid_csvs.push_back(csv);

        if (layer.field == &MapRow::p_past) {
            const std::size_t masked =
                static_cast<std::size_t>(std::count(grid.mask.begin(), grid.mask.end(), true));
            out.masked_fraction = static_cast<double>(masked) / static_cast<double>(grid.mask.size());
        }
    }
    return out;
}

} // namespace climmap
