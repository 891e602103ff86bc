#include "climmap/climate_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>

namespace climmap {

namespace fs = std::filesystem;

void GeoHeader::validate() const {
    if (!(longitude > -180.0 && longitude <= 180.0))
        throw ParseError("longitude out of range (-180, 180]: " + std::to_string(longitude));
    if (!(latitude >= -90.0 && latitude <= 90.0))
        throw ParseError("latitude out of range [-90, 90]: " + std::to_string(latitude));
    if (time_step != 1.0)
        throw ParseError("time step must be 1.0 h, got " + std::to_string(time_step));
}

const std::vector<double>& ClimateSeries::column(const std::string& code) const {
    auto it = columns.find(code);
    if (it == columns.end())
        throw ConfigError("unknown climate column: " + code);
    return it->second;
}

std::vector<double> derive_isvar(const std::vector<double>& isgh, const std::vector<double>& isd) {
    if (isgh.size() != isd.size())
        throw LengthError("ISGH and ISD lengths differ");
    std::vector<double> out(isgh.size());
    for (std::size_t i = 0; i < isgh.size(); ++i)
        out[i] = std::max(isgh[i] - isd[i], 0.0);
    return out;
}

namespace {

double parse_number(const char* begin, const char* end, std::size_t line_no) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc() || ptr != end)
        throw ParseError(line_no, "bad numeric token '" + std::string(begin, end) + "'");
    if (!std::isfinite(v))
        throw ParseError(line_no, "non-finite value '" + std::string(begin, end) + "'");
    return v;
}

// Header line "KEY <value>"; key must match exactly.
double parse_header_line(const std::string& line, const char* key, std::size_t line_no) {
    const std::size_t klen = std::strlen(key);
    if (line.compare(0, klen, key) != 0 || line.size() <= klen || line[klen] != ' ')
        throw ParseError(line_no, std::string("expected header line '") + key + " <value>'");
    const char* b = line.data() + klen + 1;
    while (*b == ' ')
        ++b;
    return parse_number(b, line.data() + line.size(), line_no);
}

std::size_t clamp_column(std::vector<double>& col, double lo, double hi) {
    std::size_t n = 0;
    for (double& v : col) {
        if (v < lo) {
            v = lo;
            ++n;
        } else if (v > hi) {
            v = hi;
            ++n;
        }
    }
    return n;
}

void format_value(std::string& out, double v) {
    char buf[32];
    int len = std::snprintf(buf, sizeof(buf), "%.6g", v);
    out.append(buf, static_cast<std::size_t>(len));
}

} // namespace

ClimateSeries parse_climate_file(const fs::path& path, ClampStats* stats) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open " + path.string());

    std::string line;
    std::size_t line_no = 0;

    auto next_line = [&](bool skip_comments) -> bool {
        while (std::getline(in, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r')
                line.pop_back();
            if (skip_comments && !line.empty() && line[0] == '#')
                continue;
            return true;
        }
        return false;
    };

    if (!next_line(false) || line != "CLIM1")
        throw ParseError(line_no ? line_no : 1, "missing CLIM1 magic line");

    ClimateSeries s;
    static const char* keys[] = {"LON", "LAT", "HGT", "TZ", "DT"};
    double hv[5];
    for (int i = 0; i < 5; ++i) {
        if (!next_line(true))
            throw ParseError(line_no, "truncated header");
        hv[i] = parse_header_line(line, keys[i], line_no);
    }
    s.header = {hv[0], hv[1], hv[2], hv[3], hv[4]};
    try {
        s.header.validate();
    } catch (const ParseError& e) {
        throw ParseError(line_no, e.what());
    }

    if (!next_line(true))
        throw ParseError(line_no, "missing COLS line");
    {
        std::string expected = "COLS";
        for (const char* c : kStoredCodes) {
            expected += ' ';
            expected += c;
        }
        if (line != expected)
            throw ParseError(line_no, "COLS line must be '" + expected + "'");
    }

    std::array<std::vector<double>, kStoredCodes.size()> cols;
    while (next_line(true)) {
        if (line.empty())
            continue;
        const char* p = line.data();
        const char* end = p + line.size();
        std::size_t count = 0;
        while (p < end) {
            while (p < end && *p == ' ')
                ++p;
            if (p == end)
                break;
            const char* tok = p;
            while (p < end && *p != ' ')
                ++p;
            if (count >= kStoredCodes.size())
                throw ParseError(line_no, "row has more than 13 columns");
            cols[count].push_back(parse_number(tok, p, line_no));
            ++count;
        }
        if (count != kStoredCodes.size())
            throw ParseError(line_no, "row has " + std::to_string(count) + " columns, expected 13");
    }

    s.n_hours = cols[0].size();
    if (s.n_hours == 0 || s.n_hours % 8760 != 0)
        throw LengthError("row count " + std::to_string(s.n_hours) +
                          " is not a positive multiple of 8760 in " + path.string());

    for (std::size_t i = 0; i < kStoredCodes.size(); ++i)
        s.columns[kStoredCodes[i]] = std::move(cols[i]);

    ClampStats local;
    local.hrel = clamp_column(s.columns["HREL"], 0.0, 100.0);
    local.isgh = clamp_column(s.columns["ISGH"], 0.0, std::numeric_limits<double>::infinity());
    local.isd = clamp_column(s.columns["ISD"], 0.0, std::numeric_limits<double>::infinity());
    local.ws = clamp_column(s.columns["WS"], 0.0, std::numeric_limits<double>::infinity());
    if (stats)
        *stats = local;

    s.columns[kDerivedCode] = derive_isvar(s.columns["ISGH"], s.columns["ISD"]);
    return s;
}

void write_climate_file(const ClimateSeries& series, const fs::path& path) {
    if (series.n_hours == 0 || series.n_hours % 8760 != 0)
        throw LengthError("series length must be a positive multiple of 8760");

    std::string buf;
    buf.reserve(series.n_hours * 13 * 9 + 256);
    buf += "CLIM1\n";
    const GeoHeader& h = series.header;
    const std::pair<const char*, double> hdr[] = {
        {"LON", h.longitude}, {"LAT", h.latitude}, {"HGT", h.height},
        {"TZ", h.time_zone},  {"DT", h.time_step}};
    for (auto& [k, v] : hdr) {
        buf += k;
        buf += ' ';
        format_value(buf, v);
        buf += '\n';
    }
    buf += "COLS";
    for (const char* c : kStoredCodes) {
        buf += ' ';
        buf += c;
    }
    buf += '\n';

    std::array<const std::vector<double>*, kStoredCodes.size()> cols;
    for (std::size_t i = 0; i < kStoredCodes.size(); ++i) {
        cols[i] = &series.column(kStoredCodes[i]);
        if (cols[i]->size() != series.n_hours)
            throw LengthError(std::string("column ") + kStoredCodes[i] + " length mismatch");
    }

    for (std::size_t r = 0; r < series.n_hours; ++r) {
        for (std::size_t c = 0; c < cols.size(); ++c) {
            if (c)
                buf += ' ';
            format_value(buf, (*cols[c])[r]);
        }
        buf += '\n';
    }

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("cannot open " + path.string() + " for writing");
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out)
        throw IoError("write failed: " + path.string());
}

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kDegToRad = kPi / 180.0;

// Sine of solar elevation from declination and hour angle.
double sin_elevation(double lat_deg, int day_of_year, int hour) {
    const double decl = -23.44 * kDegToRad * std::cos(2.0 * kPi * (day_of_year + 10) / 365.0);
    const double hour_angle = 15.0 * (hour - 12) * kDegToRad;
    const double lat = lat_deg * kDegToRad;
    return std::sin(lat) * std::sin(decl) + std::cos(lat) * std::cos(decl) * std::cos(hour_angle);
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

} // namespace

ClimateSeries generate_station(double lon, double lat, int years, double scenario_offset_T,
                               std::uint64_t seed) {
    if (years < 1)
        throw ArgumentError("years must be >= 1");
    if (lat < -90.0 || lat > 90.0)
        throw ArgumentError("latitude out of range");

    const std::size_t n = static_cast<std::size_t>(years) * 8760;

    ClimateSeries s;
    s.header.longitude = lon;
    s.header.latitude = lat;
    s.header.height = 100.0;
    s.header.time_zone = std::round(lon / 15.0);
    s.header.time_step = 1.0;
    s.n_hours = n;

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u01(0.0, 1.0);

    std::vector<double> ta(n), hrel(n), isgh(n), isd(n), ws(n), wd(n), ci(n);

    const double base = 25.0 - 0.6 * (lat - 35.0);
    const double season_amp = 8.0 + 0.15 * std::abs(lat - 35.0);

    for (std::size_t k = 0; k < n; ++k) {
        const int day = static_cast<int>((k / 24) % 365) + 1;
        const int hour = static_cast<int>(k % 24);

        const double noise_ta = -1.5 + 3.0 * u01(rng);
        const double cloud = u01(rng);
        const double noise_hrel = -1.5 + 3.0 * u01(rng);
        const double noise_ws = -3.0 + 6.0 * u01(rng);
        const double dir = 360.0 * u01(rng);

        // Weather signal rounded to 0.01 K before the offset: the 6-digit
        // CLIM1 serialization then preserves period differences exactly.
        const double weather = std::round((base + season_amp * std::cos(2.0 * kPi * (day - 196) / 365.0) +
                                           4.0 * std::cos(2.0 * kPi * (hour - 14) / 24.0) + noise_ta) *
                                          100.0) /
                               100.0;
        const double t = weather + scenario_offset_T;
        ta[k] = t;
        ci[k] = cloud;

        const double g = std::max(0.0, 950.0 * sin_elevation(lat, day, hour)) * (1.0 - 0.75 * cloud);
        isgh[k] = g;
        isd[k] = g * (0.25 + 0.55 * cloud);
        hrel[k] = std::clamp(78.0 - 1.1 * (t - 10.0) + noise_hrel, 5.0, 100.0);
        ws[k] = std::abs(3.5 + noise_ws);
        wd[k] = dir;
    }

    const double ta_mean = std::accumulate(ta.begin(), ta.end(), 0.0) / static_cast<double>(n);

    s.columns["TA"] = std::move(ta);
    s.columns["HREL"] = std::move(hrel);
    s.columns["ISGH"] = std::move(isgh);
    s.columns["ISD"] = std::move(isd);
    s.columns["PSTA"] = std::vector<double>(n, 101325.0);
    s.columns["RN"] = std::vector<double>(n, 0.0);
    s.columns["WD"] = std::move(wd);
    s.columns["WS"] = std::move(ws);
    s.columns["CI"] = std::move(ci);
    s.columns["ILAH"] = std::vector<double>(n, 330.0);
    s.columns["ILTH"] = std::vector<double>(n, 330.0);
    s.columns["GT"] = std::vector<double>(n, ta_mean);
    s.columns["GR"] = std::vector<double>(n, 0.2);
    s.columns[kDerivedCode] = derive_isvar(s.columns["ISGH"], s.columns["ISD"]);
    return s;
}

std::array<PeriodDataset, 3> generate_dataset(const std::vector<std::pair<double, double>>& stations,
                                              int years, const ScenarioOffsets& offsets,
                                              std::uint64_t seed, const fs::path& out_dir) {
    if (stations.empty())
        throw ArgumentError("station list is empty");

    const std::pair<const char*, double> periods[] = {
        {"past", offsets.past}, {"near", offsets.near}, {"far", offsets.far}};

    std::array<PeriodDataset, 3> out;
    std::error_code ec;
    for (std::size_t p = 0; p < 3; ++p) {
        const fs::path dir = out_dir / periods[p].first;
        fs::create_directories(dir, ec);
        if (ec)
            throw IoError("cannot create " + dir.string() + ": " + ec.message());
        out[p].name = periods[p].first;
        out[p].directory = dir;
    }

    for (std::size_t i = 0; i < stations.size(); ++i) {
        const std::uint64_t station_seed = splitmix64(seed ^ splitmix64(i + 1));
        char name[32];
        std::snprintf(name, sizeof(name), "station_%04zu.clim", i);
        for (std::size_t p = 0; p < 3; ++p) {
            ClimateSeries s = generate_station(stations[i].first, stations[i].second, years,
                                               periods[p].second, station_seed);
            const fs::path file = out[p].directory / name;
            write_climate_file(s, file);
            out[p].stations.push_back(file);
        }
    }
    return out;
}

PeriodDataset enumerate_period(const std::string& name, const fs::path& dir) {
    if (!fs::is_directory(dir))
        throw IoError("period directory does not exist: " + dir.string());
    PeriodDataset d;
    d.name = name;
    d.directory = dir;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file())
            d.stations.push_back(entry.path());
    }
    std::sort(d.stations.begin(), d.stations.end(),
              [](const fs::path& a, const fs::path& b) { return a.filename() < b.filename(); });
    return d;
}

} // namespace climmap
