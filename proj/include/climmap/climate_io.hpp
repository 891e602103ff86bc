#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "climmap/errors.hpp"

namespace climmap {

// The 13 stored column codes, in file order.
inline constexpr std::array<const char*, 13> kStoredCodes = {
    "TA", "HREL", "ISGH", "ISD", "PSTA", "RN", "WD", "WS", "CI", "ILAH", "ILTH", "GT", "GR"};

// ISvar (direct horizontal radiation) is derived on load, never stored.
inline constexpr const char* kDerivedCode = "ISvar";

struct GeoHeader {
    double longitude = 0.0; // degrees east, (-180, 180]
    double latitude = 0.0;  // degrees north, [-90, 90]
    double height = 0.0;    // m above sea level
    double time_zone = 0.0; // hours from UTC
    double time_step = 1.0; // hours; must be 1.0

    void validate() const;
};

// One station's hourly climate record: header plus named columns of equal length.
struct ClimateSeries {
    GeoHeader header;
    std::size_t n_hours = 0;
    std::map<std::string, std::vector<double>> columns;

    const std::vector<double>& column(const std::string& code) const;
    bool has_column(const std::string& code) const { return columns.count(code) != 0; }
};

// Counts of values adjusted at load time, reported as warnings.
struct ClampStats {
    std::size_t hrel = 0;
    std::size_t isgh = 0;
    std::size_t isd = 0;
    std::size_t ws = 0;
    std::size_t total() const { return hrel + isgh + isd + ws; }
};

struct PeriodDataset {
    std::string name; // past | near | far
    std::filesystem::path directory;
    std::vector<std::filesystem::path> stations; // sorted by filename
};

inline const char* period_display_name(const std::string& key) {
    if (key == "past") return "Past";
    if (key == "near") return "Near Future";
    if (key == "far") return "Far Future";
    return key.c_str();
}

// Elementwise max(ISGH - ISD, 0). Throws LengthError on mismatched lengths.
std::vector<double> derive_isvar(const std::vector<double>& isgh, const std::vector<double>& isd);

// Parses a CLIM1 file: 13 stored columns, load-time clamping, ISvar derived.
ClimateSeries parse_climate_file(const std::filesystem::path& path, ClampStats* stats = nullptr);

// Writes CLIM1 format (13 stored columns; ISvar omitted). Deterministic byte output.
void write_climate_file(const ClimateSeries& series, const std::filesystem::path& path);

// Deterministic synthetic station series: years x 8760 hours of plausible
// European weather with an additive scenario temperature offset.
ClimateSeries generate_station(double lon, double lat, int years, double scenario_offset_T,
                               std::uint64_t seed);

struct ScenarioOffsets {
    double past = 0.0;
    double near = 0.0;
    double far = 0.0;
};

// Writes one CLIM1 file per station per period under out_dir/{past,near,far}/.
// Periods of one station share the weather noise and differ only by the offsets.
std::array<PeriodDataset, 3> generate_dataset(const std::vector<std::pair<double, double>>& stations,
                                              int years, const ScenarioOffsets& offsets,
                                              std::uint64_t seed,
                                              const std::filesystem::path& out_dir);

// Lists the CLIM1 files of a period directory, sorted by filename.
PeriodDataset enumerate_period(const std::string& name, const std::filesystem::path& dir);

} // namespace climmap
