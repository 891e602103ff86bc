#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "climmap/climate_io.hpp"
#include "climmap/maprender.hpp"
#include "climmap/perf.hpp"
#include "climmap/systems.hpp"

namespace climmap {

struct PeriodConfig {
    std::string key; // past | near | far
    std::filesystem::path dir;
};

// Parsed pipeline configuration (one JSON document).
struct PipelineConfig {
    std::string name;
    std::string mode = "model"; // model | climate-stat

    nlohmann::json* system_cfg = nullptr; // owned via raw_config
    std::shared_ptr<nlohmann::json> raw_config;

    std::string variable;        // climate-stat mode
    Statistic statistic = Mean{}; // climate-stat mode
    std::size_t skip_hours = 0;

    std::array<PeriodConfig, 3> periods; // past, near, far
    GridSpec grid;
    std::filesystem::path out_dir;
    int workers = 0;
    bool skip_bad_stations = false;

    std::uint64_t config_digest = 0;
};

PipelineConfig load_pipeline_config(const std::filesystem::path& path);

// FNV-1a 64 over a byte string.
std::uint64_t fnv1a64(const std::string& bytes);

struct RunSummary {
    std::size_t station_count = 0;
    std::array<double, 3> period_wall_seconds{};
    double total_wall_seconds = 0.0;
    ClampStats clamp_stats;
    std::size_t skipped_stations = 0;
    double masked_cell_fraction = 0.0;
    std::vector<std::filesystem::path> outputs;
    std::filesystem::path manifest_path;
};

// Full three-period run: per-station simulation (or climate statistic),
// MapVar assembly, CSV outputs, the five maps, and the run manifest.
// Progress and warnings go to `progress` (standard error in the CLI).
RunSummary run_pipeline(const PipelineConfig& cfg, std::ostream& progress);

// Quasi-uniform station placement over the bounding box via a seeded Halton
// sequence; grid_layout switches to a regular lattice.
std::vector<std::pair<double, double>> place_stations(std::size_t count, const GridSpec& box,
                                                      std::uint64_t seed, bool grid_layout);

int effective_workers(int requested);

} // namespace climmap
