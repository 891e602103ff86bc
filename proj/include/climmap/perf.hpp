#pragma once

#include <string>
#include <variant>
#include <vector>

#include "climmap/climate_io.hpp"
#include "climmap/statespace.hpp"

namespace climmap {

struct SystemSpec;

// Reduction statistics over the weighted-output scalar stream.
struct Mean {};
struct Min {};
struct Max {};
struct Percentile {
    double q = 50.0; // [0, 100]
};
struct FractionAbove {
    double threshold = 0.0;
};
using Statistic = std::variant<Mean, Min, Max, Percentile, FractionAbove>;

// Scalar indicator: s_k = weights . y_k + offset, reduced by `statistic`.
struct PerformanceIndicator {
    Vec weights;
    double offset = 0.0;
    Statistic statistic = Mean{};
    std::size_t skip_hours = 0; // leading samples excluded from the reduction

    void validate(Eigen::Index p) const;
};

// Streaming reducer. Mean uses compensated summation; Min/Max/FractionAbove
// are one-pass; Percentile buffers the scalars.
class StatReducer {
  public:
    explicit StatReducer(Statistic statistic, std::size_t skip = 0);

    void add(double s);
    double result() const; // throws EmptyError when nothing was accumulated

  private:
    Statistic stat_;
    std::size_t skip_;
    std::size_t seen_ = 0;
    std::size_t count_ = 0;
    double sum_ = 0.0;
    double comp_ = 0.0; // Kahan carry
    double min_ = 0.0;
    double max_ = 0.0;
    std::size_t above_ = 0;
    std::vector<double> buffer_; // Percentile only
};

// Applies the indicator to a materialized output stream.
double reduce_stream(const PerformanceIndicator& indicator, const std::vector<Vec>& y_stream);

// Statistic applied directly to one climate column (no state-space model).
double climate_stat(const ClimateSeries& series, const std::string& code,
                    const Statistic& statistic);

struct StationResult {
    std::string station_id; // filename stem
    double lon = 0.0;
    double lat = 0.0;
    double value = 0.0;
};

struct MapRow {
    std::string station_id;
    double lon = 0.0;
    double lat = 0.0;
    double p_past = 0.0;
    double p_near = 0.0;
    double p_far = 0.0;
    double d_near = 0.0; // p_near - p_past
    double d_far = 0.0;  // p_far - p_past
};

struct MapTable {
    std::vector<MapRow> rows; // sorted by station_id
};

// Joins the three period result lists by station id and computes the
// difference columns. Throws JoinError naming any unmatched station.
MapTable assemble_map_table(std::vector<StationResult> past, std::vector<StationResult> near,
                            std::vector<StationResult> far);

// Discretizes at dt = 3600 s, simulates the full series with the indicator
// reduction as the streaming sink, and returns the station's scalar result.
StationResult run_station(const SystemSpec& spec, const ClimateSeries& series,
                          const std::string& station_id);

// MapTable CSV: station,lon,lat,past,near,far,diff_near,diff_far (9 sig digits).
void write_map_table_csv(const MapTable& table, const std::filesystem::path& path);

// Per-period CSV: station,lon,lat,value.
void write_period_csv(const std::vector<StationResult>& results,
                      const std::filesystem::path& path);

} // namespace climmap
