#include "climmap/perf.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "climmap/systems.hpp"

namespace climmap {

void PerformanceIndicator::validate(Eigen::Index p) const {
    if (weights.size() != p)
        throw ConfigError("indicator weights length != p");
    if (const auto* pc = std::get_if<Percentile>(&statistic))
        if (pc->q < 0.0 || pc->q > 100.0)
            throw ConfigError("percentile q must be in [0, 100]");
}

StatReducer::StatReducer(Statistic statistic, std::size_t skip)
    : stat_(std::move(statistic)), skip_(skip) {}

void StatReducer::add(double s) {
    if (seen_++ < skip_)
        return;
    if (count_ == 0) {
        min_ = max_ = s;
    } else {
        min_ = std::min(min_, s);
        max_ = std::max(max_, s);
    }
    ++count_;

    // Kahan compensated sum; 271,560-term means lose digits otherwise.
    const double y = s - comp_;
    const double t = sum_ + y;
    comp_ = (t - sum_) - y;
    sum_ = t;

    if (const auto* f = std::get_if<FractionAbove>(&stat_)) {
        if (s > f->threshold)
            ++above_;
    } else if (std::holds_alternative<Percentile>(stat_)) {
        buffer_.push_back(s);
    }
}

double StatReducer::result() const {
    if (count_ == 0)
        throw EmptyError("no samples to reduce");
    if (std::holds_alternative<Mean>(stat_))
        return sum_ / static_cast<double>(count_);
    if (std::holds_alternative<Min>(stat_))
        return min_;
    if (std::holds_alternative<Max>(stat_))
        return max_;
    if (const auto* f = std::get_if<FractionAbove>(&stat_)) {
        (void)f;
        return static_cast<double>(above_) / static_cast<double>(count_);
    }
    // Percentile: linear interpolation between order statistics.
    const auto& pc = std::get<Percentile>(stat_);
    std::vector<double> sorted = buffer_;
    std::sort(sorted.begin(), sorted.end());
    const double pos = pc.q / 100.0 * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double reduce_stream(const PerformanceIndicator& indicator, const std::vector<Vec>& y_stream) {
    if (y_stream.empty())
        throw EmptyError("empty output stream");
    StatReducer red(indicator.statistic, indicator.skip_hours);
    for (const Vec& y : y_stream)
        red.add(indicator.weights.dot(y) + indicator.offset);
    return red.result();
}

double climate_stat(const ClimateSeries& series, const std::string& code,
                    const Statistic& statistic) {
    const std::vector<double>& col = series.column(code); // throws ConfigError
    StatReducer red(statistic);
    for (double v : col)
        red.add(v);
    return red.result();
}

MapTable assemble_map_table(std::vector<StationResult> past, std::vector<StationResult> near,
                            std::vector<StationResult> far) {
    auto by_id = [](const StationResult& a, const StationResult& b) {
        return a.station_id < b.station_id;
    };
    std::sort(past.begin(), past.end(), by_id);
    std::sort(near.begin(), near.end(), by_id);
    std::sort(far.begin(), far.end(), by_id);

    if (past.size() != near.size() || past.size() != far.size())
        throw JoinError("period result counts differ: past=" + std::to_string(past.size()) +
                        " near=" + std::to_string(near.size()) +
                        " far=" + std::to_string(far.size()));

    MapTable table;
    table.rows.reserve(past.size());
    for (std::size_t i = 0; i < past.size(); ++i) {
        if (past[i].station_id != near[i].station_id)
            throw JoinError("station '" + past[i].station_id + "' unmatched across periods (near has '" +
                            near[i].station_id + "')");
        if (past[i].station_id != far[i].station_id)
            throw JoinError("station '" + past[i].station_id + "' unmatched across periods (far has '" +
                            far[i].station_id + "')");
        MapRow r;
        r.station_id = past[i].station_id;
        r.lon = past[i].lon;
        r.lat = past[i].lat;
        r.p_past = past[i].value;
        r.p_near = near[i].value;
        r.p_far = far[i].value;
        r.d_near = near[i].value - past[i].value;
        r.d_far = far[i].value - past[i].value;
        table.rows.push_back(std::move(r));
    }
    return table;
}

StationResult run_station(const SystemSpec& spec, const ClimateSeries& series,
                          const std::string& station_id) {
    const BoundInputs inputs = assemble_inputs(spec.bindings, series);

    Vec u0(spec.model.m());
    inputs.fill(0, u0);
    const Vec x0 = resolve_x0(spec, u0);

    const DiscreteModel dmodel = discretize_zoh(spec.model, 3600.0);

    StatReducer red(spec.indicator.statistic, spec.indicator.skip_hours);
    const Vec& w = spec.indicator.weights;
    const double offset = spec.indicator.offset;
    try {
        simulate(
            dmodel, [&inputs](std::size_t k, Vec& u) { inputs.fill(k, u); }, inputs.n_steps(), x0,
            [&](std::size_t, const Vec& y) { red.add(w.dot(y) + offset); });
    } catch (const DivergenceError& e) {
        throw DivergenceError(e.step, "station '" + station_id + "': non-finite state");
    }

    StationResult r;
    r.station_id = station_id;
    r.lon = series.header.longitude;
    r.lat = series.header.latitude;
    r.value = red.result();
    return r;
}

namespace {

void append_g9(std::string& out, double v) {
    char buf[40];
    int len = std::snprintf(buf, sizeof(buf), "%.9g", v);
    out.append(buf, static_cast<std::size_t>(len));
}

void write_text(const std::filesystem::path& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("cannot open " + path.string() + " for writing");
    out.write(body.data(), static_cast<std::streamsize>(body.size()));
    if (!out)
        throw IoError("write failed: " + path.string());
}

} // namespace

void write_map_table_csv(const MapTable& table, const std::filesystem::path& path) {
    std::string body = "station,lon,lat,past,near,far,diff_near,diff_far\n";
    for (const MapRow& r : table.rows) {
        body += r.station_id;
        for (double v : {r.lon, r.lat, r.p_past, r.p_near, r.p_far, r.d_near, r.d_far}) {
            body += ',';
            append_g9(body, v);
        }
        body += '\n';
    }
    write_text(path, body);
}

void write_period_csv(const std::vector<StationResult>& results,
                      const std::filesystem::path& path) {
    std::vector<StationResult> sorted = results;
    std::sort(sorted.begin(), sorted.end(),
              [](const StationResult& a, const StationResult& b) {
                  return a.station_id < b.station_id;
              });
    std::string body = "station,lon,lat,value\n";
    for (const StationResult& r : sorted) {
        body += r.station_id;
        for (double v : {r.lon, r.lat, r.value}) {
            body += ',';
            append_g9(body, v);
        }
        body += '\n';
    }
    write_text(path, body);
}

} // namespace climmap
