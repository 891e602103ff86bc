#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "climmap/perf.hpp"
#include "climmap/systems.hpp"

using namespace climmap;

namespace {

std::vector<Vec> scalar_stream(std::initializer_list<double> values) {
    std::vector<Vec> out;
    for (double v : values)
        out.push_back(Vec::Constant(1, v));
    return out;
}

PerformanceIndicator scalar_indicator(double w, double offset, Statistic stat = Mean{}) {
    PerformanceIndicator ind;
    ind.weights = Vec::Constant(1, w);
    ind.offset = offset;
    ind.statistic = std::move(stat);
    return ind;
}

ClimateSeries constant_series(double ta, double isgh, std::size_t hours = 8760) {
    ClimateSeries s;
    s.header = {5.0, 52.0, 10.0, 1.0, 1.0};
    s.n_hours = hours;
    for (const char* code : kStoredCodes)
        s.columns[code] = std::vector<double>(hours, 0.0);
    s.columns["TA"].assign(hours, ta);
    s.columns["ISGH"].assign(hours, isgh);
    s.columns["ISvar"] = derive_isvar(s.columns["ISGH"], s.columns["ISD"]);
    return s;
}

} // namespace

TEST_CASE("reduce_stream: mean, fraction above") {
    CHECK(reduce_stream(scalar_indicator(1.0, 0.0), scalar_stream({1, 2, 3})) == 2.0);
    CHECK(reduce_stream(scalar_indicator(1.0, 0.0, FractionAbove{0.0}),
                        scalar_stream({-1, 2, 3, -4})) == 0.5);
    CHECK_THROWS_AS(reduce_stream(scalar_indicator(1.0, 0.0), {}), EmptyError);
}

TEST_CASE("reduce_stream: hvac indicator on constant T5") {
    // weights select T5 with mdot*c = 201, offset -201*22; T5 = 23 gives 201 W
    PerformanceIndicator ind;
    ind.weights = Vec::Zero(5);
    ind.weights(4) = 201.0;
    ind.offset = -201.0 * 22.0;
    std::vector<Vec> ys(10, (Vec(5) << 0, 0, 0, 0, 23.0).finished());
    CHECK(reduce_stream(ind, ys) == doctest::Approx(201.0).epsilon(1e-12));
}

TEST_CASE("reduce_stream: min, max, percentile") {
    CHECK(reduce_stream(scalar_indicator(1.0, 0.0, Min{}), scalar_stream({3, -1, 2})) == -1.0);
    CHECK(reduce_stream(scalar_indicator(1.0, 0.0, Max{}), scalar_stream({3, -1, 2})) == 3.0);
    // median of 1..5 and an interpolated quartile
    CHECK(reduce_stream(scalar_indicator(1.0, 0.0, Percentile{50.0}),
                        scalar_stream({5, 1, 3, 2, 4})) == 3.0);
    CHECK(reduce_stream(scalar_indicator(1.0, 0.0, Percentile{25.0}),
                        scalar_stream({5, 1, 3, 2, 4})) == 2.0);
    CHECK(reduce_stream(scalar_indicator(1.0, 0.0, Percentile{10.0}),
                        scalar_stream({1, 2})) == doctest::Approx(1.1).epsilon(1e-12));
}

TEST_CASE("mean is linear in weights and offset") {
    const auto ys = scalar_stream({0.5, -2.0, 7.0, 1.25});
    const double base = reduce_stream(scalar_indicator(1.5, 0.75), ys);
    const double scaled = reduce_stream(scalar_indicator(3.0 * 1.5, 3.0 * 0.75), ys);
    CHECK(scaled == doctest::Approx(3.0 * base).epsilon(1e-12));
}

TEST_CASE("skip_hours excludes leading samples") {
    PerformanceIndicator ind = scalar_indicator(1.0, 0.0);
    ind.skip_hours = 2;
    CHECK(reduce_stream(ind, scalar_stream({100, 100, 1, 3})) == 2.0);
}

TEST_CASE("kahan mean survives many terms") {
    StatReducer red(Mean{});
    const std::size_t n = 271560;
    for (std::size_t i = 0; i < n; ++i)
        red.add(0.1);
    CHECK(std::abs(red.result() - 0.1) < 1e-15);
}

TEST_CASE("climate_stat examples") {
    const ClimateSeries s = constant_series(10.0, 0.0);
    CHECK(climate_stat(s, "TA", Mean{}) == 10.0);
    CHECK(climate_stat(s, "WS", Min{}) >= 0.0);
    CHECK_THROWS_AS(climate_stat(s, "BOGUS", Mean{}), ConfigError);
}

TEST_CASE("climate_stat: additive offset propagates through the mean") {
    const ClimateSeries past = generate_station(5.0, 52.0, 1, 0.0, 77);
    const ClimateSeries near = generate_station(5.0, 52.0, 1, 2.0, 77);
    const double diff = climate_stat(near, "TA", Mean{}) - climate_stat(past, "TA", Mean{});
    CHECK(diff == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("assemble_map_table: differences and ordering") {
    std::vector<StationResult> past = {{"b", 1, 2, 5.0}, {"a", 0, 0, 1.0}};
    std::vector<StationResult> near = {{"a", 0, 0, 1.0}, {"b", 1, 2, 7.0}};
    std::vector<StationResult> far = {{"b", 1, 2, 9.0}, {"a", 0, 0, 1.0}};
    const MapTable t = assemble_map_table(past, near, far);
    REQUIRE(t.rows.size() == 2);
    CHECK(t.rows[0].station_id == "a"); // sorted by id
    CHECK(t.rows[1].p_past == 5.0);
    CHECK(t.rows[1].p_near == 7.0);
    CHECK(t.rows[1].p_far == 9.0);
    CHECK(t.rows[1].d_near == 2.0);
    CHECK(t.rows[1].d_far == 4.0);
    // exact difference consistency
    CHECK(t.rows[1].d_near + t.rows[1].p_past == t.rows[1].p_near);
}

TEST_CASE("assemble_map_table: identical periods give zero differences") {
    std::vector<StationResult> r = {{"a", 0, 0, 3.0}, {"b", 1, 1, -2.0}};
    const MapTable t = assemble_map_table(r, r, r);
    for (const auto& row : t.rows) {
        CHECK(row.d_near == 0.0);
        CHECK(row.d_far == 0.0);
    }
}

TEST_CASE("assemble_map_table: unmatched station rejected") {
    std::vector<StationResult> past = {{"a", 0, 0, 1.0}, {"b", 0, 0, 1.0}};
    std::vector<StationResult> near = {{"a", 0, 0, 1.0}};
    std::vector<StationResult> far = past;
    CHECK_THROWS_AS(assemble_map_table(past, near, far), JoinError);

    near = {{"a", 0, 0, 1.0}, {"c", 0, 0, 1.0}};
    try {
        assemble_map_table(past, near, far);
        FAIL("expected JoinError");
    } catch (const JoinError& e) {
        CHECK(std::string(e.what()).find("'b'") != std::string::npos);
    }
}

TEST_CASE("run_station: sc equilibrium scores zero") {
    const SystemSpec spec = build_solar_collector();
    const ClimateSeries s = constant_series(10.0, 0.0);
    const StationResult r = run_station(spec, s, "eq");
    CHECK(std::abs(r.value) < 1e-9);
    CHECK(r.lon == s.header.longitude);
    CHECK(r.lat == s.header.latitude);
}

TEST_CASE("run_station: hvac matches the steady-state oracle") {
    const SystemSpec spec = build_hvac();
    Vec u(5);
    u << 10.0, 22.0, 500.0, 2000.0, 500.0;
    const auto [x_ss, y_ss] = steady_state(spec.model, u);
    const double expected = 201.0 * (x_ss(4) - 22.0);

    const ClimateSeries s = constant_series(10.0, 0.0);
    const StationResult r = run_station(spec, s, "hvac");
    CHECK(std::abs(r.value - expected) < 1e-6);
}

TEST_CASE("run_station: doubling mean weights doubles the result") {
    SystemSpec spec = build_solar_collector();
    const ClimateSeries s = constant_series(14.0, 200.0);
    const double base = run_station(spec, s, "x").value;
    spec.indicator.weights *= 2.0;
    spec.indicator.offset *= 2.0;
    CHECK(run_station(spec, s, "x").value == doctest::Approx(2.0 * base).epsilon(1e-12));
}

TEST_CASE("run_station is deterministic") {
    const SystemSpec spec = build_solar_collector();
    const ClimateSeries s = generate_station(5.0, 52.0, 1, 0.0, 321);
    const double a = run_station(spec, s, "x").value;
    const double b = run_station(spec, s, "x").value;
    CHECK(a == b); // bit-for-bit
}
