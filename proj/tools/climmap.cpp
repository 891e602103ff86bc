#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "climmap/climate_io.hpp"
#include "climmap/pipeline.hpp"

namespace {

using namespace climmap;

int cmd_gen(const std::string& out_dir, std::size_t stations, int years, std::uint64_t seed,
            double dt_near, double dt_far, bool grid_europe) {
    GridSpec box; // Europe bounding box defaults
    const auto coords = place_stations(stations, box, seed, grid_europe);

    ScenarioOffsets offsets{0.0, dt_near, dt_far};
    generate_dataset(coords, years, offsets, seed, out_dir);

    std::cout << "station,lon,lat\n";
    for (std::size_t i = 0; i < coords.size(); ++i) {
        char line[96];
        std::snprintf(line, sizeof(line), "station_%04zu,%.9g,%.9g\n", i, coords[i].first,
                      coords[i].second);
        std::cout << line;
    }
    std::cerr << "wrote " << coords.size() << " stations x 3 periods under " << out_dir << "\n";
    return 0;
}

int cmd_run(const std::string& config_path, int workers_override, bool skip_bad,
            const char* required_mode) {
    PipelineConfig cfg = load_pipeline_config(config_path);
    if (required_mode && cfg.mode != required_mode) {
        std::cerr << "config mode is '" << cfg.mode << "', expected '" << required_mode << "'\n";
        return 2;
    }
    if (workers_override > 0)
        cfg.workers = workers_override;
    if (skip_bad)
        cfg.skip_bad_stations = true;

    const RunSummary summary = run_pipeline(cfg, std::cerr);
    std::cout << "stations: " << summary.station_count << "\n";
    std::cout << "wall_seconds: " << summary.total_wall_seconds << "\n";
    for (const auto& f : summary.outputs)
        std::cout << "output: " << f.string() << "\n";
    return 0;
}

int cmd_inspect(const std::string& file) {
    ClampStats clamps;
    const ClimateSeries s = parse_climate_file(file, &clamps);

    std::printf("file: %s\n", file.c_str());
    std::printf("lon %.6g  lat %.6g  height %.6g m  tz %.6g h  dt %.6g h\n", s.header.longitude,
                s.header.latitude, s.header.height, s.header.time_zone, s.header.time_step);
    std::printf("n_hours: %zu (%zu year(s))\n", s.n_hours, s.n_hours / 8760);
    if (clamps.total() > 0)
        std::printf("clamped values on load: %zu\n", clamps.total());

    std::printf("%-6s %14s %14s %14s\n", "column", "min", "mean", "max");
    auto report = [&](const std::string& code) {
        const auto& col = s.column(code);
        double mn = col[0], mx = col[0], sum = 0.0, comp = 0.0;
        for (double v : col) {
            mn = std::min(mn, v);
            mx = std::max(mx, v);
            const double y = v - comp;
            const double t = sum + y;
            comp = (t - sum) - y;
            sum = t;
        }
        std::printf("%-6s %14.6g %14.6g %14.6g\n", code.c_str(), mn,
                    sum / static_cast<double>(col.size()), mx);
    };
    for (const char* code : kStoredCodes)
        report(code);
    report(kDerivedCode);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"climmap: state-space building-system performance mapping over hourly climate "
                 "datasets"};
    app.require_subcommand(1);

    // gen
    auto* gen = app.add_subcommand("gen", "Generate a synthetic three-period climate dataset");
    std::string gen_out;
    std::size_t gen_stations = 20;
    int gen_years = 1;
    std::uint64_t gen_seed = 42;
    double gen_dt_near = 2.0, gen_dt_far = 4.0;
    bool gen_grid = false;
    gen->add_option("--out", gen_out, "Output directory")->required();
    gen->add_option("--stations", gen_stations, "Number of stations")->check(CLI::PositiveNumber);
    gen->add_option("--years", gen_years, "Years per series")->check(CLI::PositiveNumber);
    gen->add_option("--seed", gen_seed, "Generator seed");
    gen->add_option("--dt-near", gen_dt_near, "Near-future temperature offset [K]");
    gen->add_option("--dt-far", gen_dt_far, "Far-future temperature offset [K]");
    gen->add_flag("--grid-europe", gen_grid, "Place stations on a regular lattice");

    // run / climate-stat
    std::string run_config, stat_config;
    int run_workers = 0, stat_workers = 0;
    bool run_skip = false, stat_skip = false;
    auto* run = app.add_subcommand("run", "Run the full three-period pipeline and render maps");
    run->add_option("--config", run_config, "Pipeline config (JSON)")->required();
    run->add_option("--workers", run_workers, "Concurrent stations (0 = auto)");
    run->add_flag("--skip-bad-stations", run_skip, "Drop failing stations from all periods");
    auto* stat = app.add_subcommand("climate-stat",
                                    "Map a statistic of one climate variable (no model)");
    stat->add_option("--config", stat_config, "Pipeline config (JSON, mode=climate-stat)")
        ->required();
    stat->add_option("--workers", stat_workers, "Concurrent stations (0 = auto)");
    stat->add_flag("--skip-bad-stations", stat_skip, "Drop failing stations from all periods");

    // inspect
    auto* inspect = app.add_subcommand("inspect", "Print a climate file's header and statistics");
    std::string inspect_file;
    inspect->add_option("file", inspect_file, "CLIM1 climate file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (gen->parsed())
            return cmd_gen(gen_out, gen_stations, gen_years, gen_seed, gen_dt_near, gen_dt_far,
                           gen_grid);
        if (run->parsed())
            return cmd_run(run_config, run_workers, run_skip, nullptr);
        if (stat->parsed())
            return cmd_run(stat_config, stat_workers, stat_skip, "climate-stat");
        if (inspect->parsed())
            return cmd_inspect(inspect_file);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const ArgumentError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
