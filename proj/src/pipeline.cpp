#include "climmap/pipeline.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <ostream>
#include <set>
#include <thread>

#include <nlohmann/json.hpp>

namespace climmap {

namespace fs = std::filesystem;
using nlohmann::json;

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

int effective_workers(int requested) {
    if (requested > 0)
        return requested;
    if (const char* env = std::getenv("CLIMMAP_WORKERS")) {
        const int v = std::atoi(env);
        if (v > 0)
            return v;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

PipelineConfig load_pipeline_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open config " + path.string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("config is not valid JSON: " + std::string(e.what()));
    }
    if (!doc.is_object())
        throw ConfigError("config: expected a JSON object");

    PipelineConfig cfg;
    cfg.config_digest = fnv1a64(text);
    cfg.raw_config = std::make_shared<json>(std::move(doc));
    json& j = *cfg.raw_config;

    cfg.name = j.value("name", std::string{});
    cfg.mode = j.value("mode", std::string{"model"});
    if (cfg.mode != "model" && cfg.mode != "climate-stat")
        throw ConfigError("mode: expected 'model' or 'climate-stat'");

    if (cfg.mode == "model") {
        if (!j.contains("system"))
            throw ConfigError("system: required in model mode");
        cfg.system_cfg = &j.at("system");
        if (cfg.name.empty())
            cfg.name = cfg.system_cfg->value("name", std::string{"system"});
    } else {
        if (!j.contains("variable"))
            throw ConfigError("variable: required in climate-stat mode");
        cfg.variable = j.at("variable").get<std::string>();
        bool known = cfg.variable == kDerivedCode;
        for (const char* c : kStoredCodes)
            known = known || cfg.variable == c;
        if (!known)
            throw ConfigError("variable: unknown climate code '" + cfg.variable + "'");
        if (j.contains("statistic")) {
            // reuse the indicator statistic grammar
            json ind = {{"weights", json::array({1.0})}, {"statistic", j.at("statistic")}};
            cfg.statistic = indicator_from_config(ind, 1).statistic;
        }
        if (cfg.name.empty())
            cfg.name = cfg.variable;
    }

    if (j.contains("skip_hours"))
        cfg.skip_hours = j.at("skip_hours").get<std::size_t>();

    if (!j.contains("periods") || !j.at("periods").is_object())
        throw ConfigError("periods: expected an object with keys past, near, far");
    const json& p = j.at("periods");
    static const char* keys[] = {"past", "near", "far"};
    for (std::size_t i = 0; i < 3; ++i) {
        if (!p.contains(keys[i]))
            throw ConfigError(std::string("periods.") + keys[i] + ": missing");
        cfg.periods[i] = {keys[i], fs::path(p.at(keys[i]).get<std::string>())};
    }
    if (p.size() != 3)
        throw ConfigError("periods: exactly the three keys past, near, far are allowed");

    if (j.contains("grid")) {
        const json& g = j.at("grid");
        auto opt = [&](const char* key, double& slot) {
            if (g.contains(key))
                slot = g.at(key).get<double>();
        };
        opt("lon_min", cfg.grid.lon_min);
        opt("lon_max", cfg.grid.lon_max);
        opt("lat_min", cfg.grid.lat_min);
        opt("lat_max", cfg.grid.lat_max);
        opt("cell", cfg.grid.cell);
        opt("idw_power", cfg.grid.idw_power);
        opt("max_distance_km", cfg.grid.max_distance_km);
        if (g.contains("neighbors"))
            cfg.grid.neighbors = g.at("neighbors").get<int>();
        cfg.grid.validate();
    }

    if (!j.contains("out_dir"))
        throw ConfigError("out_dir: required");
    cfg.out_dir = fs::path(j.at("out_dir").get<std::string>());

    if (j.contains("workers"))
        cfg.workers = j.at("workers").get<int>();
    if (j.contains("skip_bad_stations"))
        cfg.skip_bad_stations = j.at("skip_bad_stations").get<bool>();

    return cfg;
}

namespace {

std::string station_id_of(const fs::path& file) {
    return file.stem().string();
}

struct StationOutcome {
    StationResult result;
    ClampStats clamps;
    bool failed = false;
    std::string error;
};

// Runs every station of one period over a bounded worker pool. Results are
// ordered by station index, never by completion time.
std::vector<StationOutcome> run_period(const PeriodDataset& period, const SystemSpec* spec,
                                       const std::string& variable, const Statistic& statistic,
                                       std::size_t skip_hours, int workers,
                                       std::ostream& progress, std::mutex& progress_mu) {
    std::vector<StationOutcome> outcomes(period.stations.size());
    std::atomic<std::size_t> next{0};

    auto work = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= period.stations.size())
                return;
            StationOutcome& out = outcomes[i];
            const fs::path& file = period.stations[i];
            const std::string id = station_id_of(file);
            try {
                ClimateSeries series = parse_climate_file(file, &out.clamps);
                if (spec) {
                    out.result = run_station(*spec, series, id);
                } else {
                    StatReducer red(statistic, skip_hours);
                    for (double v : series.column(variable))
                        red.add(v);
                    out.result = {id, series.header.longitude, series.header.latitude,
                                  red.result()};
                }
            } catch (const std::exception& e) {
                out.failed = true;
                out.result.station_id = id;
                out.error = e.what();
            }
            std::lock_guard<std::mutex> lock(progress_mu);
            progress << "  [" << period.name << "] " << id
                     << (out.failed ? std::string(" FAILED: ") + out.error : std::string(" done"))
                     << "\n";
        }
    };

    const int n_threads = std::min<int>(workers, static_cast<int>(period.stations.size()));
    if (n_threads <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < n_threads; ++t)
            pool.emplace_back(work);
        for (auto& t : pool)
            t.join();
    }
    return outcomes;
}

} // namespace

std::vector<std::pair<double, double>> place_stations(std::size_t count, const GridSpec& box,
                                                      std::uint64_t seed, bool grid_layout) {
    if (count < 1)
        throw ArgumentError("station count must be >= 1");
    std::vector<std::pair<double, double>> out;
    out.reserve(count);

    if (grid_layout) {
        const std::size_t cols =
            static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(count))));
        const std::size_t rows = (count + cols - 1) / cols;
        for (std::size_t i = 0; i < count; ++i) {
            const std::size_t r = i / cols, c = i % cols;
            const double lon =
                box.lon_min + (box.lon_max - box.lon_min) * (c + 0.5) / static_cast<double>(cols);
            const double lat =
                box.lat_min + (box.lat_max - box.lat_min) * (r + 0.5) / static_cast<double>(rows);
            out.emplace_back(lon, lat);
        }
        return out;
    }

    // Halton bases 2 and 3, start offset from the seed.
    auto halton = [](std::uint64_t index, std::uint64_t base) {
        double f = 1.0, r = 0.0;
        while (index > 0) {
            f /= static_cast<double>(base);
            r += f * static_cast<double>(index % base);
            index /= base;
        }
        return r;
    };
    const std::uint64_t start = 1 + seed % 9973;
    for (std::size_t i = 0; i < count; ++i) {
        const std::uint64_t idx = start + i;
        out.emplace_back(box.lon_min + (box.lon_max - box.lon_min) * halton(idx, 2),
                         box.lat_min + (box.lat_max - box.lat_min) * halton(idx, 3));
    }
    return out;
}

RunSummary run_pipeline(const PipelineConfig& cfg, std::ostream& progress) {
    SystemSpec spec;
    const bool model_mode = cfg.mode == "model";
    if (model_mode) {
        spec = build_from_config(*cfg.system_cfg);
        if (!cfg.name.empty())
            spec.name = cfg.name;
        if (cfg.skip_hours > 0)
            spec.indicator.skip_hours = cfg.skip_hours;
    }
    const std::string name = model_mode ? spec.name : cfg.name;

    // Log the DC gain from each climate-bound channel to the indicator; the
    // sign tells whether difference maps move with the scenario offsets.
    if (model_mode) {
        try {
            const Mat gain = dc_gain(spec.model);
            const Vec to_indicator = gain.transpose() * spec.indicator.weights;
            for (std::size_t i = 0; i < spec.bindings.size(); ++i) {
                if (spec.bindings[i].kind != InputBinding::Kind::Climate)
                    continue;
                progress << "dc gain " << spec.bindings[i].code << " -> indicator: "
                         << to_indicator(static_cast<Eigen::Index>(i)) << "\n";
            }
        } catch (const SingularError&) {
            progress << "dc gain unavailable (singular A)\n";
        }
    }

    std::array<PeriodDataset, 3> periods;
    for (std::size_t i = 0; i < 3; ++i)
        periods[i] = enumerate_period(cfg.periods[i].key, cfg.periods[i].dir);

    // The three-period join requires identical filename sets.
    {
        auto names_of = [](const PeriodDataset& d) {
            std::set<std::string> s;
            for (const auto& f : d.stations)
                s.insert(f.filename().string());
            return s;
        };
        const auto past_names = names_of(periods[0]);
        for (std::size_t i = 1; i < 3; ++i) {
            if (names_of(periods[i]) != past_names)
                throw JoinError("period '" + periods[i].name +
                                "' does not contain the same station files as 'past'");
        }
    }
    if (periods[0].stations.empty())
        throw EmptyError("no station files found in " + periods[0].directory.string());

    std::error_code ec;
    fs::create_directories(cfg.out_dir, ec);
    if (ec)
        throw IoError("cannot create " + cfg.out_dir.string() + ": " + ec.message());

    const int workers = effective_workers(cfg.workers);
    progress << "running " << periods[0].stations.size() << " stations x 3 periods with "
             << workers << " workers\n";

    const auto run_start = std::chrono::steady_clock::now();

    RunSummary summary;
    std::mutex progress_mu;
    std::array<std::vector<StationOutcome>, 3> outcomes;
    for (std::size_t p = 0; p < 3; ++p) {
        const auto t0 = std::chrono::steady_clock::now();
        outcomes[p] = run_period(periods[p], model_mode ? &spec : nullptr, cfg.variable,
                                 cfg.statistic, cfg.skip_hours, workers, progress, progress_mu);
        summary.period_wall_seconds[p] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }

    // Failure policy: abort naming the station, unless skip_bad_stations drops
    // the station from all three periods symmetrically.
    std::set<std::string> bad;
    for (const auto& period : outcomes)
        for (const auto& o : period)
            if (o.failed) {
                if (!cfg.skip_bad_stations)
                    throw Error("station '" + o.result.station_id + "' failed: " + o.error);
                bad.insert(o.result.station_id);
            }
    if (!bad.empty())
        progress << "skipping " << bad.size() << " failed station(s) in all periods\n";
    summary.skipped_stations = bad.size();

    std::array<std::vector<StationResult>, 3> results;
    for (std::size_t p = 0; p < 3; ++p) {
        for (const auto& o : outcomes[p]) {
            if (bad.count(o.result.station_id))
                continue;
            results[p].push_back(o.result);
            summary.clamp_stats.hrel += o.clamps.hrel;
            summary.clamp_stats.isgh += o.clamps.isgh;
            summary.clamp_stats.isd += o.clamps.isd;
            summary.clamp_stats.ws += o.clamps.ws;
        }
    }
    if (results[0].empty())
        throw EmptyError("all stations failed");
    summary.station_count = results[0].size();
    if (summary.clamp_stats.total() > 0)
        progress << "clamped " << summary.clamp_stats.total() << " out-of-range values on load\n";

    MapTable table = assemble_map_table(results[0], results[1], results[2]);

    const fs::path mapvar = cfg.out_dir / (name + "_mapvar.csv");
    write_map_table_csv(table, mapvar);
    summary.outputs.push_back(mapvar);
    for (std::size_t p = 0; p < 3; ++p) {
        const fs::path f = cfg.out_dir / (name + "_" + cfg.periods[p].key + ".csv");
        write_period_csv(results[p], f);
        summary.outputs.push_back(f);
    }

    RenderedMaps maps = render_five(table, cfg.grid, name, cfg.out_dir);
    summary.masked_cell_fraction = maps.masked_fraction;
    for (const auto& f : maps.pngs)
        summary.outputs.push_back(f);
    for (const auto& f : maps.grid_csvs)
        summary.outputs.push_back(f);

    summary.total_wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - run_start).count();

    // Manifest is written exactly once, last.
    char digest[20];
    std::snprintf(digest, sizeof(digest), "%016llx",
                  static_cast<unsigned long long>(cfg.config_digest));
    json manifest = {
        {"config_digest", digest},
        {"station_count", summary.station_count},
        {"period_wall_seconds",
         {{"past", summary.period_wall_seconds[0]},
          {"near", summary.period_wall_seconds[1]},
          {"far", summary.period_wall_seconds[2]}}},
        {"total_wall_seconds", summary.total_wall_seconds},
        {"warnings",
         {{"clamped_values",
           {{"HREL", summary.clamp_stats.hrel},
            {"ISGH", summary.clamp_stats.isgh},
            {"ISD", summary.clamp_stats.isd},
            {"WS", summary.clamp_stats.ws}}},
          {"skipped_stations", summary.skipped_stations},
          {"masked_cell_fraction", summary.masked_cell_fraction}}},
        {"outputs", json::array()},
    };
    for (const auto& f : summary.outputs)
        manifest["outputs"].push_back(f.filename().string());

    summary.manifest_path = cfg.out_dir / (name + "_manifest.json");
    std::ofstream mf(summary.manifest_path, std::ios::binary | std::ios::trunc);
    if (!mf)
        throw IoError("cannot write manifest " + summary.manifest_path.string());
    mf << manifest.dump(2) << "\n";
    summary.outputs.push_back(summary.manifest_path);
    return summary;
}

} // namespace climmap
