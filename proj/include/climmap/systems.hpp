#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "climmap/climate_io.hpp"
#include "climmap/perf.hpp"
#include "climmap/statespace.hpp"

namespace climmap {

// Table of HVAC model constants. f (valve 2) is carried but enters no equation.
struct HvacConstants {
    double c = 1005.0;  // J/(kg K)
    double rho = 1.2;   // kg/m^3
    double V1 = 5.0, V2 = 5.0, V3 = 5.0, V4 = 5.0, V5 = 5.0; // m^3
    double mdot = 0.2;  // kg/s
    double k = 1.0;     // valve 1
    double f = 1.0;     // valve 2 (unused)
    double K = 200.0;   // heat exchanger constant, W/K
    double Q1 = 500.0, Q2 = 2000.0, Q3 = 500.0; // W
    double Ti = 22.0;   // indoor temperature, degC

    double C(int i) const; // C_i = c * rho * V_i

    void validate() const;
};

// Table of brickwork solar collector constants.
struct ScConstants {
    double S = 2.0;       // m^2
    double c = 4200.0;    // J/(kg K)
    double C1 = 100000.0; // J/K
    double C2 = 15000.0;
    double C3 = 300000.0;
    double h = 25.0;      // W/(m^2 K)
    double mdot = 0.016;  // kg/s
    double R1 = 0.1;      // K/W
    double R2 = 3.0;
    double alpha = 0.9;
    double Tsup = 10.0;   // degC

    void validate() const;
};

// One model input channel bound either to a climate column or to a constant.
struct InputBinding {
    enum class Kind { Climate, Constant };
    Kind kind = Kind::Constant;
    std::string code;   // climate variable code (Kind::Climate)
    double value = 0.0; // Kind::Constant
    std::string channel_name;

    static InputBinding climate(std::string code, std::string channel = {}) {
        return {Kind::Climate, std::move(code), 0.0, std::move(channel)};
    }
    static InputBinding constant(double value, std::string channel = {}) {
        return {Kind::Constant, {}, value, std::move(channel)};
    }
};

struct SteadyStateOfFirstSample {};
using X0Policy = std::variant<Vec, SteadyStateOfFirstSample>;

// Everything needed to simulate and score one building system.
struct SystemSpec {
    std::string name;
    StateSpaceModel model;
    std::vector<InputBinding> bindings;
    X0Policy x0_policy = SteadyStateOfFirstSample{};
    PerformanceIndicator indicator;

    void validate() const;
};

SystemSpec build_hvac(const HvacConstants& consts = {});
SystemSpec build_solar_collector(const ScConstants& consts = {});

// Builds a SystemSpec from a JSON config document (builtin name + constant
// overrides, or explicit matrices with bindings/x0/indicator).
SystemSpec build_from_config(const nlohmann::json& cfg);

// Resolves the initial state for a series' first input sample.
Vec resolve_x0(const SystemSpec& spec, const Vec& u0);

// Bound per-step input stream over one station's series; no N x m buffer.
class BoundInputs {
  public:
    BoundInputs(const std::vector<InputBinding>& bindings, const ClimateSeries& series);

    void fill(std::size_t k, Vec& u) const;
    std::size_t n_steps() const { return n_; }
    Eigen::Index m() const { return static_cast<Eigen::Index>(sources_.size()); }

  private:
    struct Source {
        const std::vector<double>* column = nullptr; // null => constant
        double constant = 0.0;
    };
    std::vector<Source> sources_;
    std::size_t n_;
};

// Validates bindings against the series and returns the lazy input stream.
BoundInputs assemble_inputs(const std::vector<InputBinding>& bindings, const ClimateSeries& series);

// Parses an indicator sub-document ({weights, offset, statistic, ...}).
PerformanceIndicator indicator_from_config(const nlohmann::json& cfg, Eigen::Index p);

// Explicit-matrix config document equivalent to the SystemSpec; round-trips through
// build_from_config.
nlohmann::json system_to_config(const SystemSpec& spec);

} // namespace climmap
