#include "climmap/systems.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#include <nlohmann/json.hpp>

namespace climmap {

using nlohmann::json;

double HvacConstants::C(int i) const {
    const double v[] = {V1, V2, V3, V4, V5};
    return c * rho * v[i - 1];
}

void HvacConstants::validate() const {
    const double positives[] = {c, rho, V1, V2, V3, V4, V5, mdot, K, Q1, Q2, Q3};
    for (double v : positives)
        if (!(v > 0.0))
            throw ConfigError("hvac constants must be positive");
    if (k < 0.0 || k > 1.0)
        throw ConfigError("hvac valve k must be in [0, 1]");
}

void ScConstants::validate() const {
    const double positives[] = {S, c, C1, C2, C3, h, mdot, R1, R2};
    for (double v : positives)
        if (!(v > 0.0))
            throw ConfigError("solar collector constants must be positive");
    if (alpha < 0.0 || alpha > 1.0)
        throw ConfigError("solar collector alpha must be in [0, 1]");
}

namespace {

bool valid_climate_code(const std::string& code) {
    if (code == kDerivedCode)
        return true;
    return std::find_if(kStoredCodes.begin(), kStoredCodes.end(),
                        [&](const char* c) { return code == c; }) != kStoredCodes.end();
}

bool filesystem_safe(const std::string& name) {
    if (name.empty())
        return false;
    for (char ch : name)
        if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '-' || ch == '.'))
            return false;
    return true;
}

} // namespace

void SystemSpec::validate() const {
    model.validate();
    if (!filesystem_safe(name))
        throw ConfigError("system name must be non-empty and filesystem-safe: '" + name + "'");
    if (static_cast<Eigen::Index>(bindings.size()) != model.m())
        throw ConfigError("bindings count != model input dimension m");
    for (const auto& b : bindings)
        if (b.kind == InputBinding::Kind::Climate && !valid_climate_code(b.code))
            throw ConfigError("unknown climate code in binding: " + b.code);
    if (const Vec* x0 = std::get_if<Vec>(&x0_policy))
        if (x0->size() != model.n())
            throw ConfigError("explicit x0 length != n");
    indicator.validate(model.p());
}

SystemSpec build_hvac(const HvacConstants& k) {
    k.validate();

    const double mc = k.mdot * k.c;
    const double C1 = k.C(1), C2 = k.C(2), C3 = k.C(3), C4 = k.C(4), C5 = k.C(5);
    const double Khalf = k.K / 2.0;

    Mat A = Mat::Zero(5, 5);
    A(0, 0) = -k.k * mc / C1;
    A(1, 0) = (k.k * mc - Khalf) / C2;
    A(1, 1) = (-k.k * mc - Khalf) / C2;
    A(1, 2) = Khalf / C2;
    A(2, 0) = Khalf / C3;
    A(2, 1) = Khalf / C3;
    A(2, 2) = (-k.k * mc - Khalf) / C3;
    A(3, 1) = k.k * mc / C4;
    A(3, 3) = -mc / C4;
    A(4, 3) = mc / C5;
    A(4, 4) = -mc / C5;

    Mat B = Mat::Zero(5, 5);
    B(0, 0) = k.k * mc / C1;
    B(0, 2) = 1.0 / C1;
    B(1, 1) = Khalf / C2;
    B(2, 1) = (k.k * mc - Khalf) / C3;
    B(3, 1) = (1.0 - k.k) * mc / C4;
    B(3, 3) = 1.0 / C4;
    B(4, 4) = -1.0 / C5;

    SystemSpec spec;
    spec.name = "hvac";
    spec.model.A = std::move(A);
    spec.model.B = std::move(B);
    spec.model.C = Mat::Identity(5, 5);
    spec.model.D = Mat::Zero(5, 5);
    spec.model.state_names = {"T1", "T2", "T3", "T4", "T5"};
    spec.model.input_names = {"Te", "Ti", "Q1", "Q2", "Q3"};
    spec.model.output_names = spec.model.state_names;

    spec.bindings = {InputBinding::climate("TA", "Te"), InputBinding::constant(k.Ti, "Ti"),
                     InputBinding::constant(k.Q1, "Q1"), InputBinding::constant(k.Q2, "Q2"),
                     InputBinding::constant(k.Q3, "Q3")};

    // P = mdot * c * (T5 - Ti), reduced by the mean
    spec.indicator.weights = Vec::Zero(5);
    spec.indicator.weights(4) = mc;
    spec.indicator.offset = -mc * k.Ti;
    spec.indicator.statistic = Mean{};

    spec.validate();
    return spec;
}

SystemSpec build_solar_collector(const ScConstants& k) {
    k.validate();

    const double mc = k.mdot * k.c;
    const double hS = k.h * k.S;
    const double g1 = 1.0 / k.R1;
    const double g2 = 1.0 / k.R2;

    Mat A(3, 3);
    A << (-hS - g1) / k.C1, g1 / k.C1, 0.0,
         g1 / k.C2, (-mc - g1 - g2) / k.C2, g2 / k.C2,
         0.0, g2 / k.C3, -g2 / k.C3;

    Mat B = Mat::Zero(3, 3);
    B(0, 0) = hS / k.C1;
    B(0, 2) = k.alpha * k.S / k.C1;
    B(1, 1) = mc / k.C2;

    // y2 = mc * T2 - mc * Tsup: the collector's added heat
    Mat C = Mat::Zero(3, 3);
    C(1, 1) = mc;
    Mat D = Mat::Zero(3, 3);
    D(1, 1) = -mc;

    SystemSpec spec;
    spec.name = "sc";
    spec.model.A = std::move(A);
    spec.model.B = std::move(B);
    spec.model.C = std::move(C);
    spec.model.D = std::move(D);
    spec.model.state_names = {"T1", "T2", "T3"};
    spec.model.input_names = {"Te", "Tsup", "Irrad"};
    spec.model.output_names = {"y1", "heat", "y3"};

    spec.bindings = {InputBinding::climate("TA", "Te"), InputBinding::constant(k.Tsup, "Tsup"),
                     InputBinding::climate("ISGH", "Irrad")};

    spec.indicator.weights = Vec::Zero(3);
    spec.indicator.weights(1) = 1.0;
    spec.indicator.offset = 0.0;
    spec.indicator.statistic = Mean{};

    spec.validate();
    return spec;
}

Vec resolve_x0(const SystemSpec& spec, const Vec& u0) {
    if (const Vec* x0 = std::get_if<Vec>(&spec.x0_policy))
        return *x0;
    try {
        return steady_state(spec.model, u0).first;
    } catch (const SingularError&) {
        return Vec::Zero(spec.model.n());
    }
}

BoundInputs::BoundInputs(const std::vector<InputBinding>& bindings, const ClimateSeries& series)
    : n_(series.n_hours) {
    sources_.reserve(bindings.size());
    for (const auto& b : bindings) {
        Source s;
        if (b.kind == InputBinding::Kind::Climate)
            s.column = &series.column(b.code); // throws ConfigError if missing
        else
            s.constant = b.value;
        sources_.push_back(s);
    }
}

void BoundInputs::fill(std::size_t k, Vec& u) const {
    for (std::size_t i = 0; i < sources_.size(); ++i)
        u[static_cast<Eigen::Index>(i)] =
            sources_[i].column ? (*sources_[i].column)[k] : sources_[i].constant;
}

BoundInputs assemble_inputs(const std::vector<InputBinding>& bindings, const ClimateSeries& series) {
    return BoundInputs(bindings, series);
}

namespace {

double get_number(const json& j, const std::string& path) {
    if (!j.is_number())
        throw ConfigError(path + ": expected a number");
    return j.get<double>();
}

Mat matrix_from_config(const json& j, const std::string& path) {
    if (!j.is_array() || j.empty())
        throw ConfigError(path + ": expected a non-empty array of rows");
    const std::size_t rows = j.size();
    if (!j[0].is_array() || j[0].empty())
        throw ConfigError(path + "[0]: expected a non-empty row array");
    const std::size_t cols = j[0].size();
    Mat M(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        if (!j[r].is_array() || j[r].size() != cols)
            throw ConfigError(path + "[" + std::to_string(r) + "]: ragged row");
        for (std::size_t c = 0; c < cols; ++c)
            M(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                get_number(j[r][c], path);
    }
    return M;
}

Statistic statistic_from_config(const json& j, const std::string& path) {
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        if (s == "mean") return Mean{};
        if (s == "min") return Min{};
        if (s == "max") return Max{};
        throw ConfigError(path + ": unknown statistic '" + s + "'");
    }
    if (j.is_object()) {
        if (j.contains("percentile"))
            return Percentile{get_number(j.at("percentile"), path + ".percentile")};
        if (j.contains("fraction_above"))
            return FractionAbove{get_number(j.at("fraction_above"), path + ".fraction_above")};
    }
    throw ConfigError(path + ": expected \"mean\"|\"min\"|\"max\" or {percentile}|{fraction_above}");
}

json statistic_to_config(const Statistic& s) {
    if (std::holds_alternative<Mean>(s)) return "mean";
    if (std::holds_alternative<Min>(s)) return "min";
    if (std::holds_alternative<Max>(s)) return "max";
    if (const auto* p = std::get_if<Percentile>(&s)) return json{{"percentile", p->q}};
    const auto& f = std::get<FractionAbove>(s);
    return json{{"fraction_above", f.threshold}};
}

std::vector<InputBinding> bindings_from_config(const json& j, const std::string& path) {
    if (!j.is_array())
        throw ConfigError(path + ": expected an array of bindings");
    std::vector<InputBinding> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const std::string p = path + "[" + std::to_string(i) + "]";
        const json& e = j[i];
        if (!e.is_object() || !e.contains("source"))
            throw ConfigError(p + ": expected {channel, source}");
        const std::string src = e.at("source").get<std::string>();
        std::string channel = e.value("channel", std::string{});
        if (src.rfind("climate:", 0) == 0) {
            out.push_back(InputBinding::climate(src.substr(8), channel));
        } else if (src.rfind("const:", 0) == 0) {
            char* end = nullptr;
            const std::string num = src.substr(6);
            const double v = std::strtod(num.c_str(), &end);
            if (end != num.c_str() + num.size() || num.empty())
                throw ConfigError(p + ".source: bad constant '" + num + "'");
            out.push_back(InputBinding::constant(v, channel));
        } else {
            throw ConfigError(p + ".source: expected 'climate:CODE' or 'const:VALUE'");
        }
    }
    return out;
}

void apply_hvac_overrides(HvacConstants& k, const json& o) {
    for (auto& [key, val] : o.items()) {
        const double v = get_number(val, "system.constants." + key);
        if (key == "c") k.c = v;
        else if (key == "rho") k.rho = v;
        else if (key == "V1") k.V1 = v;
        else if (key == "V2") k.V2 = v;
        else if (key == "V3") k.V3 = v;
        else if (key == "V4") k.V4 = v;
        else if (key == "V5") k.V5 = v;
        else if (key == "mdot") k.mdot = v;
        else if (key == "k") k.k = v;
        else if (key == "f") k.f = v;
        else if (key == "K") k.K = v;
        else if (key == "Q1") k.Q1 = v;
        else if (key == "Q2") k.Q2 = v;
        else if (key == "Q3") k.Q3 = v;
        else if (key == "Ti") k.Ti = v;
        else throw ConfigError("system.constants." + key + ": unknown hvac constant");
    }
}

void apply_sc_overrides(ScConstants& k, const json& o) {
    for (auto& [key, val] : o.items()) {
        const double v = get_number(val, "system.constants." + key);
        if (key == "S") k.S = v;
        else if (key == "c") k.c = v;
        else if (key == "C1") k.C1 = v;
        else if (key == "C2") k.C2 = v;
        else if (key == "C3") k.C3 = v;
        else if (key == "h") k.h = v;
        else if (key == "mdot") k.mdot = v;
        else if (key == "R1") k.R1 = v;
        else if (key == "R2") k.R2 = v;
        else if (key == "alpha") k.alpha = v;
        else if (key == "Tsup") k.Tsup = v;
        else throw ConfigError("system.constants." + key + ": unknown sc constant");
    }
}

} // namespace

PerformanceIndicator indicator_from_config(const json& cfg, Eigen::Index p) {
    if (!cfg.is_object())
        throw ConfigError("indicator: expected an object");
    PerformanceIndicator ind;
    if (!cfg.contains("weights") || !cfg.at("weights").is_array())
        throw ConfigError("indicator.weights: expected an array of length p");
    const json& w = cfg.at("weights");
    if (static_cast<Eigen::Index>(w.size()) != p)
        throw ConfigError("indicator.weights: length != p");
    ind.weights = Vec(p);
    for (Eigen::Index i = 0; i < p; ++i)
        ind.weights(i) = get_number(w[static_cast<std::size_t>(i)], "indicator.weights");
    ind.offset = cfg.contains("offset") ? get_number(cfg.at("offset"), "indicator.offset") : 0.0;
    if (cfg.contains("statistic"))
        ind.statistic = statistic_from_config(cfg.at("statistic"), "indicator.statistic");
    if (cfg.contains("skip_hours")) {
        if (!cfg.at("skip_hours").is_number_unsigned())
            throw ConfigError("indicator.skip_hours: expected a non-negative integer");
        ind.skip_hours = cfg.at("skip_hours").get<std::size_t>();
    }
    ind.validate(p);
    return ind;
}

SystemSpec build_from_config(const json& cfg) {
    if (!cfg.is_object())
        throw ConfigError("system: expected an object");

    SystemSpec spec;
    if (cfg.contains("builtin")) {
        const std::string b = cfg.at("builtin").get<std::string>();
        if (b == "hvac") {
            HvacConstants k;
            if (cfg.contains("constants"))
                apply_hvac_overrides(k, cfg.at("constants"));
            spec = build_hvac(k);
        } else if (b == "sc") {
            ScConstants k;
            if (cfg.contains("constants"))
                apply_sc_overrides(k, cfg.at("constants"));
            spec = build_solar_collector(k);
        } else {
            throw ConfigError("system.builtin: unknown builtin '" + b + "'");
        }
    } else if (cfg.contains("matrices")) {
        const json& m = cfg.at("matrices");
        for (const char* key : {"A", "B", "C", "D"})
            if (!m.contains(key))
                throw ConfigError(std::string("system.matrices.") + key + ": missing");
        spec.model.A = matrix_from_config(m.at("A"), "system.matrices.A");
        spec.model.B = matrix_from_config(m.at("B"), "system.matrices.B");
        spec.model.C = matrix_from_config(m.at("C"), "system.matrices.C");
        spec.model.D = matrix_from_config(m.at("D"), "system.matrices.D");
        if (spec.model.A.rows() != spec.model.A.cols())
            throw ConfigError("system.matrices.A: not square");
        if (spec.model.B.rows() != spec.model.A.rows())
            throw ConfigError("system.matrices.B: B rows != n");
        if (spec.model.C.cols() != spec.model.A.rows())
            throw ConfigError("system.matrices.C: C cols != n");
        if (spec.model.D.rows() != spec.model.C.rows() ||
            spec.model.D.cols() != spec.model.B.cols())
            throw ConfigError("system.matrices.D: shape != p x m");
        if (!cfg.contains("bindings"))
            throw ConfigError("system.bindings: required for explicit matrices");
        if (!cfg.contains("indicator"))
            throw ConfigError("system.indicator: required for explicit matrices");
    } else {
        throw ConfigError("system: needs either 'builtin' or 'matrices'");
    }

    if (cfg.contains("name"))
        spec.name = cfg.at("name").get<std::string>();
    if (spec.name.empty())
        spec.name = "system";

    if (cfg.contains("bindings"))
        spec.bindings = bindings_from_config(cfg.at("bindings"), "system.bindings");

    if (cfg.contains("x0")) {
        const json& x = cfg.at("x0");
        if (x.is_string() && x.get<std::string>() == "steady") {
            spec.x0_policy = SteadyStateOfFirstSample{};
        } else if (x.is_array()) {
            Vec v(static_cast<Eigen::Index>(x.size()));
            for (std::size_t i = 0; i < x.size(); ++i)
                v(static_cast<Eigen::Index>(i)) = get_number(x[i], "system.x0");
            spec.x0_policy = std::move(v);
        } else {
            throw ConfigError("system.x0: expected \"steady\" or a number array");
        }
    }

    if (cfg.contains("indicator"))
        spec.indicator = indicator_from_config(cfg.at("indicator"), spec.model.p());

    spec.validate();
    return spec;
}

json system_to_config(const SystemSpec& spec) {
    auto mat = [](const Mat& M) {
        json rows = json::array();
        for (Eigen::Index r = 0; r < M.rows(); ++r) {
            json row = json::array();
            for (Eigen::Index c = 0; c < M.cols(); ++c)
                row.push_back(M(r, c));
            rows.push_back(std::move(row));
        }
        return rows;
    };

    json bindings = json::array();
    for (const auto& b : spec.bindings) {
        json e;
        if (!b.channel_name.empty())
            e["channel"] = b.channel_name;
        if (b.kind == InputBinding::Kind::Climate) {
            e["source"] = "climate:" + b.code;
        } else {
            char buf[40];
            std::snprintf(buf, sizeof(buf), "const:%.17g", b.value);
            e["source"] = buf;
        }
        bindings.push_back(std::move(e));
    }

    json x0;
    if (const Vec* v = std::get_if<Vec>(&spec.x0_policy)) {
        x0 = json::array();
        for (Eigen::Index i = 0; i < v->size(); ++i)
            x0.push_back((*v)(i));
    } else {
        x0 = "steady";
    }

    json weights = json::array();
    for (Eigen::Index i = 0; i < spec.indicator.weights.size(); ++i)
        weights.push_back(spec.indicator.weights(i));

    return json{{"name", spec.name},
                {"matrices",
                 {{"A", mat(spec.model.A)},
                  {"B", mat(spec.model.B)},
                  {"C", mat(spec.model.C)},
                  {"D", mat(spec.model.D)}}},
                {"bindings", bindings},
                {"x0", x0},
                {"indicator",
                 {{"weights", weights},
                  {"offset", spec.indicator.offset},
                  {"statistic", statistic_to_config(spec.indicator.statistic)},
                  {"skip_hours", spec.indicator.skip_hours}}}};
}

} // namespace climmap
