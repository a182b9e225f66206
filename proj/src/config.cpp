#include "annulus/config.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

namespace annulus {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& why) {
    throw ConfigError("config field `" + field + "`: " + why);
}

template <class T>
T get_or(const json& j, const std::string& field, T fallback) {
    if (!j.contains(field)) return fallback;
    try {
        return j.at(field).get<T>();
    } catch (const json::exception&) {
        fail(field, "wrong type");
    }
}

std::vector<double> get_number_list(const json& j, const std::string& field) {
    try {
        return j.at(field).get<std::vector<double>>();
    } catch (const json::exception&) {
        fail(field, "expected an array of numbers");
    }
}

} // namespace

PerturbedSystem FamilySystemSpec::build() const {
    ZonePartition partition = [&] {
        try {
            return ZonePartition(breakpoints, slopes, strict_mode);
        } catch (const InvalidInputError& err) {
            throw ConfigError("config field `system`: " +
                              std::string(err.what()));
        }
    }();
    if (shape == "linear") {
        return PerturbedSystem(std::move(partition), ShapeFunction::linear());
    }
    if (shape == "cubic") {
        return PerturbedSystem(std::move(partition), ShapeFunction::cubic());
    }
    if (shape == "polynomial") {
        if (coefficients.empty()) {
            fail("coefficients", "required for shape \"polynomial\"");
        }
        return PerturbedSystem(std::move(partition),
                               ShapeFunction::polynomial(coefficients));
    }
    fail("shape", "expected \"linear\", \"cubic\" or \"polynomial\"");
}

GeneralHarnessSystem HarnessSpec::build() const {
    if (name == "van_der_pol") return van_der_pol_harness();
    if (name == "zero") return zero_perturbation_harness();
    fail("harness", "unknown harness \"" + name + "\"");
}

std::vector<double> GridSpec::values() const {
    std::vector<double> grid;
    grid.reserve(static_cast<std::size_t>(count));
    if (count == 1) {
        grid.push_back(min);
        return grid;
    }
    if (spacing == "log") {
        const double ratio = std::log(max / min);
        for (int i = 0; i < count; ++i) {
            grid.push_back(min * std::exp(ratio * i / (count - 1)));
        }
    } else {
        for (int i = 0; i < count; ++i) {
            grid.push_back(min + (max - min) * i / (count - 1));
        }
    }
    return grid;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file: " + path.string());
    }
    json j;
    try {
        in >> j;
    } catch (const json::exception& err) {
        throw ConfigError("config parse error: " + std::string(err.what()));
    }

    RunConfig config;

    const bool has_system = j.contains("system");
    const bool has_harness = j.contains("harness");
    if (has_system == has_harness) {
        fail("system", "exactly one of `system` or `harness` is required");
    }
    if (has_system) {
        const json& s = j.at("system");
        FamilySystemSpec spec;
        if (!s.contains("breakpoints")) fail("breakpoints", "missing");
        if (!s.contains("slopes")) fail("slopes", "missing");
        spec.breakpoints = get_number_list(s, "breakpoints");
        spec.slopes = get_number_list(s, "slopes");
        spec.shape = get_or<std::string>(s, "shape", "linear");
        if (s.contains("coefficients")) {
            spec.coefficients = get_number_list(s, "coefficients");
        }
        spec.strict_mode = get_or<bool>(s, "strict_mode", true);
        // Validate now so errors surface at load time with field names.
        try {
            spec.build();
        } catch (const ConfigError&) {
            throw;
        } catch (const InvalidInputError& err) {
            throw ConfigError("config field `system`: " +
                              std::string(err.what()));
        }
        config.system = std::move(spec);
    } else {
        HarnessSpec spec;
        if (j.at("harness").is_string()) {
            spec.name = j.at("harness").get<std::string>();
        } else {
            spec.name = get_or<std::string>(j.at("harness"), "name", "");
        }
        spec.build(); // validates the name
        config.system = std::move(spec);
    }

    if (j.contains("r_grid")) {
        const json& g = j.at("r_grid");
        config.r_grid.min = get_or<double>(g, "min", config.r_grid.min);
        config.r_grid.max = get_or<double>(g, "max", config.r_grid.max);
        config.r_grid.count = get_or<int>(g, "count", config.r_grid.count);
        config.r_grid.spacing =
            get_or<std::string>(g, "spacing", config.r_grid.spacing);
        if (!(config.r_grid.min > 0.0) || !std::isfinite(config.r_grid.min)) {
            fail("r_grid.min", "must be positive");
        }
        if (!(config.r_grid.max > config.r_grid.min)) {
            fail("r_grid.max", "must exceed r_grid.min");
        }
        if (config.r_grid.count < 1) fail("r_grid.count", "must be >= 1");
        if (config.r_grid.spacing != "linear" && config.r_grid.spacing != "log") {
            fail("r_grid.spacing", "expected \"linear\" or \"log\"");
        }
    }

    if (j.contains("epsilons")) {
        config.epsilons = get_number_list(j, "epsilons");
        for (double e : config.epsilons) {
            if (!std::isfinite(e)) fail("epsilons", "values must be finite");
        }
    }
    if (j.contains("fit")) {
        const json& f = j.at("fit");
        config.fit_radius = get_or<double>(f, "r", config.fit_radius);
        if (f.contains("epsilons")) {
            config.fit_epsilons = get_number_list(f, "epsilons");
        }
        if (!(config.fit_radius > 0.0)) fail("fit.r", "must be positive");
    }
    if (j.contains("search")) {
        config.search_epsilon =
            get_or<double>(j.at("search"), "epsilon", config.search_epsilon);
    }
    if (j.contains("simulate")) {
        const json& s = j.at("simulate");
        config.simulate.x0 = get_or<double>(s, "x0", config.simulate.x0);
        config.simulate.y0 = get_or<double>(s, "y0", config.simulate.y0);
        config.simulate.epsilon =
            get_or<double>(s, "epsilon", config.simulate.epsilon);
        config.simulate.t_max = get_or<double>(s, "t_max", config.simulate.t_max);
        config.simulate.output_step =
            get_or<double>(s, "output_step", config.simulate.output_step);
        if (!(config.simulate.t_max > 0.0)) {
            fail("simulate.t_max", "must be positive");
        }
    }
    if (j.contains("tolerances")) {
        const json& t = j.at("tolerances");
        config.quad_tol = get_or<double>(t, "quadrature", config.quad_tol);
        config.integration.rel_tol =
            get_or<double>(t, "rel", config.integration.rel_tol);
        config.integration.abs_tol =
            get_or<double>(t, "abs", config.integration.abs_tol);
        config.integration.event_time_tol =
            get_or<double>(t, "event", config.integration.event_time_tol);
        for (auto [name, v] :
             {std::pair<const char*, double>{"quadrature", config.quad_tol},
              {"rel", config.integration.rel_tol},
              {"abs", config.integration.abs_tol},
              {"event", config.integration.event_time_tol}}) {
            if (!(v > 0.0) || !std::isfinite(v)) {
                fail(std::string("tolerances.") + name, "must be positive");
            }
        }
    }
    config.jobs = get_or<int>(j, "jobs", config.jobs);
    if (config.jobs < 1) fail("jobs", "must be >= 1");
    config.seed = get_or<unsigned long long>(j, "seed", config.seed);
    if (j.contains("out")) {
        config.out_dir = get_or<std::string>(j, "out", ".");
    }
    return config;
}

} // namespace annulus
