#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "annulus/analysis.hpp"
#include "annulus/model.hpp"

namespace annulus {

/// Parsed `system` block of a run configuration.
struct FamilySystemSpec {
    std::vector<double> breakpoints;
    std::vector<double> slopes;
    std::string shape = "linear"; // linear | cubic | polynomial
    std::vector<double> coefficients; // h' coefficients, low to high
    bool strict_mode = true;

    PerturbedSystem build() const;
};

/// Built-in harnesses selectable by name.
struct HarnessSpec {
    std::string name; // "van_der_pol" | "zero"

    GeneralHarnessSystem build() const;
    std::string label() const { return name + " harness"; }
};

struct GridSpec {
    double min = 0.25;
    double max = 4.0;
    int count = 64;
    std::string spacing = "linear"; // linear | log

    std::vector<double> values() const;
};

struct SimulateSpec {
    double x0 = 0.0;
    double y0 = 1.5;
    double epsilon = 0.01;
    double t_max = 4.0 * 3.14159265358979323846;
    double output_step = 0.01;
};

struct RunConfig {
    std::variant<FamilySystemSpec, HarnessSpec> system;
    GridSpec r_grid;
    std::vector<double> epsilons = {0.005, 0.01, 0.02};
    std::vector<double> fit_epsilons = {0.02, 0.01, 0.005, 0.0025};
    double fit_radius = 1.5;
    double search_epsilon = 0.01;
    SimulateSpec simulate;
    double quad_tol = kDefaultQuadratureTol;
    IntegrationOptions integration;
    std::filesystem::path out_dir = ".";
    int jobs = 1;
    unsigned long long seed = 0; // recorded for reproducibility of runs

    bool is_family() const {
        return std::holds_alternative<FamilySystemSpec>(system);
    }
};

/// Load and validate a JSON run configuration. Throws ConfigError naming
/// the offending field.
RunConfig load_config(const std::filesystem::path& path);

} // namespace annulus
