#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "annulus/flow.hpp"
#include "annulus/melnikov.hpp"
#include "annulus/model.hpp"

namespace annulus {

/// Least-squares fit of the measured displacement against c1*eps + c2*eps^2.
/// Residuals are weighted by 1/eps^2 so every point contributes at the
/// scale of the quadratic term; the cubic remainder then lands in the
/// residual instead of biasing c1.
struct ExpansionFit {
    double r = 0.0;
    std::vector<double> eps_grid; // strictly decreasing
    double c1 = 0.0;
    double c2 = 0.0;
    double residual_norm = 0.0; // RMS of weighted residuals
    double m1_target = 0.0;
    double m2_target = 0.0; // pi r^2
    std::vector<DisplacementRecord> records;
};

struct FitOptions {
    double max_eps = 0.05;
    IntegrationOptions integration;
};

ExpansionFit fit_expansion(const PerturbedSystem& system, double r,
                           std::vector<double> eps_grid,
                           const FitOptions& opts = {});

/// A confirmed or suspected root of a sampled scalar function of r.
struct Root {
    enum class Kind {
        Simple,        // sign change, derivative bounded away from zero
        Degenerate,    // sign change, derivative below the floor
        SuspectedEven, // local minimum of |f| below the floor, no sign change
    };
    double location = 0.0;
    double bracket_lo = 0.0;
    double bracket_hi = 0.0;
    double derivative = 0.0; // central-difference estimate at the root
    Kind kind = Kind::Simple;
};

struct RootReport {
    double r_min = 0.0;
    double r_max = 0.0;
    std::string function_label;
    std::vector<Root> roots;
    int predicted_limit_cycles = 0; // confirmed simple roots only
    std::vector<std::string> notes;
};

struct FindRootOptions {
    int grid_count = 200;
    double refine_tol = 1e-10;
    /// Derivative magnitude below max|f| / span * this fraction flags a
    /// sign-change root as degenerate.
    double derivative_floor_fraction = 1e-6;
    /// |f| below max|f| * this fraction at an interior local minimum makes
    /// a suspected even-multiplicity root.
    double even_floor_fraction = 1e-3;
};

/// Scan a callable on a uniform grid over [r_min, r_max], bracket the sign
/// changes, refine them by bisection, and classify.
RootReport find_roots(const std::function<double(double)>& f, double r_min,
                      double r_max, const FindRootOptions& opts = {},
                      const std::string& label = "");

/// Same classification from precomputed samples (values at increasing
/// abscissae); brackets are refined by linear interpolation only.
RootReport find_roots_sampled(const std::vector<std::pair<double, double>>& samples,
                              const FindRootOptions& opts = {},
                              const std::string& label = "");

/// Melnikov sweep over an r grid. Grid points within grazing tolerance of
/// a breakpoint are nudged just past it and flagged; per-sample failures
/// are annotated and the sweep continues.
MelnikovCurve sweep_melnikov(const PerturbedSystem& system,
                             std::vector<double> r_grid,
                             double quad_tol = kDefaultQuadratureTol,
                             int jobs = 1);

/// Aggregated numerical evidence about limit cycles of a piecewise system
/// (or, for harnesses, of the first-order Melnikov function). All numeric
/// sections are optional so that degenerate configurations still produce
/// a report.
struct AnalysisReport {
    struct MelnikovEvidence {
        double r_min = 0.0, r_max = 0.0;
        int sample_count = 0;
        double max_abs_m1_quad = 0.0;
        double max_abs_m1_closed = 0.0;
        double min_m2_quad = 0.0;
        double min_m2_closed = 0.0;
        RootReport m2_roots;
    };
    struct DisplacementEvidence {
        std::vector<DisplacementRecord> records;
        double min_d = 0.0;
        bool all_positive = false;
        double root_scan_eps = 0.0;
        RootReport d_roots;
    };
    struct HarnessEvidence {
        double r_min = 0.0, r_max = 0.0;
        RootReport m1_roots;
    };

    std::string system_label;
    std::optional<MelnikovEvidence> melnikov;
    std::optional<DisplacementEvidence> displacement;
    std::optional<ExpansionFit> fit;
    std::optional<HarnessEvidence> harness;
    std::vector<std::string> caveats;
    std::vector<std::string> failures;
    std::string verdict;

    std::string to_text() const;
};

struct ReportOptions {
    double r_min = 0.25;
    double r_max = 4.0;
    int melnikov_samples = 64;
    int displacement_samples = 16;
    double root_scan_eps = 0.01; // eps used for the measured-d root scan
    std::optional<double> fit_radius; // default: midpoint of the range
    std::vector<double> fit_eps = {0.02, 0.01, 0.005, 0.0025};
    double quad_tol = kDefaultQuadratureTol;
    IntegrationOptions integration;
    int jobs = 1;
};

/// Evidence report for a piecewise system: first-order Melnikov values,
/// the sign of the second-order ones, measured displacement positivity,
/// and the expansion fit. eps_list drives the displacement section; an
/// empty list leaves only Melnikov-level evidence.
AnalysisReport conjecture_report(const PerturbedSystem& system,
                                 const std::vector<double>& eps_list,
                                 const ReportOptions& opts = {});

/// The same reporting path for a general harness: sweeps the first-order
/// Melnikov function and predicts cycles from its simple roots.
AnalysisReport harness_report(const GeneralHarnessSystem& harness,
                              const std::string& label,
                              const ReportOptions& opts = {});

} // namespace annulus
