#pragma once

#include <vector>

#include "annulus/model.hpp"

namespace annulus {

struct IntegrationOptions {
    double rel_tol = 1e-12;
    double abs_tol = 1e-14;
    /// Events are localized on the dense interpolant to this time accuracy.
    double event_time_tol = 1e-12;
    /// integrate_to_section gives up after this much time without a return.
    double max_return_time = 4.0 * 3.14159265358979323846;
    /// Escape guard: radius exceeding this multiple of the starting radius
    /// aborts the integration.
    double escape_factor = 10.0;
    /// simulate(): spacing of dense output samples; 0 records step
    /// endpoints and events only.
    double output_step = 0.0;
    /// +1 integrates the field, -1 its time reversal.
    int time_direction = +1;
};

/// Crossing of (or tangency to) a zone boundary line x = a_i.
struct ZoneEvent {
    double t = 0.0;
    int breakpoint_index = 0; // index into ZonePartition::breakpoints()
    int direction = 0;        // +1 x increasing, -1 x decreasing, 0 grazing
    double x = 0.0;
    double y = 0.0;
};

struct TrajectoryStats {
    long steps_accepted = 0;
    long steps_rejected = 0;
    long rhs_evaluations = 0;
};

struct Trajectory {
    std::vector<double> t;
    std::vector<Vec2> state;
    std::vector<int> zone;
    std::vector<ZoneEvent> events;
    TrajectoryStats stats;
};

/// Point on the transversal ray {x = 0, y > 0}, parametrized by energy.
struct SectionState {
    explicit SectionState(double y0);
    double y0;
    double energy() const { return 0.5 * y0 * y0; }
};

struct SectionReturn {
    double y = 0.0; // return coordinate on the section
    double t = 0.0; // return time
};

struct ReturnResult {
    SectionReturn section;
    Trajectory trajectory;
};

/// One row of a displacement sweep: energies before and after one loop of
/// the return map.
struct DisplacementRecord {
    double r = 0.0;
    double h = 0.0;
    double eps = 0.0;
    double return_energy = 0.0;
    double d = 0.0; // return_energy - h
};

/// Integrate the piecewise system clockwise from (0, y0) until the first
/// return to the section {x = 0, y > 0}. Every boundary crossing is
/// localized and the step restarted in the new zone; no step spans a
/// discontinuity line.
ReturnResult integrate_to_section(const PerturbedSystem& system, double y0,
                                  double eps,
                                  const IntegrationOptions& opts = {});

/// Displacement of the return map at radius r: d = P(h, eps) - h with
/// h = r^2/2 and P the return energy.
DisplacementRecord displacement(const PerturbedSystem& system, double r,
                                double eps,
                                const IntegrationOptions& opts = {});

/// Event-respecting trajectory from an arbitrary start, for inspection
/// and plot-data export.
Trajectory simulate(const PerturbedSystem& system, Vec2 start, double eps,
                    double t_max, const IntegrationOptions& opts = {});

} // namespace annulus
