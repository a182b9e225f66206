#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "annulus/model.hpp"

namespace annulus {

/// Default absolute tolerance for Melnikov quadratures.
inline constexpr double kDefaultQuadratureTol = 1e-10;

/// Grazing tolerance at radius r: the orbit is treated as tangent to a
/// breakpoint line when |r - a_i| falls below this.
inline double grazing_tolerance(double r) {
    return 1e-9 * std::max(1.0, r);
}

/// Where the circle of radius r crosses the breakpoint lines, as times of
/// the clockwise parametrization (r sin t, r cos t) on [0, 2pi). Crossings
/// exist only on the front half t in (0, pi); the back half (x < 0) stays
/// in zone 0.
struct CrossingSchedule {
    struct Segment {
        double t_begin;
        double t_end;
        int zone;
    };

    double radius = 0.0;
    std::vector<Segment> segments;      // partition of [0, 2pi), half-open
    std::vector<double> crossing_times; // ascending, one per zone change
    int outermost_zone = 0;             // zone containing x = r (grazing excluded)
    bool grazing = false;               // |r - a_i| within tolerance for some i
};

CrossingSchedule crossing_schedule(const ZonePartition& partition, double r,
                                   double tol);
inline CrossingSchedule crossing_schedule(const ZonePartition& partition,
                                          double r) {
    return crossing_schedule(partition, r, grazing_tolerance(r));
}

/// First-order Melnikov integral split over the three monotone arcs of
/// x = r sin t: rise [0, pi/2], fall [pi/2, 3pi/2], close [3pi/2, 2pi).
/// The pieces telescope: total is identically zero for every partition,
/// shape and radius.
struct ArcDecomposition {
    double rise = 0.0;
    double fall = 0.0;
    double closing = 0.0;
    double total = 0.0;
};

/// Closed-form evaluation of the three arcs:
///   rise    =  h(r) s_m - h(0) s_0 - sum_{i=1..m} (s_i - s_{i-1}) h(a_i)
///   fall    = -h(r) s_m + h(-r) s_0 + sum_{i=1..m} (s_i - s_{i-1}) h(a_i)
///   closing =  h(0) s_0 - h(-r) s_0
/// with s_i the zone slopes and m the outermost zone entered.
ArcDecomposition m1_closed_form(const ZonePartition& partition,
                                const ShapeFunction& shape, double r);

/// First-order Melnikov integral of the piecewise system by adaptive
/// quadrature of r cos(t) g(r sin t, ., 0) over [0, 2pi), split at every
/// crossing time so each piece is smooth.
double m1_quadrature(const PerturbedSystem& system, double r,
                     double abs_tol = kDefaultQuadratureTol);

/// First-order Melnikov integral for a general harness: integrates
/// exp(-int_0^t div f) (f1 g2 - g1 f2) along the orbit C_r over one
/// period. Validates that the supplied parametrization actually solves
/// the unperturbed field before integrating.
double m1_general(const GeneralHarnessSystem& harness, double r,
                  double abs_tol = kDefaultQuadratureTol);

/// Second-order Melnikov function of the piecewise family: pi r^2.
double m2_closed_form(double r);

/// How the eps-derivative of the perturbation is obtained for the
/// second-order line integral.
enum class EpsDerivative {
    Analytic,         // d g / d eps at eps = 0 equals y for this family
    FiniteDifference, // central difference in eps
};

/// Second-order Melnikov line integral along C_r. Samples the perturbation
/// divergence at eps = 0 first and refuses to integrate unless it
/// vanishes (PreconditionError otherwise).
double m2_quadrature(const PerturbedSystem& system, double r,
                     double abs_tol = kDefaultQuadratureTol,
                     EpsDerivative mode = EpsDerivative::Analytic);

/// Same line integral for a general harness, eps-derivatives by central
/// differences. The divergence precondition is checked by sampling along
/// the orbit; harnesses with divergent perturbations (e.g. the van der
/// Pol one) are rejected.
double m2_general(const GeneralHarnessSystem& harness, double r,
                  double abs_tol = kDefaultQuadratureTol);

/// One row of a Melnikov sweep.
struct MelnikovSample {
    double r = 0.0;
    double m1_closed = 0.0;
    double m1_quad = 0.0;
    double m2_closed = 0.0;
    double m2_quad = 0.0;
    bool grazing = false;
    bool failed = false;
    std::string note;
};

struct MelnikovCurve {
    std::vector<MelnikovSample> samples;
    double quadrature_tol = kDefaultQuadratureTol;
};

} // namespace annulus
