#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "annulus/errors.hpp"

namespace annulus {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

/// Vertical strips (a_i, a_{i+1}] x R, i = 0..n, with a_0 = -inf and
/// a_{n+1} = +inf. Breakpoints a_1 < ... < a_n must satisfy a_1 > 0; one
/// slope per zone. In strict mode the slopes must be strictly increasing
/// as well; relaxed mode drops that hypothesis (the closed-form identities
/// below never use it).
class ZonePartition {
public:
    ZonePartition(std::vector<double> breakpoints, std::vector<double> slopes,
                  bool strict_mode = true);

    /// Zone of x under the right-closed convention: x in (a_i, a_{i+1}]
    /// maps to i, so the value at x = a_i is i-1. Binary search.
    int zone_index(double x) const;

    int zone_count() const { return static_cast<int>(slopes_.size()); }
    std::span<const double> breakpoints() const { return breakpoints_; }
    std::span<const double> slopes() const { return slopes_; }
    double slope(int zone) const { return slopes_.at(static_cast<std::size_t>(zone)); }
    bool strict_mode() const { return strict_; }

private:
    std::vector<double> breakpoints_;
    std::vector<double> slopes_;
    bool strict_;
};

/// A differentiable profile h together with its derivative h'. Supplied as
/// a value/derivative pair; no symbolic differentiation anywhere. The
/// factories cover the profiles used throughout: h = x^2/2 ("linear",
/// h' = x), h = x^4/4 ("cubic", h' = x^3), and arbitrary polynomial h'
/// with coefficients listed low-to-high.
class ShapeFunction {
public:
    ShapeFunction(std::function<double(double)> h,
                  std::function<double(double)> h_prime, std::string label);

    static ShapeFunction linear();
    static ShapeFunction cubic();
    static ShapeFunction polynomial(std::vector<double> derivative_coefficients);

    double value(double x) const { return h_(x); }
    double derivative(double x) const { return h_prime_(x); }
    const std::string& label() const { return label_; }

private:
    std::function<double(double)> h_;
    std::function<double(double)> h_prime_;
    std::string label_;
};

/// The rotation field (x' = y, y' = -x) perturbed in the second component
/// by eps * g(x, y, eps) with g = slope_i * h'(x) + eps * y on zone i.
/// eps is not stored: the same system is analyzed across an eps grid, so
/// every operation takes it as an argument.
class PerturbedSystem {
public:
    PerturbedSystem(ZonePartition partition, ShapeFunction shape)
        : partition_(std::move(partition)), shape_(std::move(shape)) {}

    const ZonePartition& partition() const { return partition_; }
    const ShapeFunction& shape() const { return shape_; }

    /// g(x, y, eps) = slope(zone(x)) * h'(x) + eps * y.
    double perturbation(double x, double y, double eps) const;

    /// Same, with the zone pinned by the caller. Used by the integrator,
    /// which freezes the zone between boundary events so that trial steps
    /// never mix fields.
    double perturbation_in_zone(int zone, double x, double y, double eps) const;

    /// (x', y') = (y, -x + eps * g(x, y, eps)).
    Vec2 field(Vec2 state, double eps) const;
    Vec2 field_in_zone(int zone, Vec2 state, double eps) const;

    /// Divergence of the perturbation at eps = 0 on the open strip
    /// containing x. For this family it is identically zero; the method
    /// exists so that precondition checks can sample it. Throws
    /// BoundaryPointError when x sits exactly on a discontinuity line.
    double perturbation_divergence_eps0(double x, double y) const;

private:
    ZonePartition partition_;
    ShapeFunction shape_;
};

/// Circle of radius r, parametrized clockwise as (r sin t, r cos t),
/// t in [0, 2pi). Energy level h = r^2/2 under H = (x^2 + y^2)/2.
struct PeriodicOrbit {
    double radius;

    explicit PeriodicOrbit(double r);
    double energy() const { return 0.5 * radius * radius; }
    static constexpr double period() { return 6.283185307179586476925286766559; }
    Vec2 point(double t) const;
};

/// A user-supplied planar system (f1, f2) + eps * (g1, g2) whose
/// unperturbed part carries a known family of periodic orbits. This is
/// the general harness for first-order Melnikov integrals; the piecewise
/// family above is one instance (see wrap_as_harness).
struct GeneralHarnessSystem {
    std::function<double(double, double)> f1;
    std::function<double(double, double)> f2;
    std::function<double(double, double, double)> g1; // (x, y, eps)
    std::function<double(double, double, double)> g2;

    /// Orbit family: point on C_r at parameter t, and the period T_r.
    std::function<Vec2(double r, double t)> orbit_point;
    std::function<double(double r)> orbit_period;

    /// Optional analytic divergence of (f1, f2); when absent it is
    /// estimated by central differences.
    std::function<double(double, double)> div_f;

    /// Optional times in [0, T_r) where the perturbation jumps along C_r;
    /// integrals are split there. Empty means smooth.
    std::function<std::vector<double>(double r)> discontinuity_times;

    /// Divergence of the perturbation (g1, g2) at eps = 0, by central
    /// differences. This is the quantity whose vanishing the second-order
    /// line-integral formula requires.
    double perturbation_divergence_eps0(double x, double y) const;
};

/// The classical self-excited oscillator harness: f = (y, -x),
/// g = (0, (1 - x^2) y), circular orbit family of period 2pi.
GeneralHarnessSystem van_der_pol_harness();

/// Harness with f = (y, -x) and zero perturbation.
GeneralHarnessSystem zero_perturbation_harness();

/// View a piecewise system through the harness interface. Discontinuity
/// times along C_r are derived from the zone breakpoints.
GeneralHarnessSystem wrap_as_harness(const PerturbedSystem& system);

} // namespace annulus
