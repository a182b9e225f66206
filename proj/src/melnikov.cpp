#include "annulus/melnikov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "annulus/quadrature.hpp"
#include "annulus/rk.hpp"

namespace annulus {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

int zone_at(const CrossingSchedule& schedule, double t) {
    for (const auto& seg : schedule.segments) {
        if (t >= seg.t_begin && t < seg.t_end) return seg.zone;
    }
    return 0; // t == 2pi wraps to the trailing zone-0 segment
}

void require_radius(double r) {
    if (!std::isfinite(r) || !(r > 0.0)) {
        throw InvalidInputError("r: must be positive and finite");
    }
}

/// Flow the unperturbed harness field from tau_r(0) over one period and
/// require it to track the supplied parametrization. Rejects orbit
/// families that are not actually orbits of (f1, f2).
void validate_orbit_family(const GeneralHarnessSystem& harness, double r) {
    const double period = harness.orbit_period(r);
    if (!std::isfinite(period) || !(period > 0.0)) {
        throw InvalidInputError("orbit family: period must be positive");
    }
    const double closure_tol = 1e-8 * std::max(1.0, r);
    const Vec2 start = harness.orbit_point(r, 0.0);
    const Vec2 wrap = harness.orbit_point(r, period);
    if (std::hypot(wrap.x - start.x, wrap.y - start.y) > closure_tol) {
        throw InvalidInputError(
            "orbit family: parametrization does not close after one period "
            "at r = " +
            std::to_string(r));
    }
    auto rhs = [&harness](double, const rk::State<2>& u, rk::State<2>& du) {
        du[0] = harness.f1(u[0], u[1]);
        du[1] = harness.f2(u[0], u[1]);
    };
    rk::StepControl control;
    rk::State<2> u{start.x, start.y};
    for (int quarter = 1; quarter <= 4; ++quarter) {
        const double t0 = period * (quarter - 1) / 4.0;
        const double t1 = period * quarter / 4.0;
        u = rk::integrate_smooth<2>(rhs, t0, t1, u, control);
        const Vec2 expected = harness.orbit_point(r, t1);
        if (std::hypot(u[0] - expected.x, u[1] - expected.y) > closure_tol) {
            throw InvalidInputError(
                "orbit family: parametrization does not solve the "
                "unperturbed field at r = " +
                std::to_string(r));
        }
    }
}

std::vector<double> knots_with_breaks(double t_end,
                                      const std::vector<double>& breaks) {
    std::vector<double> knots{0.0};
    for (double b : breaks) {
        if (b > 0.0 && b < t_end) knots.push_back(b);
    }
    std::sort(knots.begin(), knots.end());
    knots.push_back(t_end);
    return knots;
}

/// Integrate `weight` over [0, period] against the accumulated divergence
/// factor exp(-int_0^t div f). Two passes at different tolerances certify
/// the result.
double divergence_weighted_integral(
    const GeneralHarnessSystem& harness, double r, double period,
    const std::function<double(double, const Vec2&)>& weight,
    const std::vector<double>& breaks, double abs_tol) {
    auto div_f = [&harness](const Vec2& p) {
        if (harness.div_f) return harness.div_f(p.x, p.y);
        const double dx = 1e-6 * std::max(1.0, std::abs(p.x));
        const double dy = 1e-6 * std::max(1.0, std::abs(p.y));
        return (harness.f1(p.x + dx, p.y) - harness.f1(p.x - dx, p.y)) /
                   (2.0 * dx) +
               (harness.f2(p.x, p.y + dy) - harness.f2(p.x, p.y - dy)) /
                   (2.0 * dy);
    };
    auto rhs = [&](double t, const rk::State<2>& u, rk::State<2>& du) {
        const Vec2 p = harness.orbit_point(r, t);
        du[0] = div_f(p);
        du[1] = std::exp(-u[0]) * weight(t, p);
    };

    auto run = [&](double rel_tol) {
        rk::StepControl control;
        control.rel_tol = rel_tol;
        control.abs_tol = 1e-14;
        control.max_step = period / 16.0;
        rk::State<2> u{0.0, 0.0};
        u = rk::integrate_smooth<2>(rhs, 0.0, period, u, control, breaks);
        return u[1];
    };

    // Successive tolerance refinement until two runs agree within the
    // requested absolute budget; the difference estimates the coarser
    // run's error.
    double previous = run(1e-11);
    double achieved = std::numeric_limits<double>::infinity();
    for (double rel_tol : {1e-12, 1e-13, 1e-14}) {
        const double refined = run(rel_tol);
        achieved = std::abs(refined - previous);
        if (achieved <= abs_tol) return refined;
        previous = refined;
    }
    throw NumericalFailureError(
        "first-order Melnikov integral did not converge to tolerance",
        previous, achieved);
}

void check_divergence_free(const PerturbedSystem& system, double r) {
    for (int k = 0; k < 16; ++k) {
        const double t = kTwoPi * (k + 0.37) / 16.0;
        double x = r * std::sin(t);
        const double y = r * std::cos(t);
        for (double a : system.partition().breakpoints()) {
            if (x == a) x = std::nextafter(x, x + 1.0);
        }
        const double div = system.perturbation_divergence_eps0(x, y);
        if (std::abs(div) > 1e-9) {
            throw PreconditionError(
                "perturbation divergence must vanish at eps = 0", x, y, div);
        }
    }
}

} // namespace

CrossingSchedule crossing_schedule(const ZonePartition& partition, double r,
                                   double tol) {
    require_radius(r);
    if (!std::isfinite(tol) || tol < 0.0) {
        throw InvalidInputError("tol: must be non-negative and finite");
    }

    CrossingSchedule schedule;
    schedule.radius = r;

    std::vector<double> rising; // times in (0, pi/2), one per crossed line
    for (double a : partition.breakpoints()) {
        if (a + tol < r) {
            rising.push_back(std::asin(a / r));
        } else if (std::abs(r - a) <= tol) {
            schedule.grazing = true;
        }
    }
    const int m = static_cast<int>(rising.size());
    schedule.outermost_zone = m;

    schedule.crossing_times = rising;
    for (int i = m - 1; i >= 0; --i) {
        schedule.crossing_times.push_back(std::numbers::pi - rising[i]);
    }

    double t_prev = 0.0;
    int zone = 0;
    for (int i = 0; i < 2 * m; ++i) {
        schedule.segments.push_back({t_prev, schedule.crossing_times[i], zone});
        t_prev = schedule.crossing_times[i];
        zone += (i < m) ? 1 : -1;
    }
    schedule.segments.push_back({t_prev, kTwoPi, 0});
    return schedule;
}

ArcDecomposition m1_closed_form(const ZonePartition& partition,
                                const ShapeFunction& shape, double r) {
    require_radius(r);
    const auto breaks = partition.breakpoints();
    const auto slopes = partition.slopes();

    int m = 0;
    while (m < static_cast<int>(breaks.size()) && breaks[m] < r) ++m;

    double jumps = 0.0; // sum_i (s_i - s_{i-1}) h(a_i), i = 1..m
    for (int i = 1; i <= m; ++i) {
        jumps += (slopes[i] - slopes[i - 1]) * shape.value(breaks[i - 1]);
    }

    ArcDecomposition out;
    out.rise = shape.value(r) * slopes[m] - shape.value(0.0) * slopes[0] - jumps;
    out.fall = -shape.value(r) * slopes[m] + shape.value(-r) * slopes[0] + jumps;
    out.closing = (shape.value(0.0) - shape.value(-r)) * slopes[0];
    out.total = out.rise + out.fall + out.closing;
    return out;
}

double m1_quadrature(const PerturbedSystem& system, double r, double abs_tol) {
    require_radius(r);
    const auto schedule = crossing_schedule(system.partition(), r);
    auto integrand = [&](double t) {
        const double x = r * std::sin(t);
        const int zone = zone_at(schedule, t);
        return r * std::cos(t) *
               system.perturbation_in_zone(zone, x, 0.0, 0.0);
    };
    return integrate_segments(integrand,
                              knots_with_breaks(kTwoPi, schedule.crossing_times),
                              abs_tol);
}

double m1_general(const GeneralHarnessSystem& harness, double r,
                  double abs_tol) {
    require_radius(r);
    validate_orbit_family(harness, r);
    const double period = harness.orbit_period(r);
    std::vector<double> breaks;
    if (harness.discontinuity_times) breaks = harness.discontinuity_times(r);
    auto weight = [&harness](double, const Vec2& p) {
        return harness.f1(p.x, p.y) * harness.g2(p.x, p.y, 0.0) -
               harness.g1(p.x, p.y, 0.0) * harness.f2(p.x, p.y);
    };
    return divergence_weighted_integral(harness, r, period, weight, breaks,
                                        abs_tol);
}

double m2_closed_form(double r) {
    require_radius(r);
    return std::numbers::pi * r * r;
}

double m2_quadrature(const PerturbedSystem& system, double r, double abs_tol,
                     EpsDerivative mode) {
    require_radius(r);
    check_divergence_free(system, r);
    const auto schedule = crossing_schedule(system.partition(), r);

    auto integrand = [&](double t) {
        const double x = r * std::sin(t);
        const double y = r * std::cos(t);
        const double dx_dt = y; // tau'(t) = (y, -x)
        double dg_deps;
        if (mode == EpsDerivative::Analytic) {
            dg_deps = y;
        } else {
            const int zone = zone_at(schedule, t);
            const double delta = 1e-6 * std::max(1.0, std::abs(y));
            dg_deps = (system.perturbation_in_zone(zone, x, y, delta) -
                       system.perturbation_in_zone(zone, x, y, -delta)) /
                      (2.0 * delta);
        }
        // The x-component of the perturbation is identically zero, so the
        // -df/deps dy term drops.
        return dg_deps * dx_dt;
    };
    return integrate_segments(integrand,
                              knots_with_breaks(kTwoPi, schedule.crossing_times),
                              abs_tol);
}

double m2_general(const GeneralHarnessSystem& harness, double r,
                  double abs_tol) {
    require_radius(r);
    validate_orbit_family(harness, r);
    const double period = harness.orbit_period(r);

    for (int k = 0; k < 16; ++k) {
        const double t = period * (k + 0.37) / 16.0;
        const Vec2 p = harness.orbit_point(r, t);
        const double div = harness.perturbation_divergence_eps0(p.x, p.y);
        if (std::abs(div) > 1e-6) {
            throw PreconditionError(
                "second-order line integral requires a divergence-free "
                "perturbation at eps = 0",
                p.x, p.y, div);
        }
    }

    std::vector<double> breaks;
    if (harness.discontinuity_times) breaks = harness.discontinuity_times(r);

    auto integrand = [&](double t) {
        const Vec2 p = harness.orbit_point(r, t);
        const double xdot = harness.f1(p.x, p.y);
        const double ydot = harness.f2(p.x, p.y);
        const double delta = 1e-6;
        const double dg2 = (harness.g2(p.x, p.y, delta) -
                            harness.g2(p.x, p.y, -delta)) /
                           (2.0 * delta);
        const double dg1 = (harness.g1(p.x, p.y, delta) -
                            harness.g1(p.x, p.y, -delta)) /
                           (2.0 * delta);
        return dg2 * xdot - dg1 * ydot;
    };
    return integrate_segments(integrand, knots_with_breaks(period, breaks),
                              abs_tol);
}

} // namespace annulus
