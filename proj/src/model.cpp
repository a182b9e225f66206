#include "annulus/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>

namespace annulus {

namespace {

void require_finite(double v, const char* name) {
    if (!std::isfinite(v)) {
        throw InvalidInputError(std::string(name) + " must be finite");
    }
}

} // namespace

ZonePartition::ZonePartition(std::vector<double> breakpoints,
                             std::vector<double> slopes, bool strict_mode)
    : breakpoints_(std::move(breakpoints)), slopes_(std::move(slopes)),
      strict_(strict_mode) {
    if (breakpoints_.empty()) {
        throw InvalidInputError("breakpoints: at least one breakpoint required (n >= 1)");
    }
    for (double a : breakpoints_) require_finite(a, "breakpoints");
    for (double s : slopes_) require_finite(s, "slopes");
    if (breakpoints_.front() <= 0.0) {
        throw InvalidInputError("breakpoints: first breakpoint must be positive");
    }
    if (!std::is_sorted(breakpoints_.begin(), breakpoints_.end(),
                        std::less_equal<double>())) {
        throw InvalidInputError("breakpoints: must be strictly increasing");
    }
    if (slopes_.size() != breakpoints_.size() + 1) {
        throw InvalidInputError(
            "slopes: expected one slope per zone (breakpoint count + 1)");
    }
    if (strict_ && !std::is_sorted(slopes_.begin(), slopes_.end(),
                                   std::less_equal<double>())) {
        throw InvalidInputError(
            "slopes: must be strictly increasing in strict mode");
    }
}

int ZonePartition::zone_index(double x) const {
    require_finite(x, "x");
    // First breakpoint >= x closes the zone: x in (a_i, a_{i+1}] -> i.
    auto it = std::lower_bound(breakpoints_.begin(), breakpoints_.end(), x);
    return static_cast<int>(it - breakpoints_.begin());
}

ShapeFunction::ShapeFunction(std::function<double(double)> h,
                             std::function<double(double)> h_prime,
                             std::string label)
    : h_(std::move(h)), h_prime_(std::move(h_prime)), label_(std::move(label)) {
    if (!h_ || !h_prime_) {
        throw InvalidInputError("shape: value and derivative callbacks required");
    }
}

ShapeFunction ShapeFunction::linear() {
    return ShapeFunction([](double x) { return 0.5 * x * x; },
                         [](double x) { return x; }, "linear");
}

ShapeFunction ShapeFunction::cubic() {
    return ShapeFunction([](double x) { return 0.25 * x * x * x * x; },
                         [](double x) { return x * x * x; }, "cubic");
}

ShapeFunction ShapeFunction::polynomial(std::vector<double> dcoef) {
    if (dcoef.empty()) {
        throw InvalidInputError("shape: polynomial coefficients must be non-empty");
    }
    for (double c : dcoef) require_finite(c, "coefficients");
    // Antiderivative with h(0) = 0.
    std::vector<double> hcoef(dcoef.size() + 1, 0.0);
    for (std::size_t k = 0; k < dcoef.size(); ++k) {
        hcoef[k + 1] = dcoef[k] / static_cast<double>(k + 1);
    }
    auto horner = [](const std::vector<double>& c, double x) {
        double acc = 0.0;
        for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + *it;
        return acc;
    };
    return ShapeFunction(
        [hcoef, horner](double x) { return horner(hcoef, x); },
        [dcoef, horner](double x) { return horner(dcoef, x); },
        "custom-polynomial");
}

double PerturbedSystem::perturbation(double x, double y, double eps) const {
    return perturbation_in_zone(partition_.zone_index(x), x, y, eps);
}

double PerturbedSystem::perturbation_in_zone(int zone, double x, double y,
                                             double eps) const {
    return partition_.slope(zone) * shape_.derivative(x) + eps * y;
}

Vec2 PerturbedSystem::field(Vec2 state, double eps) const {
    return field_in_zone(partition_.zone_index(state.x), state, eps);
}

Vec2 PerturbedSystem::field_in_zone(int zone, Vec2 state, double eps) const {
    require_finite(state.x, "state");
    require_finite(state.y, "state");
    return {state.y,
            -state.x + eps * perturbation_in_zone(zone, state.x, state.y, eps)};
}

double PerturbedSystem::perturbation_divergence_eps0(double x, double y) const {
    require_finite(x, "x");
    require_finite(y, "y");
    for (double a : partition_.breakpoints()) {
        if (x == a) {
            throw BoundaryPointError(
                "divergence undefined on the discontinuity line x = " +
                    std::to_string(a),
                x);
        }
    }
    // d(eps * y)/dy at eps = 0; the h'(x) term has no y dependence.
    return 0.0;
}

PeriodicOrbit::PeriodicOrbit(double r) : radius(r) {
    if (!(r > 0.0) || !std::isfinite(r)) {
        throw InvalidInputError("radius: must be positive and finite");
    }
}

Vec2 PeriodicOrbit::point(double t) const {
    return {radius * std::sin(t), radius * std::cos(t)};
}

double GeneralHarnessSystem::perturbation_divergence_eps0(double x,
                                                          double y) const {
    const double dx = 1e-6 * std::max(1.0, std::abs(x));
    const double dy = 1e-6 * std::max(1.0, std::abs(y));
    const double dg1 = (g1(x + dx, y, 0.0) - g1(x - dx, y, 0.0)) / (2.0 * dx);
    const double dg2 = (g2(x, y + dy, 0.0) - g2(x, y - dy, 0.0)) / (2.0 * dy);
    return dg1 + dg2;
}

GeneralHarnessSystem van_der_pol_harness() {
    GeneralHarnessSystem h;
    h.f1 = [](double, double y) { return y; };
    h.f2 = [](double x, double) { return -x; };
    h.g1 = [](double, double, double) { return 0.0; };
    h.g2 = [](double x, double y, double) { return (1.0 - x * x) * y; };
    h.orbit_point = [](double r, double t) {
        return Vec2{r * std::sin(t), r * std::cos(t)};
    };
    h.orbit_period = [](double) { return 2.0 * std::numbers::pi; };
    h.div_f = [](double, double) { return 0.0; };
    return h;
}

GeneralHarnessSystem zero_perturbation_harness() {
    GeneralHarnessSystem h = van_der_pol_harness();
    h.g2 = [](double, double, double) { return 0.0; };
    return h;
}

GeneralHarnessSystem wrap_as_harness(const PerturbedSystem& system) {
    GeneralHarnessSystem h;
    h.f1 = [](double, double y) { return y; };
    h.f2 = [](double x, double) { return -x; };
    h.g1 = [](double, double, double) { return 0.0; };
    h.g2 = [system](double x, double y, double eps) {
        return system.perturbation(x, y, eps);
    };
    h.orbit_point = [](double r, double t) {
        return Vec2{r * std::sin(t), r * std::cos(t)};
    };
    h.orbit_period = [](double) { return 2.0 * std::numbers::pi; };
    h.div_f = [](double, double) { return 0.0; };
    std::vector<double> breaks(system.partition().breakpoints().begin(),
                               system.partition().breakpoints().end());
    h.discontinuity_times = [breaks](double r) {
        std::vector<double> times;
        for (double a : breaks) {
            if (a < r) {
                const double t = std::asin(a / r);
                times.push_back(t);
                times.push_back(std::numbers::pi - t);
            }
        }
        std::sort(times.begin(), times.end());
        return times;
    };
    return h;
}

} // namespace annulus
