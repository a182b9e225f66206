#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "annulus/model.hpp"
#include "oracles.hpp"

using namespace annulus;

namespace {

ZonePartition example_partition() {
    return ZonePartition({1.0, 2.0}, {1.0, 2.0, 3.0});
}

PerturbedSystem example_system() {
    return PerturbedSystem(example_partition(), ShapeFunction::linear());
}

} // namespace

TEST_CASE("zone lookup follows the right-closed convention") {
    auto partition = example_partition();
    CHECK(partition.zone_index(0.5) == 0);
    CHECK(partition.zone_index(1.0) == 0); // boundary belongs to the lower zone
    CHECK(partition.zone_index(1.5) == 1);
    CHECK(partition.zone_index(2.5) == 2);
    CHECK(partition.zone_index(-3.0) == 0);
    CHECK(partition.zone_index(2.0) == 1);
}

TEST_CASE("zone lookup agrees with a linear scan and is monotone") {
    std::mt19937_64 rng(20240517);
    std::uniform_real_distribution<double> coord(-6.0, 6.0);
    auto partition = ZonePartition({0.5, 1.1, 1.7, 2.9, 4.2},
                                   {-2.0, -1.0, 0.5, 1.0, 2.0, 3.5});
    double prev_x = -std::numeric_limits<double>::infinity();
    int prev_zone = 0;
    std::vector<double> xs;
    xs.reserve(10000);
    for (int i = 0; i < 10000; ++i) xs.push_back(coord(rng));
    std::sort(xs.begin(), xs.end());
    for (double x : xs) {
        const int zone = partition.zone_index(x);
        CHECK(zone == oracles::zone_linear_scan(partition.breakpoints(), x));
        if (x >= prev_x) CHECK(zone >= prev_zone);
        prev_x = x;
        prev_zone = zone;
    }
    // Right-continuity at every breakpoint: the boundary takes the lower
    // zone, anything beyond takes the upper.
    for (std::size_t i = 0; i < partition.breakpoints().size(); ++i) {
        const double a = partition.breakpoints()[i];
        CHECK(partition.zone_index(a) == static_cast<int>(i));
        CHECK(partition.zone_index(std::nextafter(a, 10.0)) ==
              static_cast<int>(i) + 1);
    }
}

TEST_CASE("partition validation names the offending field") {
    CHECK_THROWS_AS(ZonePartition({-1.0, 2.0}, {1.0, 2.0, 3.0}),
                    InvalidInputError);
    CHECK_THROWS_AS(ZonePartition({2.0, 1.0}, {1.0, 2.0, 3.0}),
                    InvalidInputError);
    CHECK_THROWS_AS(ZonePartition({1.0, 1.0}, {1.0, 2.0, 3.0}),
                    InvalidInputError);
    CHECK_THROWS_AS(ZonePartition({1.0, 2.0}, {1.0, 2.0}), InvalidInputError);
    CHECK_THROWS_AS(ZonePartition({}, {1.0}), InvalidInputError);
    CHECK_THROWS_AS(ZonePartition({1.0, 2.0}, {3.0, 2.0, 1.0}),
                    InvalidInputError);
    // Relaxed mode admits non-monotone slopes.
    CHECK_NOTHROW(ZonePartition({1.0, 2.0}, {3.0, 2.0, 1.0}, false));
    CHECK_THROWS_AS(example_partition().zone_index(
                        std::numeric_limits<double>::quiet_NaN()),
                    InvalidInputError);
}

TEST_CASE("perturbation evaluates slope * h'(x) + eps * y") {
    auto system = example_system();
    CHECK(system.perturbation(1.5, 0.0, 0.0) == doctest::Approx(3.0));
    // Zone 0 with eps = 0 reduces to slope_0 * x for the linear shape.
    CHECK(system.perturbation(0.7, 123.0, 0.0) == doctest::Approx(0.7));
    CHECK(system.perturbation(0.0, 5.0, 0.1) == doctest::Approx(0.5));
}

TEST_CASE("vector field is a rotation plus the scaled perturbation") {
    auto system = example_system();
    const Vec2 unperturbed = system.field({3.0, 4.0}, 0.0);
    CHECK(unperturbed.x == doctest::Approx(4.0));
    CHECK(unperturbed.y == doctest::Approx(-3.0));

    const Vec2 perturbed = system.field({1.5, 0.0}, 0.1);
    CHECK(perturbed.x == doctest::Approx(0.0));
    CHECK(perturbed.y == doctest::Approx(-1.2));

    const double r = 2.2, eps = 0.07;
    const Vec2 at_top = system.field({0.0, r}, eps);
    CHECK(at_top.x == doctest::Approx(r));
    CHECK(at_top.y ==
          doctest::Approx(eps * (system.partition().slope(0) *
                                     system.shape().derivative(0.0) +
                                 eps * r)));
}

TEST_CASE("perturbation divergence vanishes off the boundary lines") {
    auto system = example_system();
    CHECK(system.perturbation_divergence_eps0(0.3, 7.0) == 0.0);
    CHECK(system.perturbation_divergence_eps0(1.5, -2.0) == 0.0);
    CHECK_THROWS_AS(system.perturbation_divergence_eps0(1.0, 0.5),
                    BoundaryPointError);
}

TEST_CASE("harness perturbation divergence matches the analytic value") {
    auto harness = van_der_pol_harness();
    // d/dy[(1 - x^2) y] = 1 - x^2, so 1 at the origin.
    CHECK(harness.perturbation_divergence_eps0(0.0, 0.0) ==
          doctest::Approx(1.0).epsilon(1e-8));
    CHECK(harness.perturbation_divergence_eps0(2.0, 1.0) ==
          doctest::Approx(-3.0).epsilon(1e-8));
}

TEST_CASE("shape derivatives are consistent with their values") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    std::vector<double> random_coefs(6);
    for (auto& c : random_coefs) c = coef(rng);

    for (const auto& shape :
         {ShapeFunction::linear(), ShapeFunction::cubic(),
          ShapeFunction::polynomial(random_coefs)}) {
        for (double x = -2.0; x <= 2.0; x += 0.37) {
            const double delta = 1e-5;
            const double fd = oracles::central_difference(
                [&shape](double t) { return shape.value(t); }, x, delta);
            // Second-order accuracy of the central difference.
            CHECK(std::abs(fd - shape.derivative(x)) <= 1e-3 * delta);
        }
    }
}

TEST_CASE("perturbation is smooth on closed sub-strips") {
    auto system = PerturbedSystem(example_partition(), ShapeFunction::cubic());
    // Entirely inside zone 1, away from both lines.
    for (double x = 1.1; x <= 1.9; x += 0.13) {
        const double delta = 1e-5;
        const double fd = oracles::central_difference(
            [&system](double t) { return system.perturbation(t, 0.0, 0.0); },
            x, delta);
        const double analytic =
            system.partition().slope(1) * 3.0 * x * x; // d/dx of s1 x^3
        CHECK(std::abs(fd - analytic) <= 1e-3 * delta * std::max(1.0, analytic));
    }
}

TEST_CASE("polynomial shapes reproduce the named profiles") {
    auto linear_poly = ShapeFunction::polynomial({0.0, 1.0}); // h' = x
    auto named_linear = ShapeFunction::linear();
    for (double x = -3.0; x <= 3.0; x += 0.5) {
        CHECK(linear_poly.value(x) == doctest::Approx(named_linear.value(x)));
        CHECK(linear_poly.derivative(x) ==
              doctest::Approx(named_linear.derivative(x)));
    }
    CHECK(linear_poly.label() == "custom-polynomial");
    CHECK_THROWS_AS(ShapeFunction::polynomial({}), InvalidInputError);
}

TEST_CASE("periodic orbit carries energy r^2/2 and the circle points") {
    PeriodicOrbit orbit(1.5);
    CHECK(orbit.energy() == doctest::Approx(1.125));
    const Vec2 top = orbit.point(0.0);
    CHECK(top.x == doctest::Approx(0.0));
    CHECK(top.y == doctest::Approx(1.5));
    CHECK_THROWS_AS(PeriodicOrbit(0.0), InvalidInputError);
    CHECK_THROWS_AS(PeriodicOrbit(-1.0), InvalidInputError);
}
