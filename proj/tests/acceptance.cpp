// Acceptance suite: one check per headline property of the library, each
// printed as a single PASS/FAIL line with its runtime. Returns the number
// of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "annulus/analysis.hpp"
#include "annulus/flow.hpp"
#include "annulus/melnikov.hpp"
#include "annulus/model.hpp"

using namespace annulus;

namespace {

constexpr double kPi = std::numbers::pi;

struct Checker {
    bool ok = true;
    std::ostringstream detail;

    void require(bool condition, const std::string& what) {
        if (!condition && ok) {
            detail << what;
            ok = false;
        }
    }
};

ZonePartition random_partition(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> n_dist(1, 8);
    std::uniform_real_distribution<double> gap(0.15, 0.8);
    std::uniform_real_distribution<double> slope_gap(0.05, 0.7);
    std::uniform_real_distribution<double> slope0(-2.0, 0.0);
    const int n = n_dist(rng);
    std::vector<double> breaks, slopes;
    double a = gap(rng);
    for (int i = 0; i < n; ++i) {
        breaks.push_back(a);
        a += gap(rng);
    }
    double s = slope0(rng);
    for (int i = 0; i <= n; ++i) {
        slopes.push_back(s);
        s += slope_gap(rng);
    }
    return ZonePartition(std::move(breaks), std::move(slopes));
}

double random_radius(std::mt19937_64& rng, const ZonePartition& partition) {
    std::uniform_real_distribution<double> r_dist(
        0.1, 1.3 * partition.breakpoints().back());
    while (true) {
        const double r = r_dist(rng);
        bool clear = true;
        for (double a : partition.breakpoints()) {
            if (std::abs(r - a) < 1e-3) clear = false;
        }
        if (clear) return r;
    }
}

PerturbedSystem example_system() {
    return PerturbedSystem(ZonePartition({1.0, 2.0}, {1.0, 2.0, 3.0}),
                           ShapeFunction::linear());
}

void first_order_protocol(Checker& check, std::mt19937_64& rng,
                          const std::function<ShapeFunction(int)>& make_shape) {
    const double quad_tol = 1e-10;
    for (int trial = 0; trial < 100 && check.ok; ++trial) {
        const auto partition = random_partition(rng);
        const auto shape = make_shape(trial);
        const PerturbedSystem system(partition, shape);
        for (int k = 0; k < 10 && check.ok; ++k) {
            const double r = random_radius(rng, partition);
            const auto arcs = m1_closed_form(partition, shape, r);
            const double scale = std::abs(arcs.rise) + std::abs(arcs.fall) +
                                 std::abs(arcs.closing);
            check.require(
                std::abs(arcs.total) <= 1e-12 * std::max(scale, 1e-30),
                "closed-form total " + std::to_string(arcs.total) +
                    " vs scale " + std::to_string(scale) + " at r = " +
                    std::to_string(r));
            const double quad = m1_quadrature(system, r, quad_tol);
            check.require(std::abs(quad) <= 2e-10,
                          "quadrature " + std::to_string(quad) + " at r = " +
                              std::to_string(r));
        }
    }
}

struct Criterion {
    int id;
    std::string label;
    double budget_seconds;
    std::function<void(Checker&)> body;
};

} // namespace

int main() {
    std::vector<Criterion> criteria;

    criteria.push_back(
        {1, "first-order function vanishes for the linear family", 10.0,
         [](Checker& check) {
             std::mt19937_64 rng(1001);
             first_order_protocol(check, rng,
                                  [](int) { return ShapeFunction::linear(); });
         }});

    criteria.push_back(
        {2, "first-order function vanishes for general shapes", 20.0,
         [](Checker& check) {
             std::mt19937_64 rng(2002);
             std::uniform_real_distribution<double> coef(-1.0, 1.0);
             auto make_shape = [&rng, &coef](int trial) {
                 switch (trial % 3) {
                 case 0:
                     return ShapeFunction::cubic(); // h = x^4/4
                 case 1:
                     // h = x^6/6, i.e. h' = x^5
                     return ShapeFunction::polynomial({0, 0, 0, 0, 0, 1});
                 default: {
                     // random h of degree <= 6: h' of degree <= 5
                     std::vector<double> coefs(6);
                     for (auto& c : coefs) c = coef(rng);
                     return ShapeFunction::polynomial(coefs);
                 }
                 }
             };
             first_order_protocol(check, rng, make_shape);
         }});

    criteria.push_back(
        {3, "second-order function equals pi r^2", 5.0, [](Checker& check) {
             const auto system = example_system();
             for (double r : {0.5, 1.0, 1.5, 2.0, 5.0}) {
                 const double target = kPi * r * r;
                 check.require(m2_closed_form(r) == target,
                               "closed form differs at machine precision at "
                               "r = " + std::to_string(r));
                 const double quad = m2_quadrature(system, r, 1e-10);
                 check.require(std::abs(quad - target) <= 1e-8 * target,
                               "quadrature off target at r = " +
                                   std::to_string(r) + ": " +
                                   std::to_string(quad));
             }
         }});

    criteria.push_back(
        {4, "displacement expansion recovers the quadratic coefficient", 60.0,
         [](Checker& check) {
             const auto fit = fit_expansion(example_system(), 1.5,
                                            {0.02, 0.01, 0.005, 0.0025});
             const double target = 2.25 * kPi;
             check.require(std::abs(fit.c1) <= 1e-4,
                           "c1 = " + std::to_string(fit.c1));
             check.require(std::abs(fit.c2 - target) <= 0.02 * target,
                           "c2 = " + std::to_string(fit.c2) + " vs target " +
                               std::to_string(target));
         }});

    criteria.push_back(
        {5, "measured displacement is positive across the annulus", 120.0,
         [](Checker& check) {
             const auto system = example_system();
             for (double eps : {0.005, 0.01, 0.02}) {
                 for (double r : {0.5, 1.0, 1.5, 2.0, 3.0}) {
                     const double d = displacement(system, r, eps).d;
                     check.require(d > 0.0,
                                   "d(" + std::to_string(r) + ", " +
                                       std::to_string(eps) + ") = " +
                                       std::to_string(d));
                 }
             }
             const auto roots = find_roots(
                 [&system](double r) {
                     return displacement(system, r, 0.01).d;
                 },
                 0.25, 4.0, {.grid_count = 64, .refine_tol = 1e-8},
                 "measured displacement");
             check.require(roots.predicted_limit_cycles == 0,
                           "unexpected displacement roots: " +
                               std::to_string(roots.predicted_limit_cycles));
         }});

    criteria.push_back(
        {6, "the detector finds the classical cycle at r = 2", 10.0,
         [](Checker& check) {
             const auto harness = van_der_pol_harness();
             const auto roots = find_roots(
                 [&harness](double r) { return m1_general(harness, r, 1e-10); },
                 0.5, 3.0, {.grid_count = 128, .refine_tol = 1e-9},
                 "first-order Melnikov function");
             check.require(roots.roots.size() == 1, "expected exactly one root");
             if (!roots.roots.empty()) {
                 const auto& root = roots.roots.front();
                 check.require(std::abs(root.location - 2.0) <= 1e-6,
                               "root at " + std::to_string(root.location));
                 check.require(
                     std::abs(root.derivative + 4.0 * kPi) <= 0.05 * 4.0 * kPi,
                     "derivative " + std::to_string(root.derivative));
             }
             const auto report =
                 harness_report(van_der_pol_harness(), "harness",
                                {.r_min = 0.5, .r_max = 3.0});
             check.require(report.harness &&
                               report.harness->m1_roots.predicted_limit_cycles ==
                                   1,
                           "report did not predict exactly one cycle");
         }});

    criteria.push_back(
        {7, "integrator invariants: drift, events, reversibility", 30.0,
         [](Checker& check) {
             const auto system = example_system();
             for (double r : {0.5, 1.5, 2.7}) {
                 const auto result = integrate_to_section(system, r, 0.0);
                 const double drift =
                     std::abs(0.5 * result.section.y * result.section.y -
                              0.5 * r * r);
                 check.require(drift <= 1e-10,
                               "energy drift " + std::to_string(drift) +
                                   " at r = " + std::to_string(r));
                 const auto breaks = system.partition().breakpoints();
                 for (const auto& ev : result.trajectory.events) {
                     check.require(
                         std::abs(ev.x -
                                  breaks[static_cast<std::size_t>(
                                      ev.breakpoint_index)]) <= 1e-9,
                         "event off its line at t = " + std::to_string(ev.t));
                 }
                 auto forward = simulate(system, {0.0, r}, 0.0, 2.0 * kPi);
                 IntegrationOptions reversed;
                 reversed.time_direction = -1;
                 auto back = simulate(system, forward.state.back(), 0.0,
                                      2.0 * kPi, reversed);
                 const double err =
                     std::hypot(back.state.back().x, back.state.back().y - r);
                 check.require(err <= 1e-9, "reversal error " +
                                                std::to_string(err) + " at r = " +
                                                std::to_string(r));
             }
         }});

    criteria.push_back(
        {8, "the expansion remainder scales as eps^3", 60.0,
         [](Checker& check) {
             const auto system = example_system();
             const double target = 2.25 * kPi;
             double eps = 0.02;
             double prev =
                 std::abs(displacement(system, 1.5, eps).d - eps * eps * target);
             for (int halving = 0; halving < 3; ++halving) {
                 eps *= 0.5;
                 const double next = std::abs(displacement(system, 1.5, eps).d -
                                              eps * eps * target);
                 const double ratio = prev / next;
                 check.require(ratio >= 4.0 && ratio <= 16.0,
                               "halving ratio " + std::to_string(ratio) +
                                   " at eps = " + std::to_string(eps));
                 prev = next;
             }
         }});

    int failures = 0;
    for (auto& criterion : criteria) {
        Checker check;
        const auto start = std::chrono::steady_clock::now();
        try {
            criterion.body(check);
        } catch (const std::exception& err) {
            check.require(false, std::string("exception: ") + err.what());
        }
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                          start)
                .count();
        if (elapsed > criterion.budget_seconds) {
            check.require(false, "runtime " + std::to_string(elapsed) +
                                     " s over budget " +
                                     std::to_string(criterion.budget_seconds));
            check.ok = false;
        }
        std::printf("[%s] criterion %d: %s (%.2f s)%s%s\n",
                    check.ok ? "PASS" : "FAIL", criterion.id,
                    criterion.label.c_str(), elapsed,
                    check.ok ? "" : " -- ", check.ok ? "" : check.detail.str().c_str());
        if (!check.ok) ++failures;
    }
    return failures;
}
