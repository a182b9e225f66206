#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "annulus/analysis.hpp"

using namespace annulus;

namespace {

constexpr double kPi = std::numbers::pi;

PerturbedSystem example_system() {
    return PerturbedSystem(ZonePartition({1.0, 2.0}, {1.0, 2.0, 3.0}),
                           ShapeFunction::linear());
}

} // namespace

TEST_CASE("melnikov sweep populates both routes on the example grid") {
    auto curve = sweep_melnikov(example_system(), {0.5, 1.5, 2.5});
    REQUIRE(curve.samples.size() == 3);
    const double expected_m2[] = {0.25 * kPi, 2.25 * kPi, 6.25 * kPi};
    for (std::size_t i = 0; i < 3; ++i) {
        const auto& s = curve.samples[i];
        CHECK_FALSE(s.failed);
        CHECK(std::abs(s.m1_closed) <= 1e-12);
        CHECK(std::abs(s.m1_quad) <= 1e-10);
        CHECK(s.m2_closed == doctest::Approx(expected_m2[i]).epsilon(1e-14));
        CHECK(s.m2_quad == doctest::Approx(expected_m2[i]).epsilon(1e-9));
        CHECK_FALSE(s.grazing);
    }
}

TEST_CASE("second-order values are shape independent") {
    auto cubic = PerturbedSystem(ZonePartition({1.0, 2.0}, {1.0, 2.0, 3.0}),
                                 ShapeFunction::cubic());
    auto curve = sweep_melnikov(cubic, {0.5, 1.5, 2.5});
    const double expected_m2[] = {0.25 * kPi, 2.25 * kPi, 6.25 * kPi};
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(std::abs(curve.samples[i].m1_quad) <= 1e-10);
        CHECK(curve.samples[i].m2_quad ==
              doctest::Approx(expected_m2[i]).epsilon(1e-9));
    }
}

TEST_CASE("grid points on a breakpoint are nudged and flagged") {
    auto curve = sweep_melnikov(example_system(), {1.0});
    REQUIRE(curve.samples.size() == 1);
    CHECK(curve.samples[0].grazing);
    CHECK(curve.samples[0].r > 1.0);
    CHECK(curve.samples[0].r == doctest::Approx(1.0 + 10.0 * 1e-9));
    CHECK_FALSE(curve.samples[0].failed);
}

TEST_CASE("sweep runs identically across worker counts") {
    std::vector<double> grid;
    for (int i = 0; i < 24; ++i) grid.push_back(0.3 + 0.17 * i);
    auto sequential = sweep_melnikov(example_system(), grid, 1e-10, 1);
    auto threaded = sweep_melnikov(example_system(), grid, 1e-10, 4);
    REQUIRE(sequential.samples.size() == threaded.samples.size());
    for (std::size_t i = 0; i < sequential.samples.size(); ++i) {
        CHECK(sequential.samples[i].r == threaded.samples[i].r);
        CHECK(sequential.samples[i].m1_quad == threaded.samples[i].m1_quad);
        CHECK(sequential.samples[i].m2_quad == threaded.samples[i].m2_quad);
    }
}

TEST_CASE("expansion fit recovers the second-order coefficient") {
    auto fit = fit_expansion(example_system(), 1.5,
                             {0.02, 0.01, 0.005, 0.0025});
    const double target = 2.25 * kPi;
    CHECK(std::abs(fit.c1) <= 1e-4);
    CHECK(std::abs(fit.c2 - target) <= 0.02 * target);
    CHECK(fit.m2_target == doctest::Approx(target));
    CHECK(fit.residual_norm < 0.1);
    REQUIRE(fit.records.size() == 4);
}

TEST_CASE("halving the eps grid sharpens the fit") {
    auto system = example_system();
    const double target = 2.25 * kPi;
    auto coarse = fit_expansion(system, 1.5, {0.02, 0.01, 0.005, 0.0025});
    auto fine = fit_expansion(system, 1.5, {0.01, 0.005, 0.0025, 0.00125});
    const double coarse_err = std::abs(coarse.c2 - target);
    const double fine_err = std::abs(fine.c2 - target);
    CHECK(fine_err <= 0.75 * coarse_err);
}

TEST_CASE("the eps * y term alone still produces pi r^2") {
    // All slopes zero and h' == 0: the perturbation reduces to eps * y,
    // whose energy input over one loop is eps^2 * integral of y^2.
    auto quiet = PerturbedSystem(
        ZonePartition({1.0, 2.0}, {0.0, 0.0, 0.0}, false),
        ShapeFunction::polynomial({0.0}));
    auto fit = fit_expansion(quiet, 1.5, {0.02, 0.01, 0.005, 0.0025});
    const double target = 2.25 * kPi;
    CHECK(std::abs(fit.c2 - target) <= 0.02 * target);
}

TEST_CASE("fit validation rejects bad eps grids") {
    auto system = example_system();
    CHECK_THROWS_AS(fit_expansion(system, 1.5, {0.02, 0.01, 0.005}),
                    InvalidInputError);
    CHECK_THROWS_AS(
        fit_expansion(system, 1.5, {0.2, 0.1, 0.05, 0.025}),
        InvalidInputError); // too large
    CHECK_THROWS_AS(
        fit_expansion(system, 1.5, {0.0025, 0.005, 0.01, 0.02}),
        InvalidInputError); // increasing
    CHECK_THROWS_AS(
        fit_expansion(system, 1.5, {0.02, 0.02, 0.01, 0.005}),
        InvalidInputError); // not strictly decreasing
}

TEST_CASE("a positive function yields no roots") {
    auto report = find_roots([](double r) { return kPi * r * r; }, 0.25, 4.0);
    CHECK(report.roots.empty());
    CHECK(report.predicted_limit_cycles == 0);
    REQUIRE_FALSE(report.notes.empty());
    CHECK(report.notes.front() == "no sign change detected");
}

TEST_CASE("the classical first-order function has a simple root at r = 2") {
    auto f = [](double r) { return kPi * r * r * (1.0 - 0.25 * r * r); };
    auto report = find_roots(f, 0.5, 3.0, {.grid_count = 128, .refine_tol = 1e-9});
    REQUIRE(report.roots.size() == 1);
    const auto& root = report.roots.front();
    CHECK(std::abs(root.location - 2.0) <= 1e-8);
    CHECK(root.kind == Root::Kind::Simple);
    CHECK(root.derivative == doctest::Approx(-4.0 * kPi).epsilon(0.01));
    CHECK(report.predicted_limit_cycles == 1);
}

TEST_CASE("a synthetic quadratic yields both simple roots") {
    auto report = find_roots([](double r) { return (r - 1.0) * (r - 2.0); },
                             0.1, 3.1);
    REQUIRE(report.roots.size() == 2);
    CHECK(report.roots[0].location == doctest::Approx(1.0).epsilon(1e-7));
    CHECK(report.roots[1].location == doctest::Approx(2.0).epsilon(1e-7));
    CHECK(report.roots[0].kind == Root::Kind::Simple);
    CHECK(report.roots[1].kind == Root::Kind::Simple);
    CHECK(report.predicted_limit_cycles == 2);
}

TEST_CASE("near-tangent minima are reported as suspected even roots") {
    auto f = [](double r) {
        const double u = r - 1.5;
        return u * u + 1e-9;
    };
    auto report = find_roots(f, 0.5, 2.5);
    REQUIRE(report.roots.size() == 1);
    CHECK(report.roots.front().kind == Root::Kind::SuspectedEven);
    CHECK(report.roots.front().location == doctest::Approx(1.5).epsilon(1e-2));
    CHECK(report.predicted_limit_cycles == 0);
    bool noted = false;
    for (const auto& note : report.notes) {
        if (note.find("suspected even root") != std::string::npos) noted = true;
    }
    CHECK(noted);
}

TEST_CASE("root search validates its inputs") {
    CHECK_THROWS_AS(find_roots([](double) { return 1.0; }, 2.0, 1.0),
                    InvalidInputError);
    CHECK_THROWS_AS(
        find_roots([](double) { return std::nan(""); }, 0.0, 1.0),
        InvalidInputError);
    CHECK_THROWS_AS(find_roots_sampled({{0.0, 1.0}}), InvalidInputError);
}

TEST_CASE("sampled-only reports bracket sign changes without refinement") {
    std::vector<std::pair<double, double>> samples;
    for (int i = 0; i <= 20; ++i) {
        const double x = 0.1 * i;
        samples.emplace_back(x, x - 1.05);
    }
    auto report = find_roots_sampled(samples);
    REQUIRE(report.roots.size() == 1);
    CHECK(report.roots[0].location == doctest::Approx(1.05).epsilon(1e-9));
    CHECK(report.roots[0].bracket_lo == doctest::Approx(1.0));
    CHECK(report.roots[0].bracket_hi == doctest::Approx(1.1));
}

TEST_CASE("the evidence report supports the no-cycle conjecture") {
    ReportOptions opts;
    opts.r_min = 0.5;
    opts.r_max = 3.0;
    opts.melnikov_samples = 16;
    opts.displacement_samples = 6;
    opts.fit_radius = 1.5;
    auto report = conjecture_report(example_system(), {0.005, 0.01, 0.02}, opts);

    CHECK(report.verdict.find("consistent with Conjecture") !=
          std::string::npos);
    REQUIRE(report.melnikov.has_value());
    CHECK(report.melnikov->max_abs_m1_quad <= 1e-9);
    CHECK(report.melnikov->min_m2_quad > 0.0);
    CHECK(report.melnikov->m2_roots.roots.empty());
    REQUIRE(report.displacement.has_value());
    CHECK(report.displacement->all_positive);
    CHECK(report.displacement->d_roots.predicted_limit_cycles == 0);
    REQUIRE(report.fit.has_value());
    CHECK(std::abs(report.fit->c2 - report.fit->m2_target) <=
          0.02 * report.fit->m2_target);
    CHECK(report.failures.empty());
    REQUIRE_FALSE(report.caveats.empty());
    CHECK_FALSE(report.to_text().empty());
}

TEST_CASE("an empty eps list leaves Melnikov-only evidence") {
    ReportOptions opts;
    opts.r_min = 0.5;
    opts.r_max = 2.0;
    opts.melnikov_samples = 8;
    auto report = conjecture_report(example_system(), {}, opts);
    CHECK(report.melnikov.has_value());
    CHECK_FALSE(report.displacement.has_value());
    CHECK_FALSE(report.fit.has_value());
}

TEST_CASE("the same reporting path flags the classical limit cycle") {
    ReportOptions opts;
    opts.r_min = 0.5;
    opts.r_max = 3.0;
    auto report = harness_report(van_der_pol_harness(), "self-excited harness",
                                 opts);
    CHECK(report.verdict.find("limit cycle predicted near r = 2") !=
          std::string::npos);
    REQUIRE(report.harness.has_value());
    CHECK(report.harness->m1_roots.predicted_limit_cycles == 1);
}
