#include "annulus/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>
#include <thread>

namespace annulus {

namespace {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

/// Run fn(i) for i in [0, count) on up to `jobs` threads, preserving
/// index order of results by construction.
void parallel_for(int jobs, int count, const std::function<void(int)>& fn) {
    jobs = std::min(std::max(jobs, 1), count > 0 ? count : 1);
    if (jobs <= 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::thread> workers;
    workers.reserve(static_cast<std::size_t>(jobs));
    for (int w = 0; w < jobs; ++w) {
        workers.emplace_back([w, jobs, count, &fn] {
            for (int i = w; i < count; i += jobs) fn(i);
        });
    }
    for (auto& worker : workers) worker.join();
}

} // namespace

ExpansionFit fit_expansion(const PerturbedSystem& system, double r,
                           std::vector<double> eps_grid,
                           const FitOptions& opts) {
    if (eps_grid.size() < 4) {
        throw InvalidInputError("eps grid: need at least 4 values");
    }
    for (double e : eps_grid) {
        if (!std::isfinite(e) || !(e > 0.0)) {
            throw InvalidInputError("eps grid: values must be positive");
        }
        if (e > opts.max_eps) {
            throw InvalidInputError("eps grid: values must stay small (<= " +
                                    format_double(opts.max_eps) + ")");
        }
    }
    if (!std::is_sorted(eps_grid.rbegin(), eps_grid.rend(),
                        std::less_equal<double>())) {
        throw InvalidInputError("eps grid: must be strictly decreasing");
    }

    ExpansionFit fit;
    fit.r = r;
    fit.eps_grid = eps_grid;
    fit.m1_target = 0.0;
    fit.m2_target = m2_closed_form(r);

    for (double e : eps_grid) {
        fit.records.push_back(displacement(system, r, e, opts.integration));
    }

    // Weighted normal equations for d ~ c1 eps + c2 eps^2. The weights
    // emphasize the smallest eps (w = eps^-8) so the coefficients are read
    // from the asymptotic regime; with uniform weights the cubic remainder
    // at the largest eps leaks into c1.
    long double s11 = 0, s12 = 0, s22 = 0, b1 = 0, b2 = 0;
    for (const auto& rec : fit.records) {
        const long double e = rec.eps;
        const long double e4 = e * e * e * e;
        const long double w = 1.0L / (e4 * e4);
        s11 += w * e * e;
        s12 += w * e * e * e;
        s22 += w * e * e * e * e;
        b1 += w * e * rec.d;
        b2 += w * e * e * rec.d;
    }
    const long double det = s11 * s22 - s12 * s12;
    if (det == 0.0L) {
        throw NumericalFailureError("expansion fit: singular normal equations",
                                    0.0, 0.0);
    }
    fit.c1 = static_cast<double>((b1 * s22 - b2 * s12) / det);
    fit.c2 = static_cast<double>((s11 * b2 - s12 * b1) / det);

    long double resid_sq = 0;
    for (const auto& rec : fit.records) {
        const long double model = fit.c1 * rec.eps + fit.c2 * rec.eps * rec.eps;
        const long double weighted = (rec.d - model) / (rec.eps * rec.eps);
        resid_sq += weighted * weighted;
    }
    fit.residual_norm = static_cast<double>(
        std::sqrt(static_cast<double>(resid_sq) /
                  static_cast<double>(fit.records.size())));
    return fit;
}

namespace {

RootReport classify_roots(const std::function<double(double)>& f,
                          std::vector<std::pair<double, double>> samples,
                          bool can_refine, const FindRootOptions& opts,
                          const std::string& label) {
    RootReport report;
    report.function_label = label;
    if (samples.size() < 2) {
        throw InvalidInputError("find_roots: need at least two samples");
    }
    report.r_min = samples.front().first;
    report.r_max = samples.back().first;

    double max_abs = 0.0;
    for (const auto& [x, v] : samples) {
        if (!std::isfinite(x) || !std::isfinite(v)) {
            throw InvalidInputError("find_roots: non-finite sample");
        }
        max_abs = std::max(max_abs, std::abs(v));
    }
    if (max_abs == 0.0) {
        report.notes.push_back("function vanishes at every sample");
        return report;
    }
    const double span = report.r_max - report.r_min;
    const double derivative_floor =
        opts.derivative_floor_fraction * max_abs / span;
    const double even_floor = opts.even_floor_fraction * max_abs;

    bool any_sign_change = false;
    auto classify = [&](Root root, double fallback_slope) {
        const double delta =
            std::max(1e-6 * std::max(1.0, std::abs(root.location)),
                     opts.refine_tol * 100.0);
        root.derivative =
            can_refine
                ? (f(root.location + delta) - f(root.location - delta)) /
                      (2.0 * delta)
                : fallback_slope;
        root.kind = std::abs(root.derivative) > derivative_floor
                        ? Root::Kind::Simple
                        : Root::Kind::Degenerate;
        report.roots.push_back(root);
    };

    // Samples that are exact zeros are roots as they stand.
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (samples[i].second != 0.0) continue;
        any_sign_change = true;
        Root root;
        root.location = samples[i].first;
        root.bracket_lo = i > 0 ? samples[i - 1].first : samples[i].first;
        root.bracket_hi =
            i + 1 < samples.size() ? samples[i + 1].first : samples[i].first;
        const double slope =
            root.bracket_hi > root.bracket_lo
                ? (samples[std::min(i + 1, samples.size() - 1)].second -
                   samples[i > 0 ? i - 1 : 0].second) /
                      (root.bracket_hi - root.bracket_lo)
                : 0.0;
        classify(root, slope);
    }

    for (std::size_t i = 0; i + 1 < samples.size(); ++i) {
        auto [xa, va] = samples[i];
        auto [xb, vb] = samples[i + 1];
        if (va == 0.0 || vb == 0.0 || (va < 0.0) == (vb < 0.0)) continue;
        any_sign_change = true;

        Root root;
        root.bracket_lo = xa;
        root.bracket_hi = xb;
        if (can_refine) {
            double lo = xa, hi = xb, flo = va;
            while (hi - lo > opts.refine_tol) {
                const double mid = 0.5 * (lo + hi);
                if (mid <= lo || mid >= hi) break;
                const double fm = f(mid);
                if (fm == 0.0) {
                    lo = hi = mid;
                    break;
                }
                if ((flo < 0.0) == (fm < 0.0)) {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            root.location = 0.5 * (lo + hi);
        } else {
            // Secant estimate inside the bracket.
            root.location = xa - va * (xb - xa) / (vb - va);
        }
        classify(root, (vb - va) / (xb - xa));
    }

    // Interior local minima of |f| that dip below the floor without a sign
    // change suggest an even-multiplicity root; reported, never counted.
    for (std::size_t i = 1; i + 1 < samples.size(); ++i) {
        const double prev = std::abs(samples[i - 1].second);
        const double here = std::abs(samples[i].second);
        const double next = std::abs(samples[i + 1].second);
        // <= on the right so a plateau minimum fires once, at its left edge
        if (here < prev && here <= next && here < even_floor &&
            samples[i].second != 0.0) {
            const bool adjacent_change =
                (samples[i - 1].second < 0.0) != (samples[i].second < 0.0) ||
                (samples[i].second < 0.0) != (samples[i + 1].second < 0.0);
            if (adjacent_change) continue;
            Root root;
            root.location = samples[i].first;
            root.bracket_lo = samples[i - 1].first;
            root.bracket_hi = samples[i + 1].first;
            root.derivative = 0.0;
            root.kind = Root::Kind::SuspectedEven;
            report.roots.push_back(root);
            report.notes.push_back("suspected even root near r = " +
                                   format_double(root.location));
        }
    }

    std::sort(report.roots.begin(), report.roots.end(),
              [](const Root& a, const Root& b) { return a.location < b.location; });
    for (const auto& root : report.roots) {
        if (root.kind == Root::Kind::Simple) ++report.predicted_limit_cycles;
        if (root.kind == Root::Kind::Degenerate) {
            report.notes.push_back("degenerate root near r = " +
                                   format_double(root.location));
        }
    }
    if (!any_sign_change) {
        report.notes.push_back("no sign change detected");
    }
    return report;
}

} // namespace

RootReport find_roots(const std::function<double(double)>& f, double r_min,
                      double r_max, const FindRootOptions& opts,
                      const std::string& label) {
    if (!(r_min < r_max) || !std::isfinite(r_min) || !std::isfinite(r_max)) {
        throw InvalidInputError("find_roots: empty or non-finite interval");
    }
    if (opts.grid_count < 2) {
        throw InvalidInputError("find_roots: grid_count must be >= 2");
    }
    std::vector<std::pair<double, double>> samples;
    samples.reserve(static_cast<std::size_t>(opts.grid_count));
    for (int i = 0; i < opts.grid_count; ++i) {
        const double x =
            r_min + (r_max - r_min) * i / (opts.grid_count - 1);
        samples.emplace_back(x, f(x));
    }
    return classify_roots(f, std::move(samples), true, opts, label);
}

RootReport find_roots_sampled(
    const std::vector<std::pair<double, double>>& samples,
    const FindRootOptions& opts, const std::string& label) {
    return classify_roots(nullptr, samples, false, opts, label);
}

MelnikovCurve sweep_melnikov(const PerturbedSystem& system,
                             std::vector<double> r_grid, double quad_tol,
                             int jobs) {
    if (r_grid.empty()) {
        throw InvalidInputError("r grid: must be non-empty");
    }
    MelnikovCurve curve;
    curve.quadrature_tol = quad_tol;
    curve.samples.resize(r_grid.size());

    parallel_for(jobs, static_cast<int>(r_grid.size()), [&](int i) {
        double r = r_grid[static_cast<std::size_t>(i)];
        MelnikovSample& sample = curve.samples[static_cast<std::size_t>(i)];
        const double tol = grazing_tolerance(r);
        for (double a : system.partition().breakpoints()) {
            if (std::abs(r - a) <= tol) {
                r = a + 10.0 * tol;
                sample.grazing = true;
                break;
            }
        }
        sample.r = r;
        try {
            sample.m1_closed =
                m1_closed_form(system.partition(), system.shape(), r).total;
            sample.m1_quad = m1_quadrature(system, r, quad_tol);
            sample.m2_closed = m2_closed_form(r);
            sample.m2_quad = m2_quadrature(system, r, quad_tol);
        } catch (const Error& err) {
            sample.failed = true;
            sample.note = err.what();
        }
    });
    return curve;
}

namespace {

std::vector<double> linear_grid(double lo, double hi, int count) {
    std::vector<double> grid;
    grid.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        grid.push_back(lo + (hi - lo) * i / (count - 1));
    }
    return grid;
}

const char* kEvenRootCaveat =
    "Even-multiplicity root candidates cannot be confirmed by sign changes; "
    "any reported ones deserve manual study.";

const char* kSecondOrderCaveat =
    "The second-order line-integral formula is established for continuous "
    "perturbations; for the piecewise family it is applied as a heuristic "
    "and cross-checked against the measured displacement expansion.";

} // namespace

AnalysisReport conjecture_report(const PerturbedSystem& system,
                                 const std::vector<double>& eps_list,
                                 const ReportOptions& opts) {
    AnalysisReport report;
    report.system_label = "piecewise system (" + system.shape().label() + ")";
    report.caveats.push_back(kSecondOrderCaveat);

    // (i), (ii): Melnikov-level evidence.
    try {
        auto grid = linear_grid(opts.r_min, opts.r_max, opts.melnikov_samples);
        auto curve = sweep_melnikov(system, grid, opts.quad_tol, opts.jobs);
        AnalysisReport::MelnikovEvidence ev;
        ev.r_min = opts.r_min;
        ev.r_max = opts.r_max;
        ev.sample_count = static_cast<int>(curve.samples.size());
        bool first = true;
        for (const auto& s : curve.samples) {
            if (s.failed) {
                report.failures.push_back("melnikov sample at r = " +
                                          format_double(s.r) + ": " + s.note);
                continue;
            }
            ev.max_abs_m1_quad =
                std::max(ev.max_abs_m1_quad, std::abs(s.m1_quad));
            ev.max_abs_m1_closed =
                std::max(ev.max_abs_m1_closed, std::abs(s.m1_closed));
            if (first) {
                ev.min_m2_quad = s.m2_quad;
                ev.min_m2_closed = s.m2_closed;
                first = false;
            } else {
                ev.min_m2_quad = std::min(ev.min_m2_quad, s.m2_quad);
                ev.min_m2_closed = std::min(ev.min_m2_closed, s.m2_closed);
            }
        }
        ev.m2_roots = find_roots([](double r) { return m2_closed_form(r); },
                                 opts.r_min, opts.r_max, {},
                                 "second-order Melnikov function");
        report.melnikov = std::move(ev);
    } catch (const Error& err) {
        report.failures.push_back(std::string("melnikov sweep failed: ") +
                                  err.what());
    }

    // (iii): measured displacement positivity.
    if (!eps_list.empty()) {
        AnalysisReport::DisplacementEvidence ev;
        ev.root_scan_eps = opts.root_scan_eps;
        bool first = true;
        auto grid =
            linear_grid(opts.r_min, opts.r_max, opts.displacement_samples);
        for (double eps : eps_list) {
            for (double r : grid) {
                try {
                    auto rec = displacement(system, r, eps, opts.integration);
                    if (first || rec.d < ev.min_d) ev.min_d = rec.d;
                    first = false;
                    ev.records.push_back(rec);
                } catch (const Error& err) {
                    report.failures.push_back(
                        "displacement at (r, eps) = (" + format_double(r) +
                        ", " + format_double(eps) + "): " + err.what());
                }
            }
        }
        ev.all_positive = !first && ev.min_d > 0.0;
        try {
            ev.d_roots = find_roots(
                [&](double r) {
                    return displacement(system, r, opts.root_scan_eps,
                                        opts.integration)
                        .d;
                },
                opts.r_min, opts.r_max,
                {.grid_count = 64, .refine_tol = 1e-8},
                "measured displacement at eps = " +
                    format_double(opts.root_scan_eps));
        } catch (const Error& err) {
            report.failures.push_back(std::string("displacement root scan: ") +
                                      err.what());
        }
        report.displacement = std::move(ev);
    }

    // (iv): expansion fit against the second-order prediction.
    if (!eps_list.empty()) {
        const double fit_r =
            opts.fit_radius.value_or(0.5 * (opts.r_min + opts.r_max));
        try {
            FitOptions fopts;
            fopts.integration = opts.integration;
            report.fit = fit_expansion(system, fit_r, opts.fit_eps, fopts);
        } catch (const Error& err) {
            report.failures.push_back(std::string("expansion fit: ") +
                                      err.what());
        }
    }

    // Verdict.
    const bool m1_vanishes =
        report.melnikov && report.melnikov->max_abs_m1_quad <= 10.0 * opts.quad_tol;
    const bool m2_positive = report.melnikov && report.melnikov->min_m2_quad > 0.0 &&
                             report.melnikov->m2_roots.roots.empty();
    const bool d_positive = !report.displacement || report.displacement->all_positive;
    const bool no_d_roots =
        !report.displacement ||
        report.displacement->d_roots.predicted_limit_cycles == 0;
    if (m1_vanishes && m2_positive && d_positive && no_d_roots) {
        report.verdict =
            "no limit cycle detected; evidence consistent with Conjecture";
    } else {
        report.verdict = "evidence inconsistent with Conjecture; see notes";
    }
    if (report.displacement) {
        for (const auto& root : report.displacement->d_roots.roots) {
            if (root.kind == Root::Kind::SuspectedEven) {
                report.caveats.push_back(kEvenRootCaveat);
                break;
            }
        }
    }
    return report;
}

AnalysisReport harness_report(const GeneralHarnessSystem& harness,
                              const std::string& label,
                              const ReportOptions& opts) {
    AnalysisReport report;
    report.system_label = label;

    AnalysisReport::HarnessEvidence ev;
    ev.r_min = opts.r_min;
    ev.r_max = opts.r_max;
    ev.m1_roots = find_roots(
        [&](double r) { return m1_general(harness, r, opts.quad_tol); },
        opts.r_min, opts.r_max, {.grid_count = 128, .refine_tol = 1e-9},
        "first-order Melnikov function");
    report.harness = std::move(ev);

    const auto& roots = report.harness->m1_roots;
    if (roots.predicted_limit_cycles > 0) {
        std::string locations;
        for (const auto& root : roots.roots) {
            if (root.kind != Root::Kind::Simple) continue;
            if (!locations.empty()) locations += ", ";
            locations += format_double(root.location);
        }
        report.verdict = "limit cycle predicted near r = " + locations;
    } else {
        report.verdict = "no limit cycle predicted on the scanned interval";
    }
    return report;
}

std::string AnalysisReport::to_text() const {
    std::ostringstream out;
    out << "analysis report: " << system_label << "\n";
    out << "verdict: " << verdict << "\n";
    if (melnikov) {
        out << "\nMelnikov evidence over r in [" << melnikov->r_min << ", "
            << melnikov->r_max << "] (" << melnikov->sample_count
            << " samples)\n";
        out << "  max |M1| (quadrature):  " << melnikov->max_abs_m1_quad << "\n";
        out << "  max |M1| (closed form): " << melnikov->max_abs_m1_closed
            << "\n";
        out << "  min M2 (quadrature):    " << melnikov->min_m2_quad << "\n";
        out << "  min M2 (closed form):   " << melnikov->min_m2_closed << "\n";
        out << "  M2 roots: " << melnikov->m2_roots.roots.size()
            << " (predicted cycles from M2: "
            << melnikov->m2_roots.predicted_limit_cycles << ")\n";
    }
    if (displacement) {
        out << "\ndisplacement evidence (" << displacement->records.size()
            << " measurements)\n";
        out << "  min d: " << displacement->min_d
            << (displacement->all_positive ? "  (all positive)"
                                           : "  (NOT all positive)")
            << "\n";
        out << "  root scan at eps = " << displacement->root_scan_eps << ": "
            << displacement->d_roots.predicted_limit_cycles
            << " confirmed roots\n";
        for (const auto& note : displacement->d_roots.notes) {
            out << "    note: " << note << "\n";
        }
    }
    if (fit) {
        out << "\nexpansion fit at r = " << fit->r << "\n";
        out << "  c1 = " << fit->c1 << "  (target " << fit->m1_target << ")\n";
        out << "  c2 = " << fit->c2 << "  (target " << fit->m2_target << ")\n";
        out << "  weighted residual: " << fit->residual_norm << "\n";
    }
    if (harness) {
        out << "\nfirst-order Melnikov roots over r in [" << harness->r_min
            << ", " << harness->r_max << "]\n";
        for (const auto& root : harness->m1_roots.roots) {
            out << "  root near r = " << root.location
                << " (derivative " << root.derivative << ", "
                << (root.kind == Root::Kind::Simple
                        ? "simple"
                        : root.kind == Root::Kind::Degenerate ? "degenerate"
                                                              : "suspected even")
                << ")\n";
        }
        out << "  predicted cycles: "
            << harness->m1_roots.predicted_limit_cycles << "\n";
    }
    for (const auto& caveat : caveats) out << "\ncaveat: " << caveat << "\n";
    for (const auto& failure : failures) out << "failure: " << failure << "\n";
    return out.str();
}

} // namespace annulus
