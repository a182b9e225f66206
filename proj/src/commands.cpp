#include "annulus/commands.hpp"

#include <cmath>
#include <functional>
#include <iostream>

#include <json.hpp>

#include "annulus/csv.hpp"

namespace annulus {

using nlohmann::json;

namespace {

int run_guarded(const std::function<void()>& body) {
    try {
        body();
        return 0;
    } catch (const ConfigError& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 2;
    } catch (const InvalidInputError& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 2;
    } catch (const NumericalFailureError& err) {
        std::cerr << "numerical failure: " << err.what()
                  << " (best estimate " << err.best_estimate
                  << ", achieved error " << err.achieved_error << ")\n";
        return 3;
    } catch (const Error& err) {
        std::cerr << "numerical failure: " << err.what() << "\n";
        return 3;
    }
}

const FamilySystemSpec& require_family(const RunConfig& config,
                                       const char* command) {
    if (!config.is_family()) {
        throw ConfigError(std::string("command `") + command +
                          "` requires a `system` block, not a harness");
    }
    return std::get<FamilySystemSpec>(config.system);
}

void ensure_out_dir(const RunConfig& config) {
    std::error_code ec;
    std::filesystem::create_directories(config.out_dir, ec);
    if (ec) {
        throw ConfigError("config field `out`: cannot create directory " +
                          config.out_dir.string());
    }
}

void write_melnikov_csv(const std::filesystem::path& path,
                        const MelnikovCurve& curve) {
    CsvWriter csv(path, "r,m1_closed,m1_quad,m2_closed,m2_quad,grazing");
    for (const auto& s : curve.samples) {
        csv.row({csv_number(s.r), csv_number(s.m1_closed),
                 csv_number(s.m1_quad), csv_number(s.m2_closed),
                 csv_number(s.m2_quad), s.grazing ? "1" : "0"});
    }
}

void write_displacement_csv(const std::filesystem::path& path,
                            const std::vector<DisplacementRecord>& records) {
    CsvWriter csv(path, "r,h,epsilon,P,d");
    for (const auto& rec : records) {
        csv.row({csv_number(rec.r), csv_number(rec.h), csv_number(rec.eps),
                 csv_number(rec.return_energy), csv_number(rec.d)});
    }
}

json root_report_json(const RootReport& report) {
    json roots = json::array();
    for (const auto& root : report.roots) {
        const char* kind = root.kind == Root::Kind::Simple ? "simple"
                           : root.kind == Root::Kind::Degenerate
                               ? "degenerate"
                               : "suspected_even";
        roots.push_back({{"location", root.location},
                         {"bracket_lo", root.bracket_lo},
                         {"bracket_hi", root.bracket_hi},
                         {"derivative", root.derivative},
                         {"kind", kind}});
    }
    return {{"r_min", report.r_min},
            {"r_max", report.r_max},
            {"function", report.function_label},
            {"roots", roots},
            {"predicted_limit_cycles", report.predicted_limit_cycles},
            {"notes", report.notes}};
}

json report_json(const AnalysisReport& report, const RunConfig& config) {
    json j;
    j["system"] = report.system_label;
    j["verdict"] = report.verdict;
    j["seed"] = config.seed;
    if (report.melnikov) {
        const auto& m = *report.melnikov;
        j["melnikov"] = {{"r_min", m.r_min},
                         {"r_max", m.r_max},
                         {"samples", m.sample_count},
                         {"max_abs_m1_quad", m.max_abs_m1_quad},
                         {"max_abs_m1_closed", m.max_abs_m1_closed},
                         {"min_m2_quad", m.min_m2_quad},
                         {"min_m2_closed", m.min_m2_closed},
                         {"m2_roots", root_report_json(m.m2_roots)}};
    }
    if (report.displacement) {
        const auto& d = *report.displacement;
        json records = json::array();
        for (const auto& rec : d.records) {
            records.push_back({{"r", rec.r},
                               {"h", rec.h},
                               {"epsilon", rec.eps},
                               {"P", rec.return_energy},
                               {"d", rec.d}});
        }
        j["displacement"] = {{"min_d", d.min_d},
                             {"all_positive", d.all_positive},
                             {"root_scan_epsilon", d.root_scan_eps},
                             {"roots", root_report_json(d.d_roots)},
                             {"records", records}};
    }
    if (report.fit) {
        const auto& f = *report.fit;
        j["fit"] = {{"r", f.r},
                    {"eps_grid", f.eps_grid},
                    {"c1", f.c1},
                    {"c2", f.c2},
                    {"residual_norm", f.residual_norm},
                    {"m1_target", f.m1_target},
                    {"m2_target", f.m2_target}};
    }
    if (report.harness) {
        j["harness"] = {{"r_min", report.harness->r_min},
                        {"r_max", report.harness->r_max},
                        {"m1_roots", root_report_json(report.harness->m1_roots)}};
    }
    j["caveats"] = report.caveats;
    j["failures"] = report.failures;
    return j;
}

} // namespace

int cmd_melnikov(const RunConfig& config) {
    return run_guarded([&] {
        const auto& spec = require_family(config, "melnikov");
        ensure_out_dir(config);
        const PerturbedSystem system = spec.build();
        auto curve = sweep_melnikov(system, config.r_grid.values(),
                                    config.quad_tol, config.jobs);
        write_melnikov_csv(config.out_dir / "melnikov.csv", curve);

        double max_m1 = 0.0, min_m2 = 0.0;
        bool first = true;
        int failures = 0;
        for (const auto& s : curve.samples) {
            if (s.failed) {
                ++failures;
                continue;
            }
            max_m1 = std::max({max_m1, std::abs(s.m1_quad), std::abs(s.m1_closed)});
            min_m2 = first ? s.m2_quad : std::min(min_m2, s.m2_quad);
            first = false;
        }
        std::cout << "melnikov sweep: " << curve.samples.size() << " samples, "
                  << "max |M1| = " << max_m1 << ", min M2 = " << min_m2 << "\n";
        if (failures > 0) {
            throw NumericalFailureError(
                std::to_string(failures) + " samples failed", max_m1, 0.0);
        }
    });
}

int cmd_displacement(const RunConfig& config) {
    return run_guarded([&] {
        const auto& spec = require_family(config, "displacement");
        ensure_out_dir(config);
        const PerturbedSystem system = spec.build();
        std::vector<DisplacementRecord> records;
        for (double eps : config.epsilons) {
            for (double r : config.r_grid.values()) {
                records.push_back(
                    displacement(system, r, eps, config.integration));
            }
        }
        write_displacement_csv(config.out_dir / "displacement.csv", records);
        double min_d = records.empty() ? 0.0 : records.front().d;
        for (const auto& rec : records) min_d = std::min(min_d, rec.d);
        std::cout << "displacement sweep: " << records.size()
                  << " records, min d = " << min_d << "\n";
    });
}

int cmd_fit(const RunConfig& config) {
    return run_guarded([&] {
        const auto& spec = require_family(config, "fit");
        ensure_out_dir(config);
        const PerturbedSystem system = spec.build();
        FitOptions opts;
        opts.integration = config.integration;
        auto fit = fit_expansion(system, config.fit_radius,
                                 config.fit_epsilons, opts);
        CsvWriter csv(config.out_dir / "fit.csv", "epsilon,d,model,residual");
        for (const auto& rec : fit.records) {
            const double model = fit.c1 * rec.eps + fit.c2 * rec.eps * rec.eps;
            csv.row({csv_number(rec.eps), csv_number(rec.d),
                     csv_number(model), csv_number(rec.d - model)});
        }
        std::cout << "expansion fit at r = " << fit.r << ": c1 = " << fit.c1
                  << ", c2 = " << fit.c2 << " (second-order target "
                  << fit.m2_target << "), weighted residual "
                  << fit.residual_norm << "\n";
    });
}

int cmd_search(const RunConfig& config) {
    return run_guarded([&] {
        ensure_out_dir(config);
        RootReport report;
        if (config.is_family()) {
            const PerturbedSystem system =
                std::get<FamilySystemSpec>(config.system).build();
            report = find_roots(
                [&](double r) {
                    return displacement(system, r, config.search_epsilon,
                                        config.integration)
                        .d;
                },
                config.r_grid.min, config.r_grid.max,
                {.grid_count = std::max(config.r_grid.count, 16),
                 .refine_tol = 1e-8},
                "measured displacement");
        } else {
            const GeneralHarnessSystem harness =
                std::get<HarnessSpec>(config.system).build();
            report = find_roots(
                [&](double r) { return m1_general(harness, r, config.quad_tol); },
                config.r_grid.min, config.r_grid.max,
                {.grid_count = std::max(config.r_grid.count, 16),
                 .refine_tol = 1e-9},
                "first-order Melnikov function");
        }
        CsvWriter csv(config.out_dir / "roots.csv",
                      "location,bracket_lo,bracket_hi,derivative,kind");
        for (const auto& root : report.roots) {
            const char* kind = root.kind == Root::Kind::Simple ? "simple"
                               : root.kind == Root::Kind::Degenerate
                                   ? "degenerate"
                                   : "suspected_even";
            csv.row({csv_number(root.location), csv_number(root.bracket_lo),
                     csv_number(root.bracket_hi), csv_number(root.derivative),
                     kind});
        }
        std::cout << "root search (" << report.function_label << "): "
                  << report.roots.size() << " candidates, "
                  << report.predicted_limit_cycles
                  << " predicted limit cycles\n";
        for (const auto& note : report.notes) {
            std::cout << "  note: " << note << "\n";
        }
    });
}

int cmd_simulate(const RunConfig& config) {
    return run_guarded([&] {
        const auto& spec = require_family(config, "simulate");
        ensure_out_dir(config);
        const PerturbedSystem system = spec.build();
        IntegrationOptions opts = config.integration;
        opts.output_step = config.simulate.output_step;
        auto traj = simulate(system, {config.simulate.x0, config.simulate.y0},
                             config.simulate.epsilon, config.simulate.t_max,
                             opts);
        {
            CsvWriter csv(config.out_dir / "trajectory.csv", "t,x,y,zone");
            for (std::size_t i = 0; i < traj.t.size(); ++i) {
                csv.row({csv_number(traj.t[i]), csv_number(traj.state[i].x),
                         csv_number(traj.state[i].y),
                         std::to_string(traj.zone[i])});
            }
        }
        {
            CsvWriter csv(config.out_dir / "events.csv",
                          "t,breakpoint_index,direction");
            for (const auto& ev : traj.events) {
                csv.row({csv_number(ev.t), std::to_string(ev.breakpoint_index),
                         std::to_string(ev.direction)});
            }
        }
        std::cout << "simulate: " << traj.t.size() << " samples, "
                  << traj.events.size() << " events, "
                  << traj.stats.steps_accepted << " steps\n";
    });
}

int cmd_report(const RunConfig& config) {
    return run_guarded([&] {
        ensure_out_dir(config);
        ReportOptions opts;
        opts.r_min = config.r_grid.min;
        opts.r_max = config.r_grid.max;
        opts.quad_tol = config.quad_tol;
        opts.integration = config.integration;
        opts.jobs = config.jobs;
        opts.fit_radius = config.fit_radius;
        opts.fit_eps = config.fit_epsilons;

        AnalysisReport report;
        if (config.is_family()) {
            const PerturbedSystem system =
                std::get<FamilySystemSpec>(config.system).build();
            report = conjecture_report(system, config.epsilons, opts);
            // Evidence tables alongside the report.
            auto curve =
                sweep_melnikov(system, config.r_grid.values(), config.quad_tol,
                               config.jobs);
            write_melnikov_csv(config.out_dir / "melnikov.csv", curve);
            if (report.displacement) {
                write_displacement_csv(config.out_dir / "displacement.csv",
                                       report.displacement->records);
            }
        } else {
            const auto& spec = std::get<HarnessSpec>(config.system);
            report = harness_report(spec.build(), spec.label(), opts);
        }

        {
            std::ofstream out(config.out_dir / "report.json");
            out << report_json(report, config).dump(2) << "\n";
        }
        {
            std::ofstream out(config.out_dir / "report.txt");
            out << report.to_text();
        }
        std::cout << report.to_text();
    });
}

} // namespace annulus
