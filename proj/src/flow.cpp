#include "annulus/flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "annulus/rk.hpp"

namespace annulus {

namespace {

constexpr int kScanSamples = 16;
constexpr long kMaxSteps = 20'000'000;

double grazing_window(double x, double y) {
    return 1e-9 * std::max(1.0, std::hypot(x, y));
}

struct EventCandidate {
    double theta_lo = 0.0;
    double theta_hi = 0.0;
    int kind = 0; // 0 zone crossing, 1 grazing, 2 section return
    int breakpoint_index = -1;
    int direction = 0;
};

/// Event-driven driver for one piecewise trajectory. The zone is frozen
/// between events; trial steps integrate the smooth extension of the
/// current zone's field, and any step containing a boundary crossing is
/// cut at the localized event time.
class ZoneFlow {
public:
    ZoneFlow(const PerturbedSystem& system, double eps,
             const IntegrationOptions& opts, Vec2 start)
        : system_(system), eps_(eps), opts_(opts),
          breaks_(system.partition().breakpoints().begin(),
                  system.partition().breakpoints().end()) {
        control_.rel_tol = opts.rel_tol;
        control_.abs_tol = opts.abs_tol;
        control_.max_step = 0.25;
        state_ = {start.x, start.y};
        zone_ = system.partition().zone_index(start.x);
        escape_radius_ =
            opts.escape_factor * std::max(1e-3, std::hypot(start.x, start.y));
        normalize_zone_at_start(false);
    }

    auto rhs() {
        const double dir = static_cast<double>(opts_.time_direction);
        return [this, dir](double, const rk::State<2>& u, rk::State<2>& du) {
            const Vec2 f = system_.field_in_zone(zone_, {u[0], u[1]}, eps_);
            du[0] = dir * f.x;
            du[1] = dir * f.y;
        };
    }

    /// Run until the section return (watch_section) or until t_stop.
    /// Returns the section return when one was found.
    std::optional<SectionReturn> run(double t_stop, bool watch_section) {
        begin_segment();
        emit_initial_sample();
        double h = rk::initial_step_size<2>(state_, k1_, t_stop - t_, control_);
        while (t_ < t_stop) {
            h = std::min(h, t_stop - t_);
            if (h < 1e-15) break;
            if (trajectory.stats.steps_accepted +
                    trajectory.stats.steps_rejected > kMaxSteps) {
                throw NumericalFailureError("integration exceeded step budget",
                                            t_, h);
            }
            auto trial = rk::dopri5_step<2>(rhs(), t_, state_, k1_, h, control_);
            trajectory.stats.rhs_evaluations += 6;
            if (trial.error > 1.0) {
                ++trajectory.stats.steps_rejected;
                h = rk::next_step_size(h, trial.error, control_);
                continue;
            }
            ++trajectory.stats.steps_accepted;

            auto event = scan_events(trial.dense, watch_section);
            if (event) {
                const auto section = apply_event(*event, trial.dense);
                if (section) return section;
                begin_segment();
                continue;
            }

            emit_dense_samples(trial.dense);
            t_ = trial.dense.t1();
            state_ = trial.y1;
            k1_ = trial.k7;
            record_sample(t_, {state_[0], state_[1]});
            check_escape();
            if (normalize_zone_at_start(true)) {
                begin_segment(); // zone changed, FSAL derivative is stale
            }
            h = std::min(rk::next_step_size(h, trial.error, control_),
                         control_.max_step);
        }
        if (watch_section) {
            throw NoReturnError("no return to the section within the time guard");
        }
        return std::nullopt;
    }

    Trajectory trajectory;

private:
    void begin_segment() {
        rk::State<2> du;
        rhs()(t_, state_, du);
        k1_ = du;
        ++trajectory.stats.rhs_evaluations;
    }

    void emit_initial_sample() {
        if (opts_.output_step > 0.0) {
            trajectory.t.push_back(t_);
            trajectory.state.push_back({state_[0], state_[1]});
            trajectory.zone.push_back(zone_);
            next_sample_ = t_ + opts_.output_step;
        } else {
            record_sample(t_, {state_[0], state_[1]});
        }
    }

    /// A segment may begin exactly on its upper boundary line (launches
    /// from x = a_i, or a step that landed on the line to working
    /// precision). Moving in +x that is already a crossing; resolve it
    /// before integrating so the frozen zone matches the ensuing arc.
    bool normalize_zone_at_start(bool log_event) {
        if (zone_ < static_cast<int>(breaks_.size())) {
            const double a = breaks_[static_cast<std::size_t>(zone_)];
            const double dxdt = opts_.time_direction * state_[1];
            if (state_[0] >= a && dxdt > 0.0) {
                if (log_event) log_zone_event(t_, zone_, +1);
                ++zone_;
                return true;
            }
        }
        return false;
    }

    std::optional<EventCandidate> scan_events(const rk::DenseStep<2>& dense,
                                              bool watch_section) {
        // Sample grid over the step, split further at x-extrema (y roots)
        // so that a double crossing inside one step cannot hide.
        std::array<double, kScanSamples + 1> theta;
        std::array<double, kScanSamples + 1> xs, ys;
        for (int j = 0; j <= kScanSamples; ++j) {
            theta[j] = dense.t0 + dense.h * j / kScanSamples;
            const auto s = dense.eval(theta[j]);
            xs[j] = s[0];
            ys[j] = s[1];
        }

        std::vector<double> grid;
        std::vector<double> extrema;
        grid.reserve(kScanSamples + 4);
        for (int j = 0; j < kScanSamples; ++j) {
            grid.push_back(theta[j]);
            if ((ys[j] < 0.0 && ys[j + 1] > 0.0) ||
                (ys[j] > 0.0 && ys[j + 1] < 0.0)) {
                const double te = bisect(
                    [&dense](double t) { return dense.eval(t)[1]; },
                    theta[j], theta[j + 1], ys[j] > 0.0 ? -1 : +1);
                extrema.push_back(te);
                grid.push_back(te);
            }
        }
        grid.push_back(theta[kScanSamples]);

        std::optional<EventCandidate> best;
        auto consider = [&best](const EventCandidate& c) {
            if (!best || c.theta_lo < best->theta_lo) best = c;
        };

        // Boundary lines of the frozen zone.
        const int lower = zone_ - 1;
        const int upper = zone_ < static_cast<int>(breaks_.size()) ? zone_ : -1;
        for (int idx : {lower, upper}) {
            if (idx < 0 || idx >= static_cast<int>(breaks_.size())) continue;
            const double a = breaks_[static_cast<std::size_t>(idx)];
            scan_line(dense, grid, a, idx, consider);
        }
        // Grazing: x-extrema that reach a boundary without crossing it.
        for (double te : extrema) {
            if (te <= dense.t0 + 1e-15) continue;
            const auto s = dense.eval(te);
            for (int idx : {lower, upper}) {
                if (idx < 0 || idx >= static_cast<int>(breaks_.size())) continue;
                const double a = breaks_[static_cast<std::size_t>(idx)];
                if (std::abs(s[0] - a) <= grazing_window(s[0], s[1])) {
                    EventCandidate c;
                    c.theta_lo = te;
                    c.theta_hi = te;
                    c.kind = 1;
                    c.breakpoint_index = idx;
                    consider(c);
                }
            }
        }

        if (watch_section) {
            for (std::size_t j = 0; j + 1 < grid.size(); ++j) {
                const double xa = dense.eval(grid[j])[0];
                const double xb = dense.eval(grid[j + 1])[0];
                if (xa < 0.0 && xb >= 0.0) {
                    EventCandidate c;
                    c.theta_lo = grid[j];
                    c.theta_hi = grid[j + 1];
                    c.kind = 2;
                    c.direction = +1;
                    consider(c);
                }
            }
        }
        return best;
    }

    template <class Line>
    void scan_line(const rk::DenseStep<2>& dense, const std::vector<double>& grid,
                   double a, int idx, Line&& consider) {
        for (std::size_t j = 0; j + 1 < grid.size(); ++j) {
            const double sa = dense.eval(grid[j])[0] - a;
            const double sb = dense.eval(grid[j + 1])[0] - a;
            if ((sa < 0.0 && sb >= 0.0) || (sa > 0.0 && sb <= 0.0)) {
                EventCandidate c;
                c.theta_lo = grid[j];
                c.theta_hi = grid[j + 1];
                c.kind = 0;
                c.breakpoint_index = idx;
                c.direction = sa < 0.0 ? +1 : -1;
                consider(c);
            }
        }
    }

    /// Bisection on the dense interpolant; returns the bracket endpoint
    /// lying strictly on the crossing's far side.
    template <class F>
    double bisect(F&& f, double lo, double hi, int new_side) const {
        while (hi - lo > opts_.event_time_tol) {
            const double mid = 0.5 * (lo + hi);
            if (mid <= lo || mid >= hi) break;
            const double s = f(mid);
            const bool on_new_side = new_side > 0 ? s > 0.0 : s < 0.0;
            if (on_new_side) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        return hi;
    }

    std::optional<SectionReturn> apply_event(const EventCandidate& event,
                                             const rk::DenseStep<2>& dense) {
        double te;
        rk::State<2> se;
        if (event.kind == 1) {
            te = event.theta_lo;
            se = dense.eval(te);
            // Measure-zero contact: the touched boundary stays attached to
            // the current zone, so the state may not poke past the line.
            const double a = breaks_[static_cast<std::size_t>(event.breakpoint_index)];
            if (event.breakpoint_index == zone_) se[0] = std::min(se[0], a);
            if (event.breakpoint_index == zone_ - 1) se[0] = std::max(se[0], a);
        } else {
            const double target =
                event.kind == 2
                    ? 0.0
                    : breaks_[static_cast<std::size_t>(event.breakpoint_index)];
            te = bisect(
                [&dense, target](double t) { return dense.eval(t)[0] - target; },
                event.theta_lo, event.theta_hi, event.direction);
            se = dense.eval(te);
        }

        emit_dense_samples(dense, te);
        t_ = te;
        state_ = se;

        if (event.kind == 2) {
            record_sample(t_, {state_[0], state_[1]});
            return SectionReturn{state_[1], t_};
        }

        log_zone_event(te, event.breakpoint_index, event.kind == 1 ? 0 : event.direction);
        if (event.kind == 0) {
            zone_ += event.direction;
        }
        record_sample(t_, {state_[0], state_[1]});
        check_escape();
        return std::nullopt;
    }

    void log_zone_event(double t, int idx, int direction) {
        trajectory.events.push_back(
            {t, idx, direction, state_[0], state_[1]});
    }

    void record_sample(double t, Vec2 s) {
        if (opts_.output_step > 0.0) return; // dense grid handles output
        trajectory.t.push_back(t);
        trajectory.state.push_back(s);
        trajectory.zone.push_back(zone_);
    }

    void emit_dense_samples(const rk::DenseStep<2>& dense,
                            double t_limit = std::numeric_limits<double>::infinity()) {
        if (opts_.output_step <= 0.0) return;
        const double t_end = std::min(dense.t1(), t_limit);
        while (next_sample_ <= t_end) {
            const auto s = dense.eval(next_sample_);
            trajectory.t.push_back(next_sample_);
            trajectory.state.push_back({s[0], s[1]});
            trajectory.zone.push_back(zone_);
            next_sample_ += opts_.output_step;
        }
    }

    void check_escape() {
        if (std::hypot(state_[0], state_[1]) > escape_radius_) {
            throw EscapeError("trajectory escaped beyond the radius guard "
                              "before completing the run");
        }
    }

    const PerturbedSystem& system_;
    double eps_;
    IntegrationOptions opts_;
    std::vector<double> breaks_;
    rk::StepControl control_;

    double t_ = 0.0;
    rk::State<2> state_{};
    rk::State<2> k1_{};
    int zone_ = 0;
    double escape_radius_ = 0.0;
    double next_sample_ = 0.0;
};

} // namespace

SectionState::SectionState(double y0) : y0(y0) {
    if (!std::isfinite(y0) || !(y0 > 0.0)) {
        throw InvalidInputError("y0: section coordinate must be positive");
    }
}

ReturnResult integrate_to_section(const PerturbedSystem& system, double y0,
                                  double eps, const IntegrationOptions& opts) {
    SectionState section(y0);
    if (!std::isfinite(eps)) throw InvalidInputError("eps: must be finite");
    ZoneFlow flow(system, eps, opts, {0.0, section.y0});
    auto ret = flow.run(opts.max_return_time, true);
    // run() either returns the section crossing or throws.
    return {*ret, std::move(flow.trajectory)};
}

DisplacementRecord displacement(const PerturbedSystem& system, double r,
                                double eps, const IntegrationOptions& opts) {
    auto result = integrate_to_section(system, r, eps, opts);
    DisplacementRecord rec;
    rec.r = r;
    rec.h = 0.5 * r * r;
    rec.eps = eps;
    rec.return_energy = 0.5 * result.section.y * result.section.y;
    rec.d = rec.return_energy - rec.h;
    return rec;
}

Trajectory simulate(const PerturbedSystem& system, Vec2 start, double eps,
                    double t_max, const IntegrationOptions& opts) {
    if (!(t_max > 0.0) || !std::isfinite(t_max)) {
        throw InvalidInputError("t_max: must be positive and finite");
    }
    if (!std::isfinite(eps)) throw InvalidInputError("eps: must be finite");
    if (!std::isfinite(start.x) || !std::isfinite(start.y)) {
        throw InvalidInputError("start: must be finite");
    }
    ZoneFlow flow(system, eps, opts, start);
    flow.run(t_max, false);
    return std::move(flow.trajectory);
}

} // namespace annulus
