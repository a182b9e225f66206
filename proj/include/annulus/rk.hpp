#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "annulus/errors.hpp"

namespace annulus::rk {

template <std::size_t N>
using State = std::array<double, N>;

struct StepControl {
    double rel_tol = 1e-12;
    double abs_tol = 1e-14;
    double max_step = 0.5;
    double min_step_fraction = 1e-14; // of the span, before giving up
    double safety = 0.9;
};

/// Quartic continuous extension of an accepted Dormand-Prince 5(4) step.
template <std::size_t N>
struct DenseStep {
    double t0 = 0.0;
    double h = 0.0;
    std::array<State<N>, 5> rcont{};

    double t1() const { return t0 + h; }

    State<N> eval(double t) const {
        const double theta = (t - t0) / h;
        const double theta1 = 1.0 - theta;
        State<N> y;
        for (std::size_t i = 0; i < N; ++i) {
            y[i] = rcont[0][i] +
                   theta * (rcont[1][i] +
                            theta1 * (rcont[2][i] +
                                      theta * (rcont[3][i] +
                                               theta1 * rcont[4][i])));
        }
        return y;
    }
};

/// One explicit Dormand-Prince 5(4) trial step with error estimate and the
/// coefficients of the dense interpolant. The caller owns acceptance and
/// step-size control.
template <std::size_t N>
struct TrialStep {
    State<N> y1;
    State<N> k7; // FSAL derivative at t1
    double error; // scaled RMS, accept when <= 1
    DenseStep<N> dense;
};

template <std::size_t N, class Rhs>
TrialStep<N> dopri5_step(Rhs&& rhs, double t, const State<N>& y,
                         const State<N>& k1, double h,
                         const StepControl& control) {
    constexpr double a21 = 1.0 / 5.0;
    constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
    constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
    constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0,
                     a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
    constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0,
                     a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                     a65 = -5103.0 / 18656.0;
    constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0,
                     a74 = 125.0 / 192.0, a75 = -2187.0 / 6784.0,
                     a76 = 11.0 / 84.0;
    constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0,
                     e4 = 71.0 / 1920.0, e5 = -17253.0 / 339200.0,
                     e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
    // Dense-output fifth coefficient.
    constexpr double d1 = -12715105075.0 / 11282082432.0;
    constexpr double d3 = 87487479700.0 / 32700410799.0;
    constexpr double d4 = -10690763975.0 / 1880347072.0;
    constexpr double d5 = 701980252875.0 / 199316789632.0;
    constexpr double d6 = -1453857185.0 / 822651844.0;
    constexpr double d7 = 69997945.0 / 29380423.0;

    State<N> k2, k3, k4, k5, k6, k7, tmp;

    for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * a21 * k1[i];
    rhs(t + h / 5.0, tmp, k2);
    for (std::size_t i = 0; i < N; ++i)
        tmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
    rhs(t + 3.0 * h / 10.0, tmp, k3);
    for (std::size_t i = 0; i < N; ++i)
        tmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    rhs(t + 4.0 * h / 5.0, tmp, k4);
    for (std::size_t i = 0; i < N; ++i)
        tmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    rhs(t + 8.0 * h / 9.0, tmp, k5);
    for (std::size_t i = 0; i < N; ++i)
        tmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] +
                             a64 * k4[i] + a65 * k5[i]);
    rhs(t + h, tmp, k6);

    TrialStep<N> out;
    for (std::size_t i = 0; i < N; ++i)
        out.y1[i] = y[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] +
                                a75 * k5[i] + a76 * k6[i]);
    rhs(t + h, out.y1, k7);
    out.k7 = k7;

    double err_sq = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        const double err_i = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] +
                                  e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
        const double scale =
            control.abs_tol +
            control.rel_tol * std::max(std::abs(y[i]), std::abs(out.y1[i]));
        err_sq += (err_i / scale) * (err_i / scale);
    }
    out.error = std::sqrt(err_sq / static_cast<double>(N));

    out.dense.t0 = t;
    out.dense.h = h;
    for (std::size_t i = 0; i < N; ++i) {
        const double ydiff = out.y1[i] - y[i];
        const double bspl = h * k1[i] - ydiff;
        out.dense.rcont[0][i] = y[i];
        out.dense.rcont[1][i] = ydiff;
        out.dense.rcont[2][i] = bspl;
        out.dense.rcont[3][i] = ydiff - h * k7[i] - bspl;
        out.dense.rcont[4][i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] +
                                     d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
    }
    return out;
}

inline double next_step_size(double h, double error, const StepControl& control) {
    const double factor =
        error > 0.0 ? control.safety * std::pow(error, -0.2) : 5.0;
    return h * std::clamp(factor, 0.2, 5.0);
}

/// Starting step size from the field magnitude at the initial point.
template <std::size_t N>
double initial_step_size(const State<N>& y0, const State<N>& f0, double span,
                         const StepControl& control) {
    double ynorm = 0.0, fnorm = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        ynorm = std::max(ynorm, std::abs(y0[i]));
        fnorm = std::max(fnorm, std::abs(f0[i]));
    }
    double h = fnorm > 0.0 ? 0.01 * std::max(ynorm, 1.0) / fnorm : 1e-3;
    return std::min({h, control.max_step, std::abs(span)});
}

/// Integrate a smooth right-hand side from t0 to t1 (t1 > t0) with no
/// event handling; used where only the endpoint matters. `breaks` lists
/// interior times the integration must land on exactly (integrand kinks).
template <std::size_t N, class Rhs>
State<N> integrate_smooth(Rhs&& rhs, double t0, double t1, State<N> y,
                          const StepControl& control,
                          const std::vector<double>& breaks = {}) {
    if (!(t1 > t0)) {
        throw InvalidInputError("integrate_smooth: need t1 > t0");
    }
    std::vector<double> stops;
    for (double b : breaks) {
        if (b > t0 && b < t1) stops.push_back(b);
    }
    std::sort(stops.begin(), stops.end());
    stops.push_back(t1);

    double t = t0;
    const double span = t1 - t0;
    for (double stop : stops) {
        State<N> k1;
        rhs(t, y, k1);
        double h = std::min(initial_step_size<N>(y, k1, stop - t, control),
                            stop - t);
        while (t < stop) {
            h = std::min(h, stop - t);
            if (h < control.min_step_fraction * span) {
                throw NumericalFailureError(
                    "integrate_smooth: step size underflow", y[0], h);
            }
            auto trial = dopri5_step<N>(rhs, t, y, k1, h, control);
            if (trial.error <= 1.0) {
                t += h;
                y = trial.y1;
                k1 = trial.k7;
                h = std::min(next_step_size(h, trial.error, control),
                             control.max_step);
            } else {
                h = next_step_size(h, trial.error, control);
            }
        }
        t = stop;
    }
    return y;
}

} // namespace annulus::rk
