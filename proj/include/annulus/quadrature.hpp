#pragma once

#include <functional>
#include <vector>

namespace annulus {

struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;
    int evaluations = 0;
    bool converged = false;
};

/// Adaptive Gauss-Kronrod 15(7) on [a, b] to absolute tolerance abs_tol.
/// Worst-interval-first subdivision; never throws, callers inspect
/// `converged`.
QuadratureResult integrate_adaptive(const std::function<double(double)>& f,
                                    double a, double b, double abs_tol,
                                    int max_subdivisions = 2000);

/// Integrate over [knots[0], knots.back()] treating each [knots[i],
/// knots[i+1]] as a separate smooth piece (the integrand may jump at
/// interior knots). Throws NumericalFailureError carrying the best
/// estimate when the tolerance cannot be met.
double integrate_segments(const std::function<double(double)>& f,
                          const std::vector<double>& knots, double abs_tol);

} // namespace annulus
