#pragma once

// Test-only oracles, deliberately independent of the library's numerics:
// a linear-scan zone lookup, Romberg integration, and a central-difference
// helper. Used to cross-check the production code paths.

#include <cmath>
#include <functional>
#include <span>
#include <vector>

namespace oracles {

/// Zone of x by linear scan over the right-closed intervals (a_i, a_{i+1}].
inline int zone_linear_scan(std::span<const double> breakpoints, double x) {
    int zone = 0;
    for (double a : breakpoints) {
        if (x > a) {
            ++zone;
        } else {
            break;
        }
    }
    return zone;
}

/// Romberg integration on a single smooth interval.
inline double romberg(const std::function<double(double)>& f, double a,
                      double b, int levels = 18, double tol = 1e-13) {
    std::vector<std::vector<double>> table(static_cast<std::size_t>(levels));
    double h = b - a;
    table[0] = {0.5 * h * (f(a) + f(b))};
    for (int k = 1; k < levels; ++k) {
        h *= 0.5;
        double sum = 0.0;
        const long points = 1L << (k - 1);
        for (long i = 0; i < points; ++i) {
            sum += f(a + h * (2 * i + 1));
        }
        table[static_cast<std::size_t>(k)].resize(static_cast<std::size_t>(k) + 1);
        table[k][0] = 0.5 * table[k - 1][0] + h * sum;
        double factor = 1.0;
        for (int j = 1; j <= k; ++j) {
            factor *= 4.0;
            table[k][j] = table[k][j - 1] +
                          (table[k][j - 1] - table[k - 1][j - 1]) / (factor - 1.0);
        }
        if (k > 3 && std::abs(table[k][k] - table[k - 1][k - 1]) < tol) {
            return table[k][k];
        }
    }
    return table[levels - 1][levels - 1];
}

/// Romberg over pieces split at the given interior knots.
inline double romberg_piecewise(const std::function<double(double)>& f,
                                double a, double b,
                                std::vector<double> knots) {
    knots.insert(knots.begin(), a);
    knots.push_back(b);
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
        if (knots[i + 1] > knots[i]) {
            total += romberg(f, knots[i], knots[i + 1]);
        }
    }
    return total;
}

/// Central-difference first derivative.
inline double central_difference(const std::function<double(double)>& f,
                                 double x, double delta) {
    return (f(x + delta) - f(x - delta)) / (2.0 * delta);
}

} // namespace oracles
