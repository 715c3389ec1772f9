#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "bbmdg/errors.hpp"

namespace bbmdg {

/// Gauss-Legendre rule on (-1, 1).
struct QuadratureRule {
    std::vector<double> points;
    std::vector<double> weights;

    std::size_t size() const { return points.size(); }
};

/// Points per element used by all assembly routines; exact up to degree 9.
inline constexpr int default_quadrature_points = 5;

/// n-point Gauss-Legendre rule, 1 <= n <= 8, exact for polynomials of degree 2n - 1.
inline QuadratureRule gauss_rule(int n)
{
    if (n < 1 || n > 8) {
        throw ParameterError("gauss_rule supports 1..8 points, got " + std::to_string(n));
    }
    QuadratureRule rule;
    rule.points.resize(static_cast<std::size_t>(n));
    rule.weights.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        // Newton iteration on P_n from the Chebyshev-like initial guess.
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0;
            double p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            const double pn = n == 1 ? x : p1;
            const double pnm1 = n == 1 ? 1.0 : p0;
            dp = n * (x * pn - pnm1) / (x * x - 1.0);
            const double dx = pn / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) {
                break;
            }
        }
        // Recompute the derivative at the converged root.
        double p0 = 1.0;
        double p1 = x;
        for (int k = 2; k <= n; ++k) {
            const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = n == 1 ? 1.0 : n * (x * p1 - p0) / (x * x - 1.0);
        const auto idx = static_cast<std::size_t>(n - 1 - i);
        rule.points[idx] = std::abs(x) < 1e-15 ? 0.0 : x;
        rule.weights[idx] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    // Symmetrize so mirrored points are bit-identical.
    for (std::size_t i = 0; i < rule.size() / 2; ++i) {
        const std::size_t j = rule.size() - 1 - i;
        const double p = 0.5 * (rule.points[j] - rule.points[i]);
        const double w = 0.5 * (rule.weights[i] + rule.weights[j]);
        rule.points[i] = -p;
        rule.points[j] = p;
        rule.weights[i] = w;
        rule.weights[j] = w;
    }
    return rule;
}

} // namespace bbmdg
