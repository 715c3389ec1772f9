#pragma once

#include <cmath>
#include <vector>

#include "bbmdg/bbm.hpp"

namespace bbmdg {

struct PeakLocation {
    double x = 0.0;
    double value = 0.0;
};

/// Location of max_x u^h(x): sample 8 points per element, then golden-section
/// refinement on the bracketing samples. Ties go to the smallest x.
inline PeakLocation locate_peak(const BasisSet& basis, const Vector& u, double tol = 1e-10)
{
    const Mesh1D& mesh = basis.mesh();
    constexpr int samples = 8;
    std::vector<double> xs;
    std::vector<double> vs;
    xs.reserve(mesh.elements() * samples);
    vs.reserve(mesh.elements() * samples);
    for (std::size_t e = 0; e < mesh.elements(); ++e) {
        for (int s = 0; s < samples; ++s) {
            const double x = mesh.left(e) + mesh.width(e) * s / samples;
            xs.push_back(x);
            vs.push_back(basis.eval_field(u, x));
        }
    }
    std::size_t best = 0;
    double vmin = vs[0];
    for (std::size_t i = 1; i < vs.size(); ++i) {
        if (vs[i] > vs[best]) {
            best = i;
        }
        vmin = std::min(vmin, vs[i]);
    }
    if (!(vs[best] - vmin > 1e-12 * std::max(1.0, std::abs(vs[best])))) {
        throw DegeneratePeakError("field is flat; no unique peak");
    }
    // Bracket across the periodic seam if needed, then evaluate with wrapping.
    const std::size_t count = xs.size();
    const double period = mesh.period();
    double a = best == 0 ? xs[count - 1] - period : xs[best - 1];
    double b = best + 1 == count ? xs[0] + period : xs[best + 1];
    auto f = [&](double x) { return -basis.eval_field(u, mesh.wrap(x)); };

    const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - ratio * (b - a);
    double d = a + ratio * (b - a);
    double fc = f(c);
    double fd = f(d);
    while (b - a > tol) {
        if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = f(d);
        }
    }
    PeakLocation peak;
    peak.x = mesh.wrap(0.5 * (a + b));
    peak.value = basis.eval_field(u, peak.x);
    if (vs[best] > peak.value) {
        peak.x = xs[best];
        peak.value = vs[best];
    }
    return peak;
}

/// |c t - x*| measured modulo 2L, taking the representative nearest c t.
inline double phase_error(const State& state, const SolitonParams& params)
{
    const PeakLocation peak = locate_peak(state.basis(), state.u);
    const Mesh1D& mesh = state.basis().mesh();
    return std::abs(mesh.wrap(peak.x - params.c * state.t));
}

/// L2 norm of u^h - u_exact(., x*/c): the exact soliton translated onto the numerical peak.
inline double shape_error(const State& state, const SolitonParams& params)
{
    const PeakLocation peak = locate_peak(state.basis(), state.u);
    const double t_match = peak.x / params.c;
    const BasisSet& basis = state.basis();
    const auto rule = gauss_rule(default_quadrature_points);
    double sum = 0.0;
    for (std::size_t e = 0; e < basis.elements(); ++e) {
        const auto el = tabulate(basis, e, rule);
        for (std::size_t q = 0; q < rule.size(); ++q) {
            double uh = 0.0;
            for (std::size_t a = 0; a < local_dofs; ++a) {
                uh += state.u[static_cast<Eigen::Index>(el.dofs[a])] * el.phi[q][0][a];
            }
            const double diff = uh - exact_soliton(el.points[q], t_match, params);
            sum += el.weights[q] * diff * diff;
        }
    }
    return std::sqrt(sum);
}

struct DriftSeries {
    std::vector<double> t;
    std::vector<double> drift;
    /// True when I(0) = 0 and absolute drift is reported.
    bool absolute = false;
};

/// (I(t) - I(0)) / |I(0)| per sample.
inline DriftSeries hamiltonian_drift(const std::vector<double>& t, const std::vector<double>& I)
{
    detail::require_size(I.size(), t.size(), "hamiltonian_drift");
    DriftSeries out;
    out.t = t;
    if (I.empty()) {
        return out;
    }
    const double i0 = I.front();
    out.absolute = (i0 == 0.0);
    const double denom = out.absolute ? 1.0 : std::abs(i0);
    out.drift.reserve(I.size());
    for (double v : I) {
        out.drift.push_back((v - i0) / denom);
    }
    return out;
}

inline double max_abs(const std::vector<double>& v)
{
    double m = 0.0;
    for (double x : v) {
        m = std::max(m, std::abs(x));
    }
    return m;
}

} // namespace bbmdg
