#pragma once

// Periodic 1D meshes on [-L, L] and r-adaptivity by equidistribution of an
// arc-length monitor (de Boor's iteration).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "bbmdg/errors.hpp"

namespace bbmdg {

/// Ordered periodic mesh x_0 = -L < x_1 < ... < x_M = L. x_0 and x_M are the same point.
class Mesh1D {
public:
    static constexpr std::size_t min_elements = 4;

    Mesh1D(std::vector<double> nodes, double half_length)
        : nodes_(std::move(nodes)), half_length_(half_length)
    {
        validate();
    }

    static Mesh1D uniform(double half_length, std::size_t elements)
    {
        if (!(half_length > 0.0)) {
            throw InvalidMeshError("mesh half length must be positive");
        }
        std::vector<double> x(elements + 1);
        const double h = 2.0 * half_length / static_cast<double>(elements);
        for (std::size_t i = 0; i <= elements; ++i) {
            x[i] = -half_length + h * static_cast<double>(i);
        }
        if (!x.empty()) {
            x.back() = half_length;
        }
        return Mesh1D(std::move(x), half_length);
    }

    std::size_t elements() const { return nodes_.size() - 1; }
    double half_length() const { return half_length_; }
    double period() const { return 2.0 * half_length_; }
    std::span<const double> nodes() const { return nodes_; }
    double node(std::size_t i) const { return nodes_[i]; }
    double left(std::size_t e) const { return nodes_[e]; }
    double right(std::size_t e) const { return nodes_[e + 1]; }
    double width(std::size_t e) const { return nodes_[e + 1] - nodes_[e]; }

    /// Node coordinate for any integer index, shifted by whole periods outside 0..M.
    double periodic_node(std::ptrdiff_t i) const
    {
        const auto m = static_cast<std::ptrdiff_t>(elements());
        std::ptrdiff_t q = i / m;
        std::ptrdiff_t r = i % m;
        if (r < 0) {
            r += m;
            --q;
        }
        return nodes_[static_cast<std::size_t>(r)] + static_cast<double>(q) * period();
    }

    /// Index of the element containing x; x = L maps to the last element.
    std::size_t locate(double x) const
    {
        if (x < -half_length_ || x > half_length_) {
            throw ParameterError("point " + std::to_string(x) + " outside the domain");
        }
        auto it = std::upper_bound(nodes_.begin(), nodes_.end(), x);
        auto e = static_cast<std::size_t>(std::distance(nodes_.begin(), it));
        if (e == 0) {
            return 0;
        }
        return std::min(e - 1, elements() - 1);
    }

    /// Wrap x into [-L, L).
    double wrap(double x) const
    {
        double y = std::fmod(x + half_length_, period());
        if (y < 0.0) {
            y += period();
        }
        return y - half_length_;
    }

    friend bool operator==(const Mesh1D&, const Mesh1D&) = default;

private:
    void validate() const
    {
        if (!(half_length_ > 0.0)) {
            throw InvalidMeshError("mesh half length must be positive");
        }
        if (nodes_.size() < min_elements + 1) {
            throw InvalidMeshError("periodic cubic meshes need at least 4 elements, got " +
                                   std::to_string(nodes_.empty() ? 0 : nodes_.size() - 1));
        }
        if (nodes_.front() != -half_length_ || nodes_.back() != half_length_) {
            throw InvalidMeshError("mesh endpoints must be exactly -L and +L");
        }
        for (std::size_t i = 0; i + 1 < nodes_.size(); ++i) {
            if (!(nodes_[i + 1] > nodes_[i])) {
                throw InvalidMeshError("mesh nodes not strictly increasing at index " +
                                       std::to_string(i));
            }
        }
    }

    std::vector<double> nodes_;
    double half_length_;
};

/// Monitor function samples at the M+1 mesh nodes, treated as piecewise linear.
struct MonitorSamples {
    std::vector<double> values;
    double k = 1.0;
};

/// omega_i = sqrt(1 + k^2 d_i^2) with d_i the periodic central difference of u at node i.
/// Index M reuses the seam derivative of index 0.
inline MonitorSamples monitor_arc_length(std::span<const double> nodal_u, const Mesh1D& mesh,
                                         double k)
{
    const std::size_t m = mesh.elements();
    detail::require_size(nodal_u.size(), m + 1, "monitor_arc_length");
    MonitorSamples out;
    out.k = k;
    out.values.resize(m + 1);
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t ip = (i + 1) % m;
        const std::size_t im = (i + m - 1) % m;
        const double xp = mesh.periodic_node(static_cast<std::ptrdiff_t>(i) + 1);
        const double xm = mesh.periodic_node(static_cast<std::ptrdiff_t>(i) - 1);
        const double up = (i + 1 == m) ? nodal_u[m] : nodal_u[ip];
        const double um = (i == 0) ? nodal_u[m - 1] : nodal_u[im];
        const double d = (up - um) / (xp - xm);
        out.values[i] = std::sqrt(1.0 + k * k * d * d);
    }
    out.values[m] = out.values[0];
    return out;
}

/// Periodic three-point moving average with weights (1/4, 1/2, 1/4).
inline MonitorSamples smooth_monitor(const MonitorSamples& monitor)
{
    const std::size_t n = monitor.values.size();
    if (n < 3) {
        return monitor;
    }
    const std::size_t m = n - 1;
    MonitorSamples out = monitor;
    for (std::size_t i = 0; i < m; ++i) {
        const double left = monitor.values[(i + m - 1) % m];
        const double right = monitor.values[(i + 1) % m];
        out.values[i] = 0.25 * left + 0.5 * monitor.values[i] + 0.25 * right;
    }
    out.values[m] = out.values[0];
    return out;
}

namespace detail {

inline void check_monitor(const Mesh1D& mesh, const MonitorSamples& monitor)
{
    require_size(monitor.values.size(), mesh.elements() + 1, "monitor samples");
    for (double w : monitor.values) {
        if (!(w >= 0.0) || !std::isfinite(w)) {
            throw DegenerateMonitorError("monitor values must be finite and nonnegative");
        }
    }
}

/// Exact integrals of the piecewise-linear monitor over each element.
inline std::vector<double> element_integrals(const Mesh1D& mesh, const MonitorSamples& monitor)
{
    std::vector<double> out(mesh.elements());
    for (std::size_t e = 0; e < mesh.elements(); ++e) {
        out[e] = 0.5 * mesh.width(e) * (monitor.values[e] + monitor.values[e + 1]);
    }
    return out;
}

} // namespace detail

/// max_i |M * int_{x_i}^{x_{i+1}} omega / int omega - 1| for the piecewise-linear monitor.
inline double check_equidistribution(const Mesh1D& mesh, const MonitorSamples& monitor)
{
    detail::check_monitor(mesh, monitor);
    const auto parts = detail::element_integrals(mesh, monitor);
    const double total = std::accumulate(parts.begin(), parts.end(), 0.0);
    if (!(total > 0.0)) {
        throw DegenerateMonitorError("monitor integrates to zero");
    }
    const double m = static_cast<double>(mesh.elements());
    double worst = 0.0;
    for (double p : parts) {
        worst = std::max(worst, std::abs(m * p / total - 1.0));
    }
    return worst;
}

/// Evaluate the piecewise-linear monitor defined on `from` at the nodes of `to`.
inline MonitorSamples resample_monitor(const Mesh1D& from, const MonitorSamples& monitor,
                                       const Mesh1D& to)
{
    detail::check_monitor(from, monitor);
    MonitorSamples out;
    out.k = monitor.k;
    out.values.resize(to.elements() + 1);
    for (std::size_t i = 0; i <= to.elements(); ++i) {
        const double x = to.node(i);
        const std::size_t e = from.locate(x);
        const double s = (x - from.left(e)) / from.width(e);
        out.values[i] = (1.0 - s) * monitor.values[e] + s * monitor.values[e + 1];
    }
    return out;
}

struct EquidistributionOptions {
    std::size_t max_sweeps = 5;
    double tol = 0.05;
    /// Smallest admissible element as a fraction of the uniform width 2L/M.
    double min_width_fraction = 1e-3;
    /// Fraction of each de Boor step taken after the first; full steps oscillate on
    /// peaked monitors. The first step is always full so a constant monitor lands on
    /// the uniform mesh in one sweep.
    double relaxation = 0.5;
};

namespace detail {

/// Place new nodes at the inverse of the cumulative piecewise-linear integral.
inline std::vector<double> deboor_sweep(const Mesh1D& mesh, const MonitorSamples& monitor)
{
    const std::size_t m = mesh.elements();
    const auto parts = element_integrals(mesh, monitor);
    std::vector<double> cumulative(m + 1, 0.0);
    for (std::size_t e = 0; e < m; ++e) {
        cumulative[e + 1] = cumulative[e] + parts[e];
    }
    const double total = cumulative[m];
    if (!(total > 0.0)) {
        throw DegenerateMonitorError("monitor integrates to zero");
    }
    std::vector<double> x(m + 1);
    x.front() = -mesh.half_length();
    x.back() = mesh.half_length();
    std::size_t e = 0;
    for (std::size_t i = 1; i < m; ++i) {
        const double target = total * static_cast<double>(i) / static_cast<double>(m);
        while (e + 1 < m && cumulative[e + 1] <= target) {
            ++e;
        }
        // Solve w_e s + (w_{e+1} - w_e) s^2 / (2h) = r for the offset s in [0, h].
        const double h = mesh.width(e);
        const double w0 = monitor.values[e];
        const double slope = (monitor.values[e + 1] - w0) / h;
        const double r = target - cumulative[e];
        const double disc = std::max(0.0, w0 * w0 + 2.0 * slope * r);
        const double denom = w0 + std::sqrt(disc);
        double s = denom > 0.0 ? 2.0 * r / denom : 0.0;
        s = std::clamp(s, 0.0, h);
        x[i] = mesh.left(e) + s;
    }
    return x;
}

/// Enforce widths >= floor, taking the deficit proportionally from the wider elements.
inline void clamp_widths(std::vector<double>& x, double period, double floor)
{
    const std::size_t m = x.size() - 1;
    std::vector<double> w(m);
    for (std::size_t e = 0; e < m; ++e) {
        w[e] = x[e + 1] - x[e];
    }
    if (std::all_of(w.begin(), w.end(), [floor](double we) { return we >= floor; })) {
        return;
    }
    for (int pass = 0; pass < 64; ++pass) {
        double deficit = 0.0;
        double spare = 0.0;
        for (double& we : w) {
            if (we < floor) {
                deficit += floor - we;
                we = floor;
            }
        }
        if (deficit == 0.0) {
            break;
        }
        for (double we : w) {
            if (we > floor) {
                spare += we - floor;
            }
        }
        if (spare <= deficit) {
            throw InvalidMeshError("minimum element width cannot be satisfied");
        }
        const double shrink = deficit / spare;
        for (double& we : w) {
            if (we > floor) {
                we -= shrink * (we - floor);
            }
        }
    }
    const double lo = x.front();
    for (std::size_t e = 0; e + 1 < m; ++e) {
        x[e + 1] = x[e] + w[e];
    }
    x.front() = lo;
    x.back() = lo + period;
}

} // namespace detail

/// De Boor's equidistribution: sweep until check_equidistribution <= tol or max_sweeps.
/// The piecewise-linear interpolant of the input samples is the monitor throughout.
inline Mesh1D equidistribute_deboor(const Mesh1D& mesh, const MonitorSamples& monitor,
                                    const EquidistributionOptions& opts = {})
{
    detail::check_monitor(mesh, monitor);
    if (!(opts.tol > 0.0)) {
        throw ParameterError("equidistribution tolerance must be positive");
    }
    if (!(opts.relaxation > 0.0 && opts.relaxation <= 1.0)) {
        throw ParameterError("equidistribution relaxation must lie in (0, 1]");
    }
    Mesh1D current = mesh;
    MonitorSamples sampled = monitor;
    const double floor = opts.min_width_fraction * mesh.period() /
                         static_cast<double>(mesh.elements());
    for (std::size_t sweep = 0; sweep < opts.max_sweeps; ++sweep) {
        if (check_equidistribution(current, sampled) <= opts.tol) {
            break;
        }
        auto x = detail::deboor_sweep(current, sampled);
        if (sweep > 0 && opts.relaxation < 1.0) {
            for (std::size_t i = 0; i < x.size(); ++i) {
                x[i] = (1.0 - opts.relaxation) * current.node(i) + opts.relaxation * x[i];
            }
        }
        detail::clamp_widths(x, mesh.period(), floor);
        current = Mesh1D(std::move(x), mesh.half_length());
        sampled = resample_monitor(mesh, monitor, current);
    }
    return current;
}

} // namespace bbmdg
