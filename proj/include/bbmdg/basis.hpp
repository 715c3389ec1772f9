#pragma once

// Periodic trial spaces: nodal cubic Lagrange elements (C0) and cubic
// B-splines with simple knots at the mesh nodes (C2).

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bbmdg/errors.hpp"
#include "bbmdg/mesh.hpp"

namespace bbmdg {

using Vector = Eigen::VectorXd;

enum class BasisKind { CubicLagrange, PeriodicCubicBSpline };

inline const char* to_string(BasisKind kind)
{
    return kind == BasisKind::CubicLagrange ? "cubic_lagrange" : "bspline";
}

inline constexpr int basis_degree = 3;
inline constexpr std::size_t local_dofs = basis_degree + 1;

using LocalDofs = std::array<std::size_t, local_dofs>;
using LocalValues = std::array<double, local_dofs>;
/// values[d][a]: derivative d of local function a.
using LocalDerivatives = std::array<LocalValues, basis_degree + 1>;

namespace detail {

// Monomial coefficients of the nodal cubics on [0, 1] with nodes 0, 1/3, 2/3, 1.
inline constexpr double lagrange_coeffs[4][4] = {
    {1.0, -5.5, 9.0, -4.5},
    {0.0, 9.0, -22.5, 13.5},
    {0.0, -4.5, 18.0, -13.5},
    {0.0, 1.0, -4.5, 4.5},
};

inline LocalDerivatives lagrange_reference(double xi)
{
    LocalDerivatives out{};
    for (std::size_t a = 0; a < local_dofs; ++a) {
        const double* c = lagrange_coeffs[a];
        out[0][a] = c[0] + xi * (c[1] + xi * (c[2] + xi * c[3]));
        out[1][a] = c[1] + xi * (2.0 * c[2] + xi * 3.0 * c[3]);
        out[2][a] = 2.0 * c[2] + 6.0 * c[3] * xi;
        out[3][a] = 6.0 * c[3];
    }
    return out;
}

/// Cubic B-spline values and derivatives on knot span [t_span, t_{span+1}]
/// (Piegl & Tiller, algorithm A2.3). knot(j) returns t_j for any integer j.
template <class KnotFn>
LocalDerivatives bspline_derivatives(std::ptrdiff_t span, double x, KnotFn&& knot)
{
    constexpr int p = basis_degree;
    double ndu[p + 1][p + 1] = {};
    double left[p + 1] = {};
    double right[p + 1] = {};
    ndu[0][0] = 1.0;
    for (int j = 1; j <= p; ++j) {
        left[j] = x - knot(span + 1 - j);
        right[j] = knot(span + j) - x;
        double saved = 0.0;
        for (int r = 0; r < j; ++r) {
            ndu[j][r] = right[r + 1] + left[j - r];
            const double temp = ndu[r][j - 1] / ndu[j][r];
            ndu[r][j] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        ndu[j][j] = saved;
    }
    LocalDerivatives ders{};
    for (int j = 0; j <= p; ++j) {
        ders[0][j] = ndu[j][p];
    }
    double a[2][p + 1] = {};
    for (int r = 0; r <= p; ++r) {
        int s1 = 0;
        int s2 = 1;
        a[0][0] = 1.0;
        for (int k = 1; k <= p; ++k) {
            double d = 0.0;
            const int rk = r - k;
            const int pk = p - k;
            if (r >= k) {
                a[s2][0] = a[s1][0] / ndu[pk + 1][rk];
                d = a[s2][0] * ndu[rk][pk];
            }
            const int j1 = rk >= -1 ? 1 : -rk;
            const int j2 = (r - 1 <= pk) ? k - 1 : p - r;
            for (int j = j1; j <= j2; ++j) {
                a[s2][j] = (a[s1][j] - a[s1][j - 1]) / ndu[pk + 1][rk + j];
                d += a[s2][j] * ndu[rk + j][pk];
            }
            if (r <= pk) {
                a[s2][k] = -a[s1][k - 1] / ndu[pk + 1][r];
                d += a[s2][k] * ndu[r][pk];
            }
            ders[k][r] = d;
            std::swap(s1, s2);
        }
    }
    double factor = p;
    for (int k = 1; k <= p; ++k) {
        for (int j = 0; j <= p; ++j) {
            ders[k][j] *= factor;
        }
        factor *= (p - k);
    }
    return ders;
}

} // namespace detail

/// A trial space over a periodic mesh. Immutable after construction.
class BasisSet {
public:
    BasisSet(BasisKind kind, Mesh1D mesh) : kind_(kind), mesh_(std::move(mesh)) {}

    BasisKind kind() const { return kind_; }
    const Mesh1D& mesh() const { return mesh_; }
    std::size_t elements() const { return mesh_.elements(); }

    std::size_t dof_count() const
    {
        return kind_ == BasisKind::CubicLagrange ? 3 * mesh_.elements() : mesh_.elements();
    }

    /// Global dofs nonzero on element e, in the order used by eval().
    LocalDofs supported_dofs(std::size_t e) const
    {
        check_element(e);
        const std::size_t m = mesh_.elements();
        if (kind_ == BasisKind::CubicLagrange) {
            return {3 * e, 3 * e + 1, 3 * e + 2, (3 * e + 3) % (3 * m)};
        }
        return {(e + m - 3) % m, (e + m - 2) % m, (e + m - 1) % m, e};
    }

    /// Physical derivatives 0..3 of the supported functions at x_e + xi * h_e.
    LocalDerivatives eval_all(std::size_t e, double xi) const
    {
        check_element(e);
        const double h = mesh_.width(e);
        if (kind_ == BasisKind::CubicLagrange) {
            auto out = detail::lagrange_reference(xi);
            double scale = 1.0;
            for (std::size_t d = 1; d <= basis_degree; ++d) {
                scale /= h;
                for (double& v : out[d]) {
                    v *= scale;
                }
            }
            return out;
        }
        const double x = mesh_.left(e) + xi * h;
        return detail::bspline_derivatives(
            static_cast<std::ptrdiff_t>(e), x,
            [this](std::ptrdiff_t j) { return mesh_.periodic_node(j); });
    }

    LocalValues eval(std::size_t e, double xi, int deriv_order) const
    {
        if (deriv_order < 0 || deriv_order > basis_degree) {
            throw ParameterError("derivative order " + std::to_string(deriv_order) +
                                 " unsupported for " + to_string(kind_));
        }
        return eval_all(e, xi)[static_cast<std::size_t>(deriv_order)];
    }

    /// u^h(x) (or a derivative) for coefficient vector `coeffs`.
    double eval_field(const Vector& coeffs, double x, int deriv_order = 0) const
    {
        detail::require_size(static_cast<std::size_t>(coeffs.size()), dof_count(), "eval_field");
        const std::size_t e = mesh_.locate(x);
        const double xi = (x - mesh_.left(e)) / mesh_.width(e);
        const auto phi = eval(e, xi, deriv_order);
        const auto dofs = supported_dofs(e);
        double u = 0.0;
        for (std::size_t a = 0; a < local_dofs; ++a) {
            u += coeffs[static_cast<Eigen::Index>(dofs[a])] * phi[a];
        }
        return u;
    }

    /// Nodal interpolation points of the Lagrange basis, indexed by dof.
    std::vector<double> interpolation_points() const
    {
        if (kind_ != BasisKind::CubicLagrange) {
            throw UnsupportedBasisError("interpolation points exist only for the Lagrange basis");
        }
        std::vector<double> x(dof_count());
        for (std::size_t e = 0; e < mesh_.elements(); ++e) {
            const double h = mesh_.width(e);
            for (std::size_t a = 0; a < 3; ++a) {
                x[3 * e + a] = mesh_.left(e) + h * static_cast<double>(a) / 3.0;
            }
        }
        return x;
    }

    /// u^h at the M+1 mesh nodes (index M repeats the seam value).
    std::vector<double> nodal_values(const Vector& coeffs) const
    {
        detail::require_size(static_cast<std::size_t>(coeffs.size()), dof_count(), "nodal_values");
        const std::size_t m = mesh_.elements();
        std::vector<double> out(m + 1);
        for (std::size_t e = 0; e < m; ++e) {
            const auto phi = eval(e, 0.0, 0);
            const auto dofs = supported_dofs(e);
            double u = 0.0;
            for (std::size_t a = 0; a < local_dofs; ++a) {
                u += coeffs[static_cast<Eigen::Index>(dofs[a])] * phi[a];
            }
            out[e] = u;
        }
        out[m] = out[0];
        return out;
    }

private:
    void check_element(std::size_t e) const
    {
        if (e >= mesh_.elements()) {
            throw ParameterError("element index " + std::to_string(e) + " out of range");
        }
    }

    BasisKind kind_;
    Mesh1D mesh_;
};

} // namespace bbmdg
