#pragma once

// Benjamin-Bona-Mahony problem data: discrete Hamiltonians, their gradients
// and AVF discrete gradients, and the analytic soliton / two-wave profiles.

#include <cmath>
#include <functional>
#include <string>

#include "bbmdg/assembly.hpp"

namespace bbmdg {

/// Coefficients of u^h at time t on a given basis. m = (A+E)u is never stored.
struct State {
    Vector u;
    std::shared_ptr<const AssemblyCache> cache;
    double t = 0.0;

    const BasisSet& basis() const { return cache->basis(); }
};

enum class Hamiltonian { H1, H2 };

inline const char* to_string(Hamiltonian h) { return h == Hamiltonian::H1 ? "H1" : "H2"; }

struct SolitonParams {
    double c = 3.0;
    double L = 200.0;
    // Two-wave data.
    double x_r = 150.0;
    double x_s = 105.0;
    double c_r = 2.0;
    double c_s = 1.5;
};

namespace detail {

inline void require_same(const Vector& a, const SparseMatrix& m, const char* what)
{
    require_size(static_cast<std::size_t>(a.size()), static_cast<std::size_t>(m.rows()), what);
}

} // namespace detail

/// H1_p = 1/2 u^T (A+E) u.
inline double h1(const Vector& u, const SparseMatrix& A, const SparseMatrix& E)
{
    detail::require_same(u, A, "h1");
    detail::require_same(u, E, "h1");
    return 0.5 * u.dot(A * u + E * u);
}

/// H2_p = 1/2 u^T A u + 1/6 D(u, u, u).
inline double h2(const Vector& u, const SparseMatrix& A, const TripleProductTensor& D)
{
    detail::require_same(u, A, "h2");
    return 0.5 * u.dot(A * u) + D.cubic_form(u) / 6.0;
}

inline Vector grad_h1_u(const Vector& u, const SparseMatrix& A, const SparseMatrix& E)
{
    detail::require_same(u, A, "grad_h1_u");
    return A * u + E * u;
}

inline Vector grad_h2_u(const Vector& u, const SparseMatrix& A, const TripleProductTensor& D)
{
    detail::require_same(u, A, "grad_h2_u");
    return A * u + 0.5 * D.contract(u, u);
}

/// AVF discrete gradient of H1_p with respect to u: 1/2 (A+E)(u_a + u_b).
inline Vector avf_dg_h1(const Vector& u_a, const Vector& u_b, const SparseMatrix& A,
                        const SparseMatrix& E)
{
    detail::require_same(u_a, A, "avf_dg_h1");
    detail::require_same(u_b, A, "avf_dg_h1");
    const Vector s = u_a + u_b;
    return 0.5 * (A * s + E * s);
}

/// AVF discrete gradient of H2_p with respect to u:
///   1/2 A (a + b) + 1/6 D(a (a + b/2) + b (a/2 + b)).
inline Vector avf_dg_h2(const Vector& u_a, const Vector& u_b, const SparseMatrix& A,
                        const TripleProductTensor& D)
{
    detail::require_same(u_a, A, "avf_dg_h2");
    detail::require_same(u_b, A, "avf_dg_h2");
    const Vector s = u_a + u_b;
    const Vector cubic = D.contract(u_a, u_a + 0.5 * u_b) + D.contract(u_b, 0.5 * u_a + u_b);
    return 0.5 * (A * s) + cubic / 6.0;
}

inline double hamiltonian_value(Hamiltonian h, const Vector& u, const AssemblyCache& cache)
{
    return h == Hamiltonian::H1 ? h1(u, cache.A(), cache.E()) : h2(u, cache.A(), cache.D());
}

inline Vector hamiltonian_gradient(Hamiltonian h, const Vector& u, const AssemblyCache& cache)
{
    return h == Hamiltonian::H1 ? grad_h1_u(u, cache.A(), cache.E())
                                : grad_h2_u(u, cache.A(), cache.D());
}

inline Vector avf_gradient(Hamiltonian h, const Vector& u_a, const Vector& u_b,
                           const AssemblyCache& cache)
{
    return h == Hamiltonian::H1 ? avf_dg_h1(u_a, u_b, cache.A(), cache.E())
                                : avf_dg_h2(u_a, u_b, cache.A(), cache.D());
}

namespace detail {

inline double sech2_profile(double dist, double c)
{
    if (!(c > 1.0)) {
        throw ParameterError("wave speed must exceed 1, got " + std::to_string(c));
    }
    const double s = 1.0 / std::cosh(0.5 * std::sqrt(1.0 - 1.0 / c) * dist);
    return 3.0 * (c - 1.0) * s * s;
}

/// min_j |y + 2jL|.
inline double periodic_distance(double y, double L)
{
    double r = std::fmod(y, 2.0 * L);
    if (r > L) {
        r -= 2.0 * L;
    } else if (r < -L) {
        r += 2.0 * L;
    }
    return std::abs(r);
}

} // namespace detail

/// Periodic traveling soliton 3(c-1) sech^2(1/2 sqrt(1 - 1/c) l(x, t)).
inline double exact_soliton(double x, double t, const SolitonParams& p)
{
    return detail::sech2_profile(detail::periodic_distance(x - p.c * t, p.L), p.c);
}

/// Sum of two sech^2 waves centred at x_r and x_s (not periodized).
inline double initial_two_wave(double x, const SolitonParams& p)
{
    return detail::sech2_profile(x - p.x_r, p.c_r) + detail::sech2_profile(x - p.x_s, p.c_s);
}

/// Coefficients approximating f: nodal interpolation for Lagrange, L2 projection for splines.
inline Vector discretize(const AssemblyCache& cache, const std::function<double(double)>& f)
{
    const BasisSet& basis = cache.basis();
    const auto n = static_cast<Eigen::Index>(basis.dof_count());
    Vector u(n);
    if (basis.kind() == BasisKind::CubicLagrange) {
        const auto pts = basis.interpolation_points();
        for (Eigen::Index i = 0; i < n; ++i) {
            u[i] = f(pts[static_cast<std::size_t>(i)]);
        }
        return u;
    }
    const auto rule = gauss_rule(8);
    Vector load = Vector::Zero(n);
    for (std::size_t e = 0; e < basis.elements(); ++e) {
        const auto el = tabulate(basis, e, rule);
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const double fq = f(el.points[q]);
            for (std::size_t a = 0; a < local_dofs; ++a) {
                load[static_cast<Eigen::Index>(el.dofs[a])] += el.weights[q] * fq * el.phi[q][0][a];
            }
        }
    }
    Eigen::SimplicialLDLT<SparseMatrix> mass(cache.A());
    if (mass.info() != Eigen::Success) {
        throw FactorizationError("mass matrix factorization failed");
    }
    return mass.solve(load);
}

} // namespace bbmdg
