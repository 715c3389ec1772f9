#pragma once

// Moving u^h between meshes: plain interpolation, and the integral-preserving
// transfer that minimizes the L2 distance subject to I_new(uhat) = I_old.

#include <cmath>
#include <limits>

#include "bbmdg/bbm.hpp"
#include "bbmdg/newton.hpp"

namespace bbmdg {

namespace detail {

inline void check_transfer_pair(const BasisSet& from, const BasisSet& to)
{
    if (from.mesh().half_length() != to.mesh().half_length()) {
        throw ParameterError("transfer needs both meshes on the same domain");
    }
    if (from.kind() != to.kind()) {
        throw UnsupportedBasisError("transfer across basis kinds is not supported");
    }
}

} // namespace detail

/// Nodal interpolation (Lagrange) or L2 projection (splines) onto the new basis.
/// Does not preserve any Hamiltonian.
inline Vector interp_transfer(const Vector& u_old, const BasisSet& basis_old,
                              const AssemblyCache& cache_new)
{
    const BasisSet& basis_new = cache_new.basis();
    detail::check_transfer_pair(basis_old, basis_new);
    detail::require_size(static_cast<std::size_t>(u_old.size()), basis_old.dof_count(),
                         "interp_transfer");
    if (basis_new.kind() == BasisKind::CubicLagrange) {
        const auto pts = basis_new.interpolation_points();
        Vector u(static_cast<Eigen::Index>(pts.size()));
        for (std::size_t i = 0; i < pts.size(); ++i) {
            u[static_cast<Eigen::Index>(i)] = basis_old.eval_field(u_old, pts[i]);
        }
        return u;
    }
    const SparseMatrix C = assemble_cross_mass(basis_old, basis_new);
    Eigen::SimplicialLDLT<SparseMatrix> mass(cache_new.A());
    if (mass.info() != Eigen::Success) {
        throw FactorizationError("mass matrix factorization failed");
    }
    return mass.solve(C * u_old);
}

inline Vector interp_transfer(const Vector& u_old, const BasisSet& basis_old,
                              const BasisSet& basis_new)
{
    return interp_transfer(u_old, basis_old, AssemblyCache(basis_new));
}

struct TransferResult {
    Vector u;
    double lambda = 0.0;
    int iterations = 0;
    /// |I_new(u) - I_old|.
    double constraint_residual = 0.0;
    /// ||A_new u - C u_old - lambda grad I_new(u)||_inf.
    double stationarity_residual = 0.0;
};

namespace detail {

inline TransferResult kkt_residuals(TransferResult r, const Vector& Cu, double I_old,
                                    Hamiltonian h, const AssemblyCache& cache_new)
{
    const Vector grad = hamiltonian_gradient(h, r.u, cache_new);
    r.stationarity_residual =
        (cache_new.A() * r.u - Cu - r.lambda * grad).lpNorm<Eigen::Infinity>();
    r.constraint_residual = std::abs(hamiltonian_value(h, r.u, cache_new) - I_old);
    return r;
}

/// H1: uhat(lambda) = (A - lambda K)^{-1} C u_old is explicit, leaving a scalar
/// equation in lambda, solved by Newton with a bisection safeguard.
inline TransferResult conservative_h1(const Vector& Cu, double I_old,
                                      const AssemblyCache& cache_new, const SolverConfig& cfg)
{
    const SparseMatrix& A = cache_new.A();
    const SparseMatrix& K = cache_new.K();
    const double scale = std::max(1.0, std::abs(I_old));

    struct Eval {
        bool ok = false;
        Vector u;
        double f = 0.0;
        double df = 0.0;
    };
    auto evaluate = [&](double lambda) {
        Eval ev;
        Eigen::SimplicialLDLT<SparseMatrix> ldlt(SparseMatrix(A - lambda * K));
        if (ldlt.info() != Eigen::Success || (ldlt.vectorD().array() <= 0.0).any()) {
            return ev;
        }
        ev.u = ldlt.solve(Cu);
        const Vector Ku = K * ev.u;
        ev.f = 0.5 * ev.u.dot(Ku) - I_old;
        ev.df = Ku.dot(ldlt.solve(Ku));
        ev.ok = std::isfinite(ev.f);
        return ev;
    };

    double lambda = 0.0;
    Eval cur = evaluate(lambda);
    if (!cur.ok) {
        throw FactorizationError("mass matrix factorization failed in conservative transfer");
    }
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    int it = 0;
    while (std::abs(cur.f) > cfg.newton_tol * scale) {
        if (it >= cfg.max_newton_iters) {
            throw NewtonFailure("conservative transfer did not converge", cur.u,
                                std::abs(cur.f), it);
        }
        // f is increasing in lambda wherever A - lambda K is positive definite.
        if (cur.f > 0.0) {
            hi = std::min(hi, lambda);
        } else {
            lo = std::max(lo, lambda);
        }
        double next = lambda - cur.f / cur.df;
        if (!(next > lo && next < hi) || !std::isfinite(next)) {
            next = (std::isfinite(lo) && std::isfinite(hi)) ? 0.5 * (lo + hi)
                                                            : lambda - cur.f / cur.df;
        }
        Eval trial = evaluate(next);
        while (!trial.ok) {
            // Outside the definite range: pull back toward the last good point.
            hi = std::min(hi, next);
            next = 0.5 * (lambda + next);
            trial = evaluate(next);
            if (std::abs(next - lambda) < 1e-300) {
                throw NewtonFailure("conservative transfer left the definite range", cur.u,
                                    std::abs(cur.f), it);
            }
        }
        lambda = next;
        cur = std::move(trial);
        ++it;
    }
    TransferResult out;
    out.u = std::move(cur.u);
    out.lambda = lambda;
    out.iterations = it;
    return out;
}

/// H2: bordered Newton on (uhat, lambda) with the constraint row scaled by max(1, |I_old|).
inline TransferResult conservative_h2(const Vector& Cu, const Vector& start, double I_old,
                                      const AssemblyCache& cache_new, const SolverConfig& cfg)
{
    const SparseMatrix& A = cache_new.A();
    const TripleProductTensor& D = cache_new.D();
    const auto n = Cu.size();
    const double scale = std::max(1.0, std::abs(I_old));

    auto residual = [&](const Vector& y) -> Vector {
        const Vector u = y.head(n);
        const double lambda = y[n];
        Vector r(n + 1);
        r.head(n) = A * u - Cu - lambda * grad_h2_u(u, A, D);
        r[n] = (h2(u, A, D) - I_old) / scale;
        return r;
    };
    auto linearize = [&](const Vector& y) {
        const Vector u = y.head(n);
        const double lambda = y[n];
        const Vector g = grad_h2_u(u, A, D);
        const SparseMatrix j11 = A - lambda * (A + D.contract(u));
        Triplets t;
        t.reserve(static_cast<std::size_t>(j11.nonZeros() + 2 * n));
        for (Eigen::Index k = 0; k < j11.outerSize(); ++k) {
            for (SparseMatrix::InnerIterator it(j11, k); it; ++it) {
                t.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
            }
        }
        for (Eigen::Index i = 0; i < n; ++i) {
            t.emplace_back(static_cast<int>(i), static_cast<int>(n), -g[i]);
            t.emplace_back(static_cast<int>(n), static_cast<int>(i), g[i] / scale);
        }
        return Linearization(
            detail::from_triplets(static_cast<std::size_t>(n + 1), static_cast<std::size_t>(n + 1), t));
    };
    Vector y(n + 1);
    y.head(n) = start;
    y[n] = 0.0;
    auto sol = newton_solve(residual, linearize, std::move(y), cfg);
    TransferResult out;
    out.u = sol.x.head(n);
    out.lambda = sol.x[n];
    out.iterations = sol.iterations;
    return out;
}

} // namespace detail

/// Integral-preserving transfer: minimize ||uhat^h - u^h||_L2 subject to
/// I_new(uhat) = I_old(u_old), via the KKT system
///   A_new uhat - C u_old - lambda grad I_new(uhat) = 0,  I_new(uhat) = I_old.
inline TransferResult conservative_transfer(const Vector& u_old, const AssemblyCache& cache_old,
                                            const AssemblyCache& cache_new, Hamiltonian h,
                                            const SolverConfig& cfg)
{
    validate(cfg);
    detail::check_transfer_pair(cache_old.basis(), cache_new.basis());
    detail::require_size(static_cast<std::size_t>(u_old.size()), cache_old.dofs(),
                         "conservative_transfer");
    const double I_old = hamiltonian_value(h, u_old, cache_old);
    const Vector Cu = assemble_cross_mass(cache_old.basis(), cache_new.basis()) * u_old;
    TransferResult out;
    if (h == Hamiltonian::H1) {
        out = detail::conservative_h1(Cu, I_old, cache_new, cfg);
    } else {
        const Vector start = interp_transfer(u_old, cache_old.basis(), cache_new);
        out = detail::conservative_h2(Cu, start, I_old, cache_new, cfg);
    }
    return detail::kkt_residuals(std::move(out), Cu, I_old, h, cache_new);
}

} // namespace bbmdg
