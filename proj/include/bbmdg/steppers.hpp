#pragma once

// One-step time integrators for the semidiscrete BBM system
//   (A+E) du/dt = -B w,
// where w is the gradient of the Hamiltonian with respect to m = (A+E)u:
// w = u with B = B1(u) for H1, w = (A+E)^{-1} grad H2 with B = B2 for H2.
//
// The discrete-gradient steps replace w by its AVF counterpart and, after a
// non-conservative mesh transfer, add the correction
//   (I_new(uhat) - I_old) z / <w, z>,  z = w,
// which restores I_new(u^{n+1}) = I_old.

#include <cmath>

#include "bbmdg/bbm.hpp"
#include "bbmdg/newton.hpp"

namespace bbmdg {

struct StepResult {
    Vector u_next;
    int newton_iters = 0;
    double residual_norm = 0.0;
    double hamiltonian_value = 0.0;
};

namespace detail {

inline void check_step(const Vector& u, const AssemblyCache& cache, double dt, const char* what)
{
    require_size(static_cast<std::size_t>(u.size()), cache.dofs(), what);
    if (!std::isfinite(dt)) {
        throw ParameterError(std::string(what) + ": time step must be finite");
    }
}

/// Assemble the 2x2 block sparse matrix [[a, b], [c, d]].
inline SparseMatrix block2(const SparseMatrix& a, const SparseMatrix& b, const SparseMatrix& c,
                           const SparseMatrix& d)
{
    const auto n = a.rows();
    Triplets t;
    t.reserve(static_cast<std::size_t>(a.nonZeros() + b.nonZeros() + c.nonZeros() + d.nonZeros()));
    auto add = [&t](const SparseMatrix& m, Eigen::Index r0, Eigen::Index c0) {
        for (Eigen::Index k = 0; k < m.outerSize(); ++k) {
            for (SparseMatrix::InnerIterator it(m, k); it; ++it) {
                t.emplace_back(static_cast<int>(it.row() + r0), static_cast<int>(it.col() + c0),
                               it.value());
            }
        }
    };
    add(a, 0, 0);
    add(b, 0, n);
    add(c, n, 0);
    add(d, n, n);
    return from_triplets(static_cast<std::size_t>(2 * n), static_cast<std::size_t>(2 * n), t);
}

inline SparseMatrix identity(Eigen::Index n)
{
    SparseMatrix id(n, n);
    id.setIdentity();
    return id;
}

inline void check_correction_denominator(double delta, double s)
{
    if (delta != 0.0 && !(s > 1e-300)) {
        throw DegenerateCorrectionError("correction denominator <grad, z> vanished");
    }
}

/// d/du of -grad H2 right-hand side used by the explicit predictor and RK4.
inline Vector h2_rhs(const Vector& u, const AssemblyCache& cache)
{
    const Vector w = cache.solve_K(grad_h2_u(u, cache.A(), cache.D()));
    return -cache.solve_K(cache.B2() * w);
}

inline Vector h1_rhs(const Vector& u, const AssemblyCache& cache)
{
    return -cache.solve_K(cache.B1(u) * u);
}

/// H1 discrete-gradient step with correction numerator `delta`.
inline StepResult dg_h1_step(const Vector& u_hat, double delta, const AssemblyCache& cache,
                             double dt, const SolverConfig& cfg)
{
    const SparseMatrix& K = cache.K();
    const auto n = u_hat.size();
    const SparseMatrix frozen = cfg.frozen_operator ? cache.B1(u_hat) : SparseMatrix();

    auto residual = [&](const Vector& u) -> Vector {
        const Vector w = 0.5 * (u_hat + u);
        Vector r = K * (u - u_hat);
        r += dt * (cfg.frozen_operator ? Vector(frozen * w) : Vector(cache.B1(w) * w));
        if (delta != 0.0) {
            const double s = w.squaredNorm();
            check_correction_denominator(delta, s);
            r += (delta / s) * w;
        }
        return r;
    };
    auto linearize = [&](const Vector& u) -> Linearization {
        const Vector w = 0.5 * (u_hat + u);
        SparseMatrix j = K + (0.5 * dt) * (cfg.frozen_operator ? frozen : cache.B1_linearization(w));
        if (delta == 0.0) {
            return Linearization(std::move(j));
        }
        const double s = w.squaredNorm();
        check_correction_denominator(delta, s);
        j += (0.5 * delta / s) * identity(n);
        return Linearization(std::move(j), Vector(-(delta / (s * s)) * w), w);
    };

    Vector guess = u_hat;
    if (cfg.euler_predictor) {
        guess += dt * h1_rhs(u_hat, cache);
    }
    auto sol = newton_solve(residual, linearize, std::move(guess), cfg);
    StepResult out;
    out.hamiltonian_value = h1(sol.x, cache.A(), cache.E());
    out.u_next = std::move(sol.x);
    out.newton_iters = sol.iterations;
    out.residual_norm = sol.residual_norm;
    return out;
}

/// H2 discrete-gradient step solved for (u, w) with (A+E) w = AVF gradient.
inline StepResult dg_h2_step(const Vector& u_hat, double delta, const AssemblyCache& cache,
                             double dt, const SolverConfig& cfg)
{
    const SparseMatrix& K = cache.K();
    const SparseMatrix& A = cache.A();
    const SparseMatrix& B2 = cache.B2();
    const TripleProductTensor& D = cache.D();
    const auto n = u_hat.size();

    auto residual = [&](const Vector& y) -> Vector {
        const auto u = y.head(n);
        const Vector w = y.tail(n);
        Vector r(2 * n);
        Vector r1 = K * (u - u_hat) + dt * (B2 * w);
        if (delta != 0.0) {
            const double s = w.squaredNorm();
            check_correction_denominator(delta, s);
            r1 += (delta / s) * w;
        }
        r.head(n) = r1;
        r.tail(n) = K * w - avf_dg_h2(u_hat, Vector(u), A, D);
        return r;
    };
    auto linearize = [&](const Vector& y) -> Linearization {
        const Vector u = y.head(n);
        const Vector w = y.tail(n);
        const SparseMatrix g = 0.5 * A + (1.0 / 6.0) * D.contract(Vector(u_hat + 2.0 * u));
        SparseMatrix upper_right = dt * B2;
        if (delta == 0.0) {
            return Linearization(block2(K, upper_right, -g, K));
        }
        const double s = w.squaredNorm();
        check_correction_denominator(delta, s);
        upper_right += (delta / s) * identity(n);
        Vector a = Vector::Zero(2 * n);
        Vector b = Vector::Zero(2 * n);
        a.head(n) = -(2.0 * delta / (s * s)) * w;
        b.tail(n) = w;
        return Linearization(block2(K, upper_right, -g, K), std::move(a), std::move(b));
    };

    Vector y(2 * n);
    y.head(n) = u_hat;
    if (cfg.euler_predictor) {
        y.head(n) += dt * h2_rhs(u_hat, cache);
    }
    y.tail(n) = cache.solve_K(avf_dg_h2(u_hat, Vector(y.head(n)), A, D));
    auto sol = newton_solve(residual, linearize, std::move(y), cfg);
    StepResult out;
    out.u_next = sol.x.head(n);
    out.hamiltonian_value = h2(out.u_next, A, D);
    out.newton_iters = sol.iterations;
    out.residual_norm = sol.residual_norm;
    return out;
}

} // namespace detail

/// H1-preserving AVF step on a fixed mesh.
inline StepResult dg1_step_fixed(const Vector& u_n, const AssemblyCache& cache, double dt,
                                 const SolverConfig& cfg)
{
    detail::check_step(u_n, cache, dt, "dg1_step_fixed");
    return detail::dg_h1_step(u_n, 0.0, cache, dt, cfg);
}

/// H2-preserving AVF step on a fixed mesh (spline basis).
inline StepResult dg2_step_fixed(const Vector& u_n, const AssemblyCache& cache, double dt,
                                 const SolverConfig& cfg)
{
    detail::check_step(u_n, cache, dt, "dg2_step_fixed");
    return detail::dg_h2_step(u_n, 0.0, cache, dt, cfg);
}

/// Discrete-gradient step after a mesh change. `u_hat` lives on the new mesh and
/// `I_old` is the Hamiltonian of the previous state on the previous mesh.
inline StepResult dg_moving_step(const Vector& u_hat, double I_old,
                                 const AssemblyCache& cache_new, Hamiltonian hamiltonian,
                                 double dt, const SolverConfig& cfg,
                                 bool transfer_was_conservative)
{
    detail::check_step(u_hat, cache_new, dt, "dg_moving_step");
    const double delta = transfer_was_conservative
                             ? 0.0
                             : hamiltonian_value(hamiltonian, u_hat, cache_new) - I_old;
    return hamiltonian == Hamiltonian::H1 ? detail::dg_h1_step(u_hat, delta, cache_new, dt, cfg)
                                          : detail::dg_h2_step(u_hat, delta, cache_new, dt, cfg);
}

/// Trapezoidal rule for (A+E) du/dt = -B1(u) u.
inline StepResult trapezoidal_step(const Vector& u_n, const AssemblyCache& cache, double dt,
                                   const SolverConfig& cfg)
{
    detail::check_step(u_n, cache, dt, "trapezoidal_step");
    const SparseMatrix& K = cache.K();
    const Vector old_rhs = cache.B1(u_n) * u_n;
    auto residual = [&](const Vector& u) -> Vector {
        return K * (u - u_n) + (0.5 * dt) * (old_rhs + cache.B1(u) * u);
    };
    auto linearize = [&](const Vector& u) {
        return Linearization(K + (0.5 * dt) * cache.B1_linearization(u));
    };
    Vector guess = u_n;
    if (cfg.euler_predictor) {
        guess += dt * detail::h1_rhs(u_n, cache);
    }
    auto sol = newton_solve(residual, linearize, std::move(guess), cfg);
    StepResult out;
    out.hamiltonian_value = h1(sol.x, cache.A(), cache.E());
    out.u_next = std::move(sol.x);
    out.newton_iters = sol.iterations;
    out.residual_norm = sol.residual_norm;
    return out;
}

/// Implicit midpoint rule for du/dt = -(A+E)^{-1} B2 (A+E)^{-1} grad H2(u).
inline StepResult implicit_midpoint_step(const Vector& u_n, const AssemblyCache& cache, double dt,
                                         const SolverConfig& cfg)
{
    detail::check_step(u_n, cache, dt, "implicit_midpoint_step");
    const SparseMatrix& K = cache.K();
    const SparseMatrix& A = cache.A();
    const SparseMatrix& B2 = cache.B2();
    const TripleProductTensor& D = cache.D();
    const auto n = u_n.size();
    auto residual = [&](const Vector& y) -> Vector {
        const Vector u = y.head(n);
        const Vector w = y.tail(n);
        const Vector mid = 0.5 * (u_n + u);
        Vector r(2 * n);
        r.head(n) = K * (u - u_n) + dt * (B2 * w);
        r.tail(n) = K * w - grad_h2_u(mid, A, D);
        return r;
    };
    auto linearize = [&](const Vector& y) {
        const Vector mid = 0.5 * (u_n + Vector(y.head(n)));
        const SparseMatrix g = 0.5 * A + 0.5 * D.contract(mid);
        return Linearization(detail::block2(K, dt * B2, -g, K));
    };
    Vector y(2 * n);
    y.head(n) = u_n;
    if (cfg.euler_predictor) {
        y.head(n) += dt * detail::h2_rhs(u_n, cache);
    }
    y.tail(n) = cache.solve_K(grad_h2_u(Vector(0.5 * (u_n + Vector(y.head(n)))), A, D));
    auto sol = newton_solve(residual, linearize, std::move(y), cfg);
    StepResult out;
    out.u_next = sol.x.head(n);
    out.hamiltonian_value = h2(out.u_next, A, D);
    out.newton_iters = sol.iterations;
    out.residual_norm = sol.residual_norm;
    return out;
}

/// Classical fourth-order Runge-Kutta on the H2 semidiscretization.
inline StepResult rk4_step(const Vector& u_n, const AssemblyCache& cache, double dt)
{
    detail::check_step(u_n, cache, dt, "rk4_step");
    const Vector k1 = detail::h2_rhs(u_n, cache);
    const Vector k2 = detail::h2_rhs(Vector(u_n + 0.5 * dt * k1), cache);
    const Vector k3 = detail::h2_rhs(Vector(u_n + 0.5 * dt * k2), cache);
    const Vector k4 = detail::h2_rhs(Vector(u_n + dt * k3), cache);
    StepResult out;
    out.u_next = u_n + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    out.hamiltonian_value = h2(out.u_next, cache.A(), cache.D());
    return out;
}

} // namespace bbmdg
