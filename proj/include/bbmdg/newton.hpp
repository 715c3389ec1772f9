#pragma once

#include <cmath>
#include <optional>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "bbmdg/assembly.hpp"
#include "bbmdg/errors.hpp"

namespace bbmdg {

enum class JacobianMode { analytic, finite_difference };

struct SolverConfig {
    /// Threshold on the infinity norm of the residual.
    double newton_tol = 1e-12;
    int max_newton_iters = 50;
    JacobianMode jacobian_mode = JacobianMode::analytic;
    double fd_epsilon = 1e-7;
    /// Evaluate B1 at the old state instead of the AVF midpoint (DG1 only).
    bool frozen_operator = false;
    /// Start Newton from an explicit Euler predictor instead of the old state.
    bool euler_predictor = false;
};

inline void validate(const SolverConfig& cfg)
{
    if (!(cfg.newton_tol > 0.0)) {
        throw ParameterError("newton_tol must be positive");
    }
    if (cfg.max_newton_iters < 1) {
        throw ParameterError("max_newton_iters must be at least 1");
    }
    if (!(cfg.fd_epsilon > 0.0)) {
        throw ParameterError("fd_epsilon must be positive");
    }
}

/// Newton did not reach the tolerance. Carries the last iterate.
class NewtonFailure : public Error {
public:
    NewtonFailure(const std::string& what, Vector last, double residual, int iterations)
        : Error(what), last_iterate(std::move(last)), residual_norm(residual),
          iterations(iterations)
    {
    }

    Vector last_iterate;
    double residual_norm;
    int iterations;
};

/// A sparse Jacobian, optionally with a rank-one update J + a b^T, solved by
/// sparse LU and Sherman-Morrison.
class Linearization {
public:
    explicit Linearization(SparseMatrix jacobian) : jacobian_(std::move(jacobian)) {}

    Linearization(SparseMatrix jacobian, Vector a, Vector b)
        : jacobian_(std::move(jacobian)), rank_one_(std::make_pair(std::move(a), std::move(b)))
    {
    }

    const SparseMatrix& sparse_part() const { return jacobian_; }

    Matrix dense() const
    {
        Matrix j = Matrix(jacobian_);
        if (rank_one_) {
            j += rank_one_->first * rank_one_->second.transpose();
        }
        return j;
    }

    Vector solve(const Vector& rhs) const
    {
        Eigen::SparseLU<SparseMatrix> lu;
        lu.analyzePattern(jacobian_);
        lu.factorize(jacobian_);
        if (lu.info() != Eigen::Success) {
            throw FactorizationError("singular Jacobian in Newton iteration");
        }
        Vector y = lu.solve(rhs);
        if (!rank_one_) {
            return y;
        }
        const auto& [a, b] = *rank_one_;
        const Vector z = lu.solve(a);
        const double denom = 1.0 + b.dot(z);
        if (std::abs(denom) < 1e-300) {
            throw FactorizationError("singular rank-one updated Jacobian");
        }
        return y - z * (b.dot(y) / denom);
    }

private:
    SparseMatrix jacobian_;
    std::optional<std::pair<Vector, Vector>> rank_one_;
};

struct NewtonResult {
    Vector x;
    int iterations = 0;
    double residual_norm = 0.0;
};

namespace detail {

template <class ResidualFn>
Matrix fd_jacobian(ResidualFn& residual, const Vector& x, const Vector& rx, double eps)
{
    const auto n = x.size();
    Matrix j(rx.size(), n);
    Vector xp = x;
    for (Eigen::Index c = 0; c < n; ++c) {
        const double h = eps * std::max(1.0, std::abs(x[c]));
        xp[c] = x[c] + h;
        j.col(c) = (residual(xp) - rx) / h;
        xp[c] = x[c];
    }
    return j;
}

} // namespace detail

/// Newton iteration for residual(x) = 0 until ||residual||_inf <= cfg.newton_tol.
/// `linearize(x)` returns a Linearization; it is ignored in finite-difference mode.
template <class ResidualFn, class LinearizeFn>
NewtonResult newton_solve(ResidualFn&& residual, LinearizeFn&& linearize, Vector x,
                          const SolverConfig& cfg)
{
    validate(cfg);
    Vector r = residual(x);
    if (r.size() != x.size()) {
        throw DimensionError("residual dimension differs from unknown dimension");
    }
    double norm = r.lpNorm<Eigen::Infinity>();
    int it = 0;
    while (!(norm <= cfg.newton_tol)) {
        if (it >= cfg.max_newton_iters || !std::isfinite(norm)) {
            throw NewtonFailure("Newton failed to converge: residual " + std::to_string(norm) +
                                    " after " + std::to_string(it) + " iterations",
                                std::move(x), norm, it);
        }
        Vector dx;
        if (cfg.jacobian_mode == JacobianMode::finite_difference) {
            Eigen::PartialPivLU<Matrix> lu(detail::fd_jacobian(residual, x, r, cfg.fd_epsilon));
            if (!(lu.matrixLU().diagonal().cwiseAbs().minCoeff() > 0.0)) {
                throw FactorizationError("singular finite-difference Jacobian");
            }
            dx = lu.solve(-r);
        } else {
            dx = linearize(x).solve(-r);
        }
        x += dx;
        r = residual(x);
        norm = r.lpNorm<Eigen::Infinity>();
        ++it;
    }
    return {std::move(x), it, norm};
}

/// Newton with a forward-difference Jacobian only.
template <class ResidualFn>
NewtonResult newton_solve(ResidualFn&& residual, Vector x, SolverConfig cfg)
{
    cfg.jacobian_mode = JacobianMode::finite_difference;
    return newton_solve(
        residual, [](const Vector&) -> Linearization { throw Error("unreachable"); }, std::move(x),
        cfg);
}

} // namespace bbmdg
