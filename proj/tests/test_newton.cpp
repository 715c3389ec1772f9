#include <cmath>

#include <gtest/gtest.h>

#include "bbmdg/newton.hpp"

using namespace bbmdg;

TEST(Newton, LinearSystemInOneIteration)
{
    Matrix k(3, 3);
    k << 4, 1, 0, 1, 3, 1, 0, 1, 2;
    const Vector b = Vector::LinSpaced(3, 1.0, 3.0);
    const SparseMatrix ks = k.sparseView();
    auto residual = [&](const Vector& u) -> Vector { return k * u - b; };
    auto linearize = [&](const Vector&) { return Linearization(ks); };
    const auto r = newton_solve(residual, linearize, Vector::Zero(3), SolverConfig{});
    EXPECT_EQ(r.iterations, 1);
    EXPECT_LE((k * r.x - b).cwiseAbs().maxCoeff(), 1e-12);
    // Forward-difference Jacobian is exact for linear maps up to rounding.
    const auto fd = newton_solve(residual, Vector::Zero(3), SolverConfig{});
    EXPECT_LE((fd.x - r.x).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Newton, ScalarQuadratic)
{
    auto residual = [](const Vector& u) -> Vector { return Vector::Constant(1, u[0] * u[0] - 4.0); };
    auto linearize = [](const Vector& u) {
        Matrix j(1, 1);
        j(0, 0) = 2.0 * u[0];
        return Linearization(j.sparseView());
    };
    const auto r = newton_solve(residual, linearize, Vector::Constant(1, 3.0), SolverConfig{});
    EXPECT_NEAR(r.x[0], 2.0, 1e-12);
    EXPECT_LE(r.residual_norm, 1e-12);
    EXPECT_LE(r.iterations, 6);
}

TEST(Newton, RankOneUpdateSolve)
{
    Matrix j(3, 3);
    j << 2, 0, 0, 0, 3, 0, 0, 0, 4;
    const Vector a = Vector::LinSpaced(3, 0.5, 1.5);
    const Vector b = Vector::LinSpaced(3, -1.0, 2.0);
    const Linearization lin(j.sparseView(), a, b);
    const Vector rhs = Vector::Ones(3);
    const Matrix full = j + a * b.transpose();
    EXPECT_LE((full * lin.solve(rhs) - rhs).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_LE((lin.dense() - full).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Newton, NonConvergenceCarriesIterate)
{
    // u^2 + 1 has no real root.
    auto residual = [](const Vector& u) -> Vector { return Vector::Constant(1, u[0] * u[0] + 1.0); };
    auto linearize = [](const Vector& u) {
        Matrix j(1, 1);
        j(0, 0) = 2.0 * u[0];
        return Linearization(j.sparseView());
    };
    SolverConfig cfg;
    cfg.max_newton_iters = 7;
    try {
        newton_solve(residual, linearize, Vector::Constant(1, 0.3), cfg);
        FAIL() << "expected NewtonFailure";
    } catch (const NewtonFailure& e) {
        EXPECT_EQ(e.iterations, 7);
        EXPECT_EQ(e.last_iterate.size(), 1);
        EXPECT_GE(e.residual_norm, 1.0);
    }
}

TEST(Newton, SingularJacobian)
{
    auto residual = [](const Vector& u) -> Vector { return Vector::Constant(2, u.sum() - 1.0); };
    auto linearize = [](const Vector&) {
        Matrix j = Matrix::Ones(2, 2);
        return Linearization(j.sparseView());
    };
    EXPECT_THROW(newton_solve(residual, linearize, Vector::Zero(2), SolverConfig{}), FactorizationError);
    EXPECT_THROW(newton_solve(residual, Vector::Zero(2), SolverConfig{}), FactorizationError);
}

TEST(Newton, ConfigValidation)
{
    SolverConfig cfg;
    cfg.newton_tol = 0.0;
    EXPECT_THROW(validate(cfg), ParameterError);
    cfg = {};
    cfg.max_newton_iters = 0;
    EXPECT_THROW(validate(cfg), ParameterError);
    auto residual = [](const Vector& u) -> Vector { return u; };
    EXPECT_THROW(newton_solve([](const Vector&) -> Vector { return Vector::Zero(2); }, Vector::Ones(1),
                              SolverConfig{}),
                 DimensionError);
    EXPECT_NO_THROW(newton_solve(residual, Vector::Ones(2), SolverConfig{}));
}
