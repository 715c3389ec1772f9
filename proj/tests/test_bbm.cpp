#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "assembly_oracle.hpp"
#include "bbmdg/bbm.hpp"

using namespace bbmdg;

namespace {

const BasisKind kinds[] = {BasisKind::CubicLagrange, BasisKind::PeriodicCubicBSpline};

Vector avf_by_quadrature(Hamiltonian h, const Vector& a, const Vector& b, const AssemblyCache& c)
{
    // Independent of the closed form: 4-point Gauss in the averaging parameter (exact for quadratics).
    const auto rule = gauss_rule(4);
    Vector s = Vector::Zero(a.size());
    for (std::size_t q = 0; q < rule.size(); ++q) {
        const double xi = 0.5 * (rule.points[q] + 1.0);
        s += 0.5 * rule.weights[q] * hamiltonian_gradient(h, xi * b + (1.0 - xi) * a, c);
    }
    return s;
}

} // namespace

TEST(Hamiltonians, ZeroAndConstantFields)
{
    std::mt19937_64 rng(1);
    for (BasisKind kind : kinds) {
        const double L = 2.5;
        const AssemblyCache c(BasisSet(kind, test::random_mesh(8, L, rng)));
        const auto n = static_cast<Eigen::Index>(c.dofs());
        EXPECT_EQ(h1(Vector::Zero(n), c.A(), c.E()), 0.0);
        EXPECT_EQ(h2(Vector::Zero(n), c.A(), c.D()), 0.0);
        const double k = 1.3;
        const Vector u = Vector::Constant(n, k);
        EXPECT_NEAR(h1(u, c.A(), c.E()), 0.5 * k * k * 2 * L, 1e-12);
        EXPECT_NEAR(h2(u, c.A(), c.D()), 0.5 * k * k * 2 * L + k * k * k * 2 * L / 6.0, 1e-12);
        EXPECT_EQ(grad_h1_u(Vector::Zero(n), c.A(), c.E()).cwiseAbs().maxCoeff(), 0.0);
        // grad H2 at a constant: c a_i + c^2/2 a_i with a_i = int phi_i.
        const Vector a = c.A() * Vector::Ones(n);
        EXPECT_LE((grad_h2_u(u, c.A(), c.D()) - (k + 0.5 * k * k) * a).cwiseAbs().maxCoeff(), 1e-13);
        EXPECT_THROW(h1(Vector::Zero(n + 1), c.A(), c.E()), DimensionError);
    }
}

TEST(Hamiltonians, SineEnergy)
{
    const double L = 4.0;
    const AssemblyCache c(BasisSet(BasisKind::CubicLagrange, Mesh1D::uniform(L, 64)));
    const Vector u = discretize(c, [L](double x) { return std::sin(std::numbers::pi * x / L); });
    EXPECT_NEAR(h1(u, c.A(), c.E()), 0.5 * (L + std::numbers::pi * std::numbers::pi / L), 1e-6);
}

TEST(Hamiltonians, MatchContinuousDefinitions)
{
    std::mt19937_64 rng(2);
    for (BasisKind kind : kinds) {
        const BasisSet b(kind, test::random_mesh(5, 1.0, rng));
        const AssemblyCache c(b);
        const Vector u = test::random_vector(b.dof_count(), rng, 2.0);
        const double ref1 = test::reference_over_mesh(b.mesh(), [&](std::size_t e, double x) {
            const double v = test::field(b, u, e, x, 0);
            const double d = test::field(b, u, e, x, 1);
            return 0.5 * (v * v + d * d);
        });
        const double ref2 = test::reference_over_mesh(b.mesh(), [&](std::size_t e, double x) {
            const double v = test::field(b, u, e, x, 0);
            return 0.5 * (v * v + v * v * v / 3.0);
        });
        EXPECT_NEAR(h1(u, c.A(), c.E()), ref1, 1e-12 * std::max(1.0, std::abs(ref1)));
        EXPECT_NEAR(h2(u, c.A(), c.D()), ref2, 1e-12 * std::max(1.0, std::abs(ref2)));
    }
}

TEST(Hamiltonians, GradientsMatchFiniteDifferences)
{
    std::mt19937_64 rng(3);
    for (BasisKind kind : kinds) {
        const AssemblyCache c(BasisSet(kind, test::random_mesh(8, 1.0, rng)));
        const Vector u = test::random_vector(c.dofs(), rng);
        for (Hamiltonian h : {Hamiltonian::H1, Hamiltonian::H2}) {
            const Vector g = hamiltonian_gradient(h, u, c);
            for (Eigen::Index i = 0; i < u.size(); ++i) {
                const double eps = 1e-5;
                Vector p = u;
                Vector m = u;
                p[i] += eps;
                m[i] -= eps;
                const double fd = (hamiltonian_value(h, p, c) - hamiltonian_value(h, m, c)) / (2 * eps);
                EXPECT_NEAR(g[i], fd, 1e-9 * std::max(1.0, std::abs(g[i])));
            }
        }
    }
}

TEST(DiscreteGradients, IdentityConsistencyAndSpecialCases)
{
    std::mt19937_64 rng(4);
    for (BasisKind kind : kinds) {
        const AssemblyCache c(BasisSet(kind, test::random_mesh(13, 1.0, rng)));
        const auto n = static_cast<Eigen::Index>(c.dofs());
        for (int trial = 0; trial < 20; ++trial) {
            const Vector u = test::random_vector(c.dofs(), rng, 3.0);
            const Vector v = test::random_vector(c.dofs(), rng, 3.0);
            for (Hamiltonian h : {Hamiltonian::H1, Hamiltonian::H2}) {
                const Vector g = avf_gradient(h, v, u, c);
                const double iu = hamiltonian_value(h, u, c);
                const double iv = hamiltonian_value(h, v, c);
                EXPECT_NEAR(g.dot(u - v), iu - iv, 1e-12 * std::max({1.0, std::abs(iu), std::abs(iv)}));
                EXPECT_LE((avf_gradient(h, u, u, c) - hamiltonian_gradient(h, u, c)).cwiseAbs().maxCoeff(),
                          1e-13 * std::max(1.0, hamiltonian_gradient(h, u, c).cwiseAbs().maxCoeff()));
                EXPECT_LE((g - avf_by_quadrature(h, v, u, c)).cwiseAbs().maxCoeff(), 1e-12);
                EXPECT_LE((g - avf_gradient(h, u, v, c)).cwiseAbs().maxCoeff(), 1e-13);
            }
            EXPECT_LE(avf_dg_h1(u, -u, c.A(), c.E()).cwiseAbs().maxCoeff(), 0.0);
        }
        EXPECT_EQ(avf_dg_h2(Vector::Zero(n), Vector::Zero(n), c.A(), c.D()).cwiseAbs().maxCoeff(), 0.0);
    }
}

TEST(Soliton, PeakAndPeriodicity)
{
    SolitonParams p;
    EXPECT_DOUBLE_EQ(exact_soliton(0.0, 0.0, p), 6.0);
    EXPECT_NEAR(exact_soliton(p.c * 10.0, 10.0, p), 6.0, 1e-12);
    // c t = 600 wraps to -200 = 200.
    EXPECT_NEAR(exact_soliton(-200.0, 200.0, p), 6.0, 1e-12);
    EXPECT_NEAR(exact_soliton(-200.0, 1.3, p), exact_soliton(200.0, 1.3, p), 1e-15);
    EXPECT_NEAR(exact_soliton(5.0, 0.0, p), exact_soliton(-5.0, 0.0, p), 1e-15);
    SolitonParams bad;
    bad.c = 1.0;
    EXPECT_THROW(exact_soliton(0.0, 0.0, bad), ParameterError);
}

TEST(Soliton, TwoWaveProfile)
{
    SolitonParams p;
    EXPECT_NEAR(initial_two_wave(p.x_r, p), 3.0, 1e-4);
    EXPECT_NEAR(initial_two_wave(p.x_s, p), 1.5, 1e-3);
    EXPECT_LT(initial_two_wave(-100.0, p), 1e-10);
    SolitonParams bad = p;
    bad.c_s = 0.5;
    EXPECT_THROW(initial_two_wave(0.0, bad), ParameterError);
}

TEST(Soliton, SolvesBbmUnderRefinement)
{
    // Residual u_t - u_xxt + u_x + u u_x of a spline interpolant, with u_t = -c u_x.
    SolitonParams p;
    p.L = 40.0;
    double prev = 0.0;
    for (std::size_t m : {100u, 200u, 400u}) {
        const AssemblyCache c(BasisSet(BasisKind::PeriodicCubicBSpline, Mesh1D::uniform(p.L, m)));
        const Vector u = discretize(c, [&p](double x) { return exact_soliton(x, 0.0, p); });
        double worst = 0.0;
        for (double x = -5.05; x < 5.0; x += 0.5) {
            const double ux = c.basis().eval_field(u, x, 1);
            const double uxxx = c.basis().eval_field(u, x, 3);
            const double r = -p.c * ux + p.c * uxxx + ux + c.basis().eval_field(u, x) * ux;
            worst = std::max(worst, std::abs(r));
        }
        if (prev > 0.0) {
            // u_xxx of a cubic spline converges at first order.
            EXPECT_GT(prev / worst, 1.8) << "M=" << m;
        }
        prev = worst;
    }
}

TEST(Discretize, ExactForRepresentableFields)
{
    std::mt19937_64 rng(5);
    for (BasisKind kind : kinds) {
        const AssemblyCache c(BasisSet(kind, test::random_mesh(8, 1.0, rng)));
        const Vector u = discretize(c, [](double) { return 0.75; });
        EXPECT_LE((u.array() - 0.75).abs().maxCoeff(), 1e-13);
    }
}
