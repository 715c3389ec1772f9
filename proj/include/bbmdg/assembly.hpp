#pragma once

// Element-loop assembly of the mesh-dependent operators: mass A, stiffness E,
// the skew operators B1(u) and B2, the triple-product tensor D and the
// cross-mesh mass matrix C.

#include <algorithm>
#include <array>
#include <map>
#include <memory>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "bbmdg/basis.hpp"
#include "bbmdg/quadrature.hpp"

namespace bbmdg {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Matrix = Eigen::MatrixXd;
using Triplets = std::vector<Eigen::Triplet<double>>;

/// Basis values at the quadrature points of one element; weights include the Jacobian.
struct ElementTable {
    LocalDofs dofs{};
    std::vector<double> weights;
    std::vector<double> points;
    std::vector<LocalDerivatives> phi;
};

inline ElementTable tabulate(const BasisSet& basis, std::size_t e,
                             const QuadratureRule& rule = gauss_rule(default_quadrature_points))
{
    ElementTable t;
    t.dofs = basis.supported_dofs(e);
    const double h = basis.mesh().width(e);
    if (!(h > 0.0)) {
        throw InvalidMeshError("degenerate element " + std::to_string(e));
    }
    t.weights.resize(rule.size());
    t.points.resize(rule.size());
    t.phi.resize(rule.size());
    for (std::size_t q = 0; q < rule.size(); ++q) {
        const double xi = 0.5 * (rule.points[q] + 1.0);
        t.weights[q] = 0.5 * h * rule.weights[q];
        t.points[q] = basis.mesh().left(e) + xi * h;
        t.phi[q] = basis.eval_all(e, xi);
    }
    return t;
}

/// Tables for every element of a basis.
inline std::vector<ElementTable> tabulate_all(const BasisSet& basis)
{
    const auto rule = gauss_rule(default_quadrature_points);
    std::vector<ElementTable> out;
    out.reserve(basis.elements());
    for (std::size_t e = 0; e < basis.elements(); ++e) {
        out.push_back(tabulate(basis, e, rule));
    }
    return out;
}

namespace detail {

inline SparseMatrix from_triplets(std::size_t rows, std::size_t cols, const Triplets& t)
{
    SparseMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    m.setFromTriplets(t.begin(), t.end());
    m.makeCompressed();
    return m;
}

/// Assemble sum_q w_q f(q, a, b) into entry (dofs[a], dofs[b]).
template <class Integrand>
SparseMatrix assemble_bilinear(const std::vector<ElementTable>& tables, std::size_t n,
                               Integrand&& f)
{
    Triplets t;
    t.reserve(tables.size() * local_dofs * local_dofs);
    for (const auto& el : tables) {
        for (std::size_t a = 0; a < local_dofs; ++a) {
            for (std::size_t b = 0; b < local_dofs; ++b) {
                double v = 0.0;
                for (std::size_t q = 0; q < el.weights.size(); ++q) {
                    v += el.weights[q] * f(el, q, a, b);
                }
                t.emplace_back(static_cast<int>(el.dofs[a]), static_cast<int>(el.dofs[b]), v);
            }
        }
    }
    return from_triplets(n, n, t);
}

/// u^h and its derivative at every quadrature point of an element.
inline std::pair<std::vector<double>, std::vector<double>> field_at_points(const ElementTable& el,
                                                                         const Vector& u)
{
    std::vector<double> v(el.weights.size(), 0.0);
    std::vector<double> dv(el.weights.size(), 0.0);
    for (std::size_t q = 0; q < el.weights.size(); ++q) {
        for (std::size_t a = 0; a < local_dofs; ++a) {
            const double c = u[static_cast<Eigen::Index>(el.dofs[a])];
            v[q] += c * el.phi[q][0][a];
            dv[q] += c * el.phi[q][1][a];
        }
    }
    return {std::move(v), std::move(dv)};
}

} // namespace detail

/// A_ij = int phi_i phi_j.
inline SparseMatrix assemble_mass(const BasisSet& basis)
{
    return detail::assemble_bilinear(tabulate_all(basis), basis.dof_count(),
                                     [](const ElementTable& el, std::size_t q, std::size_t a,
                                        std::size_t b) { return el.phi[q][0][a] * el.phi[q][0][b]; });
}

/// E_ij = int phi_i' phi_j'.
inline SparseMatrix assemble_stiffness(const BasisSet& basis)
{
    return detail::assemble_bilinear(tabulate_all(basis), basis.dof_count(),
                                     [](const ElementTable& el, std::size_t q, std::size_t a,
                                        std::size_t b) { return el.phi[q][1][a] * el.phi[q][1][b]; });
}

/// B1(u) with (j, i) entry
///   -2/3 int u phi_i phi_j' - int phi_i phi_j' - 1/3 int u' phi_i phi_j.
/// The sums over k in the u-dependent terms run over every dof.
inline SparseMatrix assemble_B1(const std::vector<ElementTable>& tables, std::size_t n,
                                const Vector& u)
{
    detail::require_size(static_cast<std::size_t>(u.size()), n, "assemble_B1");
    Triplets t;
    t.reserve(tables.size() * local_dofs * local_dofs);
    for (const auto& el : tables) {
        const auto [v, dv] = detail::field_at_points(el, u);
        for (std::size_t j = 0; j < local_dofs; ++j) {
            for (std::size_t i = 0; i < local_dofs; ++i) {
                double s = 0.0;
                for (std::size_t q = 0; q < el.weights.size(); ++q) {
                    const auto& p = el.phi[q];
                    s += el.weights[q] * (-(2.0 / 3.0 * v[q] + 1.0) * p[0][i] * p[1][j] -
                                          (1.0 / 3.0) * dv[q] * p[0][i] * p[0][j]);
                }
                t.emplace_back(static_cast<int>(el.dofs[j]), static_cast<int>(el.dofs[i]), s);
            }
        }
    }
    return detail::from_triplets(n, n, t);
}

inline SparseMatrix assemble_B1(const BasisSet& basis, const Vector& u)
{
    return assemble_B1(tabulate_all(basis), basis.dof_count(), u);
}

/// Jacobian of v -> B1(v) v, i.e. B1(v) + P(v) with
/// P(v)_jl = -2/3 int v phi_j' phi_l - 1/3 int v phi_j phi_l'.
inline SparseMatrix assemble_B1_linearization(const std::vector<ElementTable>& tables,
                                              std::size_t n, const Vector& v)
{
    detail::require_size(static_cast<std::size_t>(v.size()), n, "assemble_B1_linearization");
    Triplets t;
    t.reserve(tables.size() * local_dofs * local_dofs);
    for (const auto& el : tables) {
        const auto [f, df] = detail::field_at_points(el, v);
        for (std::size_t j = 0; j < local_dofs; ++j) {
            for (std::size_t l = 0; l < local_dofs; ++l) {
                double s = 0.0;
                for (std::size_t q = 0; q < el.weights.size(); ++q) {
                    const auto& p = el.phi[q];
                    const double b1 = -(2.0 / 3.0 * f[q] + 1.0) * p[0][l] * p[1][j] -
                                      (1.0 / 3.0) * df[q] * p[0][l] * p[0][j];
                    const double pp = -(2.0 / 3.0) * f[q] * p[1][j] * p[0][l] -
                                      (1.0 / 3.0) * f[q] * p[0][j] * p[1][l];
                    s += el.weights[q] * (b1 + pp);
                }
                t.emplace_back(static_cast<int>(el.dofs[j]), static_cast<int>(el.dofs[l]), s);
            }
        }
    }
    return detail::from_triplets(n, n, t);
}

/// (B2)_ji = -int phi_i phi_j' + int phi_i phi_j'''. Needs the C2 spline basis.
inline SparseMatrix assemble_B2(const BasisSet& basis)
{
    if (basis.kind() != BasisKind::PeriodicCubicBSpline) {
        throw UnsupportedBasisError("B2 requires a C2 basis (periodic cubic B-splines)");
    }
    // Entry (a, b) of the helper is row j = a, column i = b.
    return detail::assemble_bilinear(
        tabulate_all(basis), basis.dof_count(),
        [](const ElementTable& el, std::size_t q, std::size_t j, std::size_t i) {
            const auto& p = el.phi[q];
            return -p[0][i] * p[1][j] + p[0][i] * p[3][j];
        });
}

/// Sparse symmetric 3-tensor D_ijk = int phi_i phi_j phi_k, stored element by element.
class TripleProductTensor {
public:
    using Local = std::array<std::array<std::array<double, local_dofs>, local_dofs>, local_dofs>;

    TripleProductTensor() = default;

    explicit TripleProductTensor(const std::vector<ElementTable>& tables, std::size_t n) : n_(n)
    {
        dofs_.reserve(tables.size());
        local_.reserve(tables.size());
        for (const auto& el : tables) {
            Local d{};
            for (std::size_t i = 0; i < local_dofs; ++i) {
                for (std::size_t j = i; j < local_dofs; ++j) {
                    for (std::size_t k = j; k < local_dofs; ++k) {
                        double s = 0.0;
                        for (std::size_t q = 0; q < el.weights.size(); ++q) {
                            s += el.weights[q] * el.phi[q][0][i] * el.phi[q][0][j] *
                                 el.phi[q][0][k];
                        }
                        // Write every permutation from one value so symmetry is exact.
                        d[i][j][k] = d[i][k][j] = d[j][i][k] = d[j][k][i] = d[k][i][j] =
                            d[k][j][i] = s;
                    }
                }
            }
            dofs_.push_back(el.dofs);
            local_.push_back(d);
        }
    }

    std::size_t dimension() const { return n_; }

    /// out_i = sum_jk D_ijk a_j b_k.
    Vector contract(const Vector& a, const Vector& b) const
    {
        detail::require_size(static_cast<std::size_t>(a.size()), n_, "D contraction");
        detail::require_size(static_cast<std::size_t>(b.size()), n_, "D contraction");
        Vector out = Vector::Zero(static_cast<Eigen::Index>(n_));
        for (std::size_t e = 0; e < local_.size(); ++e) {
            const auto& g = dofs_[e];
            for (std::size_t i = 0; i < local_dofs; ++i) {
                double s = 0.0;
                for (std::size_t j = 0; j < local_dofs; ++j) {
                    const double aj = a[static_cast<Eigen::Index>(g[j])];
                    for (std::size_t k = 0; k < local_dofs; ++k) {
                        s += local_[e][i][j][k] * aj * b[static_cast<Eigen::Index>(g[k])];
                    }
                }
                out[static_cast<Eigen::Index>(g[i])] += s;
            }
        }
        return out;
    }

    /// Matrix M_ij = sum_k D_ijk v_k.
    SparseMatrix contract(const Vector& v) const
    {
        detail::require_size(static_cast<std::size_t>(v.size()), n_, "D contraction");
        Triplets t;
        t.reserve(local_.size() * local_dofs * local_dofs);
        for (std::size_t e = 0; e < local_.size(); ++e) {
            const auto& g = dofs_[e];
            for (std::size_t i = 0; i < local_dofs; ++i) {
                for (std::size_t j = 0; j < local_dofs; ++j) {
                    double s = 0.0;
                    for (std::size_t k = 0; k < local_dofs; ++k) {
                        s += local_[e][i][j][k] * v[static_cast<Eigen::Index>(g[k])];
                    }
                    t.emplace_back(static_cast<int>(g[i]), static_cast<int>(g[j]), s);
                }
            }
        }
        return detail::from_triplets(n_, n_, t);
    }

    /// sum_ijk D_ijk u_i u_j u_k.
    double cubic_form(const Vector& u) const { return u.dot(contract(u, u)); }

    /// Global entries keyed by (i, j, k); zero entries are absent.
    std::map<std::array<std::size_t, 3>, double> entries() const
    {
        std::map<std::array<std::size_t, 3>, double> out;
        for (std::size_t e = 0; e < local_.size(); ++e) {
            const auto& g = dofs_[e];
            for (std::size_t i = 0; i < local_dofs; ++i) {
                for (std::size_t j = 0; j < local_dofs; ++j) {
                    for (std::size_t k = 0; k < local_dofs; ++k) {
                        out[{g[i], g[j], g[k]}] += local_[e][i][j][k];
                    }
                }
            }
        }
        return out;
    }

    double sum() const
    {
        double s = 0.0;
        for (const auto& d : local_) {
            for (const auto& di : d) {
                for (const auto& dij : di) {
                    for (double v : dij) {
                        s += v;
                    }
                }
            }
        }
        return s;
    }

private:
    std::size_t n_ = 0;
    std::vector<LocalDofs> dofs_;
    std::vector<Local> local_;
};

inline TripleProductTensor assemble_D(const BasisSet& basis)
{
    return TripleProductTensor(tabulate_all(basis), basis.dof_count());
}

/// C_ij = int phihat_i phi_j with phihat from `basis_new` (rows) and phi from `basis_old`
/// (columns), integrated over the union of both meshes' breakpoints.
inline SparseMatrix assemble_cross_mass(const BasisSet& basis_old, const BasisSet& basis_new)
{
    if (basis_old.mesh().half_length() != basis_new.mesh().half_length()) {
        throw ParameterError("cross mass matrix needs bases on the same domain");
    }
    if (basis_old.kind() != basis_new.kind()) {
        throw UnsupportedBasisError("cross mass matrix needs bases of the same kind");
    }
    std::vector<double> breaks;
    const auto xo = basis_old.mesh().nodes();
    const auto xn = basis_new.mesh().nodes();
    std::merge(xo.begin(), xo.end(), xn.begin(), xn.end(), std::back_inserter(breaks));
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

    const auto rule = gauss_rule(default_quadrature_points);
    Triplets t;
    t.reserve((breaks.size() - 1) * local_dofs * local_dofs);
    for (std::size_t p = 0; p + 1 < breaks.size(); ++p) {
        const double a = breaks[p];
        const double b = breaks[p + 1];
        const double mid = 0.5 * (a + b);
        const std::size_t eo = basis_old.mesh().locate(mid);
        const std::size_t en = basis_new.mesh().locate(mid);
        const auto dofs_o = basis_old.supported_dofs(eo);
        const auto dofs_n = basis_new.supported_dofs(en);
        std::array<std::array<double, local_dofs>, local_dofs> local{};
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const double x = mid + 0.5 * (b - a) * rule.points[q];
            const double w = 0.5 * (b - a) * rule.weights[q];
            const double xio = (x - basis_old.mesh().left(eo)) / basis_old.mesh().width(eo);
            const double xin = (x - basis_new.mesh().left(en)) / basis_new.mesh().width(en);
            const auto po = basis_old.eval(eo, xio, 0);
            const auto pn = basis_new.eval(en, xin, 0);
            for (std::size_t i = 0; i < local_dofs; ++i) {
                for (std::size_t j = 0; j < local_dofs; ++j) {
                    local[i][j] += w * pn[i] * po[j];
                }
            }
        }
        for (std::size_t i = 0; i < local_dofs; ++i) {
            for (std::size_t j = 0; j < local_dofs; ++j) {
                t.emplace_back(static_cast<int>(dofs_n[i]), static_cast<int>(dofs_o[j]),
                               local[i][j]);
            }
        }
    }
    return detail::from_triplets(basis_new.dof_count(), basis_old.dof_count(), t);
}

/// All operators for one (mesh, basis) pair, with a cached factorization of A + E.
/// Immutable after construction; copies share the factorization.
class AssemblyCache {
public:
    explicit AssemblyCache(BasisSet basis)
        : basis_(std::make_shared<const BasisSet>(std::move(basis))),
          tables_(std::make_shared<const std::vector<ElementTable>>(tabulate_all(*basis_)))
    {
        const std::size_t n = basis_->dof_count();
        A_ = detail::assemble_bilinear(*tables_, n,
                                       [](const ElementTable& el, std::size_t q, std::size_t a,
                                          std::size_t b) { return el.phi[q][0][a] * el.phi[q][0][b]; });
        E_ = detail::assemble_bilinear(*tables_, n,
                                       [](const ElementTable& el, std::size_t q, std::size_t a,
                                          std::size_t b) { return el.phi[q][1][a] * el.phi[q][1][b]; });
        K_ = A_ + E_;
        if (basis_->kind() == BasisKind::PeriodicCubicBSpline) {
            B2_ = assemble_B2(*basis_);
        }
        D_ = std::make_shared<const TripleProductTensor>(*tables_, n);
        auto llt = std::make_shared<Eigen::SimplicialLDLT<SparseMatrix>>();
        llt->compute(K_);
        if (llt->info() != Eigen::Success) {
            throw FactorizationError("A + E factorization failed");
        }
        K_solver_ = std::move(llt);
    }

    const BasisSet& basis() const { return *basis_; }
    std::size_t dofs() const { return basis_->dof_count(); }
    const std::vector<ElementTable>& tables() const { return *tables_; }
    const SparseMatrix& A() const { return A_; }
    const SparseMatrix& E() const { return E_; }
    /// A + E.
    const SparseMatrix& K() const { return K_; }
    const SparseMatrix& B2() const
    {
        if (basis_->kind() != BasisKind::PeriodicCubicBSpline) {
            throw UnsupportedBasisError("B2 is only assembled for the spline basis");
        }
        return B2_;
    }
    const TripleProductTensor& D() const { return *D_; }

    SparseMatrix B1(const Vector& u) const { return assemble_B1(*tables_, dofs(), u); }
    SparseMatrix B1_linearization(const Vector& v) const
    {
        return assemble_B1_linearization(*tables_, dofs(), v);
    }

    /// Solve (A + E) x = rhs.
    Vector solve_K(const Vector& rhs) const { return K_solver_->solve(rhs); }

private:
    std::shared_ptr<const BasisSet> basis_;
    std::shared_ptr<const std::vector<ElementTable>> tables_;
    SparseMatrix A_;
    SparseMatrix E_;
    SparseMatrix K_;
    SparseMatrix B2_;
    std::shared_ptr<const TripleProductTensor> D_;
    std::shared_ptr<const Eigen::SimplicialLDLT<SparseMatrix>> K_solver_;
};

/// S_{p,2} = (A+E)^{-1} B2 (A+E)^{-1} as a dense matrix (diagnostics and tests).
inline Matrix dense_S2(const AssemblyCache& cache)
{
    const auto n = static_cast<Eigen::Index>(cache.dofs());
    Matrix kinv(n, n);
    for (Eigen::Index c = 0; c < n; ++c) {
        kinv.col(c) = cache.solve_K(Vector::Unit(n, c));
    }
    const Matrix b2 = Matrix(cache.B2());
    return kinv * b2 * kinv;
}

} // namespace bbmdg
