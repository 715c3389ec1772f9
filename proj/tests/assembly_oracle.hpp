#pragma once

// Dense reference matrices for the assembled operators, built from the
// independent basis evaluator and adaptive Gauss-Kronrod integration.

#include <algorithm>
#include <map>

#include "bbmdg/assembly.hpp"
#include "oracles.hpp"

namespace bbmdg::test {

/// f(i, j, e, x) integrated over every element for all (row, col) pairs.
template <class F>
Matrix reference_matrix(const BasisSet& basis, F&& f)
{
    const auto n = static_cast<Eigen::Index>(basis.dof_count());
    const Mesh1D& mesh = basis.mesh();
    Matrix out = Matrix::Zero(n, n);
    for (std::size_t e = 0; e < mesh.elements(); ++e) {
        for (Eigen::Index r = 0; r < n; ++r) {
            const auto i = static_cast<std::size_t>(r);
            if (vanishes_on(basis, i, e)) {
                continue;
            }
            for (Eigen::Index c = 0; c < n; ++c) {
                const auto j = static_cast<std::size_t>(c);
                if (vanishes_on(basis, j, e)) {
                    continue;
                }
                out(r, c) += reference_integral([&](double x) { return f(i, j, e, x); },
                                                mesh.left(e), mesh.right(e));
            }
        }
    }
    return out;
}

inline double field(const BasisSet& basis, const Vector& u, std::size_t e, double x, int d)
{
    double s = 0.0;
    for (std::size_t k = 0; k < basis.dof_count(); ++k) {
        s += u[static_cast<Eigen::Index>(k)] * global_phi(basis, k, e, x, d);
    }
    return s;
}

inline Matrix reference_mass(const BasisSet& b)
{
    return reference_matrix(b, [&](std::size_t i, std::size_t j, std::size_t e, double x) {
        return global_phi(b, i, e, x, 0) * global_phi(b, j, e, x, 0);
    });
}

inline Matrix reference_stiffness(const BasisSet& b)
{
    return reference_matrix(b, [&](std::size_t i, std::size_t j, std::size_t e, double x) {
        return global_phi(b, i, e, x, 1) * global_phi(b, j, e, x, 1);
    });
}

/// Row j, column i.
inline Matrix reference_B1(const BasisSet& b, const Vector& u)
{
    return reference_matrix(b, [&](std::size_t j, std::size_t i, std::size_t e, double x) {
        const double pi = global_phi(b, i, e, x, 0);
        if (pi == 0.0) {
            return 0.0;
        }
        return -(2.0 / 3.0 * field(b, u, e, x, 0) + 1.0) * pi * global_phi(b, j, e, x, 1) -
               (1.0 / 3.0) * field(b, u, e, x, 1) * pi * global_phi(b, j, e, x, 0);
    });
}

inline Matrix reference_B2(const BasisSet& b)
{
    return reference_matrix(b, [&](std::size_t j, std::size_t i, std::size_t e, double x) {
        const double pi = global_phi(b, i, e, x, 0);
        return -pi * global_phi(b, j, e, x, 1) + pi * global_phi(b, j, e, x, 3);
    });
}

inline std::map<std::array<std::size_t, 3>, double> reference_D(const BasisSet& b)
{
    std::map<std::array<std::size_t, 3>, double> out;
    const std::size_t n = b.dof_count();
    const Mesh1D& mesh = b.mesh();
    for (std::size_t e = 0; e < mesh.elements(); ++e) {
        std::vector<std::size_t> live;
        for (std::size_t i = 0; i < n; ++i) {
            if (!vanishes_on(b, i, e)) {
                live.push_back(i);
            }
        }
        for (std::size_t i : live) {
            for (std::size_t j : live) {
                for (std::size_t k : live) {
                    if (i > j || j > k) {
                        continue;
                    }
                    out[{i, j, k}] += reference_integral(
                        [&](double x) {
                            return global_phi(b, i, e, x, 0) * global_phi(b, j, e, x, 0) *
                                   global_phi(b, k, e, x, 0);
                        },
                        mesh.left(e), mesh.right(e));
                }
            }
        }
    }
    return out;
}

/// C_ij = int phihat_i phi_j over the merged breakpoints (rows: new basis).
inline Matrix reference_cross_mass(const BasisSet& old_b, const BasisSet& new_b)
{
    std::vector<double> cuts;
    for (double x : old_b.mesh().nodes()) {
        cuts.push_back(x);
    }
    for (double x : new_b.mesh().nodes()) {
        cuts.push_back(x);
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    const auto rows = static_cast<Eigen::Index>(new_b.dof_count());
    const auto cols = static_cast<Eigen::Index>(old_b.dof_count());
    Matrix out = Matrix::Zero(rows, cols);
    for (std::size_t p = 0; p + 1 < cuts.size(); ++p) {
        const double mid = 0.5 * (cuts[p] + cuts[p + 1]);
        const std::size_t en = new_b.mesh().locate(mid);
        const std::size_t eo = old_b.mesh().locate(mid);
        for (Eigen::Index r = 0; r < rows; ++r) {
            if (vanishes_on(new_b, static_cast<std::size_t>(r), en)) {
                continue;
            }
            for (Eigen::Index c = 0; c < cols; ++c) {
                if (vanishes_on(old_b, static_cast<std::size_t>(c), eo)) {
                    continue;
                }
                out(r, c) += reference_integral(
                    [&](double x) {
                        return global_phi(new_b, static_cast<std::size_t>(r), en, x, 0) *
                               global_phi(old_b, static_cast<std::size_t>(c), eo, x, 0);
                    },
                    cuts[p], cuts[p + 1]);
            }
        }
    }
    return out;
}

struct Agreement {
    /// max |x - r| / max |r|.
    double absolute = 0.0;
    /// max |x - r| / |r| over entries with |r| >= cutoff * max |r|.
    double relative = 0.0;
};

inline Agreement compare(const Matrix& x, const Matrix& r, double cutoff = 1e-2)
{
    Agreement out;
    const double scale = std::max(r.cwiseAbs().maxCoeff(), 1e-300);
    for (Eigen::Index i = 0; i < r.rows(); ++i) {
        for (Eigen::Index j = 0; j < r.cols(); ++j) {
            const double d = std::abs(x(i, j) - r(i, j));
            out.absolute = std::max(out.absolute, d / scale);
            if (std::abs(r(i, j)) >= cutoff * scale) {
                out.relative = std::max(out.relative, d / std::abs(r(i, j)));
            }
        }
    }
    return out;
}

} // namespace bbmdg::test
