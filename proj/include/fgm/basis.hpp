#pragma once

#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <string>
#include <vector>

#include "fgm/dataset.hpp"
#include "fgm/errors.hpp"
#include "fgm/grid.hpp"

namespace fgm {

enum class BasisKind { fourier, bspline, fpca, custom };

inline const char* to_string(BasisKind k) {
    switch (k) {
        case BasisKind::fourier: return "fourier";
        case BasisKind::bspline: return "bspline";
        case BasisKind::fpca: return "fpca";
        case BasisKind::custom: return "custom";
    }
    return "?";
}

// M functions evaluated on a shared grid, orthonormal under the grid's
// rectangle-rule inner product.  functions.row(m) is the m-th basis function.
// eigenvalues is filled for FPCA bases only (descending component variances).
struct BasisSet {
    BasisKind kind = BasisKind::custom;
    Eigen::MatrixXd functions; // M x T
    Grid grid;
    Eigen::VectorXd eigenvalues; // empty unless kind == fpca

    Eigen::Index M() const { return functions.rows(); }

    // ||Gram - I||_max under the quadrature inner product.
    double gram_error() const {
        const Eigen::MatrixXd gram = grid.dt() * (functions * functions.transpose());
        return (gram - Eigen::MatrixXd::Identity(M(), M())).cwiseAbs().maxCoeff();
    }

    void validate(double tol = 1e-8) const {
        grid.validate();
        if (functions.rows() < 1) throw ValidationError("BasisSet: empty basis");
        if (functions.cols() != grid.size())
            throw DimensionError("BasisSet: " + std::to_string(functions.cols()) + " columns vs grid size " +
                                 std::to_string(grid.size()));
        const double err = gram_error();
        if (!(err <= tol))
            throw NumericalError("BasisSet: Gram deviates from identity by " + std::to_string(err));
    }
};

// phi_1 = 1/sqrt(b-a), phi_2k = sqrt(2/(b-a)) sin(2 pi k u), phi_2k+1 the
// matching cosine, with u = (t - a)/(b - a).  Exactly orthonormal on midpoint
// grids while the frequencies stay below the aliasing limit.
inline BasisSet fourier_basis(Eigen::Index M, const Grid& grid) {
    grid.validate();
    if (M < 1) throw ValidationError("fourier_basis: M must be positive");
    if (M > grid.size())
        throw RankError("fourier_basis: M=" + std::to_string(M) + " exceeds grid size " + std::to_string(grid.size()));
    BasisSet basis;
    basis.kind = BasisKind::fourier;
    basis.grid = grid;
    basis.functions.resize(M, grid.size());
    const double span = grid.b - grid.a;
    constexpr double two_pi = 6.283185307179586476925286766559;
    const double unit = 1.0 / std::sqrt(span);
    const double wave = std::sqrt(2.0 / span);
    for (Eigen::Index k = 0; k < grid.size(); ++k) {
        const double u = (grid.points[k] - grid.a) / span;
        for (Eigen::Index m = 0; m < M; ++m) {
            if (m == 0) {
                basis.functions(m, k) = unit;
            } else {
                const double freq = static_cast<double>((m + 1) / 2);
                basis.functions(m, k) =
                    (m % 2 == 1) ? wave * std::sin(two_pi * freq * u) : wave * std::cos(two_pi * freq * u);
            }
        }
    }
    const double err = basis.gram_error();
    if (!(err <= 1e-8))
        throw RankError("fourier_basis: M=" + std::to_string(M) + " aliases on a grid of " +
                        std::to_string(grid.size()) + " points (Gram error " + std::to_string(err) + ")");
    return basis;
}

// Orthonormalizes the rows of `raw` under the grid inner product.  Modified
// Gram-Schmidt with a second pass; a residual below 1e-10 of the original row
// norm flags the offending row as linearly dependent.
inline BasisSet gram_schmidt(const Eigen::MatrixXd& raw, const Grid& grid, BasisKind kind = BasisKind::custom) {
    grid.validate();
    if (raw.rows() < 1) throw ValidationError("gram_schmidt: no input functions");
    if (raw.cols() != grid.size())
        throw DimensionError("gram_schmidt: " + std::to_string(raw.cols()) + " columns vs grid size " +
                             std::to_string(grid.size()));
    if (raw.rows() > grid.size())
        throw RankError("gram_schmidt: " + std::to_string(raw.rows()) + " functions exceed grid size " +
                        std::to_string(grid.size()));
    BasisSet basis;
    basis.kind = kind;
    basis.grid = grid;
    basis.functions = raw;
    const double dt = grid.dt();
    auto dot = [&](Eigen::Index i, Eigen::Index j) { return dt * basis.functions.row(i).dot(basis.functions.row(j)); };
    for (Eigen::Index m = 0; m < basis.functions.rows(); ++m) {
        const double original = std::sqrt(dt) * raw.row(m).norm();
        for (int pass = 0; pass < 2; ++pass)
            for (Eigen::Index l = 0; l < m; ++l)
                basis.functions.row(m) -= dot(m, l) * basis.functions.row(l);
        const double nrm = std::sqrt(dot(m, m));
        if (!(nrm > 1e-10 * std::max(1.0, original)))
            throw RankError("gram_schmidt: function " + std::to_string(m) + " is linearly dependent on its predecessors");
        basis.functions.row(m) /= nrm;
    }
    return basis;
}

namespace detail {

// Cox-de Boor evaluation of all M clamped B-splines of the given degree on a
// uniform knot vector over [a, b].
inline Eigen::MatrixXd bspline_raw(Eigen::Index M, int degree, const Grid& grid) {
    const Eigen::Index n_knots = M + degree + 1;
    std::vector<double> knots(static_cast<std::size_t>(n_knots));
    const Eigen::Index interior = M - degree - 1;
    for (Eigen::Index i = 0; i < n_knots; ++i) {
        if (i <= degree)
            knots[static_cast<std::size_t>(i)] = grid.a;
        else if (i >= M)
            knots[static_cast<std::size_t>(i)] = grid.b;
        else
            knots[static_cast<std::size_t>(i)] =
                grid.a + (grid.b - grid.a) * static_cast<double>(i - degree) / static_cast<double>(interior + 1);
    }
    Eigen::MatrixXd out(M, grid.size());
    std::vector<double> level(static_cast<std::size_t>(n_knots - 1));
    for (Eigen::Index k = 0; k < grid.size(); ++k) {
        const double t = grid.points[k];
        for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
            const bool last_span = knots[i] < grid.b && knots[i + 1] >= grid.b;
            level[i] = (t >= knots[i] && (t < knots[i + 1] || (last_span && t <= grid.b))) ? 1.0 : 0.0;
        }
        for (int d = 1; d <= degree; ++d) {
            for (std::size_t i = 0; i + static_cast<std::size_t>(d) + 1 < knots.size(); ++i) {
                const double den1 = knots[i + static_cast<std::size_t>(d)] - knots[i];
                const double den2 = knots[i + static_cast<std::size_t>(d) + 1] - knots[i + 1];
                double v = 0.0;
                if (den1 > 0.0) v += (t - knots[i]) / den1 * level[i];
                if (den2 > 0.0) v += (knots[i + static_cast<std::size_t>(d) + 1] - t) / den2 * level[i + 1];
                level[i] = v;
            }
        }
        for (Eigen::Index m = 0; m < M; ++m) out(m, k) = level[static_cast<std::size_t>(m)];
    }
    return out;
}

} // namespace detail

// M cubic (by default) B-splines on a clamped uniform knot vector, then
// orthonormalized.  Spans all polynomials up to `degree` exactly.
inline BasisSet bspline_basis(Eigen::Index M, const Grid& grid, int degree = 3) {
    grid.validate();
    if (degree < 0) throw ValidationError("bspline_basis: negative degree");
    if (M < degree + 1)
        throw ValidationError("bspline_basis: need M >= degree+1, got M=" + std::to_string(M) + " for degree " +
                              std::to_string(degree));
    if (M > grid.size())
        throw RankError("bspline_basis: M=" + std::to_string(M) + " exceeds grid size " + std::to_string(grid.size()));
    return gram_schmidt(detail::bspline_raw(M, degree, grid), grid, BasisKind::bspline);
}

// Eigendecomposition of the sampled covariance operator of one node.
// values is n x T (assumed centered); the m-th eigenvalue equals the variance
// of the m-th score under the quadrature inner product.  Eigenfunctions have
// unit quadrature norm and their largest-magnitude grid value is positive.
inline BasisSet estimate_fpca(const Eigen::MatrixXd& values, const Grid& grid, Eigen::Index M) {
    grid.validate();
    if (values.rows() < 1) throw ValidationError("estimate_fpca: no samples");
    if (values.cols() != grid.size())
        throw DimensionError("estimate_fpca: " + std::to_string(values.cols()) + " columns vs grid size " +
                             std::to_string(grid.size()));
    if (!values.allFinite()) throw NumericalError("estimate_fpca: non-finite values");
    if (M < 1) throw ValidationError("estimate_fpca: M must be positive");
    if (M > grid.size())
        throw RankError("estimate_fpca: M=" + std::to_string(M) + " exceeds grid size " + std::to_string(grid.size()));

    const double dt = grid.dt();
    const Eigen::MatrixXd cov =
        (dt / static_cast<double>(values.rows())) * (values.transpose() * values);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    if (eig.info() != Eigen::Success) throw NumericalError("estimate_fpca: eigendecomposition failed");

    const Eigen::Index T = grid.size();
    const double top = eig.eigenvalues()[T - 1];
    if (!(top > 0.0)) throw RankError("estimate_fpca: covariance has no positive eigenvalue");
    const double floor = top * 1e-10;

    BasisSet basis;
    basis.kind = BasisKind::fpca;
    basis.grid = grid;
    basis.functions.resize(M, T);
    basis.eigenvalues.resize(M);
    for (Eigen::Index m = 0; m < M; ++m) {
        const double lambda = eig.eigenvalues()[T - 1 - m];
        if (!(lambda > floor))
            throw RankError("estimate_fpca: M=" + std::to_string(M) + " exceeds numerical rank " + std::to_string(m));
        basis.eigenvalues[m] = lambda;
        Eigen::VectorXd phi = eig.eigenvectors().col(T - 1 - m) / std::sqrt(dt);
        Eigen::Index imax = 0;
        phi.cwiseAbs().maxCoeff(&imax);
        if (phi[imax] < 0.0) phi = -phi;
        basis.functions.row(m) = phi.transpose();
    }
    return basis;
}

// Quadrature projection of every sample curve onto a basis: (n x T)(T x M) dt.
inline Eigen::MatrixXd project_onto(const Eigen::MatrixXd& values, const BasisSet& basis) {
    if (values.cols() != basis.functions.cols())
        throw DimensionError("project_onto: " + std::to_string(values.cols()) + " grid values vs basis on " +
                             std::to_string(basis.functions.cols()));
    return basis.grid.dt() * (values * basis.functions.transpose());
}

enum class BasisMode { fpca_gy, fpca_gx, fixed };

inline const char* to_string(BasisMode m) {
    switch (m) {
        case BasisMode::fpca_gy: return "fpca_gy";
        case BasisMode::fpca_gx: return "fpca_gx";
        case BasisMode::fixed: return "fixed";
    }
    return "?";
}

inline BasisMode basis_mode_from_string(const std::string& s) {
    if (s == "fpca_gy") return BasisMode::fpca_gy;
    if (s == "fpca_gx") return BasisMode::fpca_gx;
    if (s == "fixed") return BasisMode::fixed;
    throw ValidationError("unknown basis mode \"" + s + "\" (expected fpca_gy, fpca_gx or fixed)");
}

// Projection scores for one target node's regression.  x_scores[i] belongs to
// original node x_nodes[i] (the target is skipped, so x_nodes[i] = i for
// i < target and i + 1 afterwards).  y_basis is the basis the target was
// projected onto, kept so predicted scores can be mapped back to curves.
struct ScoreMatrices {
    Eigen::MatrixXd y_scores;              // n x M
    std::vector<Eigen::MatrixXd> x_scores; // p-1 entries, each n x M
    std::vector<Eigen::Index> x_nodes;
    Eigen::Index target = 0;
    BasisMode mode = BasisMode::fpca_gy;
    BasisSet y_basis;
};

// Scores for the target-node regression under the chosen basis strategy:
//   fpca_gy  every node projected onto the target's M leading eigenfunctions
//   fpca_gx  every node projected onto its own M leading eigenfunctions
//   fixed    every node projected onto the first M rows of `fixed_basis`
inline ScoreMatrices project_scores(const FunctionalDataset& ds, Eigen::Index target, BasisMode mode, Eigen::Index M,
                                    const BasisSet* fixed_basis = nullptr) {
    ds.validate();
    if (target < 0 || target >= ds.p())
        throw ValidationError("project_scores: target " + std::to_string(target) + " out of range for p=" +
                              std::to_string(ds.p()));
    if (ds.p() < 2) throw ValidationError("project_scores: need at least 2 nodes");
    if (M < 1) throw ValidationError("project_scores: M must be positive");

    ScoreMatrices out;
    out.target = target;
    out.mode = mode;

    auto scores_with = [&](Eigen::Index node, const BasisSet& basis) {
        return project_onto(ds.values[static_cast<std::size_t>(node)], basis);
    };

    if (mode == BasisMode::fixed) {
        if (fixed_basis == nullptr) throw ValidationError("project_scores: fixed mode needs a basis");
        fixed_basis->validate();
        if (!fixed_basis->grid.same_as(ds.grid)) throw DimensionError("project_scores: fixed basis grid differs from data grid");
        if (fixed_basis->M() < M)
            throw ValidationError("project_scores: fixed basis has " + std::to_string(fixed_basis->M()) +
                                  " functions, need M=" + std::to_string(M));
        BasisSet head = *fixed_basis;
        head.functions = fixed_basis->functions.topRows(M);
        head.eigenvalues.resize(0);
        out.y_basis = head;
        for (Eigen::Index j = 0; j < ds.p(); ++j) {
            const Eigen::MatrixXd s = scores_with(j, head);
            if (j == target) {
                out.y_scores = s;
            } else {
                out.x_scores.push_back(s);
                out.x_nodes.push_back(j);
            }
        }
        return out;
    }

    if (mode == BasisMode::fpca_gy) {
        const BasisSet basis = estimate_fpca(ds.values[static_cast<std::size_t>(target)], ds.grid, M);
        out.y_basis = basis;
        for (Eigen::Index j = 0; j < ds.p(); ++j) {
            const Eigen::MatrixXd s = scores_with(j, basis);
            if (j == target) {
                out.y_scores = s;
            } else {
                out.x_scores.push_back(s);
                out.x_nodes.push_back(j);
            }
        }
        return out;
    }

    for (Eigen::Index j = 0; j < ds.p(); ++j) {
        const BasisSet basis = estimate_fpca(ds.values[static_cast<std::size_t>(j)], ds.grid, M);
        const Eigen::MatrixXd s = scores_with(j, basis);
        if (j == target) {
            out.y_scores = s;
            out.y_basis = basis;
        } else {
            out.x_scores.push_back(s);
            out.x_nodes.push_back(j);
        }
    }
    return out;
}

} // namespace fgm
