#pragma once

#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <cmath>
#include <string>
#include <vector>

#include "fgm/errors.hpp"

namespace fgm {

// Group-lasso regression of one response score matrix on K predictor score
// matrices:
//   min_B  1/(2n) ||Y - sum_k X_k B_k||_F^2 + lambda sum_k ||B_k||_F
// with Y n x M and each X_k n x M, B_k M x M.
struct GroupLassoProblem {
    Eigen::MatrixXd y;                // n x M
    std::vector<Eigen::MatrixXd> x;   // K matrices, n x M

    Eigen::Index n() const { return y.rows(); }
    Eigen::Index M() const { return y.cols(); }
    Eigen::Index K() const { return static_cast<Eigen::Index>(x.size()); }

    void validate() const {
        if (y.rows() < 1 || y.cols() < 1) throw ValidationError("GroupLassoProblem: empty response");
        if (x.empty()) throw ValidationError("GroupLassoProblem: no predictor groups");
        if (!y.allFinite()) throw NumericalError("GroupLassoProblem: non-finite response");
        for (std::size_t k = 0; k < x.size(); ++k) {
            if (x[k].rows() != y.rows() || x[k].cols() != y.cols())
                throw DimensionError("GroupLassoProblem: group " + std::to_string(k) + " is " +
                                     std::to_string(x[k].rows()) + "x" + std::to_string(x[k].cols()) +
                                     ", expected " + std::to_string(y.rows()) + "x" + std::to_string(y.cols()));
            if (!x[k].allFinite())
                throw NumericalError("GroupLassoProblem: group " + std::to_string(k) + " has non-finite values");
        }
    }
};

struct AdmmConfig {
    double eps_abs = 1e-4;
    double eps_rel = 1e-3;
    double rho0 = 1.0;
    double phi = 10.0;       // residual-imbalance trigger
    double tau_incr = 2.0;
    double tau_decr = 2.0;
    int max_iter = 5000;
    double bisection_tol = 1e-10;
    int bisection_max = 200;

    void validate() const {
        if (!(eps_abs > 0.0) || !(eps_rel >= 0.0)) throw ValidationError("AdmmConfig: tolerances must be positive");
        if (!(rho0 > 0.0)) throw ValidationError("AdmmConfig: rho0 must be positive");
        if (!(phi > 1.0)) throw ValidationError("AdmmConfig: phi must exceed 1");
        if (!(tau_incr > 1.0) || !(tau_decr > 1.0)) throw ValidationError("AdmmConfig: tau factors must exceed 1");
        if (max_iter < 1) throw ValidationError("AdmmConfig: max_iter must be positive");
        if (!(bisection_tol > 0.0) || bisection_max < 1) throw ValidationError("AdmmConfig: bad bisection settings");
    }
};

struct AdmmResiduals {
    double primal = 0.0;
    double dual = 0.0;
    double eps_pri = 0.0;
    double eps_dual = 0.0;

    bool converged() const { return primal <= eps_pri && dual <= eps_dual; }
};

// Iterate state for the consensus ADMM on the stacked design.  In addition to
// the solution variables (P, q_bar, u, rho) it caches per-group
// eigendecompositions of X_k^T X_k and maintains the K*M-dimensional images
// X^T q_bar, X^T u, X^T axp_bar by exact recurrences so that one iteration
// costs two n x KM GEMMs instead of four (the u image is resynced by a real
// product every 128 iterations to bound rounding drift).
struct AdmmState {
    std::vector<Eigen::MatrixXd> P; // K blocks, M x M
    Eigen::MatrixXd q_bar;          // n x M
    Eigen::MatrixXd u;              // n x M (scaled dual)
    double rho = 1.0;
    long iter_count = 0;

    Eigen::MatrixXd xstack;            // n x K*M
    Eigen::MatrixXd xty;               // K*M x M
    std::vector<Eigen::MatrixXd> gram; // S_k = X_k^T X_k
    std::vector<Eigen::MatrixXd> psi;  // eigenvectors of S_k
    std::vector<Eigen::VectorXd> lam;  // eigenvalues of S_k (ascending)

    Eigen::MatrixXd axp_bar; // n x M, (1/K) sum_k X_k P_k at the current iterate
    Eigen::MatrixXd a_img;   // X^T axp_bar
    Eigen::MatrixXd u_img;   // X^T u
    Eigen::MatrixXd q_img;   // X^T q_bar

    Eigen::MatrixXd pstack;  // K*M x M work
};

inline AdmmState make_admm_state(const GroupLassoProblem& prob, const AdmmConfig& config = {}) {
    prob.validate();
    config.validate();
    const Eigen::Index n = prob.n(), M = prob.M(), K = prob.K();
    AdmmState st;
    st.P.assign(static_cast<std::size_t>(K), Eigen::MatrixXd::Zero(M, M));
    st.q_bar = Eigen::MatrixXd::Zero(n, M);
    st.u = Eigen::MatrixXd::Zero(n, M);
    st.rho = config.rho0;
    st.xstack.resize(n, K * M);
    for (Eigen::Index k = 0; k < K; ++k) st.xstack.middleCols(k * M, M) = prob.x[static_cast<std::size_t>(k)];
    st.xty.noalias() = st.xstack.transpose() * prob.y;
    st.gram.resize(static_cast<std::size_t>(K));
    st.psi.resize(static_cast<std::size_t>(K));
    st.lam.resize(static_cast<std::size_t>(K));
    for (Eigen::Index k = 0; k < K; ++k) {
        auto& S = st.gram[static_cast<std::size_t>(k)];
        S.noalias() = prob.x[static_cast<std::size_t>(k)].transpose() * prob.x[static_cast<std::size_t>(k)];
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(S);
        if (eig.info() != Eigen::Success)
            throw NumericalError("make_admm_state: eigendecomposition failed for group " + std::to_string(k));
        st.psi[static_cast<std::size_t>(k)] = eig.eigenvectors();
        st.lam[static_cast<std::size_t>(k)] = eig.eigenvalues();
    }
    st.axp_bar = Eigen::MatrixXd::Zero(n, M);
    st.a_img = Eigen::MatrixXd::Zero(K * M, M);
    st.u_img = Eigen::MatrixXd::Zero(K * M, M);
    st.q_img = Eigen::MatrixXd::Zero(K * M, M);
    st.pstack = Eigen::MatrixXd::Zero(K * M, M);
    return st;
}

// Largest lambda with a fully sparse solution: max_k ||X_k^T Y||_F / n.
inline double lambda_max(const GroupLassoProblem& prob) {
    prob.validate();
    double best = 0.0;
    for (const auto& xk : prob.x) best = std::max(best, (xk.transpose() * prob.y).norm());
    return best / static_cast<double>(prob.n());
}

inline double objective(const GroupLassoProblem& prob, const std::vector<Eigen::MatrixXd>& B, double lambda) {
    prob.validate();
    if (static_cast<Eigen::Index>(B.size()) != prob.K())
        throw DimensionError("objective: " + std::to_string(B.size()) + " blocks for K=" + std::to_string(prob.K()));
    Eigen::MatrixXd resid = prob.y;
    double penalty = 0.0;
    for (std::size_t k = 0; k < B.size(); ++k) {
        if (B[k].rows() != prob.M() || B[k].cols() != prob.M())
            throw DimensionError("objective: block " + std::to_string(k) + " has wrong shape");
        resid.noalias() -= prob.x[k] * B[k];
        penalty += B[k].norm();
    }
    return resid.squaredNorm() / (2.0 * static_cast<double>(prob.n())) + lambda * penalty;
}

// Largest violation of the stationarity conditions at B:
//   nonzero block:  || (1/n) X_k^T R - lambda B_k / ||B_k|| ||_F
//   zero block:     max(0, || (1/n) X_k^T R ||_F - lambda)
// with R the fit residual.
inline double kkt_max_violation(const GroupLassoProblem& prob, const std::vector<Eigen::MatrixXd>& B, double lambda) {
    prob.validate();
    Eigen::MatrixXd resid = prob.y;
    for (std::size_t k = 0; k < B.size(); ++k) resid.noalias() -= prob.x[k] * B[k];
    double worst = 0.0;
    for (std::size_t k = 0; k < B.size(); ++k) {
        const Eigen::MatrixXd g = prob.x[k].transpose() * resid / static_cast<double>(prob.n());
        const double bn = B[k].norm();
        if (bn > 0.0)
            worst = std::max(worst, (g - (lambda / bn) * B[k]).norm());
        else
            worst = std::max(worst, std::max(0.0, g.norm() - lambda));
    }
    return worst;
}

namespace detail {

// Solves nu * ||(Lambda + nu I)^-1 W||_F = target for nu > 0 by bisection.
// The stated upper end need not bracket when the eigenvalues are spread, so it
// is doubled until it does (bounded by bisection_max expansions).
inline double bisect_nu(const Eigen::VectorXd& lam, const Eigen::MatrixXd& w, double target,
                        const AdmmConfig& config) {
    auto shrunk_norm = [&](double nu) {
        double acc = 0.0;
        for (Eigen::Index i = 0; i < lam.size(); ++i) acc += w.row(i).squaredNorm() / ((lam[i] + nu) * (lam[i] + nu));
        return nu * std::sqrt(acc);
    };
    double nu_lo = 0.0;
    double nu_hi = w.norm() / target;
    int expansions = 0;
    while (shrunk_norm(nu_hi) < target) {
        nu_lo = nu_hi;
        nu_hi *= 2.0;
        if (++expansions > config.bisection_max)
            throw NumericalError("bisect_nu: failed to bracket the shrinkage root");
    }
    double nu_c = 0.5 * (nu_lo + nu_hi);
    for (int it = 0; it < config.bisection_max; ++it) {
        nu_c = 0.5 * (nu_lo + nu_hi);
        if (shrunk_norm(nu_c) > target)
            nu_hi = nu_c;
        else
            nu_lo = nu_c;
        if (nu_hi - nu_lo <= config.bisection_tol * std::max(1.0, nu_hi)) break;
    }
    return 0.5 * (nu_lo + nu_hi);
}

} // namespace detail

// One ADMM sweep (P blocks, then the averaged Q, then the scaled dual U) with
// the residuals evaluated at the new iterate.
inline AdmmResiduals admm_iterate(const GroupLassoProblem& prob, double lambda, const AdmmConfig& config,
                                  AdmmState& st) {
    const Eigen::Index n = prob.n(), M = prob.M(), K = prob.K();
    const double rho = st.rho;
    const double threshold = lambda / rho;

    // P-step: G_k = X_k^T V_k = S_k P_k + X_k^T (q_bar - axp_bar - u).
    const Eigen::MatrixXd h_img = st.q_img - st.a_img - st.u_img;
    Eigen::MatrixXd g(M, M), w(M, M), shrunk(M, M);
    for (Eigen::Index k = 0; k < K; ++k) {
        const auto ku = static_cast<std::size_t>(k);
        g.noalias() = st.gram[ku] * st.P[ku];
        g += h_img.middleRows(k * M, M);
        w.noalias() = st.psi[ku].transpose() * g;
        const double wn = w.norm();
        if (lambda > 0.0 && wn <= threshold) {
            st.P[ku].setZero();
        } else if (lambda == 0.0) {
            // Least-squares block via the pseudo-inverse of S_k.
            const double floor = st.lam[ku][M - 1] * 1e-12;
            for (Eigen::Index i = 0; i < M; ++i)
                shrunk.row(i) = (st.lam[ku][i] > floor) ? (w.row(i) / st.lam[ku][i]).eval()
                                                        : Eigen::RowVectorXd::Zero(M).eval();
            st.P[ku].noalias() = st.psi[ku] * shrunk;
        } else {
            const double nu = detail::bisect_nu(st.lam[ku], w, threshold, config);
            for (Eigen::Index i = 0; i < M; ++i) shrunk.row(i) = w.row(i) / (st.lam[ku][i] + nu);
            st.P[ku].noalias() = st.psi[ku] * shrunk;
        }
        st.pstack.middleRows(k * M, M) = st.P[ku];
    }

    st.axp_bar.noalias() = st.xstack * st.pstack;
    st.axp_bar /= static_cast<double>(K);
    st.a_img.noalias() = st.xstack.transpose() * st.axp_bar;

    // Q-step, mirrored in the KM-dimensional image space.
    const double denom = static_cast<double>(K) + rho * static_cast<double>(n);
    const Eigen::MatrixXd q_img_old = st.q_img;
    st.q_bar = (prob.y + rho * static_cast<double>(n) * (st.axp_bar + st.u)) / denom;
    st.q_img = (st.xty + rho * static_cast<double>(n) * (st.a_img + st.u_img)) / denom;

    // U-step.
    st.u += st.axp_bar - st.q_bar;
    st.u_img += st.a_img - st.q_img;
    ++st.iter_count;
    if (st.iter_count % 128 == 0) st.u_img.noalias() = st.xstack.transpose() * st.u;

    AdmmResiduals res;
    res.primal = std::sqrt(static_cast<double>(K)) * (st.axp_bar - st.q_bar).norm();
    res.dual = rho * (st.q_img - q_img_old).norm();
    res.eps_pri = std::sqrt(static_cast<double>(K)) * config.eps_abs +
                  config.eps_rel * std::max(st.axp_bar.norm(), st.q_bar.norm());
    res.eps_dual = std::sqrt(static_cast<double>(n)) * config.eps_abs + config.eps_rel * rho * st.u_img.norm();
    return res;
}

// Residual-balancing rho adaptation; the scaled dual is rescaled so the
// underlying multiplier is unchanged.  Returns whether rho moved.
inline bool update_rho(AdmmState& st, const AdmmResiduals& res, const AdmmConfig& config) {
    double rho_new = st.rho;
    if (res.primal > config.phi * res.dual)
        rho_new = st.rho * config.tau_incr;
    else if (res.dual > config.phi * res.primal)
        rho_new = st.rho / config.tau_decr;
    if (rho_new == st.rho) return false;
    const double scale = st.rho / rho_new;
    st.u *= scale;
    st.u_img *= scale;
    st.rho = rho_new;
    return true;
}

struct GroupLassoSolution {
    std::vector<Eigen::MatrixXd> B;
    Eigen::VectorXd block_norms;
    double objective = 0.0;
    double lambda = 0.0;
    double rho = 0.0;
    int iterations = 0;
    bool converged = false;
};

// Full solve at one lambda.  When `warm` is passed, iterations start from its
// (P, q_bar, u, rho) and the updated state is left there for the next lambda
// on a path.
inline GroupLassoSolution solve_admm(const GroupLassoProblem& prob, double lambda, const AdmmConfig& config = {},
                                     AdmmState* warm = nullptr) {
    prob.validate();
    config.validate();
    if (!(lambda >= 0.0) || !std::isfinite(lambda))
        throw ValidationError("solve_admm: lambda must be finite and non-negative");

    AdmmState local;
    AdmmState* st = warm;
    if (st == nullptr) {
        local = make_admm_state(prob, config);
        st = &local;
    } else if (st->xstack.rows() != prob.n() || st->xstack.cols() != prob.K() * prob.M()) {
        throw DimensionError("solve_admm: warm state does not match the problem dimensions");
    }

    GroupLassoSolution sol;
    sol.lambda = lambda;

    // Certificate: at lambda >= max_k ||X_k^T Y||_F / n the zero solution is
    // exactly optimal, so it is returned without iterating toward it.
    if (lambda > 0.0 && lambda >= lambda_max(prob)) {
        sol.B.assign(static_cast<std::size_t>(prob.K()), Eigen::MatrixXd::Zero(prob.M(), prob.M()));
        sol.block_norms = Eigen::VectorXd::Zero(prob.K());
        sol.objective = objective(prob, sol.B, lambda);
        sol.rho = st->rho;
        sol.converged = true;
        return sol;
    }

    for (int h = 1; h <= config.max_iter; ++h) {
        const AdmmResiduals res = admm_iterate(prob, lambda, config, *st);
        sol.iterations = h;
        if (res.converged()) {
            sol.converged = true;
            break;
        }
        update_rho(*st, res, config);
    }

    sol.B = st->P;
    sol.block_norms.resize(prob.K());
    for (Eigen::Index k = 0; k < prob.K(); ++k) sol.block_norms[k] = sol.B[static_cast<std::size_t>(k)].norm();
    sol.objective = objective(prob, sol.B, lambda);
    sol.rho = st->rho;
    return sol;
}

struct RestrictedLsResult {
    std::vector<Eigen::MatrixXd> B; // K blocks, zero off the support
    bool rank_deficient = false;
};

// Unpenalized least squares restricted to the given support blocks; the
// minimum-norm solution is taken when the stacked design is rank deficient.
inline RestrictedLsResult restricted_least_squares(const GroupLassoProblem& prob,
                                                   const std::vector<Eigen::Index>& support) {
    prob.validate();
    const Eigen::Index M = prob.M();
    RestrictedLsResult out;
    out.B.assign(static_cast<std::size_t>(prob.K()), Eigen::MatrixXd::Zero(M, M));
    if (support.empty()) return out;
    for (Eigen::Index k : support)
        if (k < 0 || k >= prob.K())
            throw ValidationError("restricted_least_squares: support index " + std::to_string(k) + " out of range");

    Eigen::MatrixXd xs(prob.n(), static_cast<Eigen::Index>(support.size()) * M);
    for (std::size_t s = 0; s < support.size(); ++s)
        xs.middleCols(static_cast<Eigen::Index>(s) * M, M) = prob.x[static_cast<std::size_t>(support[s])];
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(xs);
    if (cod.rank() < xs.cols()) out.rank_deficient = true;
    const Eigen::MatrixXd bstack = cod.solve(prob.y);
    for (std::size_t s = 0; s < support.size(); ++s)
        out.B[static_cast<std::size_t>(support[s])] = bstack.middleRows(static_cast<Eigen::Index>(s) * M, M);
    return out;
}

} // namespace fgm
