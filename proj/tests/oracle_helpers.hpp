// Reference implementations shared by the unit and acceptance suites.  These
// deliberately avoid the library's ADMM machinery so they can serve as an
// independent check on it.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "fgm/group_lasso.hpp"
#include "fgm/rng.hpp"

// Independent reference solver: accelerated proximal gradient on the stacked
// design with an exact Lipschitz step and adaptive restart.
inline std::vector<Eigen::MatrixXd> prox_gradient_oracle(const fgm::GroupLassoProblem& prob, double lambda,
                                                         int iters) {
    const Eigen::Index n = prob.n(), M = prob.M(), K = prob.K();
    Eigen::MatrixXd xs(n, K * M);
    for (Eigen::Index k = 0; k < K; ++k) xs.middleCols(k * M, M) = prob.x[static_cast<std::size_t>(k)];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(xs.transpose() * xs / static_cast<double>(n));
    const double step = 1.0 / std::max(eig.eigenvalues().maxCoeff(), 1e-300);

    auto unstack = [&](const Eigen::MatrixXd& b) {
        std::vector<Eigen::MatrixXd> out(static_cast<std::size_t>(K));
        for (Eigen::Index k = 0; k < K; ++k) out[static_cast<std::size_t>(k)] = b.middleRows(k * M, M);
        return out;
    };

    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(K * M, M), b_prev = b, z = b;
    double theta = 1.0, f_prev = fgm::objective(prob, unstack(b), lambda);
    for (int it = 0; it < iters; ++it) {
        const Eigen::MatrixXd grad = xs.transpose() * (xs * z - prob.y) / static_cast<double>(n);
        Eigen::MatrixXd w = z - step * grad;
        for (Eigen::Index k = 0; k < K; ++k) {
            auto blk = w.middleRows(k * M, M);
            const double wn = blk.norm();
            blk *= (wn > step * lambda) ? (1.0 - step * lambda / wn) : 0.0;
        }
        b_prev.swap(b);
        b = w;
        const double theta_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta * theta));
        z = b + ((theta - 1.0) / theta_next) * (b - b_prev);
        theta = theta_next;
        if (it % 100 == 99) {
            const double f = fgm::objective(prob, unstack(b), lambda);
            if (f > f_prev) { // restart the momentum
                z = b;
                theta = 1.0;
            } else if (f_prev - f < 1e-15 * std::max(1.0, std::abs(f))) {
                break;
            }
            f_prev = f;
        }
    }
    return unstack(b);
}

inline fgm::GroupLassoProblem random_problem(fgm::Rng& rng, Eigen::Index n, Eigen::Index M, Eigen::Index K,
                                             Eigen::Index active, double noise) {
    fgm::GroupLassoProblem prob;
    prob.x.resize(static_cast<std::size_t>(K));
    for (auto& xk : prob.x) {
        xk.resize(n, M);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index m = 0; m < M; ++m) xk(i, m) = rng.normal();
    }
    prob.y = Eigen::MatrixXd::Zero(n, M);
    for (Eigen::Index k = 0; k < active; ++k) {
        Eigen::MatrixXd bk(M, M);
        for (Eigen::Index i = 0; i < M; ++i)
            for (Eigen::Index m = 0; m < M; ++m) bk(i, m) = rng.normal();
        prob.y += prob.x[static_cast<std::size_t>(k)] * bk;
    }
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index m = 0; m < M; ++m) prob.y(i, m) += noise * rng.normal();
    return prob;
}

inline fgm::AdmmConfig tight_config() {
    fgm::AdmmConfig c;
    c.eps_abs = 1e-9;
    c.eps_rel = 1e-11;
    c.max_iter = 50000;
    return c;
}
