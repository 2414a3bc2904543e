#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "fgm/basis.hpp"
#include "fgm/errors.hpp"
#include "fgm/group_lasso.hpp"
#include "fgm/neighborhood.hpp"
#include "fgm/rng.hpp"

namespace fgm {

// Descending log-spaced path positions t in (0, 1]; the per-node penalty is
// lambda = t * lambda_max(node).
inline std::vector<double> lambda_grid(int n_points = 50, double t_max = 1.0, double t_min = 0.01) {
    if (n_points < 1) throw ValidationError("lambda_grid: need at least one point");
    if (!(t_min > 0.0) || !(t_min <= t_max) || !(t_max <= 1.0))
        throw ValidationError("lambda_grid: need 0 < t_min <= t_max <= 1");
    std::vector<double> t(static_cast<std::size_t>(n_points));
    if (n_points == 1) {
        t[0] = t_max;
        return t;
    }
    const double lo = std::log(t_min), hi = std::log(t_max);
    for (int i = 0; i < n_points; ++i)
        t[static_cast<std::size_t>(i)] =
            std::exp(hi + (lo - hi) * static_cast<double>(i) / static_cast<double>(n_points - 1));
    t.front() = t_max;
    t.back() = t_min;
    return t;
}

// Warm-started group-lasso path over a descending t grid.
struct PathResult {
    double lambda_max = 0.0;
    std::vector<double> t_values;
    std::vector<double> lambdas;
    Eigen::MatrixXd block_norms; // n_t x K
    std::vector<int> iterations;
    std::vector<char> converged;
};

inline PathResult run_path(const GroupLassoProblem& prob, const std::vector<double>& t_values,
                           const AdmmConfig& config = {}) {
    prob.validate();
    if (t_values.empty()) throw ValidationError("run_path: empty t grid");
    for (std::size_t i = 1; i < t_values.size(); ++i)
        if (!(t_values[i] <= t_values[i - 1])) throw ValidationError("run_path: t grid must be non-increasing");
    PathResult out;
    out.lambda_max = lambda_max(prob);
    out.t_values = t_values;
    out.lambdas.resize(t_values.size());
    out.block_norms.resize(static_cast<Eigen::Index>(t_values.size()), prob.K());
    out.iterations.resize(t_values.size());
    out.converged.resize(t_values.size());
    AdmmState state = make_admm_state(prob, config);
    for (std::size_t i = 0; i < t_values.size(); ++i) {
        const double lam = t_values[i] * out.lambda_max;
        const GroupLassoSolution sol = solve_admm(prob, lam, config, &state);
        out.lambdas[i] = lam;
        out.block_norms.row(static_cast<Eigen::Index>(i)) = sol.block_norms.transpose();
        out.iterations[i] = sol.iterations;
        out.converged[i] = sol.converged ? 1 : 0;
    }
    return out;
}

namespace detail {

inline GroupLassoProblem subset_problem(const GroupLassoProblem& prob, const std::vector<Eigen::Index>& rows) {
    GroupLassoProblem sub;
    sub.y.resize(static_cast<Eigen::Index>(rows.size()), prob.M());
    for (std::size_t r = 0; r < rows.size(); ++r) sub.y.row(static_cast<Eigen::Index>(r)) = prob.y.row(rows[r]);
    sub.x.resize(prob.x.size());
    for (std::size_t k = 0; k < prob.x.size(); ++k) {
        sub.x[k].resize(static_cast<Eigen::Index>(rows.size()), prob.M());
        for (std::size_t r = 0; r < rows.size(); ++r) sub.x[k].row(static_cast<Eigen::Index>(r)) = prob.x[k].row(rows[r]);
    }
    return sub;
}

// Shuffled, near-equal fold assignment: fold_of[i] in [0, n_folds).
inline std::vector<int> fold_assignment(Eigen::Index n, int n_folds, std::uint64_t seed, Eigen::Index node) {
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    Rng rng(seed, "folds", static_cast<std::uint64_t>(node));
    rng.shuffle(order);
    std::vector<int> fold_of(static_cast<std::size_t>(n));
    Eigen::Index pos = 0;
    for (int f = 0; f < n_folds; ++f) {
        const Eigen::Index size = n / n_folds + (f < static_cast<int>(n % n_folds) ? 1 : 0);
        for (Eigen::Index s = 0; s < size; ++s) fold_of[static_cast<std::size_t>(order[static_cast<std::size_t>(pos++)])] = f;
    }
    return fold_of;
}

} // namespace detail

// Support-constrained cross-validated RSS: for each path position, the
// support comes from the full-data fit; each fold refits unpenalized least
// squares on its training rows and is charged the held-out residual plus a
// log(n) * |support| complexity term.  Ties pick the larger lambda.
struct ScvResult {
    PathResult path;
    std::vector<double> criterion;
    std::vector<Eigen::Index> support_size;
    std::size_t chosen_index = 0;
    double chosen_t = 0.0;
    double chosen_lambda = 0.0;
};

inline ScvResult scv_select_lambda(const ScoreMatrices& scores, const std::vector<double>& t_values, int n_folds,
                                   const AdmmConfig& config = {}, std::uint64_t seed = 0) {
    const GroupLassoProblem prob = make_problem(scores);
    const Eigen::Index n = prob.n();
    if (n_folds < 2 || n_folds > n)
        throw ValidationError("scv_select_lambda: n_folds must lie in [2, n=" + std::to_string(n) + "]");

    ScvResult out;
    out.path = run_path(prob, t_values, config);

    const std::vector<int> fold_of = detail::fold_assignment(n, n_folds, seed, scores.target);
    std::vector<std::vector<Eigen::Index>> train(static_cast<std::size_t>(n_folds)),
        test(static_cast<std::size_t>(n_folds));
    for (Eigen::Index i = 0; i < n; ++i) {
        const int f = fold_of[static_cast<std::size_t>(i)];
        test[static_cast<std::size_t>(f)].push_back(i);
        for (int g = 0; g < n_folds; ++g)
            if (g != f) train[static_cast<std::size_t>(g)].push_back(i);
    }
    std::vector<GroupLassoProblem> train_probs;
    train_probs.reserve(static_cast<std::size_t>(n_folds));
    for (int f = 0; f < n_folds; ++f) train_probs.push_back(detail::subset_problem(prob, train[static_cast<std::size_t>(f)]));

    const double logn = std::log(static_cast<double>(n));
    out.criterion.resize(t_values.size());
    out.support_size.resize(t_values.size());
    for (std::size_t i = 0; i < t_values.size(); ++i) {
        std::vector<Eigen::Index> support;
        for (Eigen::Index k = 0; k < prob.K(); ++k)
            if (out.path.block_norms(static_cast<Eigen::Index>(i), k) > 0.0) support.push_back(k);
        out.support_size[i] = static_cast<Eigen::Index>(support.size());

        double crit = 0.0;
        for (int f = 0; f < n_folds; ++f) {
            const RestrictedLsResult refit = restricted_least_squares(train_probs[static_cast<std::size_t>(f)], support);
            double rss = 0.0;
            for (Eigen::Index i_test : test[static_cast<std::size_t>(f)]) {
                Eigen::RowVectorXd resid = prob.y.row(i_test);
                for (Eigen::Index k : support) resid -= prob.x[static_cast<std::size_t>(k)].row(i_test) * refit.B[static_cast<std::size_t>(k)];
                rss += resid.squaredNorm();
            }
            crit += rss + logn * static_cast<double>(support.size());
        }
        out.criterion[i] = crit / static_cast<double>(n_folds);
    }

    out.chosen_index = 0;
    for (std::size_t i = 1; i < t_values.size(); ++i)
        if (out.criterion[i] < out.criterion[out.chosen_index]) out.chosen_index = i;
    out.chosen_t = t_values[out.chosen_index];
    out.chosen_lambda = out.path.lambdas[out.chosen_index];
    return out;
}

// Five-fold (by default) cross-validation over candidate dimensions M for one
// target node: each outer fold tunes lambda by SCV on its training rows, fits
// at the tuned lambda, and is scored by the held-out residual sum of squares
// of the reconstructed curves (L2 on the grid, so scores at different M are
// comparable).  Ties pick the smallest M.
inline Eigen::Index select_M(const FunctionalDataset& ds, Eigen::Index target, BasisMode mode,
                             const std::vector<Eigen::Index>& candidates, const std::vector<double>& t_values,
                             int n_folds = 5, const AdmmConfig& config = {}, std::uint64_t seed = 0,
                             const BasisSet* fixed_basis = nullptr) {
    if (candidates.empty()) throw ValidationError("select_M: no candidates");
    if (candidates.size() == 1) return candidates.front();
    const Eigen::Index n = ds.n();
    if (n_folds < 2 || n_folds > n)
        throw ValidationError("select_M: n_folds must lie in [2, n=" + std::to_string(n) + "]");

    std::vector<Eigen::Index> cand_sorted = candidates;
    std::sort(cand_sorted.begin(), cand_sorted.end());
    Eigen::Index best_m = -1;
    double best_err = std::numeric_limits<double>::infinity();
    for (Eigen::Index M : cand_sorted) {
        ScoreMatrices scores;
        try {
            scores = project_scores(ds, target, mode, M, fixed_basis);
        } catch (const RankError&) {
            continue; // candidate exceeds the data's numerical rank
        }
        const GroupLassoProblem prob = make_problem(scores);
        const std::vector<int> fold_of = detail::fold_assignment(n, n_folds, splitmix64(seed ^ hash_tag("select_M")),
                                                                 target);
        double err = 0.0;
        for (int f = 0; f < n_folds; ++f) {
            std::vector<Eigen::Index> train_rows, test_rows;
            for (Eigen::Index i = 0; i < n; ++i)
                (fold_of[static_cast<std::size_t>(i)] == f ? test_rows : train_rows).push_back(i);
            ScoreMatrices train_scores = scores;
            {
                const GroupLassoProblem sub = detail::subset_problem(prob, train_rows);
                train_scores.y_scores = sub.y;
                train_scores.x_scores = sub.x;
            }
            const ScvResult inner = scv_select_lambda(train_scores, t_values, std::min<int>(n_folds, static_cast<int>(train_rows.size())), config, seed);
            const GroupLassoProblem train_prob = make_problem(train_scores);
            const GroupLassoSolution sol = solve_admm(train_prob, inner.chosen_lambda, config);
            double rss = 0.0;
            const Eigen::MatrixXd& curves = ds.values[static_cast<std::size_t>(target)];
            const double dt = ds.grid.dt();
            for (Eigen::Index i_test : test_rows) {
                Eigen::RowVectorXd pred = Eigen::RowVectorXd::Zero(M);
                for (std::size_t k = 0; k < sol.B.size(); ++k) pred += prob.x[k].row(i_test) * sol.B[k];
                rss += dt * (curves.row(i_test) - pred * scores.y_basis.functions).squaredNorm();
            }
            err += rss;
        }
        err /= static_cast<double>(n_folds);
        if (err < best_err) {
            best_err = err;
            best_m = M;
        }
    }
    if (best_m < 0) throw RankError("select_M: every candidate exceeds the data's numerical rank");
    return best_m;
}

} // namespace fgm
