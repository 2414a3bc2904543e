#pragma once

#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "fgm/basis.hpp"
#include "fgm/dataset.hpp"
#include "fgm/errors.hpp"
#include "fgm/eval.hpp"
#include "fgm/neighborhood.hpp"
#include "fgm/tuning.hpp"

namespace fgm {

// Worker count: explicit request, else FGM_THREADS, else the hardware.
inline int resolve_threads(int requested = 0) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("FGM_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

// Index-parallel loop with deterministic work: every index writes only its
// own slot, so results do not depend on the worker count or schedule.
template <typename F>
inline void parallel_for(Eigen::Index count, int threads, F&& body) {
    threads = std::min<Eigen::Index>(std::max(threads, 1), count);
    if (threads <= 1) {
        for (Eigen::Index i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<Eigen::Index> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&]() {
        while (true) {
            const Eigen::Index i = next.fetch_add(1);
            if (i >= count) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int w = 0; w < threads; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

struct EstimateOptions {
    BasisMode mode = BasisMode::fpca_gy;
    Eigen::Index M = 5;
    std::vector<double> t_values = lambda_grid();
    double epsilon = 0.0;
    AdmmConfig admm{};
    int threads = 0;
    std::optional<BasisSet> fixed_basis;

    void validate(const FunctionalDataset& ds) const {
        if (M < 1) throw ValidationError("EstimateOptions: M must be positive");
        if (t_values.empty()) throw ValidationError("EstimateOptions: empty t grid");
        if (!(epsilon >= 0.0)) throw ValidationError("EstimateOptions: epsilon must be non-negative");
        admm.validate();
        if (mode == BasisMode::fixed && !fixed_basis)
            throw ValidationError("EstimateOptions: fixed mode needs a basis");
        if (ds.p() < 2) throw ValidationError("EstimateOptions: need at least 2 nodes");
    }
};

// Per-node score matrices under the chosen basis strategy.  For fpca_gx and
// fixed bases the node projections are shared across targets and computed
// once; for fpca_gy each target needs its own basis and projections.
class ScoreProvider {
public:
    ScoreProvider(const FunctionalDataset& ds, const EstimateOptions& opts) : ds_(ds), opts_(opts) {
        ds.validate();
        opts.validate(ds);
        if (opts_.mode == BasisMode::fpca_gx) {
            shared_.resize(static_cast<std::size_t>(ds.p()));
            bases_.resize(static_cast<std::size_t>(ds.p()));
            for (Eigen::Index j = 0; j < ds.p(); ++j) {
                bases_[static_cast<std::size_t>(j)] = estimate_fpca(ds.values[static_cast<std::size_t>(j)], ds.grid, opts_.M);
                shared_[static_cast<std::size_t>(j)] =
                    project_onto(ds.values[static_cast<std::size_t>(j)], bases_[static_cast<std::size_t>(j)]);
            }
        } else if (opts_.mode == BasisMode::fixed) {
            BasisSet head = *opts_.fixed_basis;
            head.validate();
            if (!head.grid.same_as(ds.grid)) throw DimensionError("ScoreProvider: fixed basis grid differs from data grid");
            if (head.M() < opts_.M)
                throw ValidationError("ScoreProvider: fixed basis has " + std::to_string(head.M()) +
                                      " functions, need M=" + std::to_string(opts_.M));
            head.functions = opts_.fixed_basis->functions.topRows(opts_.M);
            head.eigenvalues.resize(0);
            bases_.assign(static_cast<std::size_t>(ds.p()), head);
            shared_.resize(static_cast<std::size_t>(ds.p()));
            for (Eigen::Index j = 0; j < ds.p(); ++j)
                shared_[static_cast<std::size_t>(j)] = project_onto(ds.values[static_cast<std::size_t>(j)], head);
        }
    }

    ScoreMatrices for_target(Eigen::Index target) const {
        ScoreMatrices out;
        out.target = target;
        out.mode = opts_.mode;
        if (opts_.mode == BasisMode::fpca_gy) {
            const BasisSet basis = estimate_fpca(ds_.values[static_cast<std::size_t>(target)], ds_.grid, opts_.M);
            out.y_basis = basis;
            for (Eigen::Index j = 0; j < ds_.p(); ++j) {
                Eigen::MatrixXd s = project_onto(ds_.values[static_cast<std::size_t>(j)], basis);
                if (j == target) {
                    out.y_scores = std::move(s);
                } else {
                    out.x_scores.push_back(std::move(s));
                    out.x_nodes.push_back(j);
                }
            }
            return out;
        }
        for (Eigen::Index j = 0; j < ds_.p(); ++j) {
            if (j == target) {
                out.y_scores = shared_[static_cast<std::size_t>(j)];
                out.y_basis = bases_[static_cast<std::size_t>(j)];
            } else {
                out.x_scores.push_back(shared_[static_cast<std::size_t>(j)]);
                out.x_nodes.push_back(j);
            }
        }
        return out;
    }

private:
    const FunctionalDataset& ds_;
    EstimateOptions opts_;
    std::vector<Eigen::MatrixXd> shared_;
    std::vector<BasisSet> bases_;
};

struct NodePath {
    Eigen::Index target = 0;
    std::vector<Eigen::Index> x_nodes;
    PathResult path;
};

// Warm-started lambda paths for every node, parallel over nodes.
inline std::vector<NodePath> run_all_paths(const FunctionalDataset& ds, const EstimateOptions& opts) {
    const ScoreProvider provider(ds, opts);
    std::vector<NodePath> out(static_cast<std::size_t>(ds.p()));
    parallel_for(ds.p(), resolve_threads(opts.threads), [&](Eigen::Index j) {
        const ScoreMatrices scores = provider.for_target(j);
        NodePath np;
        np.target = j;
        np.x_nodes = scores.x_nodes;
        np.path = run_path(make_problem(scores), opts.t_values, opts.admm);
        out[static_cast<std::size_t>(j)] = std::move(np);
    });
    return out;
}

// Graph at one path position from precomputed block norms.
inline GraphEstimate graph_at(const std::vector<NodePath>& paths, std::size_t t_index, double epsilon,
                              CombineRule rule) {
    std::vector<NeighborhoodEstimate> nbhds(paths.size());
    for (std::size_t j = 0; j < paths.size(); ++j) {
        const auto& np = paths[j];
        if (t_index >= np.path.t_values.size()) throw ValidationError("graph_at: t index out of range");
        NeighborhoodEstimate est;
        est.target = np.target;
        est.x_nodes = np.x_nodes;
        est.block_norms = np.path.block_norms.row(static_cast<Eigen::Index>(t_index)).transpose();
        est.lambda = np.path.lambdas[t_index];
        est.converged = np.path.converged[t_index] != 0;
        est.selected = selected_nodes(est.block_norms, np.x_nodes, epsilon);
        nbhds[j] = std::move(est);
    }
    return combine(nbhds, rule);
}

// ROC over the whole path family against a known truth.
inline RocCurve roc_over_paths(const std::vector<NodePath>& paths, const Eigen::MatrixXi& truth, double epsilon,
                               CombineRule rule) {
    if (paths.empty()) throw ValidationError("roc_over_paths: no paths");
    const std::size_t n_t = paths.front().path.t_values.size();
    std::vector<std::pair<double, Eigen::MatrixXi>> estimates;
    estimates.reserve(n_t);
    for (std::size_t i = 0; i < n_t; ++i)
        estimates.emplace_back(paths.front().path.t_values[i], graph_at(paths, i, epsilon, rule).adjacency);
    return roc(estimates, truth);
}

struct ScvGraphResult {
    std::vector<ScvResult> per_node;
    GraphEstimate graph_and;
    GraphEstimate graph_or;
};

// Per-node SCV selection followed by both combination rules at the selected
// penalties.  The selected-lambda estimates reuse the full-data path fits.
inline ScvGraphResult run_scv(const FunctionalDataset& ds, const EstimateOptions& opts, int n_folds,
                              std::uint64_t seed) {
    const ScoreProvider provider(ds, opts);
    ScvGraphResult out;
    out.per_node.resize(static_cast<std::size_t>(ds.p()));
    std::vector<NeighborhoodEstimate> nbhds(static_cast<std::size_t>(ds.p()));
    parallel_for(ds.p(), resolve_threads(opts.threads), [&](Eigen::Index j) {
        const ScoreMatrices scores = provider.for_target(j);
        ScvResult scv = scv_select_lambda(scores, opts.t_values, n_folds, opts.admm, seed);
        NeighborhoodEstimate est;
        est.target = j;
        est.x_nodes = scores.x_nodes;
        est.block_norms = scv.path.block_norms.row(static_cast<Eigen::Index>(scv.chosen_index)).transpose();
        est.lambda = scv.chosen_lambda;
        est.converged = scv.path.converged[scv.chosen_index] != 0;
        est.selected = selected_nodes(est.block_norms, est.x_nodes, opts.epsilon);
        nbhds[static_cast<std::size_t>(j)] = std::move(est);
        out.per_node[static_cast<std::size_t>(j)] = std::move(scv);
    });
    out.graph_and = combine(nbhds, CombineRule::and_rule);
    out.graph_or = combine(nbhds, CombineRule::or_rule);
    return out;
}

} // namespace fgm
