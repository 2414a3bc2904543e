#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "fgm/basis.hpp"
#include "fgm/errors.hpp"
#include "fgm/group_lasso.hpp"

namespace fgm {

// Estimated neighborhood of one target node: the predictor groups whose
// coefficient blocks survive the threshold epsilon.
struct NeighborhoodEstimate {
    Eigen::Index target = 0;
    std::vector<Eigen::Index> selected;  // original node ids, ascending
    Eigen::VectorXd block_norms;         // per predictor group
    std::vector<Eigen::Index> x_nodes;   // group index -> original node id
    double lambda = 0.0;
    int iterations = 0;
    bool converged = false;
};

inline GroupLassoProblem make_problem(const ScoreMatrices& scores) {
    GroupLassoProblem prob;
    prob.y = scores.y_scores;
    prob.x = scores.x_scores;
    return prob;
}

inline std::vector<Eigen::Index> selected_nodes(const Eigen::VectorXd& block_norms,
                                                const std::vector<Eigen::Index>& x_nodes, double epsilon) {
    std::vector<Eigen::Index> out;
    for (Eigen::Index k = 0; k < block_norms.size(); ++k)
        if (block_norms[k] > epsilon) out.push_back(x_nodes[static_cast<std::size_t>(k)]);
    return out;
}

// Group-lasso fit of the target on all other nodes; the neighborhood is the
// set of groups with ||B_k||_F > epsilon (strict).
inline NeighborhoodEstimate estimate_neighborhood(const ScoreMatrices& scores, double lambda, double epsilon = 0.0,
                                                  const AdmmConfig& config = {}, AdmmState* warm = nullptr) {
    if (!(epsilon >= 0.0)) throw ValidationError("estimate_neighborhood: epsilon must be non-negative");
    const GroupLassoProblem prob = make_problem(scores);
    const GroupLassoSolution sol = solve_admm(prob, lambda, config, warm);
    NeighborhoodEstimate est;
    est.target = scores.target;
    est.block_norms = sol.block_norms;
    est.x_nodes = scores.x_nodes;
    est.lambda = lambda;
    est.iterations = sol.iterations;
    est.converged = sol.converged;
    est.selected = selected_nodes(sol.block_norms, scores.x_nodes, epsilon);
    return est;
}

enum class CombineRule { and_rule, or_rule };

inline const char* to_string(CombineRule r) { return r == CombineRule::and_rule ? "AND" : "OR"; }

inline CombineRule combine_rule_from_string(const std::string& s) {
    if (s == "AND" || s == "and") return CombineRule::and_rule;
    if (s == "OR" || s == "or") return CombineRule::or_rule;
    throw ValidationError("unknown combine rule \"" + s + "\" (expected AND or OR)");
}

// Symmetric 0/1 adjacency with a zero diagonal.
struct GraphEstimate {
    Eigen::MatrixXi adjacency;
    CombineRule rule = CombineRule::and_rule;

    Eigen::Index p() const { return adjacency.rows(); }

    void validate() const {
        if (adjacency.rows() != adjacency.cols()) throw DimensionError("GraphEstimate: adjacency not square");
        for (Eigen::Index j = 0; j < adjacency.rows(); ++j) {
            if (adjacency(j, j) != 0) throw ValidationError("GraphEstimate: nonzero diagonal at " + std::to_string(j));
            for (Eigen::Index l = 0; l < adjacency.cols(); ++l) {
                if (adjacency(j, l) != 0 && adjacency(j, l) != 1)
                    throw ValidationError("GraphEstimate: adjacency entries must be 0/1");
                if (adjacency(j, l) != adjacency(l, j))
                    throw ValidationError("GraphEstimate: adjacency not symmetric at (" + std::to_string(j) + "," +
                                          std::to_string(l) + ")");
            }
        }
    }

    Eigen::Index edge_count() const {
        Eigen::Index c = 0;
        for (Eigen::Index j = 0; j < p(); ++j)
            for (Eigen::Index l = j + 1; l < p(); ++l) c += adjacency(j, l);
        return c;
    }
};

// Combines per-node neighborhoods into a graph.  AND keeps an edge only when
// each endpoint selects the other; OR keeps it when either does.
inline GraphEstimate combine(const std::vector<NeighborhoodEstimate>& neighborhoods, CombineRule rule) {
    const Eigen::Index p = static_cast<Eigen::Index>(neighborhoods.size());
    if (p < 2) throw ValidationError("combine: need at least 2 neighborhoods");
    Eigen::MatrixXi picked = Eigen::MatrixXi::Zero(p, p); // picked(j, l) = 1 iff node j selected node l
    for (Eigen::Index j = 0; j < p; ++j) {
        const auto& est = neighborhoods[static_cast<std::size_t>(j)];
        if (est.target != j)
            throw ValidationError("combine: neighborhood " + std::to_string(j) + " is for target " +
                                  std::to_string(est.target) + "; pass them in node order");
        for (Eigen::Index l : est.selected) {
            if (l < 0 || l >= p || l == j)
                throw ValidationError("combine: neighborhood of " + std::to_string(j) + " selects invalid node " +
                                      std::to_string(l));
            picked(j, l) = 1;
        }
    }
    GraphEstimate g;
    g.rule = rule;
    g.adjacency = Eigen::MatrixXi::Zero(p, p);
    for (Eigen::Index j = 0; j < p; ++j)
        for (Eigen::Index l = j + 1; l < p; ++l) {
            const bool edge = (rule == CombineRule::and_rule) ? (picked(j, l) == 1 && picked(l, j) == 1)
                                                              : (picked(j, l) == 1 || picked(l, j) == 1);
            g.adjacency(j, l) = g.adjacency(l, j) = edge ? 1 : 0;
        }
    return g;
}

} // namespace fgm
