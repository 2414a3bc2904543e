#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Core>
#include <cmath>
#include <vector>

#include "fgm/eval.hpp"
#include "fgm/rng.hpp"

using namespace fgm;

namespace {

Eigen::MatrixXi graph_from_edges(Eigen::Index p, const std::vector<std::pair<int, int>>& edges) {
    Eigen::MatrixXi adj = Eigen::MatrixXi::Zero(p, p);
    for (const auto& [j, l] : edges) adj(j, l) = adj(l, j) = 1;
    return adj;
}

Eigen::MatrixXi random_graph(Rng& rng, Eigen::Index p, double density) {
    Eigen::MatrixXi adj = Eigen::MatrixXi::Zero(p, p);
    for (Eigen::Index j = 0; j < p; ++j)
        for (Eigen::Index l = j + 1; l < p; ++l)
            if (rng.uniform() < density) adj(j, l) = adj(l, j) = 1;
    return adj;
}

} // namespace

TEST_CASE("confusion counts a worked example over unordered pairs") {
    const Eigen::MatrixXi truth = graph_from_edges(4, {{0, 1}, {1, 2}});
    const Eigen::MatrixXi est = graph_from_edges(4, {{0, 1}, {2, 3}});
    const Confusion c = confusion(est, truth);
    REQUIRE(c.tp == 1); // (0,1)
    REQUIRE(c.fp == 1); // (2,3)
    REQUIRE(c.fn == 1); // (1,2)
    REQUIRE(c.tn == 3); // (0,2),(0,3),(1,3)
    REQUIRE(c.total() == 6);
    REQUIRE(c.tpr() == Catch::Approx(0.5));
    REQUIRE(c.fpr() == Catch::Approx(0.25));
}

TEST_CASE("confusion always partitions the pair set") {
    Rng rng(61);
    for (int trial = 0; trial < 50; ++trial) {
        const Eigen::Index p = 3 + static_cast<Eigen::Index>(rng.uniform_index(8));
        const Confusion c = confusion(random_graph(rng, p, 0.4), random_graph(rng, p, 0.3));
        REQUIRE(c.total() == p * (p - 1) / 2);
        REQUIRE(c.tp >= 0);
        REQUIRE(c.fp >= 0);
        REQUIRE(c.tn >= 0);
        REQUIRE(c.fn >= 0);
    }
}

TEST_CASE("confusion validates shapes") {
    const Eigen::MatrixXi a = Eigen::MatrixXi::Zero(3, 3);
    REQUIRE_THROWS_AS(confusion(a, Eigen::MatrixXi::Zero(4, 4)), DimensionError);
    REQUIRE_THROWS_AS(confusion(Eigen::MatrixXi::Zero(2, 3), a), DimensionError);
    REQUIRE_THROWS_AS(confusion(Eigen::MatrixXi::Zero(1, 1), Eigen::MatrixXi::Zero(1, 1)), ValidationError);
}

TEST_CASE("perfect separation gives unit area") {
    const Eigen::MatrixXi truth = graph_from_edges(5, {{0, 1}, {2, 3}});
    std::vector<std::pair<double, Eigen::MatrixXi>> est;
    est.emplace_back(1.0, Eigen::MatrixXi::Zero(5, 5));
    est.emplace_back(0.5, truth);
    const RocCurve curve = roc(est, truth);
    REQUIRE(curve.auc == Catch::Approx(1.0));
}

TEST_CASE("an uninformative family scores one half") {
    const Eigen::MatrixXi truth = graph_from_edges(4, {{0, 1}});
    std::vector<std::pair<double, Eigen::MatrixXi>> est;
    est.emplace_back(1.0, Eigen::MatrixXi::Zero(4, 4)); // (0,0) only
    const RocCurve curve = roc(est, truth);
    REQUIRE(curve.auc == Catch::Approx(0.5)); // straight anchors-only diagonal
}

TEST_CASE("duplicate estimates do not change the area") {
    const Eigen::MatrixXi truth = graph_from_edges(5, {{0, 1}, {1, 2}, {3, 4}});
    const Eigen::MatrixXi half = graph_from_edges(5, {{0, 1}, {0, 2}});
    std::vector<std::pair<double, Eigen::MatrixXi>> est;
    est.emplace_back(1.0, half);
    const double base = roc(est, truth).auc;
    est.emplace_back(0.9, half);
    est.emplace_back(0.8, half);
    REQUIRE(roc(est, truth).auc == Catch::Approx(base));
}

TEST_CASE("roc points come back sorted with both anchors") {
    const Eigen::MatrixXi truth = graph_from_edges(4, {{0, 1}, {2, 3}});
    std::vector<std::pair<double, Eigen::MatrixXi>> est;
    est.emplace_back(0.7, graph_from_edges(4, {{0, 1}}));
    est.emplace_back(0.3, graph_from_edges(4, {{0, 1}, {2, 3}, {0, 2}}));
    const RocCurve curve = roc(est, truth);
    REQUIRE(curve.points.size() == 4);
    REQUIRE(curve.points.front().fpr == 0.0);
    REQUIRE(curve.points.front().tpr == 0.0);
    REQUIRE(std::isinf(curve.points.front().t));
    REQUIRE(curve.points.back().fpr == 1.0);
    REQUIRE(curve.points.back().tpr == 1.0);
    for (std::size_t i = 1; i < curve.points.size(); ++i) {
        REQUIRE(curve.points[i].fpr >= curve.points[i - 1].fpr);
        if (curve.points[i].fpr == curve.points[i - 1].fpr)
            REQUIRE(curve.points[i].tpr >= curve.points[i - 1].tpr);
    }
}

TEST_CASE("roc rejects degenerate truths") {
    std::vector<std::pair<double, Eigen::MatrixXi>> est;
    est.emplace_back(1.0, Eigen::MatrixXi::Zero(3, 3));
    REQUIRE_THROWS_AS(roc(est, Eigen::MatrixXi::Zero(3, 3)), ValidationError);
    Eigen::MatrixXi complete = Eigen::MatrixXi::Ones(3, 3);
    complete.diagonal().setZero();
    REQUIRE_THROWS_AS(roc(est, complete), ValidationError);
    REQUIRE_THROWS_AS(roc({}, complete), ValidationError);
}

TEST_CASE("auc is monotone in nested estimate families") {
    // growing estimates along a path: tpr and fpr both ratchet upward
    Rng rng(71);
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::Index p = 8;
        const Eigen::MatrixXi truth = random_graph(rng, p, 0.3);
        Confusion probe = confusion(Eigen::MatrixXi::Zero(p, p), truth);
        if (probe.tp + probe.fn == 0 || probe.fp + probe.tn == 0) continue;

        Eigen::MatrixXi current = Eigen::MatrixXi::Zero(p, p);
        std::vector<std::pair<double, Eigen::MatrixXi>> nested;
        double t = 1.0;
        nested.emplace_back(t, current);
        for (Eigen::Index j = 0; j < p; ++j)
            for (Eigen::Index l = j + 1; l < p; ++l)
                if (rng.uniform() < 0.5) {
                    current(j, l) = current(l, j) = 1;
                    t *= 0.9;
                    nested.emplace_back(t, current);
                }
        const RocCurve curve = roc(nested, truth);
        double prev_tpr = -1.0, prev_fpr = -1.0;
        for (const auto& pt : curve.points) {
            REQUIRE(pt.fpr >= prev_fpr - 1e-15);
            if (pt.fpr == prev_fpr) REQUIRE(pt.tpr >= prev_tpr - 1e-15);
            prev_fpr = pt.fpr;
            prev_tpr = pt.tpr;
        }
        REQUIRE(curve.auc >= 0.0);
        REQUIRE(curve.auc <= 1.0);
    }
}

TEST_CASE("precision and recall with their empty-set conventions") {
    const Eigen::MatrixXi truth = graph_from_edges(4, {{0, 1}, {1, 2}});
    const Eigen::MatrixXi est = graph_from_edges(4, {{0, 1}, {2, 3}});
    const PrecisionRecall pr = precision_recall(est, truth);
    REQUIRE(pr.precision == Catch::Approx(0.5));
    REQUIRE(pr.recall == Catch::Approx(0.5));

    const Eigen::MatrixXi none = Eigen::MatrixXi::Zero(4, 4);
    REQUIRE(precision_recall(none, truth).precision == 0.0); // predicted nothing, missed edges
    REQUIRE(precision_recall(none, none).precision == 1.0);  // vacuous success
    REQUIRE(precision_recall(none, none).recall == 1.0);
    REQUIRE(precision_recall(est, none).recall == 1.0);      // nothing to recall
    REQUIRE(precision_recall(truth, truth).precision == 1.0);
    REQUIRE(precision_recall(truth, truth).recall == 1.0);
}
