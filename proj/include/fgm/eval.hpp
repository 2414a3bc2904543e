#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "fgm/errors.hpp"
#include "fgm/neighborhood.hpp"

namespace fgm {

// Edge counts over the p(p-1)/2 unordered node pairs.
struct Confusion {
    long tp = 0;
    long fp = 0;
    long tn = 0;
    long fn = 0;

    long total() const { return tp + fp + tn + fn; }
    double tpr() const { return tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn); }
    double fpr() const { return fp + tn == 0 ? 0.0 : static_cast<double>(fp) / static_cast<double>(fp + tn); }
};

inline void check_adjacency_pair(const Eigen::MatrixXi& est, const Eigen::MatrixXi& truth) {
    if (est.rows() != est.cols() || truth.rows() != truth.cols())
        throw DimensionError("confusion: adjacency matrices must be square");
    if (est.rows() != truth.rows())
        throw DimensionError("confusion: estimate has p=" + std::to_string(est.rows()) + ", truth has p=" +
                             std::to_string(truth.rows()));
    if (est.rows() < 2) throw ValidationError("confusion: need at least 2 nodes");
}

inline Confusion confusion(const Eigen::MatrixXi& est, const Eigen::MatrixXi& truth) {
    check_adjacency_pair(est, truth);
    Confusion c;
    for (Eigen::Index j = 0; j < est.rows(); ++j)
        for (Eigen::Index l = j + 1; l < est.rows(); ++l) {
            const bool e = est(j, l) != 0;
            const bool t = truth(j, l) != 0;
            if (e && t)
                ++c.tp;
            else if (e && !t)
                ++c.fp;
            else if (!e && t)
                ++c.fn;
            else
                ++c.tn;
        }
    return c;
}

struct RocPoint {
    double t = 0.0; // path position that produced the estimate
    double fpr = 0.0;
    double tpr = 0.0;
};

struct RocCurve {
    std::vector<RocPoint> points; // sorted by (fpr, tpr), anchors included
    double auc = 0.0;
};

// Trapezoidal area under points sorted by increasing fpr (ties resolved by
// tpr), with (0,0) and (1,1) anchors appended.  Duplicate points do not
// change the area.
inline double auc_from_points(std::vector<RocPoint> pts) {
    pts.push_back({0.0, 0.0, 0.0});
    pts.push_back({1.0, 1.0, 1.0});
    std::sort(pts.begin(), pts.end(), [](const RocPoint& a, const RocPoint& b) {
        if (a.fpr != b.fpr) return a.fpr < b.fpr;
        return a.tpr < b.tpr;
    });
    double area = 0.0;
    for (std::size_t i = 1; i < pts.size(); ++i)
        area += 0.5 * (pts[i].fpr - pts[i - 1].fpr) * (pts[i].tpr + pts[i - 1].tpr);
    return area;
}

// ROC of a family of graph estimates against one truth.  The truth must have
// at least one edge and at least one non-edge, otherwise the rates are
// degenerate and an error is raised.
inline RocCurve roc(const std::vector<std::pair<double, Eigen::MatrixXi>>& estimates, const Eigen::MatrixXi& truth) {
    if (estimates.empty()) throw ValidationError("roc: no estimates");
    RocCurve curve;
    bool checked_truth = false;
    for (const auto& [t, adj] : estimates) {
        const Confusion c = confusion(adj, truth);
        if (!checked_truth) {
            if (c.tp + c.fn == 0) throw ValidationError("roc: truth has no edges, TPR undefined");
            if (c.fp + c.tn == 0) throw ValidationError("roc: truth is complete, FPR undefined");
            checked_truth = true;
        }
        curve.points.push_back({t, c.fpr(), c.tpr()});
    }
    curve.auc = auc_from_points(curve.points);
    curve.points.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
    curve.points.push_back({0.0, 1.0, 1.0});
    std::sort(curve.points.begin(), curve.points.end(), [](const RocPoint& a, const RocPoint& b) {
        if (a.fpr != b.fpr) return a.fpr < b.fpr;
        return a.tpr < b.tpr;
    });
    return curve;
}

struct PrecisionRecall {
    double precision = 0.0;
    double recall = 0.0;
};

// Conventions for empty denominators: with nothing predicted, precision is 1
// when the truth is also empty and 0 otherwise; with an empty truth, recall
// is vacuously 1.
inline PrecisionRecall precision_recall(const Eigen::MatrixXi& est, const Eigen::MatrixXi& truth) {
    const Confusion c = confusion(est, truth);
    PrecisionRecall pr;
    if (c.tp + c.fp == 0)
        pr.precision = (c.tp + c.fn == 0) ? 1.0 : 0.0;
    else
        pr.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
    pr.recall = (c.tp + c.fn == 0) ? 1.0 : static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
    return pr;
}

} // namespace fgm
