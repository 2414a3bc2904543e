#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "fgm/errors.hpp"
#include "fgm/grid.hpp"

namespace fgm {

// n samples of a p-variate random function observed on a shared grid.
// values[j] is the n x T matrix of node j; values[j](i, k) = g_ij(t_k).
struct FunctionalDataset {
    std::vector<Eigen::MatrixXd> values;
    Grid grid;
    std::vector<std::string> node_labels; // optional, empty when unnamed

    Eigen::Index n() const { return values.empty() ? 0 : values.front().rows(); }
    Eigen::Index p() const { return static_cast<Eigen::Index>(values.size()); }
    Eigen::Index T() const { return grid.size(); }

    static FunctionalDataset zeros(Eigen::Index n, Eigen::Index p, const Grid& grid) {
        if (n < 1 || p < 1) throw ValidationError("FunctionalDataset: need n >= 1 and p >= 1");
        FunctionalDataset ds;
        ds.grid = grid;
        ds.values.assign(static_cast<std::size_t>(p), Eigen::MatrixXd::Zero(n, grid.size()));
        return ds;
    }

    void validate() const {
        grid.validate();
        if (values.empty()) throw ValidationError("FunctionalDataset: no nodes");
        const Eigen::Index rows = values.front().rows();
        if (rows < 1) throw ValidationError("FunctionalDataset: no samples");
        for (std::size_t j = 0; j < values.size(); ++j) {
            if (values[j].rows() != rows)
                throw DimensionError("FunctionalDataset: node " + std::to_string(j) + " has " +
                                     std::to_string(values[j].rows()) + " samples, expected " + std::to_string(rows));
            if (values[j].cols() != grid.size())
                throw DimensionError("FunctionalDataset: node " + std::to_string(j) + " has " +
                                     std::to_string(values[j].cols()) + " grid values, expected " +
                                     std::to_string(grid.size()));
            if (!values[j].allFinite())
                throw NumericalError("FunctionalDataset: node " + std::to_string(j) + " contains non-finite values");
        }
        if (!node_labels.empty() && node_labels.size() != values.size())
            throw DimensionError("FunctionalDataset: " + std::to_string(node_labels.size()) + " labels for " +
                                 std::to_string(values.size()) + " nodes");
    }
};

// Subtracts the cross-sample mean curve of every node.  Pairwise differences
// between samples are preserved exactly; centering a centered dataset is a
// no-op up to rounding.
inline FunctionalDataset center_dataset(const FunctionalDataset& ds) {
    ds.validate();
    if (ds.n() < 2)
        throw ValidationError("center_dataset: need at least 2 samples, got " + std::to_string(ds.n()));
    FunctionalDataset out = ds;
    for (auto& node : out.values) {
        const Eigen::RowVectorXd mean = node.colwise().mean();
        node.rowwise() -= mean;
    }
    return out;
}

} // namespace fgm
