#pragma once

#include <Eigen/Core>
#include <cmath>
#include <string>

#include "fgm/errors.hpp"

namespace fgm {

// Uniform observation grid on [a, b] with T points and rectangle-rule
// quadrature of weight dt = (b-a)/T.  Points sit at cell midpoints
// t_k = a + (k - 1/2) dt, which keeps the discrete Fourier system exactly
// orthonormal and the discrete moments of t exact to O(dt^2).
struct Grid {
    Eigen::VectorXd points;
    double a = 0.0;
    double b = 1.0;

    static Grid uniform(double a, double b, Eigen::Index T) {
        if (!(b > a)) throw ValidationError("Grid: interval [" + std::to_string(a) + ", " + std::to_string(b) + "] is empty");
        if (T < 1) throw ValidationError("Grid: need at least one point, got " + std::to_string(T));
        Grid g;
        g.a = a;
        g.b = b;
        g.points.resize(T);
        const double dt = (b - a) / static_cast<double>(T);
        for (Eigen::Index k = 0; k < T; ++k)
            g.points[k] = a + (static_cast<double>(k) + 0.5) * dt;
        return g;
    }

    Eigen::Index size() const { return points.size(); }
    double dt() const { return (b - a) / static_cast<double>(points.size()); }

    void validate() const {
        if (points.size() < 1) throw ValidationError("Grid: empty point set");
        if (!(b > a)) throw ValidationError("Grid: interval is empty");
        for (Eigen::Index k = 0; k < points.size(); ++k) {
            if (!std::isfinite(points[k]) || points[k] < a || points[k] > b)
                throw ValidationError("Grid: point " + std::to_string(k) + " outside [a, b]");
            if (k > 0 && !(points[k] > points[k - 1]))
                throw ValidationError("Grid: points not strictly increasing at index " + std::to_string(k));
        }
    }

    bool same_as(const Grid& other, double tol = 1e-12) const {
        if (points.size() != other.points.size()) return false;
        if (std::abs(a - other.a) > tol || std::abs(b - other.b) > tol) return false;
        return (points - other.points).cwiseAbs().maxCoeff() <= tol;
    }
};

// Rectangle-rule inner product <f, g> = dt * sum_k f(t_k) g(t_k).
inline double inner_product(const Eigen::VectorXd& f, const Eigen::VectorXd& g, const Grid& grid) {
    if (f.size() != grid.size() || g.size() != grid.size())
        throw DimensionError("inner_product: function length " + std::to_string(f.size()) + "/" +
                             std::to_string(g.size()) + " vs grid size " + std::to_string(grid.size()));
    return grid.dt() * f.dot(g);
}

inline double norm(const Eigen::VectorXd& f, const Grid& grid) {
    return std::sqrt(inner_product(f, f, grid));
}

} // namespace fgm
