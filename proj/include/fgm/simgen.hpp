#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "fgm/basis.hpp"
#include "fgm/dataset.hpp"
#include "fgm/errors.hpp"
#include "fgm/grid.hpp"
#include "fgm/rng.hpp"

namespace fgm {

enum class Model { A, B, C, D };

inline const char* to_string(Model m) {
    switch (m) {
        case Model::A: return "A";
        case Model::B: return "B";
        case Model::C: return "C";
        case Model::D: return "D";
    }
    return "?";
}

inline Model model_from_string(const std::string& s) {
    if (s == "A" || s == "a") return Model::A;
    if (s == "B" || s == "b") return Model::B;
    if (s == "C" || s == "c") return Model::C;
    if (s == "D" || s == "d") return Model::D;
    throw ValidationError("unknown model \"" + s + "\" (expected A, B, C or D)");
}

struct PrecisionSpec {
    Model model = Model::A;
    Eigen::Index p = 50;
    Eigen::Index m_star = 0;    // 0 = model default (15 for A/B/D, 5 for C)
    std::uint64_t seed = 0;     // consumed by the random constructions (C, D)

    Eigen::Index resolved_m_star() const {
        if (m_star > 0) return m_star;
        return model == Model::C ? 5 : 15;
    }

    void validate() const {
        if (p < 2) throw ValidationError("PrecisionSpec: need p >= 2");
        if (m_star < 0) throw ValidationError("PrecisionSpec: m_star must be positive (or 0 for the default)");
    }
};

// Block precision matrix of the pM* latent scores; block (j, l) is m_star x
// m_star.  suggested_noise_sigma is set by Model C's construction and NaN
// otherwise.
struct PrecisionMatrix {
    Eigen::MatrixXd theta;
    Eigen::Index p = 0;
    Eigen::Index m_star = 0;
    double suggested_noise_sigma = std::numeric_limits<double>::quiet_NaN();

    void validate() const {
        if (p < 2 || m_star < 1) throw ValidationError("PrecisionMatrix: bad dimensions");
        if (theta.rows() != p * m_star || theta.cols() != p * m_star)
            throw DimensionError("PrecisionMatrix: theta is " + std::to_string(theta.rows()) + "x" +
                                 std::to_string(theta.cols()) + ", expected " + std::to_string(p * m_star));
        if ((theta - theta.transpose()).cwiseAbs().maxCoeff() > 1e-12)
            throw ValidationError("PrecisionMatrix: theta not symmetric");
        Eigen::LLT<Eigen::MatrixXd> llt(theta);
        if (llt.info() != Eigen::Success) throw NumericalError("PrecisionMatrix: theta not positive definite");
    }
};

struct TrueGraph {
    Eigen::MatrixXi adjacency;
};

// Edge (j, l) present iff the (j, l) block of theta has an entry above 1e-12
// in absolute value.
inline TrueGraph true_edges(const PrecisionMatrix& prec) {
    if (prec.theta.rows() != prec.p * prec.m_star)
        throw DimensionError("true_edges: inconsistent precision dimensions");
    TrueGraph g;
    g.adjacency = Eigen::MatrixXi::Zero(prec.p, prec.p);
    for (Eigen::Index j = 0; j < prec.p; ++j)
        for (Eigen::Index l = j + 1; l < prec.p; ++l) {
            const double mx = prec.theta.block(j * prec.m_star, l * prec.m_star, prec.m_star, prec.m_star)
                                  .cwiseAbs()
                                  .maxCoeff();
            if (mx > 1e-12) g.adjacency(j, l) = g.adjacency(l, j) = 1;
        }
    return g;
}

namespace detail {

// Tridiagonal A with unit diagonal and 0.5 off-diagonal; the within-node
// block of Models A and B.
inline Eigen::MatrixXd model_a_inner_block(Eigen::Index m) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(m, m);
    for (Eigen::Index k = 0; k + 1 < m; ++k) a(k, k + 1) = a(k + 1, k) = 0.5;
    return a;
}

// Block-banded precision: within-node A, lag-1 neighbors 0.4 A, lag-2
// neighbors 0.2 A.
inline Eigen::MatrixXd model_a_theta(Eigen::Index p, Eigen::Index m) {
    const Eigen::MatrixXd a = model_a_inner_block(m);
    Eigen::MatrixXd theta = Eigen::MatrixXd::Zero(p * m, p * m);
    for (Eigen::Index j = 0; j < p; ++j) {
        theta.block(j * m, j * m, m, m) = a;
        if (j + 1 < p) {
            theta.block(j * m, (j + 1) * m, m, m) = 0.4 * a;
            theta.block((j + 1) * m, j * m, m, m) = 0.4 * a;
        }
        if (j + 2 < p) {
            theta.block(j * m, (j + 2) * m, m, m) = 0.2 * a;
            theta.block((j + 2) * m, j * m, m, m) = 0.2 * a;
        }
    }
    return theta;
}

// Alternating 10-node groups: odd groups (first, third, ...) carry the Model A
// band, even groups are identity (isolated nodes).
inline Eigen::MatrixXd model_b_theta(Eigen::Index p, Eigen::Index m) {
    Eigen::MatrixXd theta = Eigen::MatrixXd::Identity(p * m, p * m);
    for (Eigen::Index g = 0; g * 10 < p; ++g) {
        if (g % 2 != 0) continue;
        const Eigen::Index start = g * 10;
        const Eigen::Index size = std::min<Eigen::Index>(10, p - start);
        theta.block(start * m, start * m, size * m, size * m) = model_a_theta(size, m);
    }
    return theta;
}

// Random block-sparse precision: off-diagonal blocks 0.5 I with probability
// 0.1, shared diagonal delta I with delta set so the condition number of
// theta equals p (identity when the draw has no edges).  The blocks are all
// multiples of I, so the condition number is read off the p x p coupling
// pattern.
inline Eigen::MatrixXd model_d_theta(Eigen::Index p, Eigen::Index m, std::uint64_t seed) {
    Rng rng(seed, "modelD/blocks");
    Eigen::MatrixXi adj = Eigen::MatrixXi::Zero(p, p);
    for (Eigen::Index j = 0; j < p; ++j)
        for (Eigen::Index l = j + 1; l < p; ++l)
            if (rng.uniform() < 0.1) adj(j, l) = adj(l, j) = 1;
    double delta = 1.0;
    if (adj.sum() > 0) {
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * adj.cast<double>());
        const double lo = eig.eigenvalues().minCoeff();
        const double hi = eig.eigenvalues().maxCoeff();
        delta = (hi - static_cast<double>(p) * lo) / (static_cast<double>(p) - 1.0);
    }
    Eigen::MatrixXd theta = Eigen::MatrixXd::Zero(p * m, p * m);
    for (Eigen::Index j = 0; j < p; ++j) {
        theta.block(j * m, j * m, m, m) = delta * Eigen::MatrixXd::Identity(m, m);
        for (Eigen::Index l = j + 1; l < p; ++l)
            if (adj(j, l)) {
                theta.block(j * m, l * m, m, m) = 0.5 * Eigen::MatrixXd::Identity(m, m);
                theta.block(l * m, j * m, m, m) = 0.5 * Eigen::MatrixXd::Identity(m, m);
            }
    }
    return theta;
}

struct EdgeList {
    std::vector<std::pair<Eigen::Index, Eigen::Index>> edges; // j < l, lexicographic
};

// Power-law neighborhood counts (p_m proportional to m^-2), neighbors sampled
// uniformly, union over nodes.
inline EdgeList model_c_edges(Eigen::Index p, Rng& rng) {
    const Eigen::Index max_deg = p - 1;
    std::vector<double> cum(static_cast<std::size_t>(max_deg));
    double z = 0.0;
    for (Eigen::Index m = 1; m <= max_deg; ++m) {
        z += 1.0 / (static_cast<double>(m) * static_cast<double>(m));
        cum[static_cast<std::size_t>(m - 1)] = z;
    }
    Eigen::MatrixXi adj = Eigen::MatrixXi::Zero(p, p);
    std::vector<Eigen::Index> chosen;
    for (Eigen::Index j = 0; j < p; ++j) {
        const double u = rng.uniform() * z;
        Eigen::Index deg = 1;
        while (deg < max_deg && cum[static_cast<std::size_t>(deg - 1)] < u) ++deg;
        chosen.clear();
        while (static_cast<Eigen::Index>(chosen.size()) < deg) {
            const Eigen::Index cand = static_cast<Eigen::Index>(rng.uniform_index(static_cast<std::uint64_t>(p)));
            if (cand == j) continue;
            if (std::find(chosen.begin(), chosen.end(), cand) != chosen.end()) continue;
            chosen.push_back(cand);
        }
        for (Eigen::Index l : chosen) adj(j, l) = adj(l, j) = 1;
    }
    EdgeList e;
    for (Eigen::Index j = 0; j < p; ++j)
        for (Eigen::Index l = j + 1; l < p; ++l)
            if (adj(j, l)) e.edges.emplace_back(j, l);
    return e;
}

// Splits E into 5 disjoint layers.  Each node offers capacity ceil(deg/5) per
// layer; an edge goes to the lowest layer where both ends have room, falling
// back to the least-loaded layer so every edge is placed.
inline std::vector<EdgeList> model_c_partition(const EdgeList& all, Eigen::Index p) {
    constexpr int n_layers = 5;
    std::vector<Eigen::Index> deg(static_cast<std::size_t>(p), 0);
    for (const auto& [j, l] : all.edges) {
        ++deg[static_cast<std::size_t>(j)];
        ++deg[static_cast<std::size_t>(l)];
    }
    std::vector<Eigen::Index> cap(static_cast<std::size_t>(p));
    for (Eigen::Index j = 0; j < p; ++j) cap[static_cast<std::size_t>(j)] = (deg[static_cast<std::size_t>(j)] + n_layers - 1) / n_layers;
    std::vector<std::vector<Eigen::Index>> used(static_cast<std::size_t>(n_layers),
                                                std::vector<Eigen::Index>(static_cast<std::size_t>(p), 0));
    std::vector<std::size_t> load(static_cast<std::size_t>(n_layers), 0);
    std::vector<EdgeList> layers(static_cast<std::size_t>(n_layers));
    for (const auto& [j, l] : all.edges) {
        int pick = -1;
        for (int s = 0; s < n_layers; ++s) {
            if (used[static_cast<std::size_t>(s)][static_cast<std::size_t>(j)] < cap[static_cast<std::size_t>(j)] &&
                used[static_cast<std::size_t>(s)][static_cast<std::size_t>(l)] < cap[static_cast<std::size_t>(l)]) {
                pick = s;
                break;
            }
        }
        if (pick < 0)
            pick = static_cast<int>(std::min_element(load.begin(), load.end()) - load.begin());
        layers[static_cast<std::size_t>(pick)].edges.emplace_back(j, l);
        ++used[static_cast<std::size_t>(pick)][static_cast<std::size_t>(j)];
        ++used[static_cast<std::size_t>(pick)][static_cast<std::size_t>(l)];
        ++load[static_cast<std::size_t>(pick)];
    }
    return layers;
}

struct ModelCResult {
    Eigen::MatrixXd theta;
    double sigma = 0.0;
    bool ok = false;
};

inline ModelCResult model_c_attempt(Eigen::Index p, Eigen::Index m, std::uint64_t seed, std::uint64_t attempt) {
    constexpr int n_layers = 5;
    ModelCResult out;
    if (m != n_layers)
        throw ValidationError("Model C: m_star must be 5 (one score per component layer)");
    Rng edge_rng(seed, "modelC/edges", attempt);
    const EdgeList all = model_c_edges(p, edge_rng);
    const std::vector<EdgeList> layers = model_c_partition(all, p);

    Rng omega_rng(seed, "modelC/omega", attempt);
    std::vector<Eigen::MatrixXd> omega(static_cast<std::size_t>(n_layers));
    std::vector<Eigen::MatrixXd> sigma_block(static_cast<std::size_t>(n_layers));
    double trace_sum = 0.0;
    for (int s = 0; s < n_layers; ++s) {
        Eigen::MatrixXd tilde = Eigen::MatrixXd::Identity(p, p);
        for (const auto& [j, l] : layers[static_cast<std::size_t>(s)].edges) {
            double v = omega_rng.uniform(1.0 / 3.0, 2.0 / 3.0);
            if (omega_rng.uniform() < 0.5) v = -v;
            tilde(l, j) = v; // lower triangle: l > j
        }
        for (Eigen::Index r = 0; r < p; ++r) tilde.row(r) /= tilde.row(r).norm();
        Eigen::MatrixXd om = 0.5 * (tilde + tilde.transpose());
        om.diagonal().setOnes();
        Eigen::LLT<Eigen::MatrixXd> llt(om);
        if (llt.info() != Eigen::Success) return out;
        omega[static_cast<std::size_t>(s)] = om;
        const double varpi = 3.0 * std::pow(static_cast<double>(s + 1), -1.8);
        sigma_block[static_cast<std::size_t>(s)] = varpi * llt.solve(Eigen::MatrixXd::Identity(p, p));
        trace_sum += sigma_block[static_cast<std::size_t>(s)].trace();
    }

    Eigen::MatrixXd omega_bar = Eigen::MatrixXd::Zero(p * n_layers, p * n_layers);
    for (int s = 0; s < n_layers; ++s) {
        omega_bar.block(s * p, s * p, p, p) = omega[static_cast<std::size_t>(s)];
        if (s + 1 < n_layers) {
            Eigen::MatrixXd hollow_s = omega[static_cast<std::size_t>(s)];
            hollow_s.diagonal().setZero();
            Eigen::MatrixXd hollow_n = omega[static_cast<std::size_t>(s + 1)];
            hollow_n.diagonal().setZero();
            const Eigen::MatrixXd coupling = 0.5 * (hollow_s + hollow_n);
            omega_bar.block(s * p, (s + 1) * p, p, p) = coupling;
            omega_bar.block((s + 1) * p, s * p, p, p) = coupling;
        }
    }

    const Eigen::VectorXd dbar = omega_bar.diagonal();
    const Eigen::VectorXd dbar_isqrt = dbar.cwiseSqrt().cwiseInverse();
    const Eigen::MatrixXd normalized = dbar_isqrt.asDiagonal() * omega_bar * dbar_isqrt.asDiagonal();
    {
        Eigen::LLT<Eigen::MatrixXd> llt(normalized);
        if (llt.info() != Eigen::Success) return out;
    }

    // Sigma_nps = D^1/2 normalized^-1 D^1/2 with D = diag(Sigma_ps), so the
    // precision is the explicit congruence D^-1/2 normalized D^-1/2; the final
    // index shuffle (component-major -> node-major) is a symmetric permutation.
    Eigen::VectorXd d(p * n_layers);
    for (int s = 0; s < n_layers; ++s) d.segment(s * p, p) = sigma_block[static_cast<std::size_t>(s)].diagonal();
    const Eigen::VectorXd d_isqrt = d.cwiseSqrt().cwiseInverse();
    const Eigen::MatrixXd theta_nps = d_isqrt.asDiagonal() * normalized * d_isqrt.asDiagonal();

    out.theta.resize(p * n_layers, p * n_layers);
    for (Eigen::Index j = 0; j < p; ++j)
        for (int s = 0; s < n_layers; ++s)
            for (Eigen::Index l = 0; l < p; ++l)
                for (int t = 0; t < n_layers; ++t)
                    out.theta(j * n_layers + s, l * n_layers + t) = theta_nps(s * p + j, t * p + l);
    out.theta = 0.5 * (out.theta + out.theta.transpose().eval());
    out.sigma = std::sqrt(0.05 * trace_sum / static_cast<double>(p));
    out.ok = true;
    return out;
}

} // namespace detail

inline PrecisionMatrix build_precision(const PrecisionSpec& spec) {
    spec.validate();
    const Eigen::Index m = spec.resolved_m_star();
    PrecisionMatrix prec;
    prec.p = spec.p;
    prec.m_star = m;
    switch (spec.model) {
        case Model::A:
            prec.theta = detail::model_a_theta(spec.p, m);
            break;
        case Model::B:
            prec.theta = detail::model_b_theta(spec.p, m);
            break;
        case Model::D:
            prec.theta = detail::model_d_theta(spec.p, m, spec.seed);
            break;
        case Model::C: {
            bool done = false;
            for (std::uint64_t attempt = 0; attempt < 64 && !done; ++attempt) {
                auto res = detail::model_c_attempt(spec.p, m, spec.seed, attempt);
                if (res.ok) {
                    prec.theta = std::move(res.theta);
                    prec.suggested_noise_sigma = res.sigma;
                    done = true;
                }
            }
            if (!done) throw NumericalError("build_precision: Model C failed to reach a positive definite matrix in 64 attempts");
            break;
        }
    }
    prec.validate();
    return prec;
}

// Draws n iid score vectors from N(0, theta^-1), expands them in the first
// m_star Fourier functions on a uniform [0, 1] grid of T points, and adds
// iid N(0, sigma^2) observation noise.
inline std::pair<FunctionalDataset, TrueGraph> sample_dataset(const PrecisionMatrix& prec, Eigen::Index n,
                                                              Eigen::Index T, double sigma, std::uint64_t seed) {
    prec.validate();
    if (n < 1) throw ValidationError("sample_dataset: need n >= 1");
    if (T < prec.m_star)
        throw ValidationError("sample_dataset: T=" + std::to_string(T) + " cannot carry m_star=" +
                              std::to_string(prec.m_star) + " Fourier functions");
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ValidationError("sample_dataset: sigma must be finite and >= 0");

    const Eigen::Index d = prec.p * prec.m_star;
    Eigen::LLT<Eigen::MatrixXd> llt(prec.theta);
    if (llt.info() != Eigen::Success) throw NumericalError("sample_dataset: precision not positive definite");
    const Eigen::MatrixXd sigma_full = llt.solve(Eigen::MatrixXd::Identity(d, d));
    Eigen::LLT<Eigen::MatrixXd> sig_llt(0.5 * (sigma_full + sigma_full.transpose().eval()));
    if (sig_llt.info() != Eigen::Success) throw NumericalError("sample_dataset: covariance not positive definite");
    const Eigen::MatrixXd chol = sig_llt.matrixL();

    Rng score_rng(seed, "scores");
    Eigen::MatrixXd scores(n, d); // row i = score vector of sample i
    Eigen::VectorXd xi(d);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index l = 0; l < d; ++l) xi[l] = score_rng.normal();
        scores.row(i) = (chol * xi).transpose();
    }

    const Grid grid = Grid::uniform(0.0, 1.0, T);
    const BasisSet fourier = fourier_basis(prec.m_star, grid);
    FunctionalDataset ds = FunctionalDataset::zeros(n, prec.p, grid);
    for (Eigen::Index j = 0; j < prec.p; ++j)
        ds.values[static_cast<std::size_t>(j)].noalias() =
            scores.middleCols(j * prec.m_star, prec.m_star) * fourier.functions;
    if (sigma > 0.0) {
        Rng noise_rng(seed, "noise");
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < prec.p; ++j)
                for (Eigen::Index k = 0; k < T; ++k)
                    ds.values[static_cast<std::size_t>(j)](i, k) += sigma * noise_rng.normal();
    }
    return {std::move(ds), true_edges(prec)};
}

struct TheoryDiagnostics {
    double kappa = 0.0;
    double tau = 0.0;
    Eigen::Index neighborhood_size = 0;
};

// Population quantities for node j at truncation level M, with an explicit
// neighborhood (used by tests with artificial neighborhoods).
inline TheoryDiagnostics theory_diagnostics_at(const PrecisionMatrix& prec, Eigen::Index j, Eigen::Index M,
                                               const std::vector<Eigen::Index>& neighborhood) {
    prec.validate();
    if (j < 0 || j >= prec.p) throw ValidationError("theory_diagnostics: node out of range");
    if (M < 1 || M > prec.m_star)
        throw ValidationError("theory_diagnostics: M must lie in [1, m_star=" + std::to_string(prec.m_star) + "]");
    TheoryDiagnostics out;
    out.neighborhood_size = static_cast<Eigen::Index>(neighborhood.size());
    if (neighborhood.empty()) {
        out.kappa = std::numeric_limits<double>::infinity();
        out.tau = std::numeric_limits<double>::infinity();
        return out;
    }
    for (Eigen::Index k : neighborhood)
        if (k < 0 || k >= prec.p || k == j) throw ValidationError("theory_diagnostics: invalid neighborhood node");

    const Eigen::Index d = prec.p * prec.m_star;
    const Eigen::Index s = static_cast<Eigen::Index>(neighborhood.size());
    const Eigen::Index ms = prec.m_star;
    Eigen::LLT<Eigen::MatrixXd> llt(prec.theta);
    const Eigen::MatrixXd sigma = llt.solve(Eigen::MatrixXd::Identity(d, d));

    // kappa: smallest eigenvalue of the neighborhood score covariance
    // truncated to the leading M coordinates per node.
    Eigen::MatrixXd sub(s * M, s * M);
    for (Eigen::Index a = 0; a < s; ++a)
        for (Eigen::Index b = 0; b < s; ++b)
            sub.block(a * M, b * M, M, M) =
                sigma.block(neighborhood[static_cast<std::size_t>(a)] * ms,
                            neighborhood[static_cast<std::size_t>(b)] * ms, M, M);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (sub + sub.transpose().eval()));
    out.kappa = eig.eigenvalues().minCoeff();

    // tau: the full-rank population regression of node j on its neighborhood,
    // each coefficient block truncated to its leading M x M corner.
    Eigen::MatrixXd sxx(s * ms, s * ms);
    Eigen::MatrixXd sxy(s * ms, ms);
    for (Eigen::Index a = 0; a < s; ++a) {
        sxy.middleRows(a * ms, ms) = sigma.block(neighborhood[static_cast<std::size_t>(a)] * ms, j * ms, ms, ms);
        for (Eigen::Index b = 0; b < s; ++b)
            sxx.block(a * ms, b * ms, ms, ms) =
                sigma.block(neighborhood[static_cast<std::size_t>(a)] * ms,
                            neighborhood[static_cast<std::size_t>(b)] * ms, ms, ms);
    }
    const Eigen::MatrixXd bstack = Eigen::LLT<Eigen::MatrixXd>(0.5 * (sxx + sxx.transpose().eval())).solve(sxy);
    double tau = std::numeric_limits<double>::infinity();
    for (Eigen::Index a = 0; a < s; ++a)
        tau = std::min(tau, bstack.middleRows(a * ms, ms).topLeftCorner(M, M).norm());
    out.tau = tau;
    return out;
}

// Same with the neighborhood taken from the true edge set of theta.
inline TheoryDiagnostics theory_diagnostics(const PrecisionMatrix& prec, Eigen::Index j, Eigen::Index M) {
    const TrueGraph g = true_edges(prec);
    std::vector<Eigen::Index> nb;
    for (Eigen::Index l = 0; l < prec.p; ++l)
        if (l != j && g.adjacency(j, l)) nb.push_back(l);
    return theory_diagnostics_at(prec, j, M, nb);
}

} // namespace fgm
