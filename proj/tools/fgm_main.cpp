// Command-line front end: simulate datasets, estimate graphs, tune penalties,
// and score estimates against a known truth.  Every subcommand writes a
// manifest JSON holding the resolved parameters; feeding that manifest back
// through --config reproduces the outputs byte for byte.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fgm/dataset_io.hpp"
#include "fgm/eval.hpp"
#include "fgm/pipeline.hpp"
#include "fgm/simgen.hpp"
#include "fgm/version.hpp"

namespace {

using nlohmann::ordered_json;

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw fgm::IoError("cannot open " + path + " for writing");
    out << content;
    if (!out) throw fgm::IoError("failed to write " + path);
    std::cout << "wrote " << path << "\n";
}

void ensure_parent_dir(const std::string& out_prefix) {
    const std::filesystem::path parent = std::filesystem::path(out_prefix).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
}

// Values for known keys missing on the command line are taken from a config
// file (either a bare parameter object or a previously written manifest);
// explicit flags win, unknown keys are rejected.
class ConfigMerge {
public:
    void load(const std::string& path, const std::string& subcommand) {
        std::ifstream in(path);
        if (!in) throw fgm::IoError("cannot open config file " + path);
        ordered_json doc;
        try {
            doc = ordered_json::parse(in);
        } catch (const nlohmann::json::exception& e) {
            throw fgm::ParseError(path + ": " + e.what());
        }
        if (doc.is_object() && doc.contains("params")) {
            if (doc.contains("subcommand") && doc.at("subcommand").get<std::string>() != subcommand)
                throw fgm::ValidationError("config file " + path + " is for subcommand \"" +
                                           doc.at("subcommand").get<std::string>() + "\", not \"" + subcommand +
                                           "\"");
            if (doc.contains("schema_version") && doc.at("schema_version").get<int>() != fgm::schema_version)
                throw fgm::ValidationError("config file " + path + " has unsupported schema_version");
            params_ = doc.at("params");
        } else {
            params_ = std::move(doc);
        }
        if (!params_.is_object()) throw fgm::ValidationError("config file " + path + " must hold a JSON object");
        loaded_ = true;
    }

    template <typename T>
    void apply(const CLI::Option* opt, const char* key, T& value) {
        known_.insert(key);
        if (!loaded_ || !params_.contains(key)) return;
        if (opt != nullptr && opt->count() > 0) return;
        try {
            value = params_.at(key).get<T>();
        } catch (const nlohmann::json::exception& e) {
            throw fgm::ValidationError(std::string("config key \"") + key + "\": " + e.what());
        }
    }

    void finish() const {
        if (!loaded_) return;
        for (const auto& item : params_.items())
            if (known_.find(item.key()) == known_.end())
                throw fgm::ValidationError("unknown config key \"" + item.key() + "\"");
    }

private:
    ordered_json params_;
    bool loaded_ = false;
    std::set<std::string> known_;
};

void write_manifest(const std::string& out_prefix, const std::string& subcommand, const ordered_json& params) {
    ordered_json m;
    m["schema_version"] = fgm::schema_version;
    m["library_version"] = fgm::version_string;
    m["subcommand"] = subcommand;
    m["params"] = params;
    write_text(out_prefix + ".manifest.json", m.dump(2) + "\n");
}

fgm::FunctionalDataset load_dataset(const std::string& path) {
    if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".bin") == 0) return fgm::load_binary(path);
    if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0) return fgm::load_csv(path);
    throw fgm::ValidationError("dataset path must end in .bin or .csv: " + path);
}

ordered_json graph_to_json(const Eigen::MatrixXi& adj, const char* rule) {
    ordered_json j;
    j["p"] = adj.rows();
    if (rule != nullptr) j["rule"] = rule;
    ordered_json edges = ordered_json::array();
    for (Eigen::Index a = 0; a < adj.rows(); ++a)
        for (Eigen::Index b = a + 1; b < adj.cols(); ++b)
            if (adj(a, b) != 0) edges.push_back(ordered_json::array({a, b}));
    j["edges"] = std::move(edges);
    return j;
}

std::string adjacency_csv(const Eigen::MatrixXi& adj) {
    std::string out;
    for (Eigen::Index a = 0; a < adj.rows(); ++a) {
        for (Eigen::Index b = 0; b < adj.cols(); ++b) {
            if (b > 0) out += ',';
            out += std::to_string(adj(a, b));
        }
        out += '\n';
    }
    return out;
}

Eigen::MatrixXi graph_from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw fgm::IoError("cannot open graph file " + path);
    ordered_json doc;
    try {
        doc = ordered_json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw fgm::ParseError(path + ": " + e.what());
    }
    if (!doc.is_object() || !doc.contains("p") || !doc.contains("edges"))
        throw fgm::ParseError(path + ": expected an object with \"p\" and \"edges\"");
    const Eigen::Index p = doc.at("p").get<Eigen::Index>();
    if (p < 2) throw fgm::ValidationError(path + ": need p >= 2");
    Eigen::MatrixXi adj = Eigen::MatrixXi::Zero(p, p);
    for (const auto& e : doc.at("edges")) {
        if (!e.is_array() || e.size() != 2) throw fgm::ParseError(path + ": each edge must be a [j, l] pair");
        const Eigen::Index j = e[0].get<Eigen::Index>(), l = e[1].get<Eigen::Index>();
        if (j < 0 || l < 0 || j >= p || l >= p || j == l)
            throw fgm::ValidationError(path + ": invalid edge [" + std::to_string(j) + ", " + std::to_string(l) + "]");
        adj(j, l) = adj(l, j) = 1;
    }
    return adj;
}

Eigen::MatrixXi graph_from_adjacency_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw fgm::IoError("cannot open graph file " + path);
    std::vector<std::vector<int>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        rows.emplace_back();
        std::size_t start = 0;
        while (start <= line.size()) {
            const std::size_t comma = line.find(',', start);
            const std::string cell = line.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
            rows.back().push_back(static_cast<int>(
                fgm::detail::parse_long(cell, path + ":" + std::to_string(rows.size()))));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
    }
    const Eigen::Index p = static_cast<Eigen::Index>(rows.size());
    if (p < 2) throw fgm::ValidationError(path + ": need p >= 2");
    Eigen::MatrixXi adj(p, p);
    for (Eigen::Index a = 0; a < p; ++a) {
        if (static_cast<Eigen::Index>(rows[static_cast<std::size_t>(a)].size()) != p)
            throw fgm::ParseError(path + ":" + std::to_string(a + 1) + ": expected " + std::to_string(p) + " columns");
        for (Eigen::Index b = 0; b < p; ++b) adj(a, b) = rows[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
    }
    return adj;
}

Eigen::MatrixXi load_graph(const std::string& path) {
    if (path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0) return graph_from_json_file(path);
    return graph_from_adjacency_csv(path);
}

struct GridFlags {
    int t_points = 50;
    double t_min = 0.01;

    std::vector<double> values() const { return fgm::lambda_grid(t_points, 1.0, t_min); }
};

fgm::EstimateOptions make_options(const fgm::FunctionalDataset& ds, const std::string& mode, Eigen::Index M,
                                  double epsilon, int threads) {
    fgm::EstimateOptions opts;
    opts.M = M;
    opts.epsilon = epsilon;
    opts.threads = threads;
    if (mode == "fourier") {
        opts.mode = fgm::BasisMode::fixed;
        opts.fixed_basis = fgm::fourier_basis(M, ds.grid);
    } else if (mode == "bspline") {
        opts.mode = fgm::BasisMode::fixed;
        opts.fixed_basis = fgm::bspline_basis(M, ds.grid);
    } else {
        opts.mode = fgm::basis_mode_from_string(mode);
        if (opts.mode == fgm::BasisMode::fixed)
            throw fgm::ValidationError("mode \"fixed\" is not directly selectable; use fourier or bspline");
    }
    return opts;
}

int cmd_simulate(const std::string& model_str, long p, long n, long T, long m_star, double sigma, std::uint64_t seed,
                 const std::string& format, const std::string& out) {
    fgm::PrecisionSpec spec;
    spec.model = fgm::model_from_string(model_str);
    spec.p = p;
    spec.m_star = m_star;
    spec.seed = seed;
    const fgm::PrecisionMatrix prec = fgm::build_precision(spec);

    double sigma_used = sigma;
    if (sigma < 0.0)
        sigma_used = std::isnan(prec.suggested_noise_sigma) ? 0.5 : prec.suggested_noise_sigma;

    const auto [ds, truth] = fgm::sample_dataset(prec, n, T, sigma_used, seed);

    ensure_parent_dir(out);
    if (format == "binary") {
        fgm::save_binary(ds, out + ".bin");
        std::cout << "wrote " << out << ".bin\n";
    } else if (format == "csv") {
        fgm::save_csv(ds, out + ".csv");
        std::cout << "wrote " << out << ".csv\n";
    } else {
        throw fgm::ValidationError("unknown format \"" + format + "\" (expected binary or csv)");
    }
    write_text(out + ".truth.json", graph_to_json(truth.adjacency, nullptr).dump(2) + "\n");

    ordered_json params;
    params["model"] = model_str;
    params["p"] = p;
    params["n"] = n;
    params["T"] = T;
    params["m_star"] = m_star;
    params["sigma"] = sigma_used;
    params["seed"] = seed;
    params["format"] = format;
    params["out"] = out;
    write_manifest(out, "simulate", params);
    return 0;
}

ordered_json node_diagnostics(const fgm::NeighborhoodEstimate& est, double t) {
    ordered_json d;
    d["target"] = est.target;
    d["t"] = t;
    d["lambda"] = est.lambda;
    d["converged"] = est.converged;
    ordered_json nodes = ordered_json::array(), norms = ordered_json::array(), sel = ordered_json::array();
    for (std::size_t k = 0; k < est.x_nodes.size(); ++k) {
        nodes.push_back(est.x_nodes[k]);
        norms.push_back(est.block_norms[static_cast<Eigen::Index>(k)]);
    }
    for (Eigen::Index s : est.selected) sel.push_back(s);
    d["x_nodes"] = std::move(nodes);
    d["block_norms"] = std::move(norms);
    d["selected"] = std::move(sel);
    return d;
}

void write_graph_outputs(const std::string& out, const fgm::GraphEstimate& g) {
    const std::string rule = g.rule == fgm::CombineRule::and_rule ? "and" : "or";
    write_text(out + "." + rule + ".csv", adjacency_csv(g.adjacency));
    write_text(out + "." + rule + ".json", graph_to_json(g.adjacency, fgm::to_string(g.rule)).dump(2) + "\n");
}

int cmd_estimate(const std::string& data, const std::string& mode, long M, const GridFlags& grid_flags,
                 double lambda_t, bool scv, int folds, double epsilon, std::uint64_t seed, bool center, int threads,
                 const std::string& out) {
    if (scv == (lambda_t >= 0.0))
        throw fgm::ValidationError("estimate: choose exactly one of --lambda-t and --scv");
    fgm::FunctionalDataset ds = load_dataset(data);
    if (center) ds = fgm::center_dataset(ds);

    fgm::EstimateOptions opts = make_options(ds, mode, M, epsilon, threads);
    ensure_parent_dir(out);
    ordered_json diags = ordered_json::array();

    if (scv) {
        opts.t_values = grid_flags.values();
        const fgm::ScvGraphResult res = fgm::run_scv(ds, opts, folds, seed);
        write_graph_outputs(out, res.graph_and);
        write_graph_outputs(out, res.graph_or);
        for (Eigen::Index j = 0; j < ds.p(); ++j) {
            const auto& scv_j = res.per_node[static_cast<std::size_t>(j)];
            fgm::NeighborhoodEstimate est;
            est.target = j;
            est.block_norms =
                scv_j.path.block_norms.row(static_cast<Eigen::Index>(scv_j.chosen_index)).transpose();
            est.x_nodes.clear();
            for (Eigen::Index l = 0; l < ds.p(); ++l)
                if (l != j) est.x_nodes.push_back(l);
            est.lambda = scv_j.chosen_lambda;
            est.converged = scv_j.path.converged[scv_j.chosen_index] != 0;
            est.selected = fgm::selected_nodes(est.block_norms, est.x_nodes, opts.epsilon);
            diags.push_back(node_diagnostics(est, scv_j.chosen_t));
        }
    } else {
        opts.t_values = {lambda_t};
        const std::vector<fgm::NodePath> paths = fgm::run_all_paths(ds, opts);
        write_graph_outputs(out, fgm::graph_at(paths, 0, opts.epsilon, fgm::CombineRule::and_rule));
        write_graph_outputs(out, fgm::graph_at(paths, 0, opts.epsilon, fgm::CombineRule::or_rule));
        for (const auto& np : paths) {
            fgm::NeighborhoodEstimate est;
            est.target = np.target;
            est.x_nodes = np.x_nodes;
            est.block_norms = np.path.block_norms.row(0).transpose();
            est.lambda = np.path.lambdas[0];
            est.converged = np.path.converged[0] != 0;
            est.selected = fgm::selected_nodes(est.block_norms, est.x_nodes, opts.epsilon);
            diags.push_back(node_diagnostics(est, lambda_t));
        }
    }
    write_text(out + ".diagnostics.json", diags.dump(2) + "\n");

    ordered_json params;
    params["data"] = data;
    params["mode"] = mode;
    params["M"] = M;
    params["t_points"] = grid_flags.t_points;
    params["t_min"] = grid_flags.t_min;
    params["lambda_t"] = lambda_t;
    params["scv"] = scv;
    params["folds"] = folds;
    params["epsilon"] = epsilon;
    params["seed"] = seed;
    params["center"] = center;
    params["out"] = out;
    write_manifest(out, "estimate", params);
    return 0;
}

int cmd_tune(const std::string& data, const std::string& mode, long M, const GridFlags& grid_flags, int folds,
             long target, const std::vector<long>& m_candidates, std::uint64_t seed, bool center, int threads,
             const std::string& out) {
    fgm::FunctionalDataset ds = load_dataset(data);
    if (center) ds = fgm::center_dataset(ds);
    if (target >= ds.p()) throw fgm::ValidationError("tune: target " + std::to_string(target) + " out of range");

    std::vector<Eigen::Index> targets;
    if (target < 0)
        for (Eigen::Index j = 0; j < ds.p(); ++j) targets.push_back(j);
    else
        targets.push_back(target);

    ensure_parent_dir(out);
    const std::vector<double> t_values = grid_flags.values();

    if (!m_candidates.empty()) {
        std::vector<Eigen::Index> cand(m_candidates.begin(), m_candidates.end());
        const Eigen::Index top = *std::max_element(cand.begin(), cand.end());
        fgm::BasisMode bm = fgm::BasisMode::fpca_gy;
        std::optional<fgm::BasisSet> fixed;
        if (mode == "fourier") {
            bm = fgm::BasisMode::fixed;
            fixed = fgm::fourier_basis(top, ds.grid);
        } else if (mode == "bspline") {
            bm = fgm::BasisMode::fixed;
            fixed = fgm::bspline_basis(top, ds.grid);
        } else {
            bm = fgm::basis_mode_from_string(mode);
        }
        std::vector<Eigen::Index> picked(targets.size());
        fgm::parallel_for(static_cast<Eigen::Index>(targets.size()), fgm::resolve_threads(threads),
                          [&](Eigen::Index i) {
                              picked[static_cast<std::size_t>(i)] =
                                  fgm::select_M(ds, targets[static_cast<std::size_t>(i)], bm, cand, t_values, folds,
                                                fgm::AdmmConfig{}, seed, fixed ? &*fixed : nullptr);
                          });
        ordered_json summary = ordered_json::array();
        for (std::size_t i = 0; i < targets.size(); ++i) {
            ordered_json row;
            row["target"] = targets[i];
            row["selected_M"] = picked[i];
            summary.push_back(std::move(row));
        }
        write_text(out + ".m.json", summary.dump(2) + "\n");
    } else {
        fgm::EstimateOptions opts = make_options(ds, mode, M, 0.0, threads);
        const fgm::ScoreProvider provider(ds, opts);
        std::vector<fgm::ScvResult> results(targets.size());
        fgm::parallel_for(static_cast<Eigen::Index>(targets.size()), fgm::resolve_threads(threads),
                          [&](Eigen::Index i) {
                              const fgm::ScoreMatrices scores = provider.for_target(targets[static_cast<std::size_t>(i)]);
                              results[static_cast<std::size_t>(i)] =
                                  fgm::scv_select_lambda(scores, t_values, folds, opts.admm, seed);
                          });

        std::string csv = "node,t,lambda,support_size,criterion\n";
        ordered_json summary = ordered_json::array();
        for (std::size_t i = 0; i < targets.size(); ++i) {
            const auto& res = results[i];
            for (std::size_t s = 0; s < t_values.size(); ++s) {
                csv += std::to_string(targets[i]) + ',' + fgm::detail::format_double(res.path.t_values[s]) + ',' +
                       fgm::detail::format_double(res.path.lambdas[s]) + ',' + std::to_string(res.support_size[s]) + ',' +
                       fgm::detail::format_double(res.criterion[s]) + '\n';
            }
            ordered_json row;
            row["target"] = targets[i];
            row["chosen_t"] = res.chosen_t;
            row["chosen_lambda"] = res.chosen_lambda;
            row["support_size"] = res.support_size[res.chosen_index];
            summary.push_back(std::move(row));
        }
        write_text(out + ".criterion.csv", csv);
        write_text(out + ".summary.json", summary.dump(2) + "\n");
    }

    ordered_json params;
    params["data"] = data;
    params["mode"] = mode;
    params["M"] = M;
    params["t_points"] = grid_flags.t_points;
    params["t_min"] = grid_flags.t_min;
    params["folds"] = folds;
    params["target"] = target;
    params["m_candidates"] = m_candidates;
    params["seed"] = seed;
    params["center"] = center;
    params["out"] = out;
    write_manifest(out, "tune", params);
    return 0;
}

int cmd_roc(const std::string& data, const std::string& truth_path, const std::string& mode, long M,
            const GridFlags& grid_flags, double epsilon, const std::string& rule, bool center, int threads,
            const std::string& out) {
    fgm::FunctionalDataset ds = load_dataset(data);
    if (center) ds = fgm::center_dataset(ds);
    const Eigen::MatrixXi truth = load_graph(truth_path);
    if (truth.rows() != ds.p())
        throw fgm::DimensionError("roc: truth has p=" + std::to_string(truth.rows()) + ", dataset has p=" +
                                  std::to_string(ds.p()));

    fgm::EstimateOptions opts = make_options(ds, mode, M, epsilon, threads);
    opts.t_values = grid_flags.values();
    const std::vector<fgm::NodePath> paths = fgm::run_all_paths(ds, opts);

    ensure_parent_dir(out);
    const bool want_and = rule == "both" || rule == "AND" || rule == "and";
    const bool want_or = rule == "both" || rule == "OR" || rule == "or";
    if (!want_and && !want_or) throw fgm::ValidationError("unknown rule \"" + rule + "\" (expected AND, OR or both)");

    ordered_json summary;
    auto emit = [&](fgm::CombineRule r) {
        const fgm::RocCurve curve = fgm::roc_over_paths(paths, truth, opts.epsilon, r);
        std::string csv = "t,fpr,tpr\n";
        for (const auto& pt : curve.points)
            csv += fgm::detail::format_double(pt.t) + ',' + fgm::detail::format_double(pt.fpr) + ',' + fgm::detail::format_double(pt.tpr) +
                   '\n';
        const std::string tag = r == fgm::CombineRule::and_rule ? "and" : "or";
        write_text(out + ".roc." + tag + ".csv", csv);
        summary["auc_" + tag] = curve.auc;
    };
    if (want_and) emit(fgm::CombineRule::and_rule);
    if (want_or) emit(fgm::CombineRule::or_rule);
    write_text(out + ".summary.json", summary.dump(2) + "\n");

    ordered_json params;
    params["data"] = data;
    params["truth"] = truth_path;
    params["mode"] = mode;
    params["M"] = M;
    params["t_points"] = grid_flags.t_points;
    params["t_min"] = grid_flags.t_min;
    params["epsilon"] = epsilon;
    params["rule"] = rule;
    params["center"] = center;
    params["out"] = out;
    write_manifest(out, "roc", params);
    return 0;
}

int cmd_eval(const std::string& graph_path, const std::string& truth_path, const std::string& out) {
    const Eigen::MatrixXi est = load_graph(graph_path);
    const Eigen::MatrixXi truth = load_graph(truth_path);
    const fgm::Confusion c = fgm::confusion(est, truth);
    const fgm::PrecisionRecall pr = fgm::precision_recall(est, truth);

    ensure_parent_dir(out);
    ordered_json metrics;
    metrics["precision"] = pr.precision;
    metrics["recall"] = pr.recall;
    metrics["tpr"] = c.tpr();
    metrics["fpr"] = c.fpr();
    metrics["tp"] = c.tp;
    metrics["fp"] = c.fp;
    metrics["tn"] = c.tn;
    metrics["fn"] = c.fn;
    write_text(out + ".metrics.json", metrics.dump(2) + "\n");

    ordered_json params;
    params["graph"] = graph_path;
    params["truth"] = truth_path;
    params["out"] = out;
    write_manifest(out, "eval", params);
    return 0;
}

int cmd_basis_export(const std::string& kind, long M, long T, double a, double b, int degree,
                     const std::string& data, long node, const std::string& out) {
    fgm::BasisSet basis;
    if (kind == "fourier") {
        basis = fgm::fourier_basis(M, fgm::Grid::uniform(a, b, T));
    } else if (kind == "bspline") {
        basis = fgm::bspline_basis(M, fgm::Grid::uniform(a, b, T), degree);
    } else if (kind == "fpca") {
        if (data.empty()) throw fgm::ValidationError("basis export: --kind fpca needs --data");
        const fgm::FunctionalDataset ds = load_dataset(data);
        if (node < 0 || node >= ds.p()) throw fgm::ValidationError("basis export: node out of range");
        basis = fgm::estimate_fpca(ds.values[static_cast<std::size_t>(node)], ds.grid, M);
    } else {
        throw fgm::ValidationError("unknown basis kind \"" + kind + "\" (expected fourier, bspline or fpca)");
    }

    ensure_parent_dir(out);
    std::string csv;
    for (Eigen::Index m = 0; m < basis.M(); ++m) {
        for (Eigen::Index k = 0; k < basis.functions.cols(); ++k) {
            if (k > 0) csv += ',';
            csv += fgm::detail::format_double(basis.functions(m, k));
        }
        csv += '\n';
    }
    write_text(out + ".basis.csv", csv);

    ordered_json meta;
    meta["kind"] = fgm::to_string(basis.kind);
    meta["M"] = basis.M();
    meta["T"] = basis.functions.cols();
    meta["a"] = basis.grid.a;
    meta["b"] = basis.grid.b;
    ordered_json eig = ordered_json::array();
    for (Eigen::Index m = 0; m < basis.eigenvalues.size(); ++m) eig.push_back(basis.eigenvalues[m]);
    meta["eigenvalues"] = std::move(eig);
    write_text(out + ".basis.json", meta.dump(2) + "\n");

    ordered_json params;
    params["kind"] = kind;
    params["M"] = M;
    params["T"] = T;
    params["a"] = a;
    params["b"] = b;
    params["degree"] = degree;
    params["data"] = data;
    params["node"] = node;
    params["out"] = out;
    write_manifest(out, "basis export", params);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Conditional-independence graph estimation for multivariate functional data"};
    app.set_version_flag("--version", fgm::version_string);
    app.require_subcommand(1);

    try {
        // simulate ------------------------------------------------------------
        auto* sim = app.add_subcommand("simulate", "Draw a synthetic dataset from one of the precision models");
        std::string sim_config, sim_model, sim_format = "binary", sim_out;
        long sim_p = 50, sim_n = 100, sim_T = 100, sim_m = 0;
        double sim_sigma = -1.0;
        std::uint64_t sim_seed = 0;
        sim->add_option("--config", sim_config, "JSON config or manifest supplying defaults");
        auto* sim_model_opt = sim->add_option("--model", sim_model, "precision model: A, B, C or D");
        auto* sim_p_opt = sim->add_option("--p", sim_p, "number of nodes");
        auto* sim_n_opt = sim->add_option("--n", sim_n, "number of samples");
        auto* sim_T_opt = sim->add_option("--T", sim_T, "grid points per curve");
        auto* sim_m_opt = sim->add_option("--m-star", sim_m, "latent dimension (0 = model default)");
        auto* sim_sigma_opt = sim->add_option("--sigma", sim_sigma, "observation noise sd (negative = model default)");
        auto* sim_seed_opt = sim->add_option("--seed", sim_seed, "random seed");
        auto* sim_format_opt = sim->add_option("--format", sim_format, "dataset format: binary or csv");
        auto* sim_out_opt = sim->add_option("--out", sim_out, "output path prefix");

        // estimate ------------------------------------------------------------
        auto* est = app.add_subcommand("estimate", "Estimate the graph from a dataset");
        std::string est_config, est_data, est_mode = "fpca_gy", est_out;
        long est_M = 5;
        GridFlags est_grid;
        double est_lambda_t = -1.0, est_eps = 0.0;
        bool est_scv = false, est_center = false;
        int est_folds = 5, est_threads = 0;
        std::uint64_t est_seed = 0;
        est->add_option("--config", est_config, "JSON config or manifest supplying defaults");
        auto* est_data_opt = est->add_option("--data", est_data, "dataset file (.bin or .csv)");
        auto* est_mode_opt = est->add_option("--mode", est_mode, "basis: fpca_gy, fpca_gx, fourier or bspline");
        auto* est_M_opt = est->add_option("--M", est_M, "basis dimension");
        auto* est_tp_opt = est->add_option("--t-points", est_grid.t_points, "penalty grid size");
        auto* est_tm_opt = est->add_option("--t-min", est_grid.t_min, "smallest penalty fraction");
        auto* est_lt_opt = est->add_option("--lambda-t", est_lambda_t, "estimate at this shared t in (0, 1]");
        auto* est_scv_opt = est->add_flag("--scv", est_scv, "tune lambda per node by cross-validated refits");
        auto* est_folds_opt = est->add_option("--folds", est_folds, "cross-validation folds");
        auto* est_eps_opt = est->add_option("--epsilon", est_eps, "block-norm selection threshold");
        auto* est_seed_opt = est->add_option("--seed", est_seed, "fold-assignment seed");
        auto* est_center_opt = est->add_flag("--center", est_center, "subtract per-node sample means first");
        auto* est_threads_opt = est->add_option("--threads", est_threads, "worker threads (0 = auto)");
        auto* est_out_opt = est->add_option("--out", est_out, "output path prefix");

        // tune ---------------------------------------------------------------
        auto* tun = app.add_subcommand("tune", "Per-node penalty selection tables (or M selection)");
        std::string tun_config, tun_data, tun_mode = "fpca_gy", tun_out;
        long tun_M = 5, tun_target = -1;
        GridFlags tun_grid;
        std::vector<long> tun_cand;
        bool tun_center = false;
        int tun_folds = 5, tun_threads = 0;
        std::uint64_t tun_seed = 0;
        tun->add_option("--config", tun_config, "JSON config or manifest supplying defaults");
        auto* tun_data_opt = tun->add_option("--data", tun_data, "dataset file (.bin or .csv)");
        auto* tun_mode_opt = tun->add_option("--mode", tun_mode, "basis: fpca_gy, fpca_gx, fourier or bspline");
        auto* tun_M_opt = tun->add_option("--M", tun_M, "basis dimension");
        auto* tun_tp_opt = tun->add_option("--t-points", tun_grid.t_points, "penalty grid size");
        auto* tun_tm_opt = tun->add_option("--t-min", tun_grid.t_min, "smallest penalty fraction");
        auto* tun_folds_opt = tun->add_option("--folds", tun_folds, "cross-validation folds");
        auto* tun_target_opt = tun->add_option("--target", tun_target, "single node (-1 = all nodes)");
        auto* tun_cand_opt =
            tun->add_option("--m-candidates", tun_cand, "candidate dimensions; selects M instead of lambda")
                ->delimiter(',');
        auto* tun_seed_opt = tun->add_option("--seed", tun_seed, "fold-assignment seed");
        auto* tun_center_opt = tun->add_flag("--center", tun_center, "subtract per-node sample means first");
        auto* tun_threads_opt = tun->add_option("--threads", tun_threads, "worker threads (0 = auto)");
        auto* tun_out_opt = tun->add_option("--out", tun_out, "output path prefix");

        // roc ----------------------------------------------------------------
        auto* roc_cmd = app.add_subcommand("roc", "ROC curve of the penalty path against a known truth");
        std::string roc_config, roc_data, roc_truth, roc_mode = "fpca_gy", roc_rule = "both", roc_out;
        long roc_M = 5;
        GridFlags roc_grid;
        double roc_eps = 0.0;
        bool roc_center = false;
        int roc_threads = 0;
        roc_cmd->add_option("--config", roc_config, "JSON config or manifest supplying defaults");
        auto* roc_data_opt = roc_cmd->add_option("--data", roc_data, "dataset file (.bin or .csv)");
        auto* roc_truth_opt = roc_cmd->add_option("--truth", roc_truth, "truth edge list JSON or adjacency CSV");
        auto* roc_mode_opt = roc_cmd->add_option("--mode", roc_mode, "basis: fpca_gy, fpca_gx, fourier or bspline");
        auto* roc_M_opt = roc_cmd->add_option("--M", roc_M, "basis dimension");
        auto* roc_tp_opt = roc_cmd->add_option("--t-points", roc_grid.t_points, "penalty grid size");
        auto* roc_tm_opt = roc_cmd->add_option("--t-min", roc_grid.t_min, "smallest penalty fraction");
        auto* roc_eps_opt = roc_cmd->add_option("--epsilon", roc_eps, "block-norm selection threshold");
        auto* roc_rule_opt = roc_cmd->add_option("--rule", roc_rule, "AND, OR or both");
        auto* roc_center_opt = roc_cmd->add_flag("--center", roc_center, "subtract per-node sample means first");
        auto* roc_threads_opt = roc_cmd->add_option("--threads", roc_threads, "worker threads (0 = auto)");
        auto* roc_out_opt = roc_cmd->add_option("--out", roc_out, "output path prefix");

        // eval ---------------------------------------------------------------
        auto* eval_cmd = app.add_subcommand("eval", "Precision/recall of one graph against a truth");
        std::string eval_config, eval_graph, eval_truth, eval_out;
        eval_cmd->add_option("--config", eval_config, "JSON config or manifest supplying defaults");
        auto* eval_graph_opt = eval_cmd->add_option("--graph", eval_graph, "estimate edge list JSON or adjacency CSV");
        auto* eval_truth_opt = eval_cmd->add_option("--truth", eval_truth, "truth edge list JSON or adjacency CSV");
        auto* eval_out_opt = eval_cmd->add_option("--out", eval_out, "output path prefix");

        // basis export ---------------------------------------------------------
        auto* basis_cmd = app.add_subcommand("basis", "Basis utilities");
        basis_cmd->require_subcommand(1);
        auto* bex = basis_cmd->add_subcommand("export", "Evaluate a basis on a grid and write it out");
        std::string bex_config, bex_kind, bex_data, bex_out;
        long bex_M = 5, bex_T = 100, bex_node = 0;
        double bex_a = 0.0, bex_b = 1.0;
        int bex_degree = 3;
        bex->add_option("--config", bex_config, "JSON config or manifest supplying defaults");
        auto* bex_kind_opt = bex->add_option("--kind", bex_kind, "fourier, bspline or fpca");
        auto* bex_M_opt = bex->add_option("--M", bex_M, "number of basis functions");
        auto* bex_T_opt = bex->add_option("--T", bex_T, "grid points (fourier/bspline)");
        auto* bex_a_opt = bex->add_option("--a", bex_a, "interval start (fourier/bspline)");
        auto* bex_b_opt = bex->add_option("--b", bex_b, "interval end (fourier/bspline)");
        auto* bex_deg_opt = bex->add_option("--degree", bex_degree, "spline degree");
        auto* bex_data_opt = bex->add_option("--data", bex_data, "dataset file (fpca)");
        auto* bex_node_opt = bex->add_option("--node", bex_node, "dataset node (fpca)");
        auto* bex_out_opt = bex->add_option("--out", bex_out, "output path prefix");

        CLI11_PARSE(app, argc, argv);

        if (sim->parsed()) {
            ConfigMerge cfg;
            if (!sim_config.empty()) cfg.load(sim_config, "simulate");
            cfg.apply(sim_model_opt, "model", sim_model);
            cfg.apply(sim_p_opt, "p", sim_p);
            cfg.apply(sim_n_opt, "n", sim_n);
            cfg.apply(sim_T_opt, "T", sim_T);
            cfg.apply(sim_m_opt, "m_star", sim_m);
            cfg.apply(sim_sigma_opt, "sigma", sim_sigma);
            cfg.apply(sim_seed_opt, "seed", sim_seed);
            cfg.apply(sim_format_opt, "format", sim_format);
            cfg.apply(sim_out_opt, "out", sim_out);
            cfg.finish();
            if (sim_model.empty()) throw fgm::ValidationError("simulate: --model is required");
            if (sim_out.empty()) throw fgm::ValidationError("simulate: --out is required");
            return cmd_simulate(sim_model, sim_p, sim_n, sim_T, sim_m, sim_sigma, sim_seed, sim_format, sim_out);
        }
        if (est->parsed()) {
            ConfigMerge cfg;
            if (!est_config.empty()) cfg.load(est_config, "estimate");
            cfg.apply(est_data_opt, "data", est_data);
            cfg.apply(est_mode_opt, "mode", est_mode);
            cfg.apply(est_M_opt, "M", est_M);
            cfg.apply(est_tp_opt, "t_points", est_grid.t_points);
            cfg.apply(est_tm_opt, "t_min", est_grid.t_min);
            cfg.apply(est_lt_opt, "lambda_t", est_lambda_t);
            cfg.apply(est_scv_opt, "scv", est_scv);
            cfg.apply(est_folds_opt, "folds", est_folds);
            cfg.apply(est_eps_opt, "epsilon", est_eps);
            cfg.apply(est_seed_opt, "seed", est_seed);
            cfg.apply(est_center_opt, "center", est_center);
            cfg.apply(est_threads_opt, "threads", est_threads);
            cfg.apply(est_out_opt, "out", est_out);
            cfg.finish();
            if (est_data.empty()) throw fgm::ValidationError("estimate: --data is required");
            if (est_out.empty()) throw fgm::ValidationError("estimate: --out is required");
            return cmd_estimate(est_data, est_mode, est_M, est_grid, est_lambda_t, est_scv, est_folds, est_eps,
                                est_seed, est_center, est_threads, est_out);
        }
        if (tun->parsed()) {
            ConfigMerge cfg;
            if (!tun_config.empty()) cfg.load(tun_config, "tune");
            cfg.apply(tun_data_opt, "data", tun_data);
            cfg.apply(tun_mode_opt, "mode", tun_mode);
            cfg.apply(tun_M_opt, "M", tun_M);
            cfg.apply(tun_tp_opt, "t_points", tun_grid.t_points);
            cfg.apply(tun_tm_opt, "t_min", tun_grid.t_min);
            cfg.apply(tun_folds_opt, "folds", tun_folds);
            cfg.apply(tun_target_opt, "target", tun_target);
            cfg.apply(tun_cand_opt, "m_candidates", tun_cand);
            cfg.apply(tun_seed_opt, "seed", tun_seed);
            cfg.apply(tun_center_opt, "center", tun_center);
            cfg.apply(tun_threads_opt, "threads", tun_threads);
            cfg.apply(tun_out_opt, "out", tun_out);
            cfg.finish();
            if (tun_data.empty()) throw fgm::ValidationError("tune: --data is required");
            if (tun_out.empty()) throw fgm::ValidationError("tune: --out is required");
            return cmd_tune(tun_data, tun_mode, tun_M, tun_grid, tun_folds, tun_target, tun_cand, tun_seed,
                            tun_center, tun_threads, tun_out);
        }
        if (roc_cmd->parsed()) {
            ConfigMerge cfg;
            if (!roc_config.empty()) cfg.load(roc_config, "roc");
            cfg.apply(roc_data_opt, "data", roc_data);
            cfg.apply(roc_truth_opt, "truth", roc_truth);
            cfg.apply(roc_mode_opt, "mode", roc_mode);
            cfg.apply(roc_M_opt, "M", roc_M);
            cfg.apply(roc_tp_opt, "t_points", roc_grid.t_points);
            cfg.apply(roc_tm_opt, "t_min", roc_grid.t_min);
            cfg.apply(roc_eps_opt, "epsilon", roc_eps);
            cfg.apply(roc_rule_opt, "rule", roc_rule);
            cfg.apply(roc_center_opt, "center", roc_center);
            cfg.apply(roc_threads_opt, "threads", roc_threads);
            cfg.apply(roc_out_opt, "out", roc_out);
            cfg.finish();
            if (roc_data.empty()) throw fgm::ValidationError("roc: --data is required");
            if (roc_truth.empty()) throw fgm::ValidationError("roc: --truth is required");
            if (roc_out.empty()) throw fgm::ValidationError("roc: --out is required");
            return cmd_roc(roc_data, roc_truth, roc_mode, roc_M, roc_grid, roc_eps, roc_rule, roc_center,
                           roc_threads, roc_out);
        }
        if (eval_cmd->parsed()) {
            ConfigMerge cfg;
            if (!eval_config.empty()) cfg.load(eval_config, "eval");
            cfg.apply(eval_graph_opt, "graph", eval_graph);
            cfg.apply(eval_truth_opt, "truth", eval_truth);
            cfg.apply(eval_out_opt, "out", eval_out);
            cfg.finish();
            if (eval_graph.empty()) throw fgm::ValidationError("eval: --graph is required");
            if (eval_truth.empty()) throw fgm::ValidationError("eval: --truth is required");
            if (eval_out.empty()) throw fgm::ValidationError("eval: --out is required");
            return cmd_eval(eval_graph, eval_truth, eval_out);
        }
        if (bex->parsed()) {
            ConfigMerge cfg;
            if (!bex_config.empty()) cfg.load(bex_config, "basis export");
            cfg.apply(bex_kind_opt, "kind", bex_kind);
            cfg.apply(bex_M_opt, "M", bex_M);
            cfg.apply(bex_T_opt, "T", bex_T);
            cfg.apply(bex_a_opt, "a", bex_a);
            cfg.apply(bex_b_opt, "b", bex_b);
            cfg.apply(bex_deg_opt, "degree", bex_degree);
            cfg.apply(bex_data_opt, "data", bex_data);
            cfg.apply(bex_node_opt, "node", bex_node);
            cfg.apply(bex_out_opt, "out", bex_out);
            cfg.finish();
            if (bex_kind.empty()) throw fgm::ValidationError("basis export: --kind is required");
            if (bex_out.empty()) throw fgm::ValidationError("basis export: --out is required");
            return cmd_basis_export(bex_kind, bex_M, bex_T, bex_a, bex_b, bex_degree, bex_data, bex_node, bex_out);
        }
        std::cerr << "error: no subcommand\n";
        return 1;
    } catch (const fgm::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
