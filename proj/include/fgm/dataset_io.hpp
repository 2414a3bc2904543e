#pragma once

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fgm/dataset.hpp"
#include "fgm/errors.hpp"

namespace fgm {

namespace detail {

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline double parse_double(const std::string& cell, const std::string& where) {
    double v = 0.0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last)
        throw ParseError("expected a number at " + where + ", got \"" + cell + "\"");
    return v;
}

inline long parse_long(const std::string& cell, const std::string& where) {
    long v = 0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last)
        throw ParseError("expected an integer at " + where + ", got \"" + cell + "\"");
    return v;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            cells.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    cells.push_back(cur);
    return cells;
}

inline std::string sidecar_path(const std::string& path) { return path + ".json"; }

} // namespace detail

// Writes the grid sidecar `<path>.json` with {"a", "b", "T"}.
inline void save_grid_sidecar(const std::string& path, const Grid& grid) {
    nlohmann::ordered_json j;
    j["a"] = grid.a;
    j["b"] = grid.b;
    j["T"] = grid.size();
    std::ofstream out(detail::sidecar_path(path));
    if (!out) throw IoError("cannot write " + detail::sidecar_path(path));
    out << j.dump(2) << "\n";
}

// Reads `<path>.json` if present; otherwise a uniform grid on [0, 1].
inline Grid load_grid_sidecar(const std::string& path, Eigen::Index T) {
    const std::string side = detail::sidecar_path(path);
    if (!std::filesystem::exists(side)) return Grid::uniform(0.0, 1.0, T);
    std::ifstream in(side);
    if (!in) throw IoError("cannot read " + side);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(side + ": " + e.what());
    }
    if (!j.contains("a") || !j.contains("b") || !j.contains("T"))
        throw ParseError(side + ": sidecar needs keys a, b, T");
    const auto side_T = j["T"].get<Eigen::Index>();
    if (side_T != T)
        throw ParseError(side + ": sidecar T=" + std::to_string(side_T) + " but data has T=" + std::to_string(T));
    return Grid::uniform(j["a"].get<double>(), j["b"].get<double>(), T);
}

// CSV layout: header `sample,node,t_1,...,t_T`, then one row per (sample, node)
// with 0-based integer ids.  The grid is written to the `<path>.json` sidecar.
inline void save_csv(const FunctionalDataset& ds, const std::string& path) {
    ds.validate();
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << "sample,node";
    for (Eigen::Index k = 0; k < ds.T(); ++k) out << ",t_" << (k + 1);
    out << "\n";
    for (Eigen::Index i = 0; i < ds.n(); ++i) {
        for (Eigen::Index j = 0; j < ds.p(); ++j) {
            out << i << "," << j;
            for (Eigen::Index k = 0; k < ds.T(); ++k)
                out << "," << detail::format_double(ds.values[static_cast<std::size_t>(j)](i, k));
            out << "\n";
        }
    }
    if (!out) throw IoError("write failed on " + path);
    save_grid_sidecar(path, ds.grid);
}

inline FunctionalDataset load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path);
    std::string line;
    if (!std::getline(in, line)) throw ParseError(path + ": empty file");
    const auto header = detail::split_csv_line(line);
    if (header.size() < 3 || header[0] != "sample" || header[1] != "node")
        throw ParseError(path + ": header must start with sample,node,t_1,...");
    const Eigen::Index T = static_cast<Eigen::Index>(header.size()) - 2;
    for (Eigen::Index k = 0; k < T; ++k) {
        if (header[static_cast<std::size_t>(k) + 2] != "t_" + std::to_string(k + 1))
            throw ParseError(path + ": header column " + std::to_string(k + 3) + " should be t_" +
                             std::to_string(k + 1));
    }

    struct Row {
        long sample, node;
        std::vector<double> vals;
    };
    std::vector<Row> rows;
    long max_sample = -1, max_node = -1;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto cells = detail::split_csv_line(line);
        const std::string where = path + ":" + std::to_string(line_no);
        if (static_cast<Eigen::Index>(cells.size()) != T + 2)
            throw ParseError(where + ": expected " + std::to_string(T + 2) + " columns, got " +
                             std::to_string(cells.size()));
        Row r;
        r.sample = detail::parse_long(cells[0], where + " column sample");
        r.node = detail::parse_long(cells[1], where + " column node");
        if (r.sample < 0 || r.node < 0) throw ParseError(where + ": sample/node ids must be non-negative");
        r.vals.resize(static_cast<std::size_t>(T));
        for (Eigen::Index k = 0; k < T; ++k)
            r.vals[static_cast<std::size_t>(k)] =
                detail::parse_double(cells[static_cast<std::size_t>(k) + 2], where + " column t_" + std::to_string(k + 1));
        max_sample = std::max(max_sample, r.sample);
        max_node = std::max(max_node, r.node);
        rows.push_back(std::move(r));
    }
    if (rows.empty()) throw ParseError(path + ": no data rows");
    const Eigen::Index n = max_sample + 1;
    const Eigen::Index p = max_node + 1;

    FunctionalDataset ds = FunctionalDataset::zeros(n, p, load_grid_sidecar(path, T));
    std::vector<char> seen(static_cast<std::size_t>(n * p), 0);
    for (const auto& r : rows) {
        auto& flag = seen[static_cast<std::size_t>(r.sample * p + r.node)];
        if (flag)
            throw ParseError(path + ": duplicate row for sample " + std::to_string(r.sample) + ", node " +
                             std::to_string(r.node));
        flag = 1;
        for (Eigen::Index k = 0; k < T; ++k)
            ds.values[static_cast<std::size_t>(r.node)](r.sample, k) = r.vals[static_cast<std::size_t>(k)];
    }
    for (long i = 0; i < n; ++i)
        for (long j = 0; j < p; ++j)
            if (!seen[static_cast<std::size_t>(i * p + j)])
                throw ParseError(path + ": missing row for sample " + std::to_string(i) + ", node " +
                                 std::to_string(j));
    ds.validate();
    return ds;
}

// Binary layout: magic "FGM1", little-endian u64 n, p, T, then n*p*T doubles in
// (sample, node, gridpoint) row-major order.  Grid goes to the same sidecar.
inline void save_binary(const FunctionalDataset& ds, const std::string& path) {
    ds.validate();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out.write("FGM1", 4);
    const std::uint64_t dims[3] = {static_cast<std::uint64_t>(ds.n()), static_cast<std::uint64_t>(ds.p()),
                                   static_cast<std::uint64_t>(ds.T())};
    out.write(reinterpret_cast<const char*>(dims), sizeof(dims));
    std::vector<double> row(static_cast<std::size_t>(ds.T()));
    for (Eigen::Index i = 0; i < ds.n(); ++i) {
        for (Eigen::Index j = 0; j < ds.p(); ++j) {
            for (Eigen::Index k = 0; k < ds.T(); ++k) row[static_cast<std::size_t>(k)] = ds.values[static_cast<std::size_t>(j)](i, k);
            out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size() * sizeof(double)));
        }
    }
    if (!out) throw IoError("write failed on " + path);
    save_grid_sidecar(path, ds.grid);
}

inline FunctionalDataset load_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::string(magic, 4) != "FGM1") throw ParseError(path + ": bad magic, expected FGM1");
    std::uint64_t dims[3];
    in.read(reinterpret_cast<char*>(dims), sizeof(dims));
    if (!in) throw ParseError(path + ": truncated header");
    const Eigen::Index n = static_cast<Eigen::Index>(dims[0]);
    const Eigen::Index p = static_cast<Eigen::Index>(dims[1]);
    const Eigen::Index T = static_cast<Eigen::Index>(dims[2]);
    if (n < 1 || p < 1 || T < 1) throw ParseError(path + ": non-positive dimensions in header");

    FunctionalDataset ds = FunctionalDataset::zeros(n, p, load_grid_sidecar(path, T));
    std::vector<double> row(static_cast<std::size_t>(T));
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < p; ++j) {
            in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size() * sizeof(double)));
            if (!in) throw ParseError(path + ": truncated values at sample " + std::to_string(i) + ", node " + std::to_string(j));
            for (Eigen::Index k = 0; k < T; ++k) ds.values[static_cast<std::size_t>(j)](i, k) = row[static_cast<std::size_t>(k)];
        }
    }
    char extra;
    if (in.read(&extra, 1)) throw ParseError(path + ": trailing bytes after values");
    ds.validate();
    return ds;
}

} // namespace fgm
