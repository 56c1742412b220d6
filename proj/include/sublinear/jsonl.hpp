#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sublinear/dataset.hpp"
#include "sublinear/errors.hpp"
#include "sublinear/graph.hpp"

// Native dataset format: one graph per line,
//   {"id": str, "class": str, "nodes": [[f64 x d], ...], "edges": [[i, j, [f64 x d]], ...]}
// A dataset directory holds <split>.jsonl files plus an optional dataset.json
// with name, attr_dim, class_set, splits and provenance.

namespace sublinear {

namespace fs = std::filesystem;

inline nlohmann::json graph_to_json(const AttributedGraph& g) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& a : g.nodes()) nodes.push_back(a);
    nlohmann::json edges = nlohmann::json::array();
    for (const auto& [key, a] : g.edges()) edges.push_back({key.first, key.second, a});
    return {{"nodes", std::move(nodes)}, {"edges", std::move(edges)}};
}

/// Builds a graph from the "nodes"/"edges" members of a JSON object. attr_dim
/// is taken from the first node when not given.
inline AttributedGraph graph_from_json(const nlohmann::json& j, std::optional<std::size_t> attr_dim = std::nullopt) {
    if (!j.is_object() || !j.contains("nodes")) throw ValidationError("graph object needs a \"nodes\" array");
    const auto& nodes = j.at("nodes");
    if (!nodes.is_array()) throw ValidationError("\"nodes\" must be an array");
    std::size_t d = attr_dim.value_or(0);
    if (d == 0) {
        if (nodes.empty()) throw ValidationError("cannot infer the attribute dimension of an empty graph");
        d = nodes.front().size();
    }
    AttributedGraph g(d);
    for (const auto& a : nodes) g.add_node(a.get<Attr>());
    if (j.contains("edges")) {
        std::set<EdgeKey> seen;
        for (const auto& e : j.at("edges")) {
            if (!e.is_array() || e.size() != 3) throw ValidationError("edge must be [i, j, [attributes]]");
            auto i = e[0].get<std::size_t>(), k = e[1].get<std::size_t>();
            EdgeKey key{std::min(i, k), std::max(i, k)};
            if (!seen.insert(key).second)
                throw ValidationError("duplicate edge (" + std::to_string(i) + "," + std::to_string(k) + ")");
            g.add_edge(i, k, e[2].get<Attr>());
        }
    }
    return g;
}

inline nlohmann::json record_to_json(const Record& r) {
    nlohmann::json j = {{"id", r.id}, {"class", r.cls}};
    j.update(graph_to_json(r.graph));
    return j;
}

/// Reads one split file. Errors carry the 1-based line number.
inline std::vector<Record> read_split_jsonl(const fs::path& path, std::optional<std::size_t> attr_dim = std::nullopt) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<Record> out;
    std::set<std::string> ids;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const std::string where = path.string() + ":" + std::to_string(lineno) + ": ";
        try {
            auto j = nlohmann::json::parse(line);
            Record r{j.at("id").get<std::string>(), j.at("class").get<std::string>(), graph_from_json(j, attr_dim)};
            if (!attr_dim) attr_dim = r.graph.attr_dim();
            if (r.graph.attr_dim() != *attr_dim)
                throw ValidationError("attribute dimension " + std::to_string(r.graph.attr_dim()) + ", expected " +
                                      std::to_string(*attr_dim));
            if (!ids.insert(r.id).second) throw ValidationError("duplicate id '" + r.id + "'");
            out.push_back(std::move(r));
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError(where + e.what());
        } catch (const ValidationError& e) {
            throw ValidationError(where + e.what());
        }
    }
    return out;
}

inline void write_split_jsonl(const std::vector<Record>& recs, const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    for (const auto& r : recs) out << record_to_json(r).dump() << '\n';
    if (!out) throw IoError("write failed: " + path.string());
}

inline void write_dataset(const Dataset& ds, const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
    nlohmann::json meta = {{"name", ds.name},
                           {"attr_dim", ds.attr_dim},
                           {"class_set", ds.class_set},
                           {"splits", nlohmann::json::array()},
                           {"provenance", ds.provenance}};
    for (const auto& [name, recs] : ds.splits) {
        meta["splits"].push_back(name);
        write_split_jsonl(recs, dir / (name + ".jsonl"));
    }
    std::ofstream out(dir / "dataset.json");
    if (!out) throw IoError("cannot write " + (dir / "dataset.json").string());
    out << meta.dump(2) << '\n';
}

/// Reads a dataset directory. Without dataset.json the standard split files
/// present in the directory are loaded and the class set is collected from them.
inline Dataset read_dataset(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw IoError("dataset directory not found: " + dir.string());
    Dataset ds;
    ds.name = dir.filename().string();
    std::vector<std::string> names;
    std::optional<std::size_t> dim;
    const fs::path meta_path = dir / "dataset.json";
    if (fs::exists(meta_path)) {
        std::ifstream in(meta_path);
        nlohmann::json meta;
        try {
            meta = nlohmann::json::parse(in);
            ds.name = meta.value("name", ds.name);
            if (meta.contains("attr_dim")) dim = meta.at("attr_dim").get<std::size_t>();
            if (meta.contains("class_set")) ds.class_set = meta.at("class_set").get<std::vector<std::string>>();
            if (meta.contains("splits")) names = meta.at("splits").get<std::vector<std::string>>();
            if (meta.contains("provenance")) ds.provenance = meta.at("provenance");
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError(meta_path.string() + ": " + e.what());
        }
    }
    if (names.empty())
        for (const char* s : {kTrain, kValidation, kTest})
            if (fs::exists(dir / (std::string(s) + ".jsonl"))) names.push_back(s);
    if (names.empty()) throw IoError("no split files in " + dir.string());
    for (const auto& n : names) {
        auto recs = read_split_jsonl(dir / (n + ".jsonl"), dim);
        if (!dim && !recs.empty()) dim = recs.front().graph.attr_dim();
        ds.splits[n] = std::move(recs);
    }
    if (!dim) throw ValidationError("cannot determine the attribute dimension of " + dir.string());
    ds.attr_dim = *dim;
    if (ds.class_set.empty()) ds.class_set = Dataset::collect_classes(ds.splits);
    ds.validate();
    return ds;
}

}  // namespace sublinear
