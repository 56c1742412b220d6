#pragma once

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <json.hpp>

#include "sublinear/dataset.hpp"
#include "sublinear/errors.hpp"
#include "sublinear/graph.hpp"

namespace sublinear {

/// Which GXL attributes become vector components. Node attributes occupy the
/// leading components, edge attributes the following ones, and the optional
/// edge flag the last one.
struct GxlAttrConfig {
    std::vector<std::string> node_attr_names;
    std::vector<std::string> edge_attr_names;
    /// Unset means "on exactly when there are no edge attributes".
    std::optional<bool> append_edge_flag;

    bool edge_flag() const { return append_edge_flag.value_or(edge_attr_names.empty()); }

    std::size_t base_dim() const { return node_attr_names.size() + edge_attr_names.size(); }
    std::size_t attr_dim() const { return base_dim() + (edge_flag() ? 1 : 0); }

    void validate() const {
        if (attr_dim() < 1) throw ValidationError("GXL attribute configuration yields an empty attribute vector");
    }

    static GxlAttrConfig from_json(const nlohmann::json& j) {
        GxlAttrConfig c;
        c.node_attr_names = j.value("node_attr_names", std::vector<std::string>{});
        c.edge_attr_names = j.value("edge_attr_names", std::vector<std::string>{});
        if (j.contains("append_edge_flag")) c.append_edge_flag = j.at("append_edge_flag").get<bool>();
        c.validate();
        return c;
    }

    nlohmann::json to_json() const {
        return {{"node_attr_names", node_attr_names},
                {"edge_attr_names", edge_attr_names},
                {"append_edge_flag", edge_flag()}};
    }

    static GxlAttrConfig load(const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in) throw IoError("cannot open GXL attribute config " + path.string());
        try {
            return from_json(nlohmann::json::parse(in));
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError(path.string() + ": " + e.what());
        }
    }
};

namespace detail {

using boost::property_tree::ptree;

inline ptree parse_xml(const std::string& document) {
    ptree tree;
    std::istringstream in(document);
    try {
        boost::property_tree::read_xml(in, tree, boost::property_tree::xml_parser::trim_whitespace);
    } catch (const boost::property_tree::xml_parser_error& e) {
        throw ValidationError(std::string("malformed XML: ") + e.what());
    }
    return tree;
}

inline std::string xml_attr(const ptree& node, const std::string& name) {
    auto v = node.get_optional<std::string>("<xmlattr>." + name);
    return v ? *v : std::string{};
}

inline double to_number(const std::string& text, const std::string& what) {
    std::string s = text;
    s.erase(0, s.find_first_not_of(" \t\r\n"));
    s.erase(s.find_last_not_of(" \t\r\n") + 1);
    if (s == "true") return 1.0;
    if (s == "false") return 0.0;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
        throw ValidationError(what + " has non-numeric value '" + text + "'");
    return v;
}

/// Collects <attr name="..."><type>value</type></attr> children.
inline std::map<std::string, std::string> gxl_attrs(const ptree& elem) {
    std::map<std::string, std::string> out;
    for (const auto& [tag, child] : elem) {
        if (tag != "attr") continue;
        const std::string name = xml_attr(child, "name");
        for (const auto& [type, value] : child) {
            if (type == "<xmlattr>") continue;
            out[name] = value.data();
            break;
        }
    }
    return out;
}

inline void fill(Attr& a, std::size_t offset, const std::vector<std::string>& names,
                 const std::map<std::string, std::string>& attrs, const std::string& owner) {
    for (std::size_t k = 0; k < names.size(); ++k) {
        auto it = attrs.find(names[k]);
        if (it == attrs.end()) throw ValidationError(owner + " is missing attribute '" + names[k] + "'");
        a[offset + k] = to_number(it->second, owner + " attribute '" + names[k] + "'");
    }
}

}  // namespace detail

/// Parses a GXL document holding one graph. Nodes keep document order, edges
/// are undirected and deduplicated (first occurrence wins), and attributes not
/// named in the config are ignored.
inline AttributedGraph parse_gxl(const std::string& document, const GxlAttrConfig& cfg) {
    cfg.validate();
    const auto tree = detail::parse_xml(document);
    const auto gxl = tree.get_child_optional("gxl");
    if (!gxl) throw ValidationError("document has no <gxl> root");
    const auto graph = gxl->get_child_optional("graph");
    if (!graph) throw ValidationError("<gxl> has no <graph> element");

    // Node vectors end in 0 and edge vectors in 1 when the edge flag is on,
    // matching attach_edge_flag.
    const std::size_t nn = cfg.node_attr_names.size(), dim = cfg.attr_dim();
    const bool flag = cfg.edge_flag();
    AttributedGraph g(dim);
    std::map<std::string, std::size_t> index;
    for (const auto& [tag, elem] : *graph) {
        if (tag != "node") continue;
        const std::string id = detail::xml_attr(elem, "id");
        if (index.count(id)) throw ValidationError("duplicate node id '" + id + "'");
        Attr a(dim, 0.0);
        detail::fill(a, 0, cfg.node_attr_names, detail::gxl_attrs(elem), "node '" + id + "'");
        index[id] = g.add_node(std::move(a));
    }

    for (const auto& [tag, elem] : *graph) {
        if (tag != "edge") continue;
        const std::string from = detail::xml_attr(elem, "from"), to = detail::xml_attr(elem, "to");
        auto fi = index.find(from), ti = index.find(to);
        if (fi == index.end() || ti == index.end())
            throw ValidationError("edge " + from + " -> " + to + " references an unknown node");
        if (fi->second == ti->second) throw ValidationError("self-loop on node '" + from + "'");
        if (g.edge(fi->second, ti->second)) continue;
        Attr a(dim, 0.0);
        detail::fill(a, nn, cfg.edge_attr_names, detail::gxl_attrs(elem), "edge " + from + " -> " + to);
        if (flag) a.back() = 1.0;
        if (detail::all_zero(a))
            throw ValidationError("edge " + from + " -> " + to + " has all-zero attributes; enable append_edge_flag");
        g.add_edge(fi->second, ti->second, std::move(a));
    }
    return g;
}

inline std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline AttributedGraph parse_gxl_file(const std::filesystem::path& path, const GxlAttrConfig& cfg) {
    const std::string doc = read_text_file(path);
    try {
        return parse_gxl(doc, cfg);
    } catch (const ValidationError& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
}

/// Parses a CXL collection listing: every element carrying both "file" and
/// "class" attributes, at any depth, names one labeled graph relative to base_dir.
inline std::vector<Record> parse_cxl(const std::string& document, const std::filesystem::path& base_dir,
                                     const GxlAttrConfig& cfg) {
    const auto tree = detail::parse_xml(document);
    std::vector<std::pair<std::string, std::string>> entries;
    auto walk = [&](auto&& self, const detail::ptree& node) -> void {
        for (const auto& [tag, child] : node) {
            if (tag == "<xmlattr>") continue;
            const std::string file = detail::xml_attr(child, "file"), cls = detail::xml_attr(child, "class");
            if (!file.empty() && !cls.empty()) entries.emplace_back(file, cls);
            self(self, child);
        }
    };
    walk(walk, tree);
    if (entries.empty()) throw ValidationError("collection lists no graphs");

    std::vector<Record> out;
    out.reserve(entries.size());
    for (const auto& [file, cls] : entries) {
        const auto path = base_dir / file;
        if (!std::filesystem::exists(path)) throw IoError("collection references missing file " + path.string());
        AttributedGraph g = parse_gxl_file(path, cfg);
        g.set_label(cls);
        out.push_back({std::filesystem::path(file).stem().string(), cls, std::move(g)});
    }
    return out;
}

/// Loads an IAM-style directory with train.cxl, validation.cxl and test.cxl
/// (any subset) next to the GXL files they reference.
inline Dataset read_iam_dataset(const std::filesystem::path& dir, const GxlAttrConfig& cfg) {
    if (!std::filesystem::is_directory(dir)) throw IoError("dataset directory not found: " + dir.string());
    Dataset ds;
    ds.name = dir.filename().string();
    ds.attr_dim = cfg.attr_dim();
    for (const char* s : {kTrain, kValidation, kTest}) {
        const auto cxl = dir / (std::string(s) + ".cxl");
        if (!std::filesystem::exists(cxl)) continue;
        ds.splits[s] = parse_cxl(read_text_file(cxl), dir, cfg);
    }
    if (ds.splits.empty()) throw IoError("no .cxl split listings in " + dir.string());
    ds.class_set = Dataset::collect_classes(ds.splits);
    ds.provenance = {{"source_format", "gxl"}, {"path", dir.string()}, {"gxl_config", cfg.to_json()}};
    ds.validate();
    return ds;
}

}  // namespace sublinear
