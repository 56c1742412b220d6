#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "sublinear/errors.hpp"
#include "sublinear/graph.hpp"
#include "sublinear/learning.hpp"

namespace sublinear {

/// One labeled graph as stored in a dataset split.
struct Record {
    std::string id;
    std::string cls;
    AttributedGraph graph;

    bool operator==(const Record&) const = default;
};

inline constexpr const char* kTrain = "train";
inline constexpr const char* kValidation = "validation";
inline constexpr const char* kTest = "test";

/// Labeled graph collection with named splits.
struct Dataset {
    std::string name;
    std::size_t attr_dim = 1;
    std::vector<std::string> class_set;
    std::map<std::string, std::vector<Record>> splits;
    nlohmann::json provenance = nlohmann::json::object();

    bool has_split(const std::string& s) const { return splits.count(s) != 0; }

    const std::vector<Record>& split(const std::string& s) const {
        auto it = splits.find(s);
        if (it == splits.end()) throw ValidationError("dataset '" + name + "' has no split '" + s + "'");
        return it->second;
    }

    std::size_t class_index(const std::string& cls) const {
        auto it = std::find(class_set.begin(), class_set.end(), cls);
        if (it == class_set.end()) throw ValidationError("class '" + cls + "' is not in the class set");
        return static_cast<std::size_t>(it - class_set.begin());
    }

    void validate() const {
        std::set<std::string> ids;
        std::set<std::string> classes(class_set.begin(), class_set.end());
        if (classes.size() != class_set.size()) throw ValidationError("class set has duplicates");
        for (const auto& [sname, recs] : splits)
            for (const auto& r : recs) {
                if (r.graph.attr_dim() != attr_dim)
                    throw ValidationError("graph '" + r.id + "' in split '" + sname + "' has attribute dimension " +
                                          std::to_string(r.graph.attr_dim()) + ", dataset uses " +
                                          std::to_string(attr_dim));
                if (!classes.count(r.cls))
                    throw ValidationError("graph '" + r.id + "' has class '" + r.cls + "' outside the class set");
                if (!ids.insert(r.id).second) throw ValidationError("duplicate graph id '" + r.id + "'");
            }
    }

    /// Class list in order of first appearance over train, validation, test, then any other split.
    static std::vector<std::string> collect_classes(const std::map<std::string, std::vector<Record>>& splits) {
        std::vector<std::string> out;
        auto visit = [&](const std::vector<Record>& recs) {
            for (const auto& r : recs)
                if (std::find(out.begin(), out.end(), r.cls) == out.end()) out.push_back(r.cls);
        };
        for (const char* s : {kTrain, kValidation, kTest})
            if (auto it = splits.find(s); it != splits.end()) visit(it->second);
        for (const auto& [n, recs] : splits)
            if (n != kTrain && n != kValidation && n != kTest) visit(recs);
        return out;
    }
};

/// Binary view: class_set[positive] -> +1, everything else -> -1.
inline std::vector<LabeledExample> binary_examples(const std::vector<Record>& recs, const std::string& positive) {
    std::vector<LabeledExample> out;
    out.reserve(recs.size());
    for (const auto& r : recs) out.push_back({r.graph, r.cls == positive ? +1 : -1});
    return out;
}

/// Multiclass view: y is the index of the record's class in class_set.
inline std::vector<LabeledExample> class_examples(const std::vector<Record>& recs,
                                                  const std::vector<std::string>& class_set) {
    std::vector<LabeledExample> out;
    out.reserve(recs.size());
    for (const auto& r : recs) {
        auto it = std::find(class_set.begin(), class_set.end(), r.cls);
        if (it == class_set.end()) throw ValidationError("class '" + r.cls + "' is not in the class set");
        out.push_back({r.graph, static_cast<int>(it - class_set.begin())});
    }
    return out;
}

inline std::vector<Record> concat(const std::vector<Record>& a, const std::vector<Record>& b) {
    std::vector<Record> out = a;
    out.insert(out.end(), b.begin(), b.end());
    return out;
}

/// Z-scores node attributes per dimension using train-split statistics.
/// Edge attributes are left untouched. The statistics are recorded in provenance.
inline void standardize_node_attributes(Dataset& ds) {
    const auto& train = ds.split(kTrain);
    const std::size_t d = ds.attr_dim;
    std::vector<double> mean(d, 0.0), var(d, 0.0);
    std::size_t count = 0;
    for (const auto& r : train)
        for (const auto& a : r.graph.nodes()) {
            for (std::size_t k = 0; k < d; ++k) mean[k] += a[k];
            ++count;
        }
    if (count == 0) throw ValidationError("cannot standardize: training split has no nodes");
    for (auto& m : mean) m /= static_cast<double>(count);
    for (const auto& r : train)
        for (const auto& a : r.graph.nodes())
            for (std::size_t k = 0; k < d; ++k) var[k] += (a[k] - mean[k]) * (a[k] - mean[k]);
    std::vector<double> sd(d);
    for (std::size_t k = 0; k < d; ++k) {
        sd[k] = std::sqrt(var[k] / static_cast<double>(count));
        if (sd[k] == 0.0) sd[k] = 1.0;
    }
    for (auto& [name, recs] : ds.splits)
        for (auto& r : recs) {
            AttributedGraph g(d);
            for (const auto& a : r.graph.nodes()) {
                Attr b(d);
                for (std::size_t k = 0; k < d; ++k) b[k] = (a[k] - mean[k]) / sd[k];
                g.add_node(std::move(b));
            }
            for (const auto& [key, a] : r.graph.edges()) g.add_edge(key.first, key.second, a);
            g.set_label(r.graph.label());
            r.graph = std::move(g);
        }
    ds.provenance["standardized"] = {{"mean", mean}, {"sd", sd}};
}

}  // namespace sublinear
