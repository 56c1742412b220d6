#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "sublinear/errors.hpp"
#include "sublinear/graph.hpp"
#include "sublinear/matching.hpp"
#include "sublinear/model.hpp"

namespace sublinear {

inline constexpr int kModelFormatVersion = 1;

inline nlohmann::json matcher_to_json(const MatcherConfig& m) {
    return {{"method", to_string(m.method)},
            {"exact_max_order", m.exact_max_order},
            {"ga",
             {{"beta_start", m.ga.beta_start},
              {"beta_rate", m.ga.beta_rate},
              {"beta_max", m.ga.beta_max},
              {"sinkhorn_max_iters", m.ga.sinkhorn_max_iters},
              {"sinkhorn_tol", m.ga.sinkhorn_tol},
              {"assignment_rounds_max", m.ga.assignment_rounds_max}}}};
}

/// Missing keys keep their defaults.
inline MatcherConfig matcher_from_json(const nlohmann::json& j) {
    MatcherConfig m;
    try {
        if (j.contains("method")) m.method = parse_match_method(j.at("method").get<std::string>());
        m.exact_max_order = j.value("exact_max_order", m.exact_max_order);
        if (j.contains("ga")) {
            const auto& g = j.at("ga");
            m.ga.beta_start = g.value("beta_start", m.ga.beta_start);
            m.ga.beta_rate = g.value("beta_rate", m.ga.beta_rate);
            m.ga.beta_max = g.value("beta_max", m.ga.beta_max);
            m.ga.sinkhorn_max_iters = g.value("sinkhorn_max_iters", m.ga.sinkhorn_max_iters);
            m.ga.sinkhorn_tol = g.value("sinkhorn_tol", m.ga.sinkhorn_tol);
            m.ga.assignment_rounds_max = g.value("assignment_rounds_max", m.ga.assignment_rounds_max);
        }
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("matcher config: ") + e.what());
    }
    m.validate();
    return m;
}

/// {format_version, attr_dim, order, weight_cells (row-major n x n x d), bias, matcher_config, training_metadata}
inline nlohmann::json model_to_json(const SublinearModel& m,
                                    const nlohmann::json& training_metadata = nlohmann::json::object()) {
    const auto v = m.weight_rep().values();
    return {{"format_version", kModelFormatVersion},
            {"attr_dim", m.attr_dim()},
            {"order", m.order()},
            {"weight_cells", std::vector<double>(v.begin(), v.end())},
            {"bias", m.bias()},
            {"matcher_config", matcher_to_json(m.matcher())},
            {"training_metadata", training_metadata}};
}

inline SublinearModel model_from_json(const nlohmann::json& j) {
    try {
        const int version = j.at("format_version").get<int>();
        if (version != kModelFormatVersion)
            throw ValidationError("unsupported model format_version " + std::to_string(version));
        const auto d = j.at("attr_dim").get<std::size_t>();
        const auto n = j.at("order").get<std::size_t>();
        Representation w(n, d, j.at("weight_cells").get<std::vector<double>>());
        MatcherConfig matcher = j.contains("matcher_config") ? matcher_from_json(j.at("matcher_config"))
                                                             : MatcherConfig{};
        return SublinearModel(std::move(w), j.at("bias").get<double>(), matcher);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("model document: ") + e.what());
    }
}

/// Binary classifier for two classes (classes[0] is the positive side),
/// one-against-all otherwise.
struct GraphClassifier {
    std::vector<std::string> classes;
    std::variant<OvaModel, SublinearModel> model;
    nlohmann::json training_metadata = nlohmann::json::object();

    bool is_binary() const { return std::holds_alternative<SublinearModel>(model); }

    /// Index into classes.
    std::size_t predict(const AttributedGraph& x) const {
        if (const auto* m = std::get_if<SublinearModel>(&model)) return classify(*m, x) > 0 ? 0 : 1;
        return predict_multiclass(std::get<OvaModel>(model), x);
    }

    /// Matcher calls made by one predict().
    std::size_t matches_per_prediction() const { return is_binary() ? 1 : classes.size(); }

    void set_matcher(const MatcherConfig& cfg) {
        if (auto* m = std::get_if<SublinearModel>(&model)) {
            *m = m->with_matcher(cfg);
        } else {
            for (auto& mem : std::get<OvaModel>(model).members) mem = mem.with_matcher(cfg);
        }
    }
};

inline nlohmann::json classifier_to_json(const GraphClassifier& c) {
    nlohmann::json members = nlohmann::json::array();
    if (const auto* m = std::get_if<SublinearModel>(&c.model)) {
        members.push_back(model_to_json(*m));
    } else {
        for (const auto& mem : std::get<OvaModel>(c.model).members) members.push_back(model_to_json(mem));
    }
    return {{"format_version", kModelFormatVersion},
            {"kind", c.is_binary() ? "binary" : "one_vs_all"},
            {"classes", c.classes},
            {"members", members},
            {"training_metadata", c.training_metadata}};
}

/// Accepts a classifier document or a bare model document (read as a binary
/// classifier with classes "+1" and "-1").
inline GraphClassifier classifier_from_json(const nlohmann::json& j) {
    GraphClassifier c;
    try {
        if (!j.contains("kind")) {
            c.classes = {"+1", "-1"};
            c.model = model_from_json(j);
            c.training_metadata = j.value("training_metadata", nlohmann::json::object());
            return c;
        }
        c.classes = j.at("classes").get<std::vector<std::string>>();
        c.training_metadata = j.value("training_metadata", nlohmann::json::object());
        const auto kind = j.at("kind").get<std::string>();
        const auto& members = j.at("members");
        if (kind == "binary") {
            if (members.size() != 1 || c.classes.size() != 2)
                throw ValidationError("binary classifier needs one member and two classes");
            c.model = model_from_json(members.at(0));
        } else if (kind == "one_vs_all") {
            OvaModel ova;
            ova.classes = c.classes;
            for (const auto& m : members) ova.members.push_back(model_from_json(m));
            ova.validate();
            c.model = std::move(ova);
        } else {
            throw ValidationError("unknown classifier kind '" + kind + "'");
        }
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("classifier document: ") + e.what());
    }
    return c;
}

inline nlohmann::json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
}

inline void write_json_file(const nlohmann::json& j, const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << j.dump(2) << '\n';
    if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace sublinear
