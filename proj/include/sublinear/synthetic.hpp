#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "sublinear/dataset.hpp"
#include "sublinear/errors.hpp"
#include "sublinear/graph.hpp"
#include "sublinear/matching.hpp"
#include "sublinear/model.hpp"
#include "sublinear/rng.hpp"

namespace sublinear {

/// Parameters of a dataset that is sublinearly separable by a planted model
/// (W*, b*) with normalized margin at least planted_margin.
struct SyntheticSpec {
    std::size_t n_train = 100;
    std::size_t n_validation = 50;
    std::size_t n_test = 50;
    std::size_t order_min = 3;
    std::size_t order_max = 6;
    std::size_t attr_dim = 2;
    std::size_t planted_order = 4;
    double planted_margin = 0.1;
    double edge_density = 0.5;
    double attribute_scale = 1.0;
    /// Probability of flipping a train/validation label after margin filtering.
    double label_noise = 0.0;
    std::uint64_t seed = 0;
    std::size_t exact_max_order = 8;

    void validate() const {
        if (order_min < 1) throw ValidationError("order_min must be at least 1");
        if (order_min > order_max) throw ValidationError("order_min exceeds order_max");
        if (order_max > exact_max_order || planted_order > exact_max_order)
            throw ValidationError("graph orders must not exceed exact_max_order " + std::to_string(exact_max_order));
        if (planted_order < 1) throw ValidationError("planted_order must be at least 1");
        if (attr_dim < 1) throw ValidationError("attr_dim must be at least 1");
        if (!(planted_margin > 0.0)) throw ValidationError("planted_margin must be positive");
        if (!(edge_density > 0.0 && edge_density <= 1.0)) throw ValidationError("edge_density must lie in (0, 1]");
        if (!(attribute_scale > 0.0)) throw ValidationError("attribute_scale must be positive");
        if (!(label_noise >= 0.0 && label_noise < 0.5)) throw ValidationError("label_noise must lie in [0, 0.5)");
    }

    nlohmann::json to_json() const {
        return {{"n_examples", {{"train", n_train}, {"validation", n_validation}, {"test", n_test}}},
                {"order_range", {order_min, order_max}},
                {"attr_dim", attr_dim},
                {"planted_order", planted_order},
                {"planted_margin", planted_margin},
                {"edge_density", edge_density},
                {"attribute_scale", attribute_scale},
                {"label_noise", label_noise},
                {"seed", seed},
                {"exact_max_order", exact_max_order}};
    }

    /// Accepts "n_examples" either as one count for every split or as an object per split.
    static SyntheticSpec from_json(const nlohmann::json& j) {
        SyntheticSpec s;
        try {
            if (j.contains("n_examples")) {
                const auto& n = j.at("n_examples");
                if (n.is_object()) {
                    s.n_train = n.value("train", s.n_train);
                    s.n_validation = n.value("validation", s.n_validation);
                    s.n_test = n.value("test", s.n_test);
                } else {
                    s.n_train = s.n_validation = s.n_test = n.get<std::size_t>();
                }
            }
            if (j.contains("order_range")) {
                auto r = j.at("order_range").get<std::vector<std::size_t>>();
                if (r.size() != 2) throw ValidationError("order_range must be [min, max]");
                s.order_min = r[0];
                s.order_max = r[1];
            }
            s.attr_dim = j.value("attr_dim", s.attr_dim);
            s.planted_order = j.value("planted_order", s.planted_order);
            s.planted_margin = j.value("planted_margin", s.planted_margin);
            s.edge_density = j.value("edge_density", s.edge_density);
            s.attribute_scale = j.value("attribute_scale", s.attribute_scale);
            s.label_noise = j.value("label_noise", s.label_noise);
            s.seed = j.value("seed", s.seed);
            s.exact_max_order = j.value("exact_max_order", s.exact_max_order);
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError(std::string("synthetic spec: ") + e.what());
        }
        s.validate();
        return s;
    }
};

struct SyntheticResult {
    Dataset dataset;
    SublinearModel planted;
    /// min over clean examples of y * f*(X) / sqrt(W*.W*).
    double margin_certificate = 0.0;
};

/// Random graph with uniform node and edge attributes in [-scale, scale];
/// each pair is an edge with probability density.
template <class Rng>
AttributedGraph random_graph(Rng& rng, std::size_t order, std::size_t attr_dim, double density, double scale) {
    std::uniform_real_distribution<double> attr(-scale, scale);
    std::bernoulli_distribution has_edge(density);
    auto draw = [&] {
        Attr a(attr_dim);
        for (auto& v : a) v = attr(rng);
        return a;
    };
    AttributedGraph g(attr_dim);
    for (std::size_t i = 0; i < order; ++i) g.add_node(draw());
    for (std::size_t i = 0; i < order; ++i)
        for (std::size_t j = i + 1; j < order; ++j)
            if (has_edge(rng)) {
                Attr a = draw();
                while (detail::all_zero(a)) a = draw();
                g.add_edge(i, j, std::move(a));
            }
    return g;
}

/// Samples a planted model and fills the train, validation and test splits
/// with graphs whose normalized planted margin is at least planted_margin.
/// Labels are the sign of f*; both classes appear in every non-empty split of
/// size two or more.
inline SyntheticResult generate_synthetic(const SyntheticSpec& spec) {
    spec.validate();
    std::mt19937_64 rng(spec.seed);
    MatcherConfig exact;
    exact.method = MatchMethod::exact;
    exact.exact_max_order = spec.exact_max_order;

    std::uniform_int_distribution<std::size_t> order_dist(spec.order_min, spec.order_max);
    auto sample_graph = [&] {
        return random_graph(rng, order_dist(rng), spec.attr_dim, spec.edge_density, spec.attribute_scale);
    };

    AttributedGraph w_star = random_graph(rng, spec.planted_order, spec.attr_dim, spec.edge_density,
                                          spec.attribute_scale);
    const Representation w_rep = to_representation(w_star);
    const double w_norm = w_rep.norm();
    if (!(w_norm > 0.0)) throw InfeasibleSpecError("planted weight graph has zero norm");

    // Bias: uniform in [-1, 1], redrawn until a pilot sample has at least 20%
    // minority class; otherwise recentred on the pilot median.
    std::vector<double> pilot;
    for (int k = 0; k < 200; ++k) pilot.push_back(sdp(w_rep, to_representation(sample_graph()), exact).value);
    auto minority = [&](double b) {
        std::size_t pos = 0;
        for (double s : pilot) pos += (s + b >= 0.0) ? 1 : 0;
        return static_cast<double>(std::min(pos, pilot.size() - pos)) / static_cast<double>(pilot.size());
    };
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    double b_star = unit(rng);
    bool recentred = false;
    for (int tries = 0; minority(b_star) < 0.2 && tries < 100; ++tries) b_star = unit(rng);
    if (minority(b_star) < 0.2) {
        std::vector<double> sorted = pilot;
        std::nth_element(sorted.begin(), sorted.begin() + 100, sorted.end());
        b_star = -sorted[100];
        recentred = true;
    }
    SublinearModel planted(w_rep, b_star, exact);

    const std::size_t needed = spec.n_train + spec.n_validation + spec.n_test;
    const std::uint64_t budget = 1000ULL * std::max<std::size_t>(needed, 1);
    std::uint64_t attempts = 0;
    double certificate = std::numeric_limits<double>::infinity();

    Dataset ds;
    ds.name = "synthetic-" + std::to_string(spec.seed);
    ds.attr_dim = spec.attr_dim;
    ds.class_set = {"pos", "neg"};
    nlohmann::json balance = nlohmann::json::object();

    const std::pair<const char*, std::size_t> plan[] = {
        {kTrain, spec.n_train}, {kValidation, spec.n_validation}, {kTest, spec.n_test}};
    for (const auto& [split, count] : plan) {
        std::vector<Record> recs;
        std::vector<double> margins;
        std::size_t pos = 0, neg = 0;
        auto both_needed = [&] { return count >= 2 && (pos == 0 || neg == 0); };
        while (recs.size() < count || both_needed()) {
            if (++attempts > budget)
                throw InfeasibleSpecError("rejected more than 99.9% of " + std::to_string(budget) +
                                          " sampled graphs; reduce planted_margin (now " +
                                          std::to_string(spec.planted_margin) + ")");
            AttributedGraph g = sample_graph();
            const double f = evaluate(planted, g);
            const double normalized = std::abs(f) / w_norm;
            if (normalized < spec.planted_margin) continue;
            const int y = f >= 0.0 ? +1 : -1;
            if (recs.size() == count) {
                // Full but single-class: swap the newest record for the missing class.
                if ((y > 0 && pos > 0) || (y < 0 && neg > 0)) continue;
                (recs.back().cls == "pos" ? pos : neg) -= 1;
                recs.pop_back();
                margins.pop_back();
            }
            margins.push_back(normalized);
            (y > 0 ? pos : neg) += 1;
            recs.push_back({std::string(split) + "-" + std::to_string(recs.size()), y > 0 ? "pos" : "neg",
                            std::move(g)});
        }
        for (double m : margins) certificate = std::min(certificate, m);
        for (std::size_t i = 0; i < recs.size(); ++i) recs[i].id = std::string(split) + "-" + std::to_string(i);
        balance[split] = {{"pos", pos}, {"neg", neg}};
        ds.splits[split] = std::move(recs);
    }

    std::size_t flipped = 0;
    if (spec.label_noise > 0.0) {
        std::mt19937_64 noise_rng(derive_seed(spec.seed, {0x6e6f697365}));
        std::bernoulli_distribution flip(spec.label_noise);
        for (const char* split : {kTrain, kValidation})
            for (auto& r : ds.splits[split])
                if (flip(noise_rng)) {
                    r.cls = r.cls == "pos" ? "neg" : "pos";
                    ++flipped;
                }
    }

    ds.provenance = {{"source_format", "synthetic"},
                     {"generator", spec.to_json()},
                     {"seed", spec.seed},
                     {"planted_bias", b_star},
                     {"bias_recentred", recentred},
                     {"class_balance", balance},
                     {"margin_certificate", certificate},
                     {"sampled_graphs", attempts},
                     {"flipped_labels", flipped}};
    return {std::move(ds), std::move(planted), certificate};
}

}  // namespace sublinear
