#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sublinear/dataset.hpp"
#include "sublinear/errors.hpp"
#include "sublinear/learning.hpp"
#include "sublinear/matching.hpp"
#include "sublinear/model.hpp"
#include "sublinear/model_io.hpp"
#include "sublinear/rng.hpp"

namespace sublinear {

struct TrainedClassifier {
    GraphClassifier classifier;
    std::vector<TrainTrace> traces;
};

/// Trains a binary model when the class set has two classes and a
/// one-against-all model otherwise.
inline TrainedClassifier train_classifier(const std::vector<Record>& records, const std::vector<std::string>& classes,
                                          const TrainConfig& cfg) {
    if (records.empty()) throw ValidationError("training split is empty");
    if (classes.size() < 2) throw ValidationError("need at least two classes, got " + std::to_string(classes.size()));
    TrainedClassifier out;
    out.classifier.classes = classes;
    if (classes.size() == 2) {
        auto [model, trace] = train_binary(binary_examples(records, classes[0]), cfg);
        out.classifier.model = std::move(model);
        out.traces.push_back(std::move(trace));
    } else {
        auto [ova, traces] = train_one_vs_all(class_examples(records, classes), classes, cfg);
        out.classifier.model = std::move(ova);
        out.traces = std::move(traces);
    }
    return out;
}

inline double accuracy(const GraphClassifier& c, const std::vector<Record>& records) {
    if (records.empty()) throw ValidationError("accuracy of an empty split");
    std::size_t hits = 0;
    for (const auto& r : records)
        if (c.classes.at(c.predict(r.graph)) == r.cls) ++hits;
    return static_cast<double>(hits) / static_cast<double>(records.size());
}

/// Square confusion matrix indexed [true class][predicted class].
inline std::vector<std::vector<std::size_t>> confusion_matrix(const GraphClassifier& c,
                                                              const std::vector<Record>& records) {
    const std::size_t k = c.classes.size();
    std::vector<std::vector<std::size_t>> m(k, std::vector<std::size_t>(k, 0));
    for (const auto& r : records) {
        auto it = std::find(c.classes.begin(), c.classes.end(), r.cls);
        if (it == c.classes.end()) throw ValidationError("class '" + r.cls + "' unknown to the model");
        ++m[static_cast<std::size_t>(it - c.classes.begin())][c.predict(r.graph)];
    }
    return m;
}

enum class Algorithm { perceptron, margin_perceptron, knn };

inline const char* to_string(Algorithm a) {
    switch (a) {
        case Algorithm::perceptron: return "perceptron";
        case Algorithm::margin_perceptron: return "margin_perceptron";
        case Algorithm::knn: return "knn";
    }
    return "?";
}

inline Algorithm parse_algorithm(const std::string& s) {
    if (s == "perceptron") return Algorithm::perceptron;
    if (s == "margin_perceptron") return Algorithm::margin_perceptron;
    if (s == "knn") return Algorithm::knn;
    throw ValidationError("unknown algorithm '" + s + "'");
}

struct ProtocolConfig {
    Algorithm algorithm = Algorithm::margin_perceptron;
    std::vector<double> eta_grid{0.01, 0.05, 0.1, 0.3, 0.5, 0.7, 0.9};
    std::vector<double> lambda_grid{0.01, 0.05, 0.075, 0.1, 0.125, 0.15, 0.2};
    int repeats = 10;
    std::uint64_t seed = 0;
    /// Epochs, weight order, matcher and shuffling; rate, margin and seed are set per cell.
    TrainConfig train;
    std::size_t k = 1;

    void validate() const {
        if (eta_grid.empty() || lambda_grid.empty()) throw ValidationError("hyperparameter grids must be non-empty");
        if (repeats < 1) throw ValidationError("repeats must be at least 1");
        if (k < 1) throw ValidationError("k must be at least 1");
        for (double e : eta_grid)
            if (!(e > 0.0)) throw ValidationError("learning rates must be positive");
        for (double l : lambda_grid)
            if (!(l >= 0.0)) throw ValidationError("margins must be non-negative");
        train.matcher.validate();
    }
};

struct RunSummary {
    double mean = 0.0;
    double sd = 0.0;
    double max = 0.0;
};

/// Mean, sample standard deviation (0 for a single run) and maximum.
inline RunSummary summarize(const std::vector<double>& v) {
    if (v.empty()) return {};
    RunSummary s;
    s.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    if (v.size() > 1) {
        double ss = 0.0;
        for (double x : v) ss += (x - s.mean) * (x - s.mean);
        s.sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
    }
    s.max = *std::max_element(v.begin(), v.end());
    return s;
}

struct GridCell {
    double eta = 0.0;
    double lambda = 0.0;
    std::vector<double> accuracies;
    RunSummary summary;
};

struct ProtocolReport {
    std::string algorithm;
    std::string dataset;
    std::uint64_t seed = 0;
    int repeats = 0;
    int max_epochs = 0;
    MatcherConfig matcher;
    std::vector<GridCell> eta_stage;
    std::vector<GridCell> lambda_stage;
    double eta_star = 0.0;
    double lambda_star = 0.0;
    std::vector<double> test_accuracies;
    RunSummary test;
    std::size_t num_classes = 0;
    std::size_t training_set_size = 0;
    std::size_t test_set_size = 0;
    std::uint64_t matcher_calls_total = 0;
    /// Observed matcher calls per test graph in the final evaluation.
    double calls_per_test_graph = 0.0;
    /// What the algorithm should need: 1 (binary), #classes (one-against-all) or |training set| (1-NN).
    std::size_t expected_calls_per_test_graph = 0;
    double wall_time_seconds = 0.0;

    nlohmann::json to_json() const {
        auto cells = [](const std::vector<GridCell>& v) {
            nlohmann::json a = nlohmann::json::array();
            for (const auto& c : v)
                a.push_back({{"eta", c.eta},
                             {"lambda", c.lambda},
                             {"accuracies", c.accuracies},
                             {"mean", c.summary.mean},
                             {"sd", c.summary.sd}});
            return a;
        };
        return {{"algorithm", algorithm},
                {"dataset", dataset},
                {"seed", seed},
                {"repeats", repeats},
                {"max_epochs", max_epochs},
                {"matcher", matcher_to_json(matcher)},
                {"validation", {{"eta_stage", cells(eta_stage)}, {"lambda_stage", cells(lambda_stage)}}},
                {"selected", {{"eta", eta_star}, {"lambda", lambda_star}}},
                {"test",
                 {{"accuracies", test_accuracies}, {"mean", test.mean}, {"sd", test.sd}, {"max", test.max}}},
                {"num_classes", num_classes},
                {"training_set_size", training_set_size},
                {"test_set_size", test_set_size},
                {"matcher_calls",
                 {{"total", matcher_calls_total},
                  {"per_test_graph", calls_per_test_graph},
                  {"expected_per_test_graph", expected_calls_per_test_graph}}},
                {"wall_time_seconds", wall_time_seconds}};
    }

    std::string to_text() const {
        std::ostringstream os;
        char buf[256];
        os << "algorithm  " << algorithm << "\ndataset    " << dataset << "\nmatcher    " << to_string(matcher.method)
           << "\n\n";
        auto table = [&](const char* title, const std::vector<GridCell>& v) {
            if (v.empty()) return;
            os << title << '\n';
            std::snprintf(buf, sizeof buf, "  %8s %8s %10s %8s\n", "eta", "lambda", "val-mean%", "sd");
            os << buf;
            for (const auto& c : v) {
                std::snprintf(buf, sizeof buf, "  %8.4g %8.4g %10.2f %8.2f\n", c.eta, c.lambda,
                              100.0 * c.summary.mean, 100.0 * c.summary.sd);
                os << buf;
            }
            os << '\n';
        };
        table("validation (learning rate)", eta_stage);
        table("validation (margin)", lambda_stage);
        std::snprintf(buf, sizeof buf, "selected   eta=%g lambda=%g\n", eta_star, lambda_star);
        os << buf;
        std::snprintf(buf, sizeof buf, "test       avg %.2f  sd %.2f  max %.2f  (%zu runs)\n", 100.0 * test.mean,
                      100.0 * test.sd, 100.0 * test.max, test_accuracies.size());
        os << buf;
        std::snprintf(buf, sizeof buf, "matching   %.2f calls per test graph (expected %zu), %llu total\n",
                      calls_per_test_graph, expected_calls_per_test_graph,
                      static_cast<unsigned long long>(matcher_calls_total));
        os << buf;
        std::snprintf(buf, sizeof buf, "wall time  %.2f s\n", wall_time_seconds);
        os << buf;
        return os.str();
    }
};

namespace detail {

/// Index of the best mean; ties go to the smaller value.
inline std::size_t select_best(const std::vector<GridCell>& cells, bool by_lambda) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < cells.size(); ++i) {
        const double m = cells[i].summary.mean, bm = cells[best].summary.mean;
        const double v = by_lambda ? cells[i].lambda : cells[i].eta;
        const double bv = by_lambda ? cells[best].lambda : cells[best].eta;
        if (m > bm || (m == bm && v < bv)) best = i;
    }
    return best;
}

inline void require_two_classes(const std::vector<Record>& recs, const char* split) {
    for (const auto& r : recs)
        if (r.cls != recs.front().cls) return;
    throw ValidationError(std::string("split '") + split + "' has a single class");
}

}  // namespace detail

/// Two-stage protocol: grid search on the validation split (learning rate
/// with the perceptron, then the margin with the adopted learning rate),
/// followed by repeated retraining on train+validation and evaluation on test.
/// Every run draws its seed from (seed, stage, cell, repeat).
inline ProtocolReport run_protocol(const Dataset& ds, const ProtocolConfig& cfg) {
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();
    const std::uint64_t calls0 = matcher_calls();
    const auto& train = ds.split(kTrain);
    const auto& val = ds.split(kValidation);
    const auto& test = ds.split(kTest);
    if (train.empty() || val.empty() || test.empty()) throw ValidationError("protocol needs non-empty splits");
    detail::require_two_classes(train, kTrain);
    const auto train_val = concat(train, val);

    ProtocolReport rep;
    rep.algorithm = to_string(cfg.algorithm);
    rep.dataset = ds.name;
    rep.seed = cfg.seed;
    rep.max_epochs = cfg.train.max_epochs;
    rep.matcher = cfg.train.matcher;
    rep.num_classes = ds.class_set.size();
    rep.training_set_size = train_val.size();
    rep.test_set_size = test.size();

    if (cfg.algorithm == Algorithm::knn) {
        rep.repeats = 1;
        KnnClassifier knn(class_examples(train_val, ds.class_set), cfg.train.matcher);
        const std::uint64_t before = matcher_calls();
        std::size_t hits = 0;
        for (const auto& r : test)
            if (ds.class_set.at(static_cast<std::size_t>(knn.classify(r.graph, cfg.k))) == r.cls) ++hits;
        rep.calls_per_test_graph =
            static_cast<double>(matcher_calls() - before) / static_cast<double>(test.size());
        rep.expected_calls_per_test_graph = train_val.size();
        rep.test_accuracies = {static_cast<double>(hits) / static_cast<double>(test.size())};
    } else {
        rep.repeats = cfg.repeats;
        auto run_cell = [&](std::uint64_t stage, std::size_t cell, double eta, double lambda) {
            GridCell c{eta, lambda, {}, {}};
            for (int r = 0; r < cfg.repeats; ++r) {
                TrainConfig tc = cfg.train;
                tc.learning_rate = eta;
                tc.margin = lambda;
                tc.seed = derive_seed(cfg.seed, {stage, cell, static_cast<std::uint64_t>(r)});
                auto trained = train_classifier(train, ds.class_set, tc);
                c.accuracies.push_back(accuracy(trained.classifier, val));
            }
            c.summary = summarize(c.accuracies);
            return c;
        };
        for (std::size_t e = 0; e < cfg.eta_grid.size(); ++e)
            rep.eta_stage.push_back(run_cell(1, e, cfg.eta_grid[e], 0.0));
        rep.eta_star = rep.eta_stage[detail::select_best(rep.eta_stage, false)].eta;
        if (cfg.algorithm == Algorithm::margin_perceptron) {
            for (std::size_t l = 0; l < cfg.lambda_grid.size(); ++l)
                rep.lambda_stage.push_back(run_cell(2, l, rep.eta_star, cfg.lambda_grid[l]));
            rep.lambda_star = rep.lambda_stage[detail::select_best(rep.lambda_stage, true)].lambda;
        }

        std::uint64_t prediction_calls = 0;
        for (int r = 0; r < cfg.repeats; ++r) {
            TrainConfig tc = cfg.train;
            tc.learning_rate = rep.eta_star;
            tc.margin = rep.lambda_star;
            tc.seed = derive_seed(cfg.seed, {3, 0, static_cast<std::uint64_t>(r)});
            auto trained = train_classifier(train_val, ds.class_set, tc);
            const std::uint64_t before = matcher_calls();
            rep.test_accuracies.push_back(accuracy(trained.classifier, test));
            prediction_calls += matcher_calls() - before;
            rep.expected_calls_per_test_graph = trained.classifier.matches_per_prediction();
        }
        rep.calls_per_test_graph = static_cast<double>(prediction_calls) /
                                   static_cast<double>(test.size() * static_cast<std::size_t>(cfg.repeats));
    }
    rep.test = summarize(rep.test_accuracies);
    rep.matcher_calls_total = matcher_calls() - calls0;
    rep.wall_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

}  // namespace sublinear
