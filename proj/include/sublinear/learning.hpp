#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "sublinear/errors.hpp"
#include "sublinear/graph.hpp"
#include "sublinear/matching.hpp"
#include "sublinear/model.hpp"
#include "sublinear/rng.hpp"

namespace sublinear {

/// A training graph with its target: +1/-1 for binary tasks, a class index otherwise.
struct LabeledExample {
    AttributedGraph graph;
    int y = 0;
};

struct TrainConfig {
    double learning_rate = 0.1;
    /// Margin of the hinge loss; 0 gives the classic perceptron.
    double margin = 0.0;
    int max_epochs = 200;
    /// Node count of the weight graph. Defaults to the largest training graph.
    std::optional<std::size_t> weight_order;
    std::uint64_t seed = 0;
    MatcherConfig matcher;
    bool shuffle = true;
    bool stop_when_separated = true;

    void validate() const {
        if (!(learning_rate > 0.0)) throw ValidationError("learning_rate must be positive");
        if (!(margin >= 0.0)) throw ValidationError("margin must be non-negative");
        if (max_epochs < 1) throw ValidationError("max_epochs must be at least 1");
        if (weight_order && *weight_order < 1) throw ValidationError("weight_order must be at least 1");
        matcher.validate();
    }
};

/// Statistics of one pass, measured online at the time each example was visited.
/// A pass without updates therefore reports the exact state of the final model.
struct EpochRecord {
    int epoch = 0;
    std::size_t updates = 0;
    std::size_t errors = 0;
    double risk = 0.0;
};

struct TrainTrace {
    std::vector<EpochRecord> epochs;
    std::size_t total_updates = 0;
    bool converged = false;
    int final_epoch = 0;
};

/// max(0, margin - y * y_hat)
inline double hinge_loss(double y_hat, int y, double margin) { return std::max(0.0, margin - y * y_hat); }

struct StepResult {
    Representation w;
    double b = 0.0;
    bool updated = false;
    double loss = 0.0;
    /// Discriminant value before the step.
    double score = 0.0;
};

namespace detail {

struct StepInfo {
    bool updated;
    double loss;
    double score;
};

/// In-place margin perceptron step: on y * f <= margin move along +eta * y * x.
inline StepInfo step_in_place(Representation& w, double& b, const Representation& x, int y, double eta,
                              double margin, const MatcherConfig& matcher) {
    const Alignment a = align(w, x, matcher);
    const double score = w.dot(a.aligned) + b;
    const double loss = hinge_loss(score, y, margin);
    if (y * score <= margin) {
        w.add_scaled(eta * y, a.aligned);
        b += eta * y;
        return {true, loss, score};
    }
    return {false, loss, score};
}

inline void require_binary(int y) {
    if (y != 1 && y != -1) throw ValidationError("binary label must be +1 or -1, got " + std::to_string(y));
}

}  // namespace detail

/// One stochastic subgradient step on the lifted hinge loss of a single example.
inline StepResult subgradient_step(const Representation& w, double b, const LabeledExample& ex, double eta,
                                   double margin, const MatcherConfig& matcher = {}) {
    if (w.attr_dim() != ex.graph.attr_dim())
        throw ValidationError("example attribute dimension differs from the weight representation");
    detail::require_binary(ex.y);
    StepResult r{w, b, false, 0.0, 0.0};
    const auto info = detail::step_in_place(r.w, r.b, to_representation(ex.graph), ex.y, eta, margin, matcher);
    r.updated = info.updated;
    r.loss = info.loss;
    r.score = info.score;
    return r;
}

inline std::size_t largest_order(const std::vector<LabeledExample>& data) {
    std::size_t n = 0;
    for (const auto& ex : data) n = std::max(n, ex.graph.order());
    return n;
}

inline std::size_t common_attr_dim(const std::vector<LabeledExample>& data) {
    if (data.empty()) throw ValidationError("training set is empty");
    const std::size_t d = data.front().graph.attr_dim();
    for (const auto& ex : data)
        if (ex.graph.attr_dim() != d) throw ValidationError("training graphs disagree on attribute dimension");
    return d;
}

namespace detail {

inline std::pair<SublinearModel, TrainTrace> run_training(const std::vector<LabeledExample>& data,
                                                          const TrainConfig& cfg, Representation w, double b) {
    std::vector<Representation> reps;
    reps.reserve(data.size());
    for (const auto& ex : data) reps.push_back(to_representation(ex.graph));

    TrainTrace trace;
    std::mt19937_64 rng(cfg.seed);
    std::vector<std::size_t> visit(data.size());
    for (std::size_t i = 0; i < visit.size(); ++i) visit[i] = i;

    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        if (cfg.shuffle) std::shuffle(visit.begin(), visit.end(), rng);
        EpochRecord rec;
        rec.epoch = epoch;
        double loss_sum = 0.0;
        for (auto idx : visit) {
            const int y = data[idx].y;
            const auto info =
                detail::step_in_place(w, b, reps[idx], y, cfg.learning_rate, cfg.margin, cfg.matcher);
            loss_sum += info.loss;
            if (decide(info.score) != y) ++rec.errors;
            if (info.updated) ++rec.updates;
        }
        rec.risk = loss_sum / static_cast<double>(data.size());
        trace.total_updates += rec.updates;
        trace.epochs.push_back(rec);
        trace.final_epoch = epoch;
        if (rec.updates == 0) {
            trace.converged = true;
            if (cfg.stop_when_separated) break;
        }
    }
    return {SublinearModel(std::move(w), b, cfg.matcher), std::move(trace)};
}

}  // namespace detail

/// Margin perceptron on graphs. Starts from w = 0, b = 0 and sweeps the data in
/// a seeded order until a pass makes no update or max_epochs is reached.
inline std::pair<SublinearModel, TrainTrace> train_binary(const std::vector<LabeledExample>& data,
                                                          const TrainConfig& cfg) {
    cfg.validate();
    const std::size_t d = common_attr_dim(data);
    for (const auto& ex : data) detail::require_binary(ex.y);
    const std::size_t order = std::max<std::size_t>(1, cfg.weight_order.value_or(largest_order(data)));
    return detail::run_training(data, cfg, Representation(order, d), 0.0);
}

/// Continues training from an existing model; cfg.weight_order is ignored.
inline std::pair<SublinearModel, TrainTrace> train_binary(const std::vector<LabeledExample>& data,
                                                          const TrainConfig& cfg, const SublinearModel& start) {
    cfg.validate();
    if (common_attr_dim(data) != start.attr_dim())
        throw ValidationError("training graphs and starting model disagree on attribute dimension");
    for (const auto& ex : data) detail::require_binary(ex.y);
    return detail::run_training(data, cfg, start.weight_rep(), start.bias());
}

/// Trains one binary model per class (y == c relabeled +1, else -1).
/// Examples carry class indices in [0, classes.size()).
inline std::pair<OvaModel, std::vector<TrainTrace>> train_one_vs_all(const std::vector<LabeledExample>& data,
                                                                     const std::vector<std::string>& classes,
                                                                     const TrainConfig& cfg) {
    if (classes.size() < 2) throw ValidationError("one-against-all needs at least two classes");
    common_attr_dim(data);
    for (const auto& ex : data)
        if (ex.y < 0 || static_cast<std::size_t>(ex.y) >= classes.size())
            throw ValidationError("class index " + std::to_string(ex.y) + " outside the class list");

    TrainConfig member_cfg = cfg;
    if (!member_cfg.weight_order) member_cfg.weight_order = std::max<std::size_t>(1, largest_order(data));

    OvaModel ova;
    ova.classes = classes;
    std::vector<TrainTrace> traces;
    for (std::size_t c = 0; c < classes.size(); ++c) {
        std::vector<LabeledExample> relabeled;
        relabeled.reserve(data.size());
        for (const auto& ex : data)
            relabeled.push_back({ex.graph, static_cast<std::size_t>(ex.y) == c ? +1 : -1});
        member_cfg.seed = derive_seed(cfg.seed, {c});
        auto [model, trace] = train_binary(relabeled, member_cfg);
        ova.members.push_back(std::move(model));
        traces.push_back(std::move(trace));
    }
    return {std::move(ova), std::move(traces)};
}

/// Mean hinge loss of the model over binary-labeled data.
inline double empirical_risk(const SublinearModel& m, const std::vector<LabeledExample>& data, double margin) {
    if (data.empty()) throw ValidationError("empirical risk of an empty sample");
    double s = 0.0;
    for (const auto& ex : data) {
        detail::require_binary(ex.y);
        s += hinge_loss(evaluate(m, ex.graph), ex.y, margin);
    }
    return s / static_cast<double>(data.size());
}

/// k-nearest-neighbour baseline under the induced orbit distance.
class KnnClassifier {
public:
    KnnClassifier(std::vector<LabeledExample> train, MatcherConfig matcher = {})
        : train_(std::move(train)), matcher_(matcher) {
        if (train_.empty()) throw ValidationError("nearest-neighbour classifier needs training data");
        common_attr_dim(train_);
        for (const auto& ex : train_) {
            if (ex.y < 0) throw ValidationError("class index must be non-negative");
            reps_.push_back(to_representation(ex.graph));
        }
    }

    std::size_t size() const { return train_.size(); }

    /// Majority class among the k nearest; distance ties go to the earlier
    /// training example, vote ties to the smaller class index.
    int classify(const AttributedGraph& x, std::size_t k = 1) const {
        if (k < 1) throw ValidationError("k must be at least 1");
        if (x.attr_dim() != train_.front().graph.attr_dim())
            throw ValidationError("query attribute dimension differs from the training data");
        const Representation rx = to_representation(x);
        std::vector<std::pair<double, std::size_t>> dist;
        dist.reserve(reps_.size());
        for (std::size_t i = 0; i < reps_.size(); ++i) dist.emplace_back(induced_distance(rx, reps_[i], matcher_), i);
        k = std::min(k, dist.size());
        std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());

        int top_class = 0;
        for (const auto& ex : train_) top_class = std::max(top_class, ex.y);
        std::vector<std::size_t> votes(static_cast<std::size_t>(top_class) + 1, 0);
        for (std::size_t i = 0; i < k; ++i) ++votes[static_cast<std::size_t>(train_[dist[i].second].y)];
        return static_cast<int>(std::max_element(votes.begin(), votes.end()) - votes.begin());
    }

private:
    std::vector<LabeledExample> train_;
    std::vector<Representation> reps_;
    MatcherConfig matcher_;
};

inline int knn_classify(const std::vector<LabeledExample>& train, const AttributedGraph& x, std::size_t k = 1,
                        const MatcherConfig& matcher = {}) {
    return KnnClassifier(train, matcher).classify(x, k);
}

}  // namespace sublinear
