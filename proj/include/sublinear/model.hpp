#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "sublinear/errors.hpp"
#include "sublinear/graph.hpp"
#include "sublinear/matching.hpp"

namespace sublinear {

/// f(X) = W.X + b, with W held as one working representation w.
class SublinearModel {
public:
    SublinearModel(Representation weight_rep, double bias, MatcherConfig matcher = {})
        : weight_rep_(std::move(weight_rep)), bias_(bias), matcher_(matcher) {
        if (!weight_rep_.is_symmetric()) throw ValidationError("weight representation is not symmetric");
        if (!weight_rep_.is_finite()) throw ValidationError("weight representation is not finite");
        matcher_.validate();
    }

    SublinearModel(const AttributedGraph& weight_graph, double bias, MatcherConfig matcher = {})
        : SublinearModel(to_representation(weight_graph), bias, matcher) {}

    /// Zero weight graph of the given order.
    static SublinearModel zero(std::size_t order, std::size_t attr_dim, double bias = 0.0,
                               MatcherConfig matcher = {}) {
        return SublinearModel(Representation(order, attr_dim), bias, matcher);
    }

    const Representation& weight_rep() const { return weight_rep_; }
    AttributedGraph weight_graph() const { return from_representation(weight_rep_); }
    double bias() const { return bias_; }
    const MatcherConfig& matcher() const { return matcher_; }
    std::size_t order() const { return weight_rep_.order(); }
    std::size_t attr_dim() const { return weight_rep_.attr_dim(); }

    /// Same weights and bias, different matcher.
    SublinearModel with_matcher(const MatcherConfig& m) const { return SublinearModel(weight_rep_, bias_, m); }

private:
    Representation weight_rep_;
    double bias_;
    MatcherConfig matcher_;
};

inline void require_dim(const SublinearModel& m, const AttributedGraph& x) {
    if (m.attr_dim() != x.attr_dim())
        throw ValidationError("graph has attribute dimension " + std::to_string(x.attr_dim()) +
                              " but the model expects " + std::to_string(m.attr_dim()));
}

inline double evaluate(const SublinearModel& m, const Representation& x) {
    if (m.attr_dim() != x.attr_dim())
        throw ValidationError("graph has attribute dimension " + std::to_string(x.attr_dim()) +
                              " but the model expects " + std::to_string(m.attr_dim()));
    const Alignment a = align(m.weight_rep(), x, m.matcher());
    return m.weight_rep().dot(a.aligned) + m.bias();
}

inline double evaluate(const SublinearModel& m, const AttributedGraph& x) {
    require_dim(m, x);
    return evaluate(m, to_representation(x));
}

/// Sign rule with the boundary f(X) = 0 assigned to the positive class.
inline int decide(double score) { return score >= 0.0 ? +1 : -1; }

inline int classify(const SublinearModel& m, const AttributedGraph& x) { return decide(evaluate(m, x)); }

/// sqrt(W.W), which equals the Euclidean norm of any representation of W.
inline double weight_norm(const SublinearModel& m) { return m.weight_rep().norm(); }

namespace detail {
inline double nonzero_norm(const SublinearModel& m) {
    const double w = weight_norm(m);
    if (!(w > 0.0)) throw DegenerateModelError("weight graph has zero norm; decision surface is undefined");
    return w;
}
}  // namespace detail

/// Signed distance of the decision surface from the origin, b / sqrt(W.W).
inline double origin_distance(const SublinearModel& m) { return m.bias() / detail::nonzero_norm(m); }

/// f(X) / sqrt(W.W), a lower bound of the distance of X to the decision surface.
inline double margin_lower_bound(const SublinearModel& m, const AttributedGraph& x) {
    const double w = detail::nonzero_norm(m);
    return evaluate(m, x) / w;
}

/// One binary sublinear model per class; prediction by largest discriminant.
struct OvaModel {
    std::vector<std::string> classes;
    std::vector<SublinearModel> members;

    void validate() const {
        if (classes.size() != members.size()) throw ValidationError("one-against-all needs one member per class");
        for (const auto& m : members)
            if (m.attr_dim() != members.front().attr_dim())
                throw ValidationError("one-against-all members disagree on attribute dimension");
    }
};

/// Class index with the largest score; ties go to the lowest index.
inline std::size_t argmax_class(const std::vector<double>& scores) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < scores.size(); ++c)
        if (scores[c] > scores[best]) best = c;
    return best;
}

inline std::vector<double> member_scores(const OvaModel& ova, const AttributedGraph& x) {
    std::vector<double> s;
    s.reserve(ova.members.size());
    for (const auto& m : ova.members) s.push_back(evaluate(m, x));
    return s;
}

/// Index into ova.classes.
inline std::size_t predict_multiclass(const OvaModel& ova, const AttributedGraph& x) {
    if (ova.members.empty()) throw ValidationError("one-against-all model has no members");
    return argmax_class(member_scores(ova, x));
}

}  // namespace sublinear
