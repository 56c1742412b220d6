#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sublinear/errors.hpp"

namespace sublinear {

using Attr = std::vector<double>;

/// Undirected node pair, always stored with first < second.
using EdgeKey = std::pair<std::size_t, std::size_t>;
using EdgeMap = std::map<EdgeKey, Attr>;

namespace detail {

inline bool all_zero(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
}

inline bool all_finite(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
    return s;
}

}  // namespace detail

/// A graph whose nodes and edges carry real vectors of a common dimension.
///
/// Edges are undirected and stored sparsely. A stored edge attribute is never
/// the zero vector, since zero is reserved for "no edge" in the dense
/// representation. The diagonal slot (i,i) belongs to the node attribute, so
/// self-loops are rejected.
class AttributedGraph {
public:
    explicit AttributedGraph(std::size_t attr_dim) : attr_dim_(attr_dim) {
        if (attr_dim == 0) throw ValidationError("attribute dimension must be at least 1");
    }

    AttributedGraph(std::size_t attr_dim, std::vector<Attr> nodes, const EdgeMap& edges = {},
                    std::optional<std::string> label = std::nullopt)
        : AttributedGraph(attr_dim) {
        for (auto& a : nodes) add_node(std::move(a));
        for (const auto& [key, a] : edges) add_edge(key.first, key.second, a);
        label_ = std::move(label);
    }

    std::size_t order() const { return nodes_.size(); }
    std::size_t attr_dim() const { return attr_dim_; }
    std::size_t edge_count() const { return edges_.size(); }

    std::span<const double> node(std::size_t i) const { return nodes_.at(i); }
    const std::vector<Attr>& nodes() const { return nodes_; }
    const EdgeMap& edges() const { return edges_; }

    /// Attribute of edge {i,j}, or nullopt for a non-edge.
    std::optional<std::span<const double>> edge(std::size_t i, std::size_t j) const {
        if (i > j) std::swap(i, j);
        auto it = edges_.find({i, j});
        if (it == edges_.end()) return std::nullopt;
        return std::span<const double>(it->second);
    }

    const std::optional<std::string>& label() const { return label_; }
    void set_label(std::optional<std::string> label) { label_ = std::move(label); }

    std::size_t add_node(Attr a) {
        check_attr(a, "node");
        nodes_.push_back(std::move(a));
        return nodes_.size() - 1;
    }

    /// Inserts or replaces the undirected edge {i,j}.
    void add_edge(std::size_t i, std::size_t j, Attr a) {
        if (i == j) throw ValidationError("self-loop at node " + std::to_string(i));
        if (i >= order() || j >= order())
            throw ValidationError("edge (" + std::to_string(i) + "," + std::to_string(j) +
                                  ") references a node outside order " + std::to_string(order()));
        check_attr(a, "edge");
        if (detail::all_zero(a))
            throw ValidationError("edge (" + std::to_string(i) + "," + std::to_string(j) +
                                  ") has a zero attribute vector");
        if (i > j) std::swap(i, j);
        edges_[{i, j}] = std::move(a);
    }

    bool operator==(const AttributedGraph&) const = default;

private:
    void check_attr(const Attr& a, const char* what) const {
        if (a.size() != attr_dim_)
            throw ValidationError(std::string(what) + " attribute has dimension " + std::to_string(a.size()) +
                                  ", expected " + std::to_string(attr_dim_));
        if (!detail::all_finite(a)) throw ValidationError(std::string(what) + " attribute is not finite");
    }

    std::size_t attr_dim_;
    std::vector<Attr> nodes_;
    EdgeMap edges_;
    std::optional<std::string> label_;
};

/// Dense n x n matrix of attribute vectors, stored row-major as n*n*d doubles.
/// The diagonal holds node attributes, off-diagonal cells edge attributes
/// (zero for non-edges).
class Representation {
public:
    Representation(std::size_t order, std::size_t attr_dim)
        : n_(order), d_(attr_dim), cells_(order * order * attr_dim, 0.0) {
        if (attr_dim == 0) throw ValidationError("attribute dimension must be at least 1");
    }

    Representation(std::size_t order, std::size_t attr_dim, std::vector<double> cells)
        : n_(order), d_(attr_dim), cells_(std::move(cells)) {
        if (attr_dim == 0) throw ValidationError("attribute dimension must be at least 1");
        if (cells_.size() != n_ * n_ * d_)
            throw SizeError("representation needs " + std::to_string(n_ * n_ * d_) + " values, got " +
                            std::to_string(cells_.size()));
    }

    std::size_t order() const { return n_; }
    std::size_t attr_dim() const { return d_; }

    std::span<const double> cell(std::size_t i, std::size_t j) const {
        return {cells_.data() + (i * n_ + j) * d_, d_};
    }
    std::span<double> cell(std::size_t i, std::size_t j) { return {cells_.data() + (i * n_ + j) * d_, d_}; }

    /// The vectorized form, length n*n*d.
    std::span<const double> values() const { return cells_; }

    double squared_norm() const { return detail::dot(cells_, cells_); }
    double norm() const { return std::sqrt(squared_norm()); }

    /// Plain Euclidean inner product of the vectorized forms.
    double dot(const Representation& other) const {
        require_same_shape(other);
        return detail::dot(cells_, other.cells_);
    }

    /// this += a * x
    void add_scaled(double a, const Representation& x) {
        require_same_shape(x);
        for (std::size_t k = 0; k < cells_.size(); ++k) cells_[k] += a * x.cells_[k];
    }

    bool is_symmetric() const {
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = i + 1; j < n_; ++j) {
                auto a = cell(i, j), b = cell(j, i);
                if (!std::equal(a.begin(), a.end(), b.begin())) return false;
            }
        return true;
    }

    bool is_finite() const { return detail::all_finite(cells_); }

    bool operator==(const Representation&) const = default;

private:
    void require_same_shape(const Representation& o) const {
        if (o.n_ != n_ || o.d_ != d_)
            throw SizeError("representation shape mismatch: " + std::to_string(n_) + "x" + std::to_string(d_) +
                            " vs " + std::to_string(o.n_) + "x" + std::to_string(o.d_));
    }

    std::size_t n_;
    std::size_t d_;
    std::vector<double> cells_;
};

/// A bijection on {0..n-1}. Acting on a representation, node i moves to slot p(i).
class Permutation {
public:
    explicit Permutation(std::vector<std::size_t> mapping) : map_(std::move(mapping)) {
        std::vector<bool> seen(map_.size(), false);
        for (auto v : map_) {
            if (v >= map_.size() || seen[v]) throw ValidationError("mapping is not a bijection");
            seen[v] = true;
        }
    }

    static Permutation identity(std::size_t n) {
        std::vector<std::size_t> m(n);
        std::iota(m.begin(), m.end(), std::size_t{0});
        return Permutation(std::move(m));
    }

    std::size_t size() const { return map_.size(); }
    std::size_t operator()(std::size_t i) const { return map_.at(i); }
    const std::vector<std::size_t>& mapping() const { return map_; }

    Permutation inverse() const {
        std::vector<std::size_t> inv(map_.size());
        for (std::size_t i = 0; i < map_.size(); ++i) inv[map_[i]] = i;
        return Permutation(std::move(inv));
    }

    /// (q ∘ p)(i) = q(p(i)), written q.after(p).
    Permutation after(const Permutation& p) const {
        if (p.size() != size()) throw SizeError("composing permutations of different length");
        std::vector<std::size_t> m(size());
        for (std::size_t i = 0; i < size(); ++i) m[i] = map_[p.map_[i]];
        return Permutation(std::move(m));
    }

    bool operator==(const Permutation&) const = default;

private:
    std::vector<std::size_t> map_;
};

/// Adds isolated zero-attribute nodes until the graph has order n.
inline AttributedGraph pad_to_order(const AttributedGraph& g, std::size_t n) {
    if (n < g.order())
        throw SizeError("cannot pad a graph of order " + std::to_string(g.order()) + " to order " +
                        std::to_string(n));
    AttributedGraph out = g;
    while (out.order() < n) out.add_node(Attr(g.attr_dim(), 0.0));
    return out;
}

/// Appends one component to every attribute: 1 on edges, 0 on nodes.
inline AttributedGraph attach_edge_flag(const AttributedGraph& g) {
    AttributedGraph out(g.attr_dim() + 1);
    for (const auto& a : g.nodes()) {
        Attr b = a;
        b.push_back(0.0);
        out.add_node(std::move(b));
    }
    for (const auto& [key, a] : g.edges()) {
        Attr b = a;
        b.push_back(1.0);
        out.add_edge(key.first, key.second, std::move(b));
    }
    out.set_label(g.label());
    return out;
}

inline Representation to_representation(const AttributedGraph& g) {
    Representation r(g.order(), g.attr_dim());
    for (std::size_t i = 0; i < g.order(); ++i) std::ranges::copy(g.node(i), r.cell(i, i).begin());
    for (const auto& [key, a] : g.edges()) {
        std::ranges::copy(a, r.cell(key.first, key.second).begin());
        std::ranges::copy(a, r.cell(key.second, key.first).begin());
    }
    return r;
}

/// Inverse of to_representation: zero off-diagonal cells become non-edges.
inline AttributedGraph from_representation(const Representation& r,
                                           std::optional<std::string> label = std::nullopt) {
    if (!r.is_symmetric()) throw ValidationError("representation is not symmetric");
    AttributedGraph g(r.attr_dim());
    for (std::size_t i = 0; i < r.order(); ++i) {
        auto c = r.cell(i, i);
        g.add_node(Attr(c.begin(), c.end()));
    }
    for (std::size_t i = 0; i < r.order(); ++i)
        for (std::size_t j = i + 1; j < r.order(); ++j) {
            auto c = r.cell(i, j);
            if (!detail::all_zero(c)) g.add_edge(i, j, Attr(c.begin(), c.end()));
        }
    g.set_label(std::move(label));
    return g;
}

/// result.cell(p(i), p(j)) = r.cell(i, j)
inline Representation apply_permutation(const Representation& r, const Permutation& p) {
    if (p.size() != r.order())
        throw SizeError("permutation of length " + std::to_string(p.size()) + " applied to order " +
                        std::to_string(r.order()));
    Representation out(r.order(), r.attr_dim());
    for (std::size_t i = 0; i < r.order(); ++i)
        for (std::size_t j = 0; j < r.order(); ++j) std::ranges::copy(r.cell(i, j), out.cell(p(i), p(j)).begin());
    return out;
}

/// Graph-level relabeling: node i becomes node p(i).
inline AttributedGraph permute(const AttributedGraph& g, const Permutation& p) {
    return from_representation(apply_permutation(to_representation(g), p), g.label());
}

/// Multiplies every node and edge attribute by a. a must be non-zero when the graph has edges.
inline AttributedGraph scale(const AttributedGraph& g, double a) {
    AttributedGraph out(g.attr_dim());
    for (const auto& v : g.nodes()) {
        Attr b = v;
        for (auto& x : b) x *= a;
        out.add_node(std::move(b));
    }
    if (a != 0.0)
        for (const auto& [key, v] : g.edges()) {
            Attr b = v;
            for (auto& x : b) x *= a;
            out.add_edge(key.first, key.second, std::move(b));
        }
    out.set_label(g.label());
    return out;
}

}  // namespace sublinear
