#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "sublinear/errors.hpp"
#include "sublinear/graph.hpp"

namespace sublinear {

/// Partial injective map from the nodes of X (rows) to the nodes of Y (columns)
/// with exactly min(rows, cols) assigned pairs.
class MatchMatrix {
public:
    MatchMatrix(std::size_t rows, std::size_t cols, std::vector<std::optional<std::size_t>> assignment)
        : rows_(rows), cols_(cols), assign_(std::move(assignment)) {
        if (assign_.size() != rows_) throw SizeError("match assignment length differs from row count");
        std::vector<bool> used(cols_, false);
        std::size_t pairs = 0;
        for (const auto& c : assign_) {
            if (!c) continue;
            if (*c >= cols_ || used[*c]) throw ValidationError("match is not one-to-one");
            used[*c] = true;
            ++pairs;
        }
        if (pairs != std::min(rows_, cols_))
            throw ValidationError("match assigns " + std::to_string(pairs) + " pairs, expected " +
                                  std::to_string(std::min(rows_, cols_)));
    }

    static MatchMatrix identity(std::size_t rows, std::size_t cols) {
        std::vector<std::optional<std::size_t>> a(rows);
        for (std::size_t i = 0; i < std::min(rows, cols); ++i) a[i] = i;
        return MatchMatrix(rows, cols, std::move(a));
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::optional<std::size_t> operator()(std::size_t row) const { return assign_.at(row); }
    const std::vector<std::optional<std::size_t>>& assignment() const { return assign_; }

    /// Assigned (row, col) pairs in row order.
    std::vector<std::pair<std::size_t, std::size_t>> pairs() const {
        std::vector<std::pair<std::size_t, std::size_t>> out;
        for (std::size_t i = 0; i < rows_; ++i)
            if (assign_[i]) out.emplace_back(i, *assign_[i]);
        return out;
    }

    MatchMatrix transposed() const {
        std::vector<std::optional<std::size_t>> a(cols_);
        for (std::size_t i = 0; i < rows_; ++i)
            if (assign_[i]) a[*assign_[i]] = i;
        return MatchMatrix(cols_, rows_, std::move(a));
    }

    bool operator==(const MatchMatrix&) const = default;

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<std::optional<std::size_t>> assign_;
};

/// Deterministic annealing schedule for graduated assignment.
struct GaParams {
    double beta_start = 0.5;
    double beta_rate = 1.075;
    double beta_max = 10.0;
    int sinkhorn_max_iters = 30;
    double sinkhorn_tol = 0.005;
    int assignment_rounds_max = 4;

    void validate() const {
        if (!(beta_start > 0.0)) throw ValidationError("beta_start must be positive");
        if (!(beta_rate > 1.0)) throw ValidationError("beta_rate must exceed 1");
        if (!(beta_max > beta_start)) throw ValidationError("beta_max must exceed beta_start");
        if (!(sinkhorn_tol > 0.0)) throw ValidationError("sinkhorn_tol must be positive");
        if (sinkhorn_max_iters < 1 || assignment_rounds_max < 1)
            throw ValidationError("iteration limits must be at least 1");
    }

    bool operator==(const GaParams&) const = default;
};

enum class MatchMethod { exact, graduated };

struct MatcherConfig {
    MatchMethod method = MatchMethod::exact;
    std::size_t exact_max_order = 8;
    GaParams ga;

    void validate() const {
        if (exact_max_order < 1) throw ValidationError("exact_max_order must be at least 1");
        ga.validate();
    }

    bool operator==(const MatcherConfig&) const = default;
};

inline const char* to_string(MatchMethod m) { return m == MatchMethod::exact ? "exact" : "graduated"; }

inline MatchMethod parse_match_method(const std::string& s) {
    if (s == "exact") return MatchMethod::exact;
    if (s == "graduated") return MatchMethod::graduated;
    throw ValidationError("unknown matcher '" + s + "' (expected exact or graduated)");
}

struct MatchResult {
    double value = 0.0;
    MatchMatrix match;
    bool exact = false;
};

namespace detail {

/// Number of solver invocations on the calling thread.
inline thread_local std::uint64_t matcher_calls = 0;

inline void require_same_dim(const Representation& a, const Representation& b) {
    if (a.attr_dim() != b.attr_dim())
        throw ValidationError("attribute dimension mismatch: " + std::to_string(a.attr_dim()) + " vs " +
                              std::to_string(b.attr_dim()));
}

inline MatchMatrix match_from_permutation(const std::vector<std::size_t>& perm, std::size_t rows,
                                          std::size_t cols) {
    std::vector<std::optional<std::size_t>> a(rows);
    for (std::size_t i = 0; i < rows; ++i)
        if (perm[i] < cols) a[i] = perm[i];
    return MatchMatrix(rows, cols, std::move(a));
}

}  // namespace detail

/// Solver calls made so far on this thread (exact and graduated alike).
inline std::uint64_t matcher_calls() { return detail::matcher_calls; }

/// k_M(X, Y): sum over assigned pairs (i->r), (j->s) of <x_ij, y_rs>, node terms included.
inline double kernel_value(const Representation& rx, const Representation& ry, const MatchMatrix& m) {
    detail::require_same_dim(rx, ry);
    if (m.rows() != rx.order() || m.cols() != ry.order())
        throw SizeError("match is " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                        " but graphs have orders " + std::to_string(rx.order()) + " and " +
                        std::to_string(ry.order()));
    // Terms are summed in sorted order so the result does not depend on how
    // either graph is indexed: sdp is then exactly symmetric and invariant.
    const auto pairs = m.pairs();
    std::vector<double> terms;
    terms.reserve(pairs.size() * pairs.size());
    for (const auto& [i, r] : pairs)
        for (const auto& [j, c] : pairs) terms.push_back(detail::dot(rx.cell(i, j), ry.cell(r, c)));
    std::sort(terms.begin(), terms.end());
    double s = 0.0;
    for (double t : terms) s += t;
    return s;
}

inline double kernel_value(const AttributedGraph& x, const AttributedGraph& y, const MatchMatrix& m) {
    return kernel_value(to_representation(x), to_representation(y), m);
}

/// Sublinear dot product by exhaustive search over all permutations of the
/// padded common order. Among maximizers the lexicographically smallest
/// permutation wins.
inline MatchResult exact_sdp(const Representation& rx, const Representation& ry,
                             std::size_t max_order = MatcherConfig{}.exact_max_order) {
    detail::require_same_dim(rx, ry);
    const std::size_t m = rx.order(), n = ry.order(), N = std::max(m, n);
    if (N > max_order)
        throw CapacityError("exact matching is capped at order " + std::to_string(max_order) + " but got order " +
                            std::to_string(N) + "; use the graduated matcher or raise the cap");
    ++detail::matcher_calls;

    // Pairwise cell products on the padded order; padded cells are zero.
    std::vector<double> table(N * N * N * N, 0.0);
    auto at = [&](std::size_t i, std::size_t j, std::size_t r, std::size_t s) -> double& {
        return table[((i * N + j) * N + r) * N + s];
    };
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j)
            for (std::size_t r = 0; r < n; ++r)
                for (std::size_t s = 0; s < n; ++s) at(i, j, r, s) = detail::dot(rx.cell(i, j), ry.cell(r, s));

    std::vector<std::size_t> perm(N), best(N);
    std::vector<bool> used(N, false);
    double best_value = -std::numeric_limits<double>::infinity();

    // Depth-first over row k; children visited in increasing column order, so
    // leaves appear in lexicographic order.
    auto search = [&](auto&& self, std::size_t k, double partial) -> void {
        if (k == N) {
            const double tol = 1e-12 * std::max(1.0, std::abs(best_value));
            if (partial > best_value + tol || best_value == -std::numeric_limits<double>::infinity()) {
                best_value = partial;
                best = perm;
            }
            return;
        }
        for (std::size_t r = 0; r < N; ++r) {
            if (used[r]) continue;
            double gain = at(k, k, r, r);
            for (std::size_t j = 0; j < k; ++j) gain += at(k, j, r, perm[j]) + at(j, k, perm[j], r);
            used[r] = true;
            perm[k] = r;
            self(self, k + 1, partial + gain);
            used[r] = false;
        }
    };
    search(search, 0, 0.0);

    MatchMatrix match = detail::match_from_permutation(best, m, n);
    const double value = kernel_value(rx, ry, match);
    return {value, std::move(match), true};
}

inline MatchResult exact_sdp(const AttributedGraph& x, const AttributedGraph& y,
                             std::size_t max_order = MatcherConfig{}.exact_max_order) {
    return exact_sdp(to_representation(x), to_representation(y), max_order);
}

/// Sublinear dot product approximated by graduated assignment (softassign).
///
/// Slack-augmented (m+1)x(n+1) assignment matrix, annealed softmax on the
/// gradient of the match kernel, Sinkhorn balancing, then greedy rounding to a
/// hard match of cardinality min(m, n). The returned value is the kernel at
/// that hard match, so it never exceeds the exact optimum.
inline MatchResult ga_sdp(const Representation& rx, const Representation& ry, const GaParams& params = {}) {
    detail::require_same_dim(rx, ry);
    params.validate();
    if (!rx.is_finite() || !ry.is_finite()) throw ValidationError("non-finite attribute value");
    ++detail::matcher_calls;

    const std::size_t m = rx.order(), n = ry.order(), d = rx.attr_dim();
    if (m == 0 || n == 0) {
        MatchMatrix empty(m, n, std::vector<std::optional<std::size_t>>(m));
        return {0.0, std::move(empty), false};
    }

    // Node compatibilities and per-component edge matrices (zero diagonal).
    std::vector<double> node_c(m * n);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t r = 0; r < n; ++r) node_c[i * n + r] = detail::dot(rx.cell(i, i), ry.cell(r, r));
    std::vector<double> xe(d * m * m, 0.0), ye(d * n * n, 0.0);
    for (std::size_t k = 0; k < d; ++k) {
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j)
                if (i != j) xe[(k * m + i) * m + j] = rx.cell(i, j)[k];
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t s = 0; s < n; ++s)
                if (r != s) ye[(k * n + r) * n + s] = ry.cell(r, s)[k];
    }

    const std::size_t cols = n + 1;
    std::vector<double> M((m + 1) * cols, 1.0), Q(m * n), tmp(m * n), prev;
    auto mat = [&](std::size_t i, std::size_t r) -> double& { return M[i * cols + r]; };
    mat(m, n) = 0.0;

    // Q = node_c + 2 * sum_k X_k M Y_k^T, the gradient of the match kernel in M.
    auto compute_q = [&] {
        std::copy(node_c.begin(), node_c.end(), Q.begin());
        for (std::size_t k = 0; k < d; ++k) {
            std::fill(tmp.begin(), tmp.end(), 0.0);
            const double* X = &xe[k * m * m];
            const double* Y = &ye[k * n * n];
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t j = 0; j < m; ++j) {
                    const double xij = X[i * m + j];
                    if (xij == 0.0) continue;
                    for (std::size_t s = 0; s < n; ++s) tmp[i * n + s] += xij * mat(j, s);
                }
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t r = 0; r < n; ++r) {
                    double acc = 0.0;
                    for (std::size_t s = 0; s < n; ++s) acc += tmp[i * n + s] * Y[r * n + s];
                    Q[i * n + r] += 2.0 * acc;
                }
        }
    };

    auto sinkhorn = [&] {
        for (int it = 0; it < params.sinkhorn_max_iters; ++it) {
            double change = 0.0;
            for (std::size_t i = 0; i < m; ++i) {
                double sum = 0.0;
                for (std::size_t r = 0; r <= n; ++r) sum += mat(i, r);
                for (std::size_t r = 0; r <= n; ++r) {
                    const double v = mat(i, r) / sum;
                    change += std::abs(v - mat(i, r));
                    mat(i, r) = v;
                }
            }
            for (std::size_t r = 0; r < n; ++r) {
                double sum = 0.0;
                for (std::size_t i = 0; i <= m; ++i) sum += mat(i, r);
                for (std::size_t i = 0; i <= m; ++i) {
                    const double v = mat(i, r) / sum;
                    change += std::abs(v - mat(i, r));
                    mat(i, r) = v;
                }
            }
            if (change < params.sinkhorn_tol) break;
        }
    };

    sinkhorn();
    for (double beta = params.beta_start; beta < params.beta_max; beta *= params.beta_rate) {
        for (int round = 0; round < params.assignment_rounds_max; ++round) {
            prev = M;
            compute_q();
            // Softmax with a per-row shift; row scaling is absorbed by the balancing.
            for (std::size_t i = 0; i < m; ++i) {
                double top = 0.0;  // slack score
                for (std::size_t r = 0; r < n; ++r) top = std::max(top, Q[i * n + r]);
                for (std::size_t r = 0; r < n; ++r) mat(i, r) = std::exp(beta * (Q[i * n + r] - top));
                mat(i, n) = std::exp(-beta * top);
            }
            for (std::size_t r = 0; r < n; ++r) mat(m, r) = 1.0;
            sinkhorn();
            double delta = 0.0;
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t r = 0; r < n; ++r) delta += std::abs(mat(i, r) - prev[i * cols + r]);
            if (delta < params.sinkhorn_tol) break;
        }
    }

    // Greedy rounding: repeatedly take the largest remaining entry.
    std::vector<std::optional<std::size_t>> assign(m);
    std::vector<bool> row_done(m, false), col_done(n, false);
    for (std::size_t step = 0; step < std::min(m, n); ++step) {
        double top = -1.0;
        std::size_t bi = 0, br = 0;
        for (std::size_t i = 0; i < m; ++i) {
            if (row_done[i]) continue;
            for (std::size_t r = 0; r < n; ++r) {
                if (col_done[r]) continue;
                if (mat(i, r) > top) {
                    top = mat(i, r);
                    bi = i;
                    br = r;
                }
            }
        }
        assign[bi] = br;
        row_done[bi] = true;
        col_done[br] = true;
    }
    MatchMatrix match(m, n, std::move(assign));
    const double value = kernel_value(rx, ry, match);
    return {value, std::move(match), false};
}

inline MatchResult ga_sdp(const AttributedGraph& x, const AttributedGraph& y, const GaParams& params = {}) {
    return ga_sdp(to_representation(x), to_representation(y), params);
}

/// Dispatches on the configured method. The exact method never falls back:
/// orders above the cap raise CapacityError.
inline MatchResult sdp(const Representation& rx, const Representation& ry, const MatcherConfig& cfg = {}) {
    if (cfg.method == MatchMethod::exact) return exact_sdp(rx, ry, cfg.exact_max_order);
    return ga_sdp(rx, ry, cfg.ga);
}

inline MatchResult sdp(const AttributedGraph& x, const AttributedGraph& y, const MatcherConfig& cfg = {}) {
    return sdp(to_representation(x), to_representation(y), cfg);
}

/// Representation of X laid out against a fixed weight representation, together
/// with the match that produced it.
struct Alignment {
    Representation aligned;
    MatchResult result;
};

/// Aligns X to w: returns x of w's order with <w, x> equal to the matched value.
/// X nodes left unmatched (X larger than w) are dropped; w nodes left
/// unmatched (X smaller) see zero attributes.
inline Alignment align(const Representation& rw, const Representation& rx, const MatcherConfig& cfg = {}) {
    MatchResult res = sdp(rw, rx, cfg);
    Representation x(rw.order(), rw.attr_dim());
    const auto pairs = res.match.pairs();
    for (const auto& [i, a] : pairs)
        for (const auto& [j, b] : pairs) std::ranges::copy(rx.cell(a, b), x.cell(i, j).begin());
    return {std::move(x), std::move(res)};
}

inline Representation optimal_align(const Representation& rw, const AttributedGraph& x,
                                    const MatcherConfig& cfg = {}) {
    return align(rw, to_representation(x), cfg).aligned;
}

/// Orbit distance sqrt(X.X - 2 X.Y + Y.Y) with a clamped radicand. Self-products
/// are taken as squared norms (the identity alignment is optimal), so only one
/// matcher call is made per pair.
inline double induced_distance(const Representation& rx, const Representation& ry, const MatcherConfig& cfg = {}) {
    const double xy = sdp(rx, ry, cfg).value;
    return std::sqrt(std::max(0.0, rx.squared_norm() - 2.0 * xy + ry.squared_norm()));
}

inline double induced_distance(const AttributedGraph& x, const AttributedGraph& y, const MatcherConfig& cfg = {}) {
    return induced_distance(to_representation(x), to_representation(y), cfg);
}

}  // namespace sublinear
