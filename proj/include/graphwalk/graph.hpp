#pragma once

#include <algorithm>
#include <concepts>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "graphwalk/errors.hpp"
#include "graphwalk/numeric.hpp"
#include "graphwalk/rng.hpp"

namespace graphwalk {

// Graphs are exposed only through lazy neighbor enumeration; product graphs
// are never materialized.  Neighbor lists must be duplicate-free and
// symmetric, with size bounded by valency_bound().
template <class G>
concept GraphView = requires(const G& g, const typename G::Vertex& v) {
    typename G::Vertex;
    { g.neighbors(v) } -> std::convertible_to<std::vector<typename G::Vertex>>;
    { g.valency_bound() } -> std::convertible_to<int>;
};

// --- Concrete graph families -------------------------------------------

// The integer line.
class LineGraph {
  public:
    using Vertex = std::int64_t;
    std::vector<Vertex> neighbors(Vertex v) const { return {v - 1, v + 1}; }
    int valency_bound() const { return 2; }
};

// Cycle with l vertices.  l=1 is a single vertex with no edge, l=2 a single
// edge (simple graphs only).
class CycleGraph {
  public:
    using Vertex = std::int64_t;
    explicit CycleGraph(std::int64_t l) : l_(l) {}
    std::vector<Vertex> neighbors(Vertex v) const {
        if (l_ == 1) return {};
        if (l_ == 2) return {1 - v};
        return {(v + 1) % l_, (v + l_ - 1) % l_};
    }
    int valency_bound() const { return 2; }
    std::int64_t size() const { return l_; }

  private:
    std::int64_t l_;
};

// Path on k vertices, 0..k-1.
class PathGraph {
  public:
    using Vertex = std::int64_t;
    explicit PathGraph(std::int64_t k) : k_(k) {}
    std::vector<Vertex> neighbors(Vertex v) const {
        std::vector<Vertex> out;
        if (v > 0) out.push_back(v - 1);
        if (v + 1 < k_) out.push_back(v + 1);
        return out;
    }
    int valency_bound() const { return 2; }
    std::int64_t size() const { return k_; }

  private:
    std::int64_t k_;
};

// Explicit finite graph from an edge list; vertices are 0..n-1.
class FiniteGraph {
  public:
    using Vertex = std::int64_t;

    FiniteGraph(std::int64_t n,
                const std::vector<std::pair<std::int64_t, std::int64_t>>& edges)
        : adj_(static_cast<std::size_t>(n)) {
        for (auto [a, b] : edges) {
            if (a == b) continue;
            adj_[static_cast<std::size_t>(a)].push_back(b);
            adj_[static_cast<std::size_t>(b)].push_back(a);
        }
        max_degree_ = 0;
        for (auto& nb : adj_) {
            std::sort(nb.begin(), nb.end());
            nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
            max_degree_ = std::max<std::int64_t>(max_degree_,
                                                 std::int64_t(nb.size()));
        }
    }

    std::vector<Vertex> neighbors(Vertex v) const {
        return adj_[static_cast<std::size_t>(v)];
    }
    int valency_bound() const { return static_cast<int>(max_degree_); }
    std::int64_t size() const { return std::int64_t(adj_.size()); }

  private:
    std::vector<std::vector<Vertex>> adj_;
    std::int64_t max_degree_;
};

// --- Lazy kernel of the walk -------------------------------------------

template <GraphView G>
std::int64_t degree(const G& g, const typename G::Vertex& v) {
    return std::int64_t(g.neighbors(v).size());
}

// m(x) = nu(x) + 1, the reversible measure of the lazy walk.
template <GraphView G>
std::int64_t reversible_measure(const G& g, const typename G::Vertex& v) {
    return degree(g, v) + 1;
}

// One-step transition probability: uniform over the vertex and its
// neighbors.
template <ProbScalar S, GraphView G>
S lazy_step_prob(const G& g, const typename G::Vertex& a,
                 const typename G::Vertex& b) {
    const auto nb = g.neighbors(a);
    const S unit = S(1) / S(double(nb.size() + 1));
    if (a == b) return unit;
    for (const auto& w : nb)
        if (w == b) return unit;
    return S(0);
}

template <GraphView G>
typename G::Vertex sample_step(const G& g, const typename G::Vertex& a,
                               Rng& rng) {
    const auto nb = g.neighbors(a);
    const std::uint64_t u = rng.below(nb.size() + 1);
    return u == nb.size() ? a : nb[u];
}

// --- Sparse distribution and exact propagation -------------------------

// Ordered map so that iteration (and therefore any emission or parallel
// split) is deterministic.
template <class V, ProbScalar S>
struct SparseDistribution {
    std::map<V, S> weights;

    static SparseDistribution point(const V& v) {
        SparseDistribution d;
        d.weights.emplace(v, S(1));
        return d;
    }

    S mass() const {
        S total = S(0);
        for (const auto& [v, p] : weights) total += p;
        return total;
    }

    S at(const V& v) const {
        auto it = weights.find(v);
        return it == weights.end() ? S(0) : it->second;
    }

    std::size_t support_size() const { return weights.size(); }
};

// A transition kernel exposes, per vertex, the full list of (target,
// probability) pairs of one step.  LazyKernel is Eq-(1)-style; the product
// kernel in walk_engine provides its own.
template <class K, class S>
concept TransitionKernel = requires(const K& k, const typename K::Vertex& v) {
    typename K::Vertex;
    {
        k.template transitions<S>(v)
    } -> std::convertible_to<
        std::vector<std::pair<typename K::Vertex, S>>>;
};

template <GraphView G>
struct LazyKernel {
    using Vertex = typename G::Vertex;
    const G* graph;

    explicit LazyKernel(const G& g) : graph(&g) {}

    template <ProbScalar S>
    std::vector<std::pair<Vertex, S>> transitions(const Vertex& a) const {
        const auto nb = graph->neighbors(a);
        const S unit = S(1) / S(double(nb.size() + 1));
        std::vector<std::pair<Vertex, S>> out;
        out.reserve(nb.size() + 1);
        out.emplace_back(a, unit);
        for (const auto& w : nb) out.emplace_back(w, unit);
        return out;
    }
};

// Exact n-step distribution by sparse forward propagation.  Throws
// BudgetExceeded when the support would outgrow `budget` (state-space
// explosion; shrink n or switch to Monte Carlo).
template <ProbScalar S, class K>
SparseDistribution<typename K::Vertex, S> propagate(
    const K& kernel, const SparseDistribution<typename K::Vertex, S>& start,
    std::int64_t steps, std::size_t budget) {
    using V = typename K::Vertex;
    SparseDistribution<V, S> cur = start;
    for (std::int64_t t = 0; t < steps; ++t) {
        SparseDistribution<V, S> next;
        for (const auto& [v, p] : cur.weights) {
            for (const auto& [w, q] : kernel.template transitions<S>(v)) {
                next.weights[w] += p * q;
                if (next.weights.size() > budget)
                    throw BudgetExceeded(
                        "propagate: support exceeds budget at step " +
                        std::to_string(t + 1));
            }
        }
        cur = std::move(next);
    }
    return cur;
}

template <ProbScalar S, GraphView G>
SparseDistribution<typename G::Vertex, S> propagate_lazy(
    const G& g, const SparseDistribution<typename G::Vertex, S>& start,
    std::int64_t steps, std::size_t budget) {
    return propagate<S>(LazyKernel<G>(g), start, steps, budget);
}

}  // namespace graphwalk
