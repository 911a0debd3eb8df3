#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "graphwalk/graph.hpp"
#include "graphwalk/numeric.hpp"
#include "graphwalk/rng.hpp"

namespace graphwalk {

// Realized path of the lazy chain with per-vertex visit counts.
// L_{x,n} counts time 0, so the counts sum to n+1.
template <GraphView G>
struct WalkResult {
    using V = typename G::Vertex;

    std::vector<V> trace;                    // X_0..X_n (optional)
    std::map<V, std::int64_t> local_times;   // L_{x,n}
    std::int64_t n = 0;

    std::int64_t visited() const {           // N_n
        return std::int64_t(local_times.size());
    }
    std::int64_t visited_twice() const {     // N_{n,2}
        std::int64_t c = 0;
        for (const auto& [v, l] : local_times) c += (l >= 2);
        return c;
    }
    std::int64_t total_time() const {
        std::int64_t c = 0;
        for (const auto& [v, l] : local_times) c += l;
        return c;
    }
};

template <GraphView G>
WalkResult<G> simulate(const G& g, const typename G::Vertex& start,
                       std::int64_t n, Rng& rng, bool keep_trace = true) {
    WalkResult<G> res;
    res.n = n;
    typename G::Vertex cur = start;
    if (keep_trace) {
        res.trace.reserve(std::size_t(n) + 1);
        res.trace.push_back(cur);
    }
    ++res.local_times[cur];
    for (std::int64_t t = 0; t < n; ++t) {
        cur = sample_step(g, cur, rng);
        if (keep_trace) res.trace.push_back(cur);
        ++res.local_times[cur];
    }
    return res;
}

struct ReturnEstimate {
    std::int64_t n = 0;
    double estimate = 0.0;
    double stderr_est = 0.0;
    std::string method;      // exact-dp | naive-mc | fait0-mc | fait0-bridge
    std::int64_t samples = 0;
    std::uint64_t seed = 0;
};

// P(lazy walk on Z started at 0 stays in [-r, r] for n steps), by killed
// DP over 2r+1 states.
double confinement_prob(std::int64_t n, std::int64_t r);
Rational confinement_prob_exact(std::int64_t n, std::int64_t r);

// Same for the lazy walk on an arbitrary finite graph restricted to a
// vertex predicate.
template <GraphView G, class Pred>
double stay_probability(const G& g, const typename G::Vertex& start,
                        Pred inside, std::int64_t n) {
    using V = typename G::Vertex;
    if (!inside(start)) return 0.0;
    std::map<V, double> cur{{start, 1.0}};
    for (std::int64_t t = 0; t < n; ++t) {
        std::map<V, double> next;
        for (const auto& [v, p] : cur) {
            const auto nb = g.neighbors(v);
            const double unit = p / double(nb.size() + 1);
            if (inside(v)) next[v] += unit;
            for (const auto& w : nb)
                if (inside(w)) next[w] += unit;
        }
        cur = std::move(next);
    }
    double total = 0.0;
    for (const auto& [v, p] : cur) total += p;
    return total;
}

struct SeriesPoint {
    double n = 0.0;
    double estimate = 0.0;
    double stderr_est = 0.0;
};

struct StretchedFit {
    double alpha_hat = 0.0;
    double alpha_stderr = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    double curvature = 0.0;        // quadratic coefficient in log n
    bool polynomial_decay = false; // concave + small slope: not stretched
};

// Weighted least squares of log(-log p) against log n; slope = alpha_hat.
// Throws DegenerateSeries when any estimate is outside (0, 1) or fewer
// than 4 points are given.
StretchedFit fit_stretched_exponent(const std::vector<SeriesPoint>& series);

}  // namespace graphwalk
