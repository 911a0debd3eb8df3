#include "graphwalk/percolation.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <ostream>
#include <sstream>

#include "graphwalk/parallel.hpp"

namespace graphwalk {

std::int64_t BondSample::vertex_count() const {
    std::int64_t c = 1;
    for (int i = 0; i < d; ++i) c *= side();
    return c;
}

std::int64_t BondSample::vertex_index(
    const std::array<std::int32_t, 3>& c) const {
    std::int64_t idx = 0;
    for (int i = d - 1; i >= 0; --i) idx = idx * side() + (c[std::size_t(i)] + radius);
    return idx;
}

std::array<std::int32_t, 3> BondSample::vertex_coord(std::int64_t idx) const {
    std::array<std::int32_t, 3> c{0, 0, 0};
    for (int i = 0; i < d; ++i) {
        c[std::size_t(i)] = std::int32_t(idx % side() - radius);
        idx /= side();
    }
    return c;
}

BondSample BondSample::draw(int d, std::int64_t radius, double p,
                            std::uint64_t seed) {
    BondSample s;
    s.d = d;
    s.radius = radius;
    s.p = p;
    s.seed = seed;
    Rng rng(seed);
    s.bits.resize(std::size_t(s.edge_count()));
    for (auto& b : s.bits) b = rng.bernoulli(p) ? 1 : 0;
    return s;
}

ClusterGraph ClusterGraph::origin_cluster(const BondSample& sample) {
    ClusterGraph g;
    g.d_ = sample.d;
    g.box_radius_ = sample.radius;

    const std::array<std::int32_t, 3> origin_coord{0, 0, 0};
    const std::int64_t origin_box = sample.vertex_index(origin_coord);

    std::map<std::int64_t, Vertex> index_of;  // box index -> cluster index
    auto intern = [&](std::int64_t box_idx) -> Vertex {
        auto it = index_of.find(box_idx);
        if (it != index_of.end()) return it->second;
        const Vertex v = Vertex(g.coords_.size());
        index_of.emplace(box_idx, v);
        g.coords_.push_back(sample.vertex_coord(box_idx));
        g.adj_.emplace_back();
        return v;
    };

    g.origin_ = intern(origin_box);
    std::deque<std::int64_t> frontier{origin_box};
    while (!frontier.empty()) {
        const std::int64_t cur = frontier.front();
        frontier.pop_front();
        const Vertex cv = index_of.at(cur);
        const auto cc = sample.vertex_coord(cur);
        for (int axis = 0; axis < sample.d; ++axis) {
            for (int dir = -1; dir <= 1; dir += 2) {
                auto nc = cc;
                nc[std::size_t(axis)] += dir;
                if (nc[std::size_t(axis)] < -sample.radius ||
                    nc[std::size_t(axis)] > sample.radius)
                    continue;
                const std::int64_t nb = sample.vertex_index(nc);
                const std::int64_t edge_owner = dir > 0 ? cur : nb;
                if (!sample.kept(edge_owner, axis)) continue;
                const bool seen = index_of.count(nb) > 0;
                const Vertex nv = intern(nb);
                g.adj_[std::size_t(cv)].push_back(nv);
                if (!seen) frontier.push_back(nb);
            }
        }
    }
    for (auto& nb : g.adj_) {
        std::sort(nb.begin(), nb.end());
        nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
    }
    for (const auto& c : g.coords_) {
        for (int i = 0; i < g.d_; ++i) {
            if (c[std::size_t(i)] == -sample.radius ||
                c[std::size_t(i)] == sample.radius) {
                g.touches_boundary_ = true;
                break;
            }
        }
        if (g.touches_boundary_) break;
    }
    return g;
}

std::vector<std::int32_t> ClusterGraph::distances_from_origin() const {
    std::vector<std::int32_t> dist(std::size_t(size()), -1);
    std::deque<Vertex> q{origin_};
    dist[std::size_t(origin_)] = 0;
    while (!q.empty()) {
        const Vertex v = q.front();
        q.pop_front();
        for (const Vertex w : adj_[std::size_t(v)]) {
            if (dist[std::size_t(w)] < 0) {
                dist[std::size_t(w)] = dist[std::size_t(v)] + 1;
                q.push_back(w);
            }
        }
    }
    return dist;
}

std::vector<std::int64_t> ClusterGraph::ball_volumes(
    std::int64_t m_max) const {
    const auto dist = distances_from_origin();
    std::vector<std::int64_t> vol(std::size_t(m_max) + 1, 0);
    for (const std::int32_t d : dist)
        if (d >= 0 && d <= m_max) ++vol[std::size_t(d)];
    for (std::size_t m = 1; m < vol.size(); ++m) vol[m] += vol[m - 1];
    return vol;
}

void ClusterGraph::dump_edges(std::ostream& os) const {
    for (Vertex v = 0; v < size(); ++v) {
        for (const Vertex w : adj_[std::size_t(v)]) {
            if (w < v) continue;
            const auto& a = coords_[std::size_t(v)];
            const auto& b = coords_[std::size_t(w)];
            os << a[0] << ' ' << a[1] << ' ' << a[2] << ' ' << b[0] << ' '
               << b[1] << ' ' << b[2] << '\n';
        }
    }
}

ClusterGraph sample_cluster(int d, std::int64_t radius, double p,
                            std::uint64_t seed) {
    auto cluster =
        ClusterGraph::origin_cluster(BondSample::draw(d, radius, p, seed));
    if (cluster.origin_isolated())
        throw OriginIsolated("origin cluster is {0} for seed " +
                             std::to_string(seed));
    return cluster;
}

ClusterGraph sample_cluster_conditioned(int d, std::int64_t radius, double p,
                                        std::uint64_t& seed, int max_tries) {
    for (int t = 0; t < max_tries; ++t) {
        auto cluster =
            ClusterGraph::origin_cluster(BondSample::draw(d, radius, p, seed));
        ++seed;
        if (!cluster.origin_isolated() && cluster.touches_boundary())
            return cluster;
    }
    throw Error("no boundary-touching origin cluster in " +
                std::to_string(max_tries) + " samples (p subcritical?)");
}

// --- Functionals ----------------------------------------------------------

double functional_sum_alpha(const std::map<std::int64_t, std::int64_t>& L,
                            double alpha, double lambda) {
    double s = 0.0;
    for (const auto& [x, l] : L) s += std::pow(double(l), alpha);
    return std::exp(-lambda * s);
}

double functional_prod(const std::map<std::int64_t, std::int64_t>& L,
                       double alpha) {
    double log_prod = 0.0;
    for (const auto& [x, l] : L) log_prod -= alpha * std::log(double(l));
    return std::exp(log_prod);
}

std::string FunctionalSpec::id() const {
    std::ostringstream os;
    switch (kind) {
        case Kind::kSumAlpha:
            os << "sum-alpha(" << lambda << "," << alpha << ")";
            break;
        case Kind::kProdAlpha:
            os << "prod-alpha(" << alpha << ")";
            break;
        case Kind::kVisited:
            os << "visited(" << lambda << ")";
            break;
    }
    return os.str();
}

FunctionalEstimate estimate_functional(const ClusterGraph& cluster,
                                       const FunctionalSpec& spec,
                                       std::int64_t n, std::int64_t samples,
                                       std::uint64_t seed, int workers) {
    FunctionalEstimate est;
    est.functional_id = spec.id();
    est.with_indicator = spec.with_indicator;
    est.n = n;
    est.samples = samples;
    est.seed = seed;
    est.cluster_size = cluster.size();
    est.cluster_touches_boundary = cluster.touches_boundary();

    const Welford acc = parallel_samples(
        samples, workers, seed, [&](Rng& rng) -> double {
            const auto walk = simulate(cluster, cluster.origin(), n, rng,
                                       /*keep_trace=*/spec.with_indicator);
            if (spec.with_indicator &&
                walk.trace.back() != cluster.origin())
                return 0.0;
            switch (spec.kind) {
                case FunctionalSpec::Kind::kSumAlpha:
                    return functional_sum_alpha(walk.local_times, spec.alpha,
                                                spec.lambda);
                case FunctionalSpec::Kind::kProdAlpha:
                    return functional_prod(walk.local_times, spec.alpha);
                case FunctionalSpec::Kind::kVisited:
                    return std::exp(-spec.lambda * double(walk.visited()));
            }
            return 0.0;
        });

    est.estimate = acc.mean;
    est.stderr_est = acc.stderr_of_mean();
    return est;
}

// --- Sequential Monte Carlo ----------------------------------------------

namespace {

// Open-addressing visit table sized for SMC particles: flat, cheap to copy
// at resampling time.
class FlatVisitTable {
  public:
    FlatVisitTable() : slots_(64, {0, 0}), mask_(63), used_(0) {}

    std::uint16_t bump(std::int32_t key) {
        if (used_ * 5 >= slots_.size() * 3) grow();
        const std::uint32_t stored = std::uint32_t(key) + 1;
        std::size_t i = hash(stored) & mask_;
        for (;;) {
            auto& slot = slots_[i];
            if (slot.first == stored) return slot.second++;
            if (slot.first == 0) {
                slot.first = stored;
                slot.second = 1;
                ++used_;
                return 0;
            }
            i = (i + 1) & mask_;
        }
    }

  private:
    static std::uint32_t hash(std::uint32_t x) {
        x ^= x >> 16;
        x *= 0x7feb352dU;
        x ^= x >> 15;
        x *= 0x846ca68bU;
        x ^= x >> 16;
        return x;
    }

    void grow() {
        std::vector<std::pair<std::uint32_t, std::uint16_t>> old;
        old.swap(slots_);
        slots_.assign(old.size() * 2, {0, 0});
        mask_ = std::uint32_t(slots_.size() - 1);
        used_ = 0;
        for (const auto& [k, c] : old) {
            if (k == 0) continue;
            std::size_t i = hash(k) & mask_;
            while (slots_[i].first != 0) i = (i + 1) & mask_;
            slots_[i] = {k, c};
            ++used_;
        }
    }

    std::vector<std::pair<std::uint32_t, std::uint16_t>> slots_;
    std::uint32_t mask_;
    std::size_t used_;
};

}  // namespace

SmcResult smc_sum_alpha(const ClusterGraph& cluster, double alpha,
                        double lambda, std::int64_t n, std::int64_t particles,
                        Rng& rng) {
    SmcResult res;
    res.particles = particles;

    // Weight factor for raising a local time from c to c+1; an unvisited
    // site contributes 0 to the sum, so the first visit adds a full 1^a.
    const std::size_t factor_cap = 1 << 16;
    std::vector<double> factor(factor_cap);
    for (std::size_t c = 0; c < factor_cap; ++c) {
        const double before = c == 0 ? 0.0 : std::pow(double(c), alpha);
        const double dc = std::pow(double(c + 1), alpha) - before;
        factor[c] = std::exp(-lambda * dc);
    }

    const std::size_t P = std::size_t(particles);
    std::vector<std::int32_t> pos(P, std::int32_t(cluster.origin()));
    std::vector<double> weight(P);
    std::vector<FlatVisitTable> visits(P);
    double log_estimate = 0.0;

    for (std::size_t i = 0; i < P; ++i)
        weight[i] = factor[visits[i].bump(pos[i])];

    // Flattened adjacency for speed.
    std::vector<std::int32_t> flat_adj;
    std::vector<std::int32_t> adj_off(std::size_t(cluster.size()) + 1, 0);
    for (std::int64_t v = 0; v < cluster.size(); ++v) {
        for (const auto w : cluster.neighbors(v))
            flat_adj.push_back(std::int32_t(w));
        adj_off[std::size_t(v + 1)] = std::int32_t(flat_adj.size());
    }

    std::vector<std::int32_t> new_pos(P);
    std::vector<FlatVisitTable> new_visits(P);

    for (std::int64_t t = 1; t <= n; ++t) {
        for (std::size_t i = 0; i < P; ++i) {
            const std::int32_t v = pos[i];
            const std::int32_t lo = adj_off[std::size_t(v)];
            const std::int32_t deg = adj_off[std::size_t(v) + 1] - lo;
            const std::uint32_t u = rng.pick(std::uint32_t(deg + 1));
            const std::int32_t w =
                u == std::uint32_t(deg)
                    ? v
                    : flat_adj[std::size_t(lo + std::int32_t(u))];
            pos[i] = w;
            weight[i] *= factor[visits[i].bump(w)];
        }

        double sw = 0.0, sw2 = 0.0;
        for (const double w : weight) {
            sw += w;
            sw2 += w * w;
        }
        const double ess = sw * sw / sw2;
        if (ess < 0.5 * double(P) && t < n) {
            ++res.resamples;
            log_estimate += std::log(sw / double(P));
            // Systematic resampling.
            const double step = sw / double(P);
            double target = rng.unit() * step;
            double cum = 0.0;
            std::size_t src = 0;
            for (std::size_t i = 0; i < P; ++i) {
                while (cum + weight[src] < target && src + 1 < P) {
                    cum += weight[src];
                    ++src;
                }
                new_pos[i] = pos[src];
                new_visits[i] = visits[src];
                target += step;
            }
            pos.swap(new_pos);
            visits.swap(new_visits);
            std::fill(weight.begin(), weight.end(), 1.0);
        }
    }

    double sw = 0.0;
    for (const double w : weight) sw += w;
    log_estimate += std::log(sw / double(P));
    res.log_estimate = log_estimate;
    res.estimate = std::exp(log_estimate);
    return res;
}

// --- Exact small-instance machinery --------------------------------------

CountVectorDist count_vector_dp_continue(const ClusterGraph& cluster,
                                         CountVectorDist start,
                                         std::int64_t extra_steps,
                                         std::size_t budget) {
    CountVectorDist cur = std::move(start);
    for (std::int64_t t = 0; t < extra_steps; ++t) {
        CountVectorDist next;
        for (const auto& [state, prob] : cur.states) {
            const auto& [v, counts] = state;
            const auto nb = cluster.neighbors(v);
            const Rational unit =
                prob / Rational(std::int64_t(nb.size()) + 1);
            auto push = [&](std::int64_t w) {
                auto nc = counts;
                ++nc[std::size_t(w)];
                next.states[{w, std::move(nc)}] += unit;
                if (next.states.size() > budget)
                    throw BudgetExceeded("count_vector_dp: state budget");
            };
            push(v);
            for (const auto w : nb) push(w);
        }
        cur = std::move(next);
    }
    return cur;
}

CountVectorDist count_vector_dp(const ClusterGraph& cluster, std::int64_t n,
                                std::size_t budget) {
    CountVectorDist init;
    std::vector<std::uint8_t> counts(std::size_t(cluster.size()), 0);
    counts[std::size_t(cluster.origin())] = 1;
    init.states[{cluster.origin(), std::move(counts)}] = 1;
    return count_vector_dp_continue(cluster, std::move(init), n, budget);
}

namespace {

double functional_value(const std::vector<std::uint8_t>& counts, double alpha,
                        bool log_variant) {
    double s = 0.0;
    for (const std::uint8_t c : counts) {
        if (c == 0) continue;
        s += log_variant ? std::log(double(c)) : std::pow(double(c), alpha);
    }
    return s;
}

// Ceiling bucket on the unit grid, with a snap for values that are
// integers up to roundoff.
std::int64_t ceil_bucket(double s) {
    const double snapped = std::abs(s - std::round(s)) < 1e-9
                               ? std::round(s)
                               : s;
    return std::int64_t(std::ceil(snapped - 1e-12));
}

}  // namespace

BiduleReport check_bidule(const ClusterGraph& cluster, std::int64_t n,
                          double alpha, std::size_t budget,
                          bool log_variant) {
    BiduleReport rep;
    rep.alpha = alpha;
    rep.log_variant = log_variant;

    const auto dist_n = count_vector_dp(cluster, n, budget);
    // P(bucket(S_n) = m), any endpoint.
    std::map<std::int64_t, Rational> lhs;
    for (const auto& [state, prob] : dist_n.states) {
        const double s =
            functional_value(state.second, alpha, log_variant);
        lhs[ceil_bucket(s)] += prob;
    }

    const auto dist_2n = count_vector_dp_continue(
        cluster, dist_n, n, budget);
    // P(S_{2n} <= 2m, X_{2n} = origin), cumulative over levels.
    std::map<std::int64_t, Rational> mass_at;  // by bucket of S_{2n}
    for (const auto& [state, prob] : dist_2n.states) {
        if (state.first != cluster.origin()) continue;
        const double s =
            functional_value(state.second, alpha, log_variant);
        mass_at[ceil_bucket(s)] += prob;
    }

    const int d = cluster.dimension();
    rep.min_margin = std::numeric_limits<double>::infinity();
    for (const auto& [m, p_m] : lhs) {
        if (m < 1) continue;  // the series the bound feeds starts at m = 1
        ++rep.levels_checked;
        Rational rhs = 0;
        for (const auto& [b, q] : mass_at) {
            if (b <= 2 * m) rhs += q;
        }
        BigInt c = 2 * d;
        for (int i = 0; i < d; ++i) c *= (2 * m + 1);
        const Rational bound = Rational(c) * rhs;
        const Rational lhs_sq = p_m * p_m;
        const double margin = to_double(bound - lhs_sq);
        rep.min_margin = std::min(rep.min_margin, margin);
        if (lhs_sq > bound && rep.ok) {
            rep.ok = false;
            rep.fail_m = m;
            rep.fail_lhs_sq = to_double(lhs_sq);
            rep.fail_rhs_bound = to_double(bound);
        }
    }
    return rep;
}

LowerBoundReport check_lower_bound_sum(const ClusterGraph& cluster,
                                       std::int64_t n, double alpha,
                                       double lambda, std::int64_t m,
                                       bool exact_dp, std::int64_t samples,
                                       std::uint64_t seed) {
    LowerBoundReport rep;
    rep.exact = exact_dp;

    const auto volumes = cluster.ball_volumes(m);
    rep.ball_volume = volumes[std::size_t(m)];

    const auto dist = cluster.distances_from_origin();
    rep.conf_prob = stay_probability(
        cluster, cluster.origin(),
        [&dist, m](std::int64_t v) { return dist[std::size_t(v)] <= m; }, n);

    rep.rhs = std::exp(-lambda * std::pow(double(rep.ball_volume),
                                          1.0 - alpha) *
                       std::pow(double(n + 1), alpha)) *
              rep.conf_prob;

    if (exact_dp) {
        const auto dist_n = count_vector_dp(cluster, n, 1u << 22);
        double lhs = 0.0;
        for (const auto& [state, prob] : dist_n.states) {
            const double s = functional_value(state.second, alpha, false);
            lhs += to_double(prob) * std::exp(-lambda * s);
        }
        rep.lhs = lhs;
        rep.lhs_stderr = 0.0;
    } else {
        Welford acc;
        for (int r = 0; r < 8; ++r) {
            Rng rng = Rng::for_worker(seed, std::uint64_t(r));
            const auto smc = smc_sum_alpha(cluster, alpha, lambda, n,
                                           samples, rng);
            acc.add(smc.estimate);
        }
        rep.lhs = acc.mean;
        rep.lhs_stderr = acc.stderr_of_mean();
    }
    rep.slack = rep.rhs > 0 ? rep.lhs / rep.rhs : 0.0;
    rep.ok = rep.lhs + 3.0 * rep.lhs_stderr >= rep.rhs * (1.0 - 1e-9);
    return rep;
}

double trend_target_eta(int d, double alpha) {
    return (double(d) + alpha * (2.0 - double(d))) /
           (2.0 + double(d) * (1.0 - alpha));
}

TrendResult exponent_trend(int d, double p, double alpha, double lambda,
                           const std::vector<std::int64_t>& n_grid,
                           int replicates, std::int64_t particles,
                           std::uint64_t seed) {
    TrendResult res;
    res.target = trend_target_eta(d, alpha);

    if (alpha == 1.0) {
        // sum L = n+1 exactly; the functional is deterministic.
        for (const std::int64_t n : n_grid)
            res.series.push_back(
                {double(n + 1), std::exp(-lambda * double(n + 1)), 0.0});
    } else {
        std::uint64_t cluster_seed = seed;
        for (const std::int64_t n : n_grid) {
            const std::int64_t radius = std::max<std::int64_t>(
                8, std::int64_t(2.5 * std::sqrt(double(n))) + 2);
            Welford acc;
            for (int r = 0; r < replicates; ++r) {
                const auto cluster = sample_cluster_conditioned(
                    d, radius, p, cluster_seed, 1000);
                Rng rng = Rng::for_worker(seed ^ 0x5bd1e995u,
                                          cluster_seed + std::uint64_t(r));
                const auto smc =
                    smc_sum_alpha(cluster, alpha, lambda, n, particles, rng);
                acc.add(smc.estimate);
            }
            res.series.push_back(
                {double(n + 1), acc.mean, acc.stderr_of_mean()});
        }
    }

    res.fit = fit_stretched_exponent(res.series);
    res.eta_hat = res.fit.alpha_hat;
    res.eta_stderr = res.fit.alpha_stderr;
    return res;
}

}  // namespace graphwalk
