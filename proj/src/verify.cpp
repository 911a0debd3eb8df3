#include "graphwalk/verify.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "graphwalk/fibers.hpp"
#include "graphwalk/graph.hpp"
#include "graphwalk/partition.hpp"
#include "graphwalk/percolation.hpp"
#include "graphwalk/product_kernel.hpp"
#include "graphwalk/walk.hpp"
#include "graphwalk/wreath.hpp"

namespace graphwalk {

namespace {

FiniteGraph random_graph(Rng& rng, std::int64_t min_n = 4,
                         std::int64_t max_n = 10) {
    const std::int64_t n =
        min_n + std::int64_t(rng.below(std::uint64_t(max_n - min_n + 1)));
    std::vector<std::pair<std::int64_t, std::int64_t>> edges;
    for (std::int64_t a = 0; a < n; ++a)
        for (std::int64_t b = a + 1; b < n; ++b)
            if (rng.bernoulli(0.4)) edges.emplace_back(a, b);
    return FiniteGraph(n, edges);
}

bool kernel_exact_on(const FiniteGraph& g) {
    for (std::int64_t a = 0; a < g.size(); ++a) {
        Rational row = 0;
        row += lazy_step_prob<Rational>(g, a, a);
        for (const auto b : g.neighbors(a))
            row += lazy_step_prob<Rational>(g, a, b);
        if (row != 1) return false;
        const Rational ma(reversible_measure(g, a));
        for (std::int64_t b = 0; b < g.size(); ++b) {
            const Rational mb(reversible_measure(g, b));
            if (ma * lazy_step_prob<Rational>(g, a, b) !=
                mb * lazy_step_prob<Rational>(g, b, a))
                return false;
        }
    }
    return true;
}

struct UnionFind {
    std::vector<std::int64_t> parent;
    explicit UnionFind(std::int64_t n) : parent(std::size_t(n)) {
        std::iota(parent.begin(), parent.end(), 0);
    }
    std::int64_t find(std::int64_t x) {
        while (parent[std::size_t(x)] != x) {
            parent[std::size_t(x)] = parent[std::size_t(parent[std::size_t(x)])];
            x = parent[std::size_t(x)];
        }
        return x;
    }
    void unite(std::int64_t a, std::int64_t b) {
        parent[std::size_t(find(a))] = find(b);
    }
};

// Independent origin-cluster size via union-find over the same bond bits.
std::int64_t union_find_cluster_size(const BondSample& s) {
    UnionFind uf(s.vertex_count());
    for (std::int64_t v = 0; v < s.vertex_count(); ++v) {
        const auto c = s.vertex_coord(v);
        for (int axis = 0; axis < s.d; ++axis) {
            auto nc = c;
            ++nc[std::size_t(axis)];
            if (nc[std::size_t(axis)] > s.radius) continue;
            if (s.kept(v, axis)) uf.unite(v, s.vertex_index(nc));
        }
    }
    const std::int64_t root =
        uf.find(s.vertex_index(std::array<std::int32_t, 3>{0, 0, 0}));
    std::int64_t count = 0;
    for (std::int64_t v = 0; v < s.vertex_count(); ++v)
        if (uf.find(v) == root) ++count;
    return count;
}

}  // namespace

std::vector<CheckResult> run_verify_battery(std::uint64_t seed) {
    std::vector<CheckResult> out;
    auto check = [&out](const std::string& name, bool pass,
                        const std::string& detail) {
        out.push_back({name, pass, detail});
    };

    // Lazy kernel exactness on random small graphs.
    {
        Rng rng(seed);
        bool ok = true;
        for (int i = 0; i < 20 && ok; ++i)
            ok = kernel_exact_on(random_graph(rng));
        check("kernel-row-sums-and-detailed-balance", ok,
              "20 random graphs, exact rationals");
    }

    // Propagation semigroup.
    {
        Rng rng(seed + 1);
        const auto g = random_graph(rng);
        const auto start =
            SparseDistribution<std::int64_t, Rational>::point(0);
        const auto ab = propagate_lazy<Rational>(g, start, 5, 1 << 20);
        const auto a =
            propagate_lazy<Rational>(g, start, 2, 1 << 20);
        const auto then_b = propagate_lazy<Rational>(g, a, 3, 1 << 20);
        check("propagate-semigroup", ab.weights == then_b.weights,
              "p^(2+3) == p^3 after p^2, bit-exact");
    }

    // Fiber tables: DP vs spectral, stationary floor, monotonicity.
    {
        bool agree = true, floors = true, monotone = true;
        for (const std::int64_t l : {2, 3, 5, 8, 16}) {
            const auto table = cycle_return_table(l, 2000);
            for (std::int64_t m = 0; m <= 2000; m += 97) {
                if (std::abs(table[std::size_t(m)] -
                             fiber_return_prob_spectral(l, m)) > 1e-12)
                    agree = false;
            }
            for (std::size_t m = 0; m < table.size(); ++m) {
                if (table[m] < 1.0 / double(l) - 1e-15) floors = false;
                if (m > 0 && table[m] > table[m - 1] + 1e-15)
                    monotone = false;
            }
        }
        check("fiber-dp-vs-spectral", agree, "l in {2,3,5,8,16}, 1e-12");
        check("fiber-stationary-floor", floors, "P(Y_m=0) >= 1/l");
        check("fiber-return-monotone", monotone, "non-increasing in m");
    }

    // Partition invariants at quick scale.
    {
        const auto g = GrowthFunction::power(0.5);
        const auto part = DyadicPartition::build(g, 10);
        bool exact_n = true;
        for (int s = 0; s <= 10; ++s) {
            const auto st =
                part.window_stats(1, std::int64_t(1) << s);
            if (st.classes_touched != g(std::int64_t(1) << s))
                exact_n = false;
        }
        const auto ratio = part.check_ratio(128, 64);
        const auto bounds = part.check_growth_bounds(g, 128, 64);
        std::ostringstream detail;
        detail << "N(1,2^s) exact: " << (exact_n ? "yes" : "no")
               << "; dyadic ratio " << ratio.max_dyadic_ratio()
               << "; window ratio " << ratio.max_window_ratio() << " at (k="
               << ratio.worst_k << ",m=" << ratio.worst_m << ")";
        check("partition-counts-and-dyadic-ratio",
              exact_n && ratio.dyadic_within(2) && bounds.ok, detail.str());
    }

    // fait0: unique convention + identity battery.
    {
        const auto calib =
            calibrate_fait0_convention(fait0_calibration_battery());
        check("fait0-calibration-unique", calib.unique,
              "convention: " + to_string(calib.convention));
        bool identity = true;
        for (const auto& inst : fait0_identity_battery()) {
            ProductKernel<FiniteGraph> kernel(
                inst.base, FiberAssignment::by_vertex(inst.fiber_sizes));
            const Rational exact = exact_product_return<Rational>(
                kernel, inst.origin, inst.n, 1 << 20);
            const Rational rhs =
                fait0_rhs_exact(inst.base, inst.fiber_sizes, inst.origin,
                                inst.n, calib.convention);
            if (exact != rhs) identity = false;
        }
        check("fait0-identity-battery", identity,
              "exact product return == factorized form, bit-exact");
    }

    // Bridge estimator against the range-DP oracle.
    {
        const double exact = lamplighter_line_return_exact(16);
        Fait0Estimator est(FiberFamily::constant(2),
                           Fait0Convention::kArrivalsDepartures, 64);
        int hits = 0;
        for (int s = 0; s < 5; ++s) {
            const auto r = est.estimate(16, 4000, true, seed + 100 +
                                        std::uint64_t(s));
            if (std::abs(r.estimate - exact) <= 3.0 * r.stderr_est) ++hits;
        }
        std::ostringstream detail;
        detail << hits << "/5 within 3 stderr of " << exact;
        check("fait0-bridge-vs-range-dp", hits >= 4, detail.str());
    }

    // Bidule inequality on a path cluster.
    {
        BondSample s = BondSample::draw(1, 3, 1.0, seed);
        const auto cluster = ClusterGraph::origin_cluster(s);
        bool ok = true;
        for (const double alpha : {0.0, 0.6, 1.0}) {
            const auto rep = check_bidule(cluster, 3, alpha, 1 << 20, false);
            if (!rep.ok) ok = false;
        }
        const auto rep_log = check_bidule(cluster, 3, 0.0, 1 << 20, true);
        check("bidule-battery-quick", ok && rep_log.ok,
              "7-vertex path, n=3, exact rationals");
    }

    // Wreath encode/decode and neighbor symmetry.
    {
        OrdinaryWreathGraph g(FiberFamily::from_alpha(1.0 / 3.0));
        Rng rng(seed + 7);
        bool ok = true;
        WreathVertex v = wreath_origin();
        for (int t = 0; t < 300 && ok; ++t) {
            const auto nb = g.neighbors(v);
            for (const auto& w : nb) {
                const auto back = g.neighbors(w);
                if (std::find(back.begin(), back.end(), v) == back.end())
                    ok = false;
            }
            if (decode_vertex(encode_vertex(v)) != v) ok = false;
            v = nb[rng.pick(std::uint32_t(nb.size()))];
        }
        check("wreath-symmetry-and-roundtrip", ok,
              "300-step walk, ordinary mode");
    }

    // Confinement probability monotone in n and r.
    {
        bool ok = true;
        for (std::int64_t r = 1; r <= 6; ++r)
            for (std::int64_t n = 2; n <= 64; n *= 2) {
                if (confinement_prob(2 * n, r) >
                    confinement_prob(n, r) + 1e-15)
                    ok = false;
                if (confinement_prob(n, r) >
                    confinement_prob(n, r + 1) + 1e-15)
                    ok = false;
            }
        check("confinement-monotone", ok, "grid r<=6, n<=64");
    }

    // Cluster extraction against union-find.
    {
        bool ok = true;
        Rng rng(seed + 11);
        for (int i = 0; i < 25 && ok; ++i) {
            const int d = 1 + int(rng.below(2));
            const auto s = BondSample::draw(d, 5, 0.4 + 0.4 * rng.unit(),
                                            rng.next());
            const auto cluster = ClusterGraph::origin_cluster(s);
            if (cluster.size() != union_find_cluster_size(s)) ok = false;
        }
        check("cluster-vs-union-find", ok, "25 random bond samples");
    }

    // Reproducibility: same seed, same bits.
    {
        Fait0Estimator est(FiberFamily::constant(2),
                           Fait0Convention::kArrivalsDepartures, 64);
        const auto a = est.estimate(32, 2000, true, seed + 13);
        const auto b = est.estimate(32, 2000, true, seed + 13);
        check("seeded-reproducibility",
              a.estimate == b.estimate && a.stderr_est == b.stderr_est,
              "two equal-seed runs bit-identical");
    }

    return out;
}

}  // namespace graphwalk
