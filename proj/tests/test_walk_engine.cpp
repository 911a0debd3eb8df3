#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>

#include "graphwalk/product_kernel.hpp"
#include "graphwalk/walk.hpp"
#include "graphwalk/wreath.hpp"

using namespace graphwalk;

TEST_CASE("simulate: n=0 and local-time bookkeeping") {
    LineGraph line;
    Rng rng(1);
    const auto w0 = simulate(line, std::int64_t(0), 0, rng);
    CHECK(w0.trace.size() == 1);
    CHECK(w0.local_times.at(0) == 1);

    for (const std::int64_t n : {1, 17, 301}) {
        const auto w = simulate(line, std::int64_t(0), n, rng);
        CHECK(w.total_time() == n + 1);
        CHECK(w.visited_twice() <= w.visited());
    }
}

TEST_CASE("lazy Z walk: mean and variance of X_n") {
    LineGraph line;
    Rng rng(2);
    const std::int64_t n = 10000;
    const int traces = 1000;
    double sum = 0.0, sum_sq = 0.0;
    for (int t = 0; t < traces; ++t) {
        std::int64_t cur = 0;
        for (std::int64_t i = 0; i < n; ++i) cur = sample_step(line, cur, rng);
        sum += double(cur);
        sum_sq += double(cur) * double(cur);
    }
    const double mean = sum / traces;
    const double var = sum_sq / traces - mean * mean;
    // Step variance is 2/3: mean within 4 sigma, variance within 10%.
    const double sigma_mean = std::sqrt((2.0 / 3.0) * double(n) / traces);
    CHECK(std::abs(mean) < 4.0 * sigma_mean);
    CHECK(std::abs(var - (2.0 / 3.0) * double(n)) <
          0.1 * (2.0 / 3.0) * double(n));
}

TEST_CASE("two-vertex graph: occupation approaches 1/2") {
    FiniteGraph edge(2, {{0, 1}});
    Rng rng(3);
    const std::int64_t n = 1000;
    const auto walk = simulate(edge, std::int64_t(0), n, rng);
    CHECK(std::abs(double(walk.local_times.at(0)) / double(n) - 0.5) < 0.05);
}

TEST_CASE("confinement probability: exact values and shape") {
    CHECK(confinement_prob(5, 10) == 1.0);  // r >= n: cannot exit
    // 9 two-step paths; (+1,+1) and (-1,-1) exit [-1,1].
    CHECK(confinement_prob_exact(2, 1) == rational(7, 9));

    for (std::int64_t r = 1; r <= 5; ++r)
        for (std::int64_t n = 4; n <= 256; n *= 4) {
            CHECK(confinement_prob(2 * n, r) <=
                  confinement_prob(n, r) + 1e-15);
            CHECK(confinement_prob(n, r) <=
                  confinement_prob(n, r + 1) + 1e-15);
        }

    // -log P(n, sqrt(n)) / (n/r^2) stays bounded: e^{-c n/r^2} shape.
    for (const std::int64_t n : {100, 1000, 10000, 100000}) {
        const std::int64_t r = std::int64_t(std::sqrt(double(n)));
        const double ratio = -std::log(confinement_prob(n, r)) /
                             (double(n) / double(r * r));
        CHECK(ratio < 5.0);
    }
}

TEST_CASE("stretched-exponent fit") {
    // Exact functional form recovers alpha to 1e-10.
    std::vector<SeriesPoint> clean;
    for (std::int64_t n = 16; n <= 4096; n *= 2)
        clean.push_back({double(n), std::exp(-std::sqrt(double(n))), 0.0});
    const auto fit = fit_stretched_exponent(clean);
    CHECK(fit.alpha_hat == doctest::Approx(0.5).epsilon(1e-10));
    CHECK_FALSE(fit.polynomial_decay);

    // Polynomial prefactor bias benchmark: c n^{-1/2} e^{-n^{1/3}}.
    std::vector<SeriesPoint> biased;
    for (std::int64_t n = 16; n <= 4096; n *= 2)
        biased.push_back({double(n),
                          std::pow(double(n), -0.5) *
                              std::exp(-std::cbrt(double(n))),
                          0.0});
    const auto fit_biased = fit_stretched_exponent(biased);
    CHECK(fit_biased.alpha_hat > 0.28);
    CHECK(fit_biased.alpha_hat < 0.38);

    // Pure polynomial decay: flagged, not mistaken for stretched.
    const auto line_table = line_return_table(4096);
    std::vector<SeriesPoint> poly;
    for (std::int64_t n = 16; n <= 4096; n *= 2)
        poly.push_back({double(n), line_table[std::size_t(n)], 0.0});
    const auto fit_poly = fit_stretched_exponent(poly);
    CHECK(fit_poly.polynomial_decay);

    CHECK_THROWS_AS(
        fit_stretched_exponent({{1, 0.5, 0}, {2, 0.4, 0}, {3, 0.3, 0}}),
        DegenerateSeries);
    CHECK_THROWS_AS(fit_stretched_exponent(
                        {{1, 1.0, 0}, {2, 0.4, 0}, {3, 0.3, 0}, {4, 0.2, 0}}),
                    DegenerateSeries);
}

// --- Product kernel (switch-walk-switch) --------------------------------

TEST_CASE("product kernel: trivial fibers alternate deterministically") {
    FiniteGraph edge(2, {{0, 1}});
    ProductKernel<FiniteGraph> kernel(edge, FiberAssignment::constant(1));
    CHECK(exact_product_return<Rational>(kernel, 0, 0, 100) == 1);
    CHECK(exact_product_return<Rational>(kernel, 0, 3, 100) == 0);
    CHECK(exact_product_return<Rational>(kernel, 0, 4, 100) == 1);
}

TEST_CASE("product kernel: one step from the origin, Z/2 fibers") {
    FiniteGraph edge(2, {{0, 1}});
    ProductKernel<FiniteGraph> kernel(edge, FiberAssignment::constant(2));
    const auto row = kernel.transitions<Rational>(wreath_origin());
    // 2 x 1 x 2 sub-step combinations, all distinct here.
    REQUIRE(row.size() == 4);
    for (const auto& [w, p] : row) {
        CHECK(w.base == 1);  // marginal base law is delta at the neighbor
        CHECK(p == rational(1, 4));
    }
}

namespace {

// Direct evaluation of the product kernel from its four-clause form:
// p[(a,f),(b,g)] = chi / (nu(a) (d_a+1) (d_b+1)) with chi = 1 iff (a,b) is
// a base edge and g differs from f only at a (by a fiber edge), only at b,
// at both, or nowhere.
Rational four_clause_prob(const FiniteGraph& base,
                          const std::vector<std::int64_t>& fibers,
                          const WreathVertex& v, const WreathVertex& w) {
    const auto nb = base.neighbors(v.base);
    if (std::find(nb.begin(), nb.end(), w.base) == nb.end()) return 0;
    const std::int64_t a = v.base, b = w.base;

    auto fiber_edge = [&](std::int64_t site, std::int64_t x,
                          std::int64_t y) {
        const auto moves = OrdinaryWreathGraph::fiber_moves(
            fibers[std::size_t(site)], x);
        return std::find(moves.begin(), moves.end(), y) != moves.end();
    };
    auto differs_only_at = [&](const std::vector<std::int64_t>& sites) {
        for (std::int64_t s = 0; s < base.size(); ++s) {
            if (std::find(sites.begin(), sites.end(), s) != sites.end())
                continue;
            if (v.config.at(s) != w.config.at(s)) return false;
        }
        return true;
    };

    const bool same_a = v.config.at(a) == w.config.at(a);
    const bool same_b = v.config.at(b) == w.config.at(b);
    const bool edge_a = fiber_edge(a, v.config.at(a), w.config.at(a));
    const bool edge_b = fiber_edge(b, v.config.at(b), w.config.at(b));

    int chi = 0;
    if (differs_only_at({}) && same_a && same_b) chi += 1;        // chi_1
    if (differs_only_at({a}) && edge_a && same_b) chi += 1;       // chi_2
    if (differs_only_at({b}) && same_a && edge_b) chi += 1;       // chi_3
    if (differs_only_at({a, b}) && edge_a && edge_b) chi += 1;    // chi_4

    const std::int64_t da = cycle_degree(fibers[std::size_t(a)]);
    const std::int64_t db = cycle_degree(fibers[std::size_t(b)]);
    return Rational(chi) /
           (Rational(std::int64_t(nb.size())) * Rational(da + 1) *
            Rational(db + 1));
}

}  // namespace

TEST_CASE("product kernel matches the four-clause formula bit-exactly") {
    FiniteGraph c4(4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}});
    const std::vector<std::int64_t> fibers{3, 2, 4, 1};
    ProductKernel<FiniteGraph> kernel(c4,
                                      FiberAssignment::by_vertex(fibers));
    Rng rng(123);
    WreathVertex v = wreath_origin();
    for (int t = 0; t < 40; ++t) {
        const auto row = kernel.transitions<Rational>(v);
        Rational row_sum = 0;
        for (const auto& [w, p] : row) {
            CHECK(p == four_clause_prob(c4, fibers, v, w));
            row_sum += p;
        }
        CHECK(row_sum == 1);
        v = kernel.step(v, rng);
    }
}

TEST_CASE("product kernel: row sums and reversibility w.r.t. nu(a)") {
    FiniteGraph p3(3, {{0, 1}, {1, 2}});
    ProductKernel<FiniteGraph> kernel(
        p3, FiberAssignment::by_vertex({2, 3, 4}));
    // Enumerate a few states by breadth from the origin.
    std::vector<WreathVertex> frontier{wreath_origin()};
    std::set<WreathVertex> seen{wreath_origin()};
    for (int depth = 0; depth < 3; ++depth) {
        std::vector<WreathVertex> next;
        for (const auto& v : frontier) {
            Rational row = 0;
            for (const auto& [w, p] : kernel.transitions<Rational>(v)) {
                row += p;
                // Detailed balance: nu(a) p(v,w) == nu(b) p(w,v).
                Rational back = 0;
                for (const auto& [u, q] : kernel.transitions<Rational>(w))
                    if (u == v) back = q;
                const Rational nu_v(
                    std::int64_t(p3.neighbors(v.base).size()));
                const Rational nu_w(
                    std::int64_t(p3.neighbors(w.base).size()));
                CHECK(nu_v * p == nu_w * back);
                if (seen.insert(w).second) next.push_back(w);
            }
            CHECK(row == 1);
        }
        frontier = std::move(next);
    }
}

TEST_CASE("product step: empirical row matches the kernel") {
    FiniteGraph p3(3, {{0, 1}, {1, 2}});
    ProductKernel<FiniteGraph> kernel(
        p3, FiberAssignment::by_vertex({2, 3, 2}));
    WreathVertex start{1, {}};
    const auto row = kernel.transitions<double>(start);
    Rng rng(77);
    const int samples = 300000;
    std::map<WreathVertex, int> freq;
    for (int i = 0; i < samples; ++i) ++freq[kernel.step(start, rng)];
    for (const auto& [w, p] : row) {
        const double sigma = std::sqrt(p * (1 - p) * samples);
        CHECK(std::abs(freq[w] - p * samples) <= 4.0 * sigma + 1.0);
    }
}

TEST_CASE("fait0 identity: calibration finds a unique convention") {
    const auto outcome =
        calibrate_fait0_convention(fait0_calibration_battery());
    CHECK(outcome.unique);
    CHECK(outcome.convention == Fait0Convention::kArrivalsDepartures);

    // The literal-visit convention is ruled out by some instance.
    bool visits_fails = false;
    for (const bool ok : outcome.match[0])
        if (!ok) visits_fails = true;
    CHECK(visits_fails);
}

TEST_CASE("uncalibrated conventions are rejected") {
    const auto outcome =
        calibrate_fait0_convention(fait0_calibration_battery());
    require_calibrated(outcome, Fait0Convention::kArrivalsDepartures);
    CHECK_THROWS_AS(
        require_calibrated(outcome, Fait0Convention::kVisits),
        InvalidConvention);
    CHECK_THROWS_AS(
        require_calibrated(outcome, Fait0Convention::kTwiceVisits),
        InvalidConvention);
}

TEST_CASE("fait0 identity battery: bit-exact equality") {
    for (const auto& inst : fait0_identity_battery()) {
        ProductKernel<FiniteGraph> kernel(
            inst.base, FiberAssignment::by_vertex(inst.fiber_sizes));
        const Rational exact = exact_product_return<Rational>(
            kernel, inst.origin, inst.n, 1 << 20);
        const Rational rhs =
            fait0_rhs_exact(inst.base, inst.fiber_sizes, inst.origin, inst.n,
                            Fait0Convention::kArrivalsDepartures);
        CHECK(exact == rhs);
    }
}

TEST_CASE("fait0 rhs with trivial fibers is the base return probability") {
    FiniteGraph p3(3, {{0, 1}, {1, 2}});
    // Base walk is the uniform-neighbor walk; compute its return
    // probability by direct path enumeration.
    std::function<Rational(std::int64_t, std::int64_t)> ret =
        [&](std::int64_t pos, std::int64_t depth) -> Rational {
        if (depth == 0) return pos == 1 ? Rational(1) : Rational(0);
        const auto nb = p3.neighbors(pos);
        Rational acc = 0;
        for (const auto b : nb) acc += ret(b, depth - 1);
        return acc / Rational(std::int64_t(nb.size()));
    };
    for (const std::int64_t n : {2, 3, 4, 5}) {
        CHECK(fait0_rhs_exact(p3, {1, 1, 1}, 1, n,
                              Fait0Convention::kVisits) == ret(1, n));
    }
}

TEST_CASE("bridge estimator: trivial fibers reproduce P(X_n=0) exactly") {
    Fait0Estimator est(FiberFamily::constant(1),
                       Fait0Convention::kArrivalsDepartures, 64);
    const auto r = est.estimate(16, 500, true, 9);
    // Integrand is constantly 1: estimate = exact P(X_16 = 0), stderr 0.
    double p_exact = 0.0;
    {
        // Binomial: C(16, 8) / 2^16.
        double c = 1.0;
        for (int i = 0; i < 8; ++i) c = c * double(16 - i) / double(i + 1);
        p_exact = c / 65536.0;
    }
    CHECK(r.estimate == doctest::Approx(p_exact).epsilon(1e-12));
    CHECK(r.stderr_est == 0.0);

    // Odd n: impossible return for the +-1 base walk.
    const auto odd = est.estimate(15, 100, true, 9);
    CHECK(odd.estimate == 0.0);
}

TEST_CASE("bridge estimator vs exact range DP, Z/2 fibers") {
    const double exact = lamplighter_line_return_exact(16);
    Fait0Estimator est(FiberFamily::constant(2),
                       Fait0Convention::kArrivalsDepartures, 64);
    int hits = 0;
    for (std::uint64_t s = 0; s < 6; ++s) {
        const auto r = est.estimate(16, 4000, true, 100 + s);
        if (std::abs(r.estimate - exact) <= 3.0 * r.stderr_est) ++hits;
    }
    CHECK(hits >= 5);
}

TEST_CASE("bridge mode has smaller variance than plain mode") {
    Fait0Estimator est(FiberFamily::constant(2),
                       Fait0Convention::kArrivalsDepartures, 128);
    const auto plain = est.estimate(64, 20000, false, 4);
    const auto bridge = est.estimate(64, 20000, true, 4);
    CHECK(bridge.stderr_est < plain.stderr_est);
    // And both agree with the exact value within 4 sigma.
    const double exact = lamplighter_line_return_exact(64);
    CHECK(std::abs(bridge.estimate - exact) <= 4.0 * bridge.stderr_est);
}

// --- The lazy (Eq. 1) dynamics on wreath products ------------------------

TEST_CASE("lazy wreath holding decomposition equals exact propagation") {
    // Ordinary mode, constant 3-cycles (the alpha = 1/3 profile).
    auto est3 =
        LazyWreathReturnEstimator::ordinary(FiberFamily::from_alpha(1.0 / 3.0),
                                            32);
    OrdinaryWreathGraph g3(FiberFamily::from_alpha(1.0 / 3.0));
    for (const std::int64_t n : {1, 2, 3, 4, 5, 6, 7}) {
        const auto dist = propagate_lazy<Rational>(
            g3,
            SparseDistribution<WreathVertex, Rational>::point(
                wreath_origin()),
            n, 1 << 22);
        CHECK(est3.exact_by_path_enumeration(n) ==
              dist.at(wreath_origin()));
    }

    // Ordinary mode with Z/2 fibers (mixed hold probability 1/2).
    auto est2 =
        LazyWreathReturnEstimator::ordinary(FiberFamily::constant(2), 32);
    OrdinaryWreathGraph g2(FiberFamily::constant(2));
    for (const std::int64_t n : {2, 4, 6}) {
        const auto dist = propagate_lazy<Rational>(
            g2,
            SparseDistribution<WreathVertex, Rational>::point(
                wreath_origin()),
            n, 1 << 22);
        CHECK(est2.exact_by_path_enumeration(n) ==
              dist.at(wreath_origin()));
    }

    // Generalized mode over the beta = 1/2 partition.
    const auto part = DyadicPartition::build(GrowthFunction::power(0.5), 8);
    auto estg = LazyWreathReturnEstimator::generalized(part, 2, 32);
    GeneralizedWreathGraph gg(part, 2);
    for (const std::int64_t n : {2, 4, 6}) {
        const auto dist = propagate_lazy<Rational>(
            gg,
            SparseDistribution<WreathVertex, Rational>::point(
                wreath_origin()),
            n, 1 << 22);
        CHECK(estg.exact_by_path_enumeration(n) ==
              dist.at(wreath_origin()));
    }
}

TEST_CASE("lazy wreath bridge estimator is consistent at small n") {
    auto est =
        LazyWreathReturnEstimator::ordinary(FiberFamily::from_alpha(1.0 / 3.0),
                                            32);
    const double exact = to_double(est.exact_by_path_enumeration(8));
    int hits = 0;
    for (std::uint64_t s = 0; s < 6; ++s) {
        const auto r = est.estimate(8, 4000, true, 200 + s);
        if (std::abs(r.estimate - exact) <= 3.0 * r.stderr_est) ++hits;
    }
    CHECK(hits >= 5);

    // Against the frozen n = 16 exact value from sparse propagation.
    const double golden = 1840202669.0 / 152587890625.0;
    const auto r16 = est.estimate(16, 60000, true, 321);
    CHECK(std::abs(r16.estimate - golden) <= 3.0 * r16.stderr_est);
}

TEST_CASE("product walk: growing fibers lie below fixed fibers at n=64") {
    Fait0Estimator fixed(FiberFamily::from_alpha(1.0 / 3.0),
                         Fait0Convention::kArrivalsDepartures, 128);
    Fait0Estimator growing(FiberFamily::from_alpha(0.5),
                           Fait0Convention::kArrivalsDepartures, 128);
    const auto a = fixed.estimate(64, 30000, true, 6);
    const auto b = growing.estimate(64, 30000, true, 6);
    const double gap =
        std::sqrt(a.stderr_est * a.stderr_est + b.stderr_est * b.stderr_est);
    CHECK(b.estimate < a.estimate - 3.0 * gap);
}

TEST_CASE("growing fibers shrink the return probability") {
    auto est_third =
        LazyWreathReturnEstimator::ordinary(FiberFamily::from_alpha(1.0 / 3.0),
                                            256);
    auto est_half =
        LazyWreathReturnEstimator::ordinary(FiberFamily::from_alpha(0.5),
                                            256);
    const auto a = est_third.estimate(128, 20000, true, 5);
    const auto b = est_half.estimate(128, 20000, true, 5);
    const double gap_sigma =
        std::sqrt(a.stderr_est * a.stderr_est + b.stderr_est * b.stderr_est);
    CHECK(b.estimate < a.estimate - 3.0 * gap_sigma);
}

TEST_CASE("product step from an isolated base vertex throws") {
    FiniteGraph lonely(1, {});
    ProductKernel<FiniteGraph> kernel(lonely, FiberAssignment::constant(2));
    Rng rng(1);
    WreathVertex v = wreath_origin();
    CHECK_THROWS_AS(kernel.step(v, rng), IsolatedVertex);
}
