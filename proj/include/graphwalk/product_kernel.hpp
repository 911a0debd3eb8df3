#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "graphwalk/fibers.hpp"
#include "graphwalk/graph.hpp"
#include "graphwalk/numeric.hpp"
#include "graphwalk/rng.hpp"
#include "graphwalk/walk.hpp"
#include "graphwalk/wreath.hpp"

namespace graphwalk {

// Per-base-vertex fiber sizes.
class FiberAssignment {
  public:
    static FiberAssignment constant(std::int64_t l);
    static FiberAssignment by_vertex(std::vector<std::int64_t> sizes);
    static FiberAssignment family(FiberFamily fam);

    // kHuge when beyond the table budget (growing families far out).
    std::int64_t size_of(std::int64_t base_vertex) const;

  private:
    std::optional<std::int64_t> constant_l_;
    std::vector<std::int64_t> per_vertex_;
    std::optional<FiberFamily> family_;
};

// Switch-walk-switch kernel of the product chain Z: one lazy fiber step at
// the departure lamp, one uniform-neighbor base step (not lazy), one lazy
// fiber step at the arrival lamp.  Reversible w.r.t. m(a,f) = nu(a).
template <GraphView B>
    requires std::same_as<typename B::Vertex, std::int64_t>
class ProductKernel {
  public:
    using Vertex = WreathVertex;

    ProductKernel(const B& base, FiberAssignment fibers)
        : base_(&base), fibers_(std::move(fibers)) {}

    template <ProbScalar S>
    std::vector<std::pair<Vertex, S>> transitions(const Vertex& v) const {
        const auto nb = base_->neighbors(v.base);
        if (nb.empty())
            throw IsolatedVertex("product kernel at isolated base vertex " +
                                 std::to_string(v.base));
        const std::int64_t la = fibers_.size_of(v.base);
        const std::int64_t ca = v.config.at(v.base);
        auto moves_a = OrdinaryWreathGraph::fiber_moves(la, ca);
        moves_a.push_back(ca);

        std::map<Vertex, S> acc;
        const S base_unit = S(1) / S(double(nb.size()));
        const S unit_a = S(1) / S(double(moves_a.size()));
        for (const std::int64_t ma : moves_a) {
            for (const std::int64_t b : nb) {
                Configuration after_a = v.config;
                after_a.set(v.base, ma);
                const std::int64_t lb = fibers_.size_of(b);
                const std::int64_t cb = after_a.at(b);
                auto moves_b = OrdinaryWreathGraph::fiber_moves(lb, cb);
                moves_b.push_back(cb);
                const S unit_b = S(1) / S(double(moves_b.size()));
                for (const std::int64_t mb : moves_b) {
                    Vertex w;
                    w.base = b;
                    w.config = after_a;
                    w.config.set(b, mb);
                    acc[w] += unit_a * base_unit * unit_b;
                }
            }
        }
        return {acc.begin(), acc.end()};
    }

    Vertex step(const Vertex& v, Rng& rng) const {
        const auto nb = base_->neighbors(v.base);
        if (nb.empty())
            throw IsolatedVertex("product kernel at isolated base vertex " +
                                 std::to_string(v.base));
        Vertex w = v;
        lamp_step(w, v.base, rng);
        w.base = nb[rng.pick(std::uint32_t(nb.size()))];
        lamp_step(w, w.base, rng);
        return w;
    }

    const B& base() const { return *base_; }
    const FiberAssignment& fibers() const { return fibers_; }

  private:
    void lamp_step(Vertex& v, std::int64_t at, Rng& rng) const {
        const std::int64_t l = fibers_.size_of(at);
        const std::int64_t c = v.config.at(at);
        auto moves = OrdinaryWreathGraph::fiber_moves(l, c);
        moves.push_back(c);
        v.config.set(at, moves[rng.pick(std::uint32_t(moves.size()))]);
    }

    const B* base_;
    FiberAssignment fibers_;
};

// Exact return probability of the product chain at time n via sparse
// propagation; BudgetExceeded signals too large a reachable state space.
template <ProbScalar S, GraphView B>
S exact_product_return(const ProductKernel<B>& kernel, std::int64_t origin,
                       std::int64_t n, std::size_t budget) {
    WreathVertex o;
    o.base = origin;
    auto dist = propagate<S>(
        kernel, SparseDistribution<WreathVertex, S>::point(o), n, budget);
    return dist.at(o);
}

// Per-lamp step-count conventions for the product-return factorization.
// The statement's literal count is the visit count L_{x,n}; the three-step
// dynamics suggests arrivals+departures (2L minus endpoint corrections).
// Which one makes the identity exact is calibrated, not assumed.
enum class Fait0Convention { kVisits, kArrivalsDepartures, kTwiceVisits };

std::string to_string(Fait0Convention c);

std::int64_t fait0_lamp_steps(Fait0Convention conv, std::int64_t visits,
                              bool is_start, bool is_end);

// Sum over base paths returning to the origin of path probability times
// the product of per-lamp cycle return probabilities (exact rationals).
Rational fait0_rhs_exact(const FiniteGraph& base,
                         const std::vector<std::int64_t>& fiber_sizes,
                         std::int64_t origin, std::int64_t n,
                         Fait0Convention conv);

struct ProductInstance {
    std::string name;
    FiniteGraph base;
    std::vector<std::int64_t> fiber_sizes;
    std::int64_t origin = 0;
    std::int64_t n = 0;
};

// Tiny bases (single edge, P_3, 4-cycle) with small fibers; the calibration
// battery includes fibers of size >= 4, where the candidate conventions
// actually produce different values.
std::vector<ProductInstance> fait0_identity_battery();
std::vector<ProductInstance> fait0_calibration_battery();

struct CalibrationOutcome {
    Fait0Convention convention = Fait0Convention::kArrivalsDepartures;
    bool unique = false;
    // match[c][i]: convention c reproduces instance i bit-exactly.
    std::vector<std::vector<bool>> match;
    std::vector<std::string> instance_names;
};

// Returns the unique convention matching exact_product_return bit-exactly
// on the whole battery; throws NoConventionMatches when none does.
CalibrationOutcome calibrate_fait0_convention(
    const std::vector<ProductInstance>& battery);

// Guard for estimator construction: the requested convention must be the
// battery's unique survivor.
void require_calibrated(const CalibrationOutcome& outcome,
                        Fait0Convention requested);

// Monte Carlo fait0 estimator on the Z base (uniform +-1 base walk).
// Plain mode multiplies by the return indicator; bridge mode samples the
// base walk conditioned on X_n = 0 by a backward-DP h-transform and
// multiplies by the exact P(X_n = 0).  Unbiased in both modes.
class Fait0Estimator {
  public:
    Fait0Estimator(FiberFamily fibers, Fait0Convention conv,
                   std::int64_t m_max);

    ReturnEstimate estimate(std::int64_t n, std::int64_t samples, bool bridge,
                            std::uint64_t seed, int workers = 1) const;

    const FiberReturnTable& tables() const { return tables_; }

  private:
    double sample_value(std::int64_t n, Rng& rng,
                        const std::vector<double>* bridge_u,
                        std::int64_t width) const;

    FiberFamily fibers_;
    Fait0Convention conv_;
    FiberReturnTable tables_;
};

// Exact E[(1/2)^{N_n} 1{X_n=0}] for the Z-base, Z/2-fiber product chain,
// by range DP over (min, max, position).  Independent of the propagation
// path; this is the oracle the bridge estimator is held against.
double lamplighter_line_return_exact(std::int64_t n);
Rational lamplighter_line_return_exact_rational(std::int64_t n);

// Fait0 estimator over a finite base graph (e.g. a percolation cluster).
// The base marginal of the product chain is the uniform-neighbor walk;
// bridge mode builds the dense backward table u[t][v], so it is reserved
// for small clusters (the table is |V| * (n+1) doubles).
template <GraphView B>
    requires std::same_as<typename B::Vertex, std::int64_t>
ReturnEstimate fait0_estimate_finite(
    const B& base, std::int64_t base_size, const FiberAssignment& fibers,
    const FiberReturnTable& tables, Fait0Convention conv, std::int64_t origin,
    std::int64_t n, std::int64_t samples, bool bridge, std::uint64_t seed) {
    ReturnEstimate est;
    est.n = n;
    est.samples = samples;
    est.seed = seed;
    est.method = bridge ? "fait0-bridge" : "fait0-mc";

    std::vector<double> u;
    double u0 = 1.0;
    if (bridge) {
        if (double(base_size) * double(n + 1) > 5e7)
            throw BudgetExceeded("fait0 bridge table too large");
        u.assign(std::size_t(base_size * (n + 1)), 0.0);
        u[std::size_t(n * base_size + origin)] = 1.0;
        for (std::int64_t t = n - 1; t >= 0; --t) {
            for (std::int64_t v = 0; v < base_size; ++v) {
                const auto nb = base.neighbors(v);
                double acc = 0.0;
                for (const auto w : nb)
                    acc += u[std::size_t((t + 1) * base_size + w)];
                u[std::size_t(t * base_size + v)] =
                    nb.empty() ? 0.0 : acc / double(nb.size());
            }
        }
        u0 = u[std::size_t(origin)];
        if (u0 == 0.0) return est;
    }

    Welford acc;
    Rng rng = Rng::for_worker(seed, 0);
    std::vector<std::int32_t> visits(std::size_t(base_size), 0);
    std::vector<std::int64_t> touched;
    for (std::int64_t s = 0; s < samples; ++s) {
        touched.clear();
        std::int64_t x = origin;
        auto tally = [&](std::int64_t v) {
            if (visits[std::size_t(v)]++ == 0) touched.push_back(v);
        };
        tally(x);
        for (std::int64_t t = 0; t < n; ++t) {
            const auto nb = base.neighbors(x);
            if (nb.empty()) throw IsolatedVertex("fait0: isolated vertex");
            if (!bridge) {
                x = nb[rng.pick(std::uint32_t(nb.size()))];
            } else {
                double total = 0.0;
                for (const auto w : nb)
                    total += u[std::size_t((t + 1) * base_size + w)];
                double r = rng.unit() * total;
                std::int64_t chosen = nb.back();
                for (const auto w : nb) {
                    const double uw =
                        u[std::size_t((t + 1) * base_size + w)];
                    if (r < uw) {
                        chosen = w;
                        break;
                    }
                    r -= uw;
                }
                x = chosen;
            }
            tally(x);
        }
        double value = 0.0;
        if (bridge || x == origin) {
            value = 1.0;
            for (const std::int64_t v : touched) {
                const std::int64_t m = fait0_lamp_steps(
                    conv, visits[std::size_t(v)], v == origin, v == origin);
                value *= tables.value_by_size(fibers.size_of(v), m);
            }
        }
        for (const std::int64_t v : touched) visits[std::size_t(v)] = 0;
        acc.add(value);
    }
    est.estimate = u0 * acc.mean;
    est.stderr_est = u0 * acc.stderr_of_mean();
    return est;
}

// --- The section-2 dynamics: Eq.-(1) lazy walk on a wreath product ------
//
// Given the base trajectory with holding, each holding unit at x is one
// lazy fiber step of the lamp at x (ordinary) or at class phi(x)
// (generalized), so the return probability factorizes exactly over lamps
// with the holding counts as fiber clocks.  This is what makes
// probabilities of order exp(-n^alpha) computable: the fiber product is
// evaluated exactly given the base path.
class LazyWreathReturnEstimator {
  public:
    static LazyWreathReturnEstimator ordinary(FiberFamily fibers,
                                              std::int64_t m_max);
    static LazyWreathReturnEstimator generalized(const DyadicPartition& part,
                                                 std::int64_t fiber_size,
                                                 std::int64_t m_max);

    // Bridge mode: base chain conditioned on K_n = 0 via backward DP.
    ReturnEstimate estimate(std::int64_t n, std::int64_t samples, bool bridge,
                            std::uint64_t seed, int workers = 1) const;

    // Exhaustive hold/left/right path enumeration; exact rationals.
    // Feasible for n <= ~9; the small-n oracle for the estimator.
    Rational exact_by_path_enumeration(std::int64_t n) const;

  private:
    LazyWreathReturnEstimator() = default;

    std::int64_t lamp_of(std::int64_t x) const;
    std::int64_t fiber_size_at(std::int64_t x) const;   // kHuge allowed
    double hold_prob(std::int64_t x) const;

    double sample_value(std::int64_t n, Rng& rng,
                        const std::vector<double>* bridge_u,
                        std::int64_t width) const;

    std::optional<FiberFamily> fibers_;
    const DyadicPartition* partition_ = nullptr;
    std::int64_t const_fiber_ = 2;
    std::optional<FiberReturnTable> tables_;
};

}  // namespace graphwalk
