#include "graphwalk/product_kernel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>

#include "graphwalk/parallel.hpp"

namespace graphwalk {

FiberAssignment FiberAssignment::constant(std::int64_t l) {
    FiberAssignment f;
    f.constant_l_ = l;
    return f;
}

FiberAssignment FiberAssignment::by_vertex(std::vector<std::int64_t> sizes) {
    FiberAssignment f;
    f.per_vertex_ = std::move(sizes);
    return f;
}

FiberAssignment FiberAssignment::family(FiberFamily fam) {
    FiberAssignment f;
    f.family_ = std::move(fam);
    return f;
}

std::int64_t FiberAssignment::size_of(std::int64_t base_vertex) const {
    if (constant_l_) return *constant_l_;
    if (family_) return family_->size_or_huge(base_vertex);
    if (base_vertex < 0 || std::size_t(base_vertex) >= per_vertex_.size())
        throw OutOfRange("fiber assignment: base vertex out of range");
    return per_vertex_[std::size_t(base_vertex)];
}

std::string to_string(Fait0Convention c) {
    switch (c) {
        case Fait0Convention::kVisits: return "visits";
        case Fait0Convention::kArrivalsDepartures:
            return "arrivals+departures";
        case Fait0Convention::kTwiceVisits: return "2x-visits";
    }
    return "?";
}

std::int64_t fait0_lamp_steps(Fait0Convention conv, std::int64_t visits,
                              bool is_start, bool is_end) {
    switch (conv) {
        case Fait0Convention::kVisits: return visits;
        case Fait0Convention::kArrivalsDepartures:
            return 2 * visits - (is_start ? 1 : 0) - (is_end ? 1 : 0);
        case Fait0Convention::kTwiceVisits: return 2 * visits;
    }
    return visits;
}

namespace {

class ExactFiberTables {
  public:
    explicit ExactFiberTables(std::int64_t m_max) : m_max_(m_max) {}

    const Rational& value(std::int64_t l, std::int64_t m) {
        auto it = tables_.find(l);
        if (it == tables_.end())
            it = tables_.emplace(l, cycle_return_table_exact(l, m_max_))
                     .first;
        return it->second[std::size_t(m)];
    }

  private:
    std::int64_t m_max_;
    std::map<std::int64_t, std::vector<Rational>> tables_;
};

}  // namespace

Rational fait0_rhs_exact(const FiniteGraph& base,
                         const std::vector<std::int64_t>& fiber_sizes,
                         std::int64_t origin, std::int64_t n,
                         Fait0Convention conv) {
    ExactFiberTables tables(2 * n + 2);
    const std::int64_t nv = base.size();
    std::vector<std::int64_t> visits(std::size_t(nv), 0);
    Rational total = 0;

    std::function<void(std::int64_t, std::int64_t, Rational)> dfs =
        [&](std::int64_t pos, std::int64_t depth, Rational prob) {
            if (depth == n) {
                if (pos != origin) return;
                Rational term = prob;
                for (std::int64_t x = 0; x < nv; ++x) {
                    const std::int64_t v = visits[std::size_t(x)];
                    if (v == 0) continue;
                    const std::int64_t m = fait0_lamp_steps(
                        conv, v, x == origin, x == origin);
                    term *= tables.value(fiber_sizes[std::size_t(x)], m);
                }
                total += term;
                return;
            }
            const auto nb = base.neighbors(pos);
            if (nb.empty())
                throw IsolatedVertex("fait0_rhs_exact: isolated base vertex");
            const Rational step = prob / Rational(std::int64_t(nb.size()));
            for (const std::int64_t b : nb) {
                ++visits[std::size_t(b)];
                dfs(b, depth + 1, step);
                --visits[std::size_t(b)];
            }
        };

    ++visits[std::size_t(origin)];
    dfs(origin, 0, Rational(1));
    return total;
}

namespace {

FiniteGraph single_edge() { return FiniteGraph(2, {{0, 1}}); }
FiniteGraph path3() { return FiniteGraph(3, {{0, 1}, {1, 2}}); }
FiniteGraph cycle4() {
    return FiniteGraph(4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}});
}

}  // namespace

std::vector<ProductInstance> fait0_identity_battery() {
    std::vector<ProductInstance> out;
    auto add = [&out](std::string name, FiniteGraph g,
                      std::vector<std::int64_t> fibers, std::int64_t origin,
                      std::int64_t n) {
        out.push_back({std::move(name), std::move(g), std::move(fibers),
                       origin, n});
    };
    add("edge/l1/n4", single_edge(), {1, 1}, 0, 4);
    add("edge/l2/n2", single_edge(), {2, 2}, 0, 2);
    add("edge/l2/n4", single_edge(), {2, 2}, 0, 4);
    add("edge/l2/n6", single_edge(), {2, 2}, 0, 6);
    add("edge/l3/n4", single_edge(), {3, 3}, 0, 4);
    add("edge/l23/n4", single_edge(), {2, 3}, 0, 4);
    add("p3/l2/n4", path3(), {2, 2, 2}, 1, 4);
    add("p3/l3/n4", path3(), {3, 3, 3}, 0, 4);
    add("p3/l123/n5", path3(), {1, 2, 3}, 1, 5);
    add("c4/l2/n4", cycle4(), {2, 2, 2, 2}, 0, 4);
    add("c4/l3/n6", cycle4(), {3, 3, 3, 3}, 0, 6);
    add("c4/l1/n6", cycle4(), {1, 1, 1, 1}, 0, 6);
    add("c4/l132/n5", cycle4(), {1, 3, 2, 3}, 0, 5);
    return out;
}

std::vector<ProductInstance> fait0_calibration_battery() {
    // Fibers of size <= 3 mix in one lazy step, so every candidate
    // convention produces the same factor; sizes 4 and 5 discriminate.
    std::vector<ProductInstance> out = fait0_identity_battery();
    auto add = [&out](std::string name, FiniteGraph g,
                      std::vector<std::int64_t> fibers, std::int64_t origin,
                      std::int64_t n) {
        out.push_back({std::move(name), std::move(g), std::move(fibers),
                       origin, n});
    };
    add("edge/l4/n2", single_edge(), {4, 4}, 0, 2);
    add("edge/l4/n4", single_edge(), {4, 4}, 0, 4);
    add("edge/l5/n4", single_edge(), {5, 5}, 0, 4);
    add("p3/l4/n4", path3(), {4, 4, 4}, 1, 4);
    add("p3/l45/n5", path3(), {4, 5, 4}, 1, 5);
    add("c4/l4/n4", cycle4(), {4, 4, 4, 4}, 0, 4);
    add("c4/l5/n6", cycle4(), {5, 4, 5, 4}, 0, 6);
    add("edge/l42/n6", single_edge(), {4, 2}, 0, 6);
    add("p3/l524/n6", path3(), {5, 2, 4}, 0, 6);
    add("c4/l4224/n5", cycle4(), {4, 2, 2, 4}, 0, 5);
    return out;
}

CalibrationOutcome calibrate_fait0_convention(
    const std::vector<ProductInstance>& battery) {
    constexpr std::array<Fait0Convention, 3> kAll = {
        Fait0Convention::kVisits, Fait0Convention::kArrivalsDepartures,
        Fait0Convention::kTwiceVisits};

    CalibrationOutcome out;
    out.match.assign(kAll.size(), std::vector<bool>(battery.size(), false));
    std::array<bool, 3> all_match{true, true, true};

    for (std::size_t i = 0; i < battery.size(); ++i) {
        const auto& inst = battery[i];
        out.instance_names.push_back(inst.name);
        ProductKernel<FiniteGraph> kernel(
            inst.base, FiberAssignment::by_vertex(inst.fiber_sizes));
        const Rational exact = exact_product_return<Rational>(
            kernel, inst.origin, inst.n, 1u << 22);
        for (std::size_t c = 0; c < kAll.size(); ++c) {
            const Rational rhs = fait0_rhs_exact(
                inst.base, inst.fiber_sizes, inst.origin, inst.n, kAll[c]);
            const bool ok = rhs == exact;
            out.match[c][i] = ok;
            if (!ok) all_match[c] = false;
        }
    }

    int winners = 0;
    for (std::size_t c = 0; c < kAll.size(); ++c) {
        if (all_match[c]) {
            ++winners;
            out.convention = kAll[c];
        }
    }
    if (winners == 0)
        throw NoConventionMatches(
            "no per-lamp step-count convention reproduces the exact product "
            "kernel (p-tilde implementation bug)");
    out.unique = winners == 1;
    return out;
}

void require_calibrated(const CalibrationOutcome& outcome,
                        Fait0Convention requested) {
    if (!outcome.unique)
        throw InvalidConvention(
            "fait0 calibration is ambiguous; enrich the battery");
    if (outcome.convention != requested)
        throw InvalidConvention("requested convention " +
                                to_string(requested) +
                                " is not the calibrated one (" +
                                to_string(outcome.convention) + ")");
}

// --- Fait0 estimator on the Z base --------------------------------------

Fait0Estimator::Fait0Estimator(FiberFamily fibers, Fait0Convention conv,
                               std::int64_t m_max)
    : fibers_(fibers), conv_(conv), tables_(fibers, m_max, m_max) {}

double Fait0Estimator::sample_value(std::int64_t n, Rng& rng,
                                    const std::vector<double>* bridge_u,
                                    std::int64_t width) const {
    // Visit tallies over the band [-n, n].
    thread_local std::vector<std::int32_t> visits;
    thread_local std::vector<std::int32_t> touched;
    if (std::int64_t(visits.size()) < 2 * n + 1)
        visits.assign(std::size_t(2 * n + 1), 0);
    touched.clear();

    auto tally = [&](std::int64_t x) {
        const std::size_t ix = std::size_t(x + n);
        if (visits[ix]++ == 0) touched.push_back(std::int32_t(x));
    };

    std::int64_t x = 0;
    tally(x);
    if (bridge_u == nullptr) {
        for (std::int64_t t = 0; t < n; ++t) {
            x += rng.bernoulli(0.5) ? 1 : -1;
            tally(x);
        }
    } else {
        for (std::int64_t t = 0; t < n; ++t) {
            // h-transform towards X_n = 0.
            const double* u_next = bridge_u->data() +
                                   std::size_t((t + 1) * width);
            const double left = x - 1 >= -n
                                    ? u_next[std::size_t(x - 1 + n)]
                                    : 0.0;
            const double right = x + 1 <= n
                                     ? u_next[std::size_t(x + 1 + n)]
                                     : 0.0;
            x += rng.unit() * (left + right) < left ? -1 : 1;
            tally(x);
        }
    }

    double value;
    if (bridge_u == nullptr && x != 0) {
        value = 0.0;
    } else {
        value = 1.0;
        for (const std::int32_t z : touched) {
            const std::int64_t v = visits[std::size_t(z + n)];
            const std::int64_t m =
                fait0_lamp_steps(conv_, v, z == 0, z == 0);
            value *= tables_.value(z, m);
        }
    }
    for (const std::int32_t z : touched) visits[std::size_t(z + n)] = 0;
    return value;
}

ReturnEstimate Fait0Estimator::estimate(std::int64_t n, std::int64_t samples,
                                        bool bridge, std::uint64_t seed,
                                        int workers) const {
    ReturnEstimate est;
    est.n = n;
    est.samples = samples;
    est.seed = seed;
    est.method = bridge ? "fait0-bridge" : "fait0-mc";
    if (n > tables_.m_max())
        throw BudgetExceeded("fait0 estimator: n exceeds the table grid");

    std::vector<double> u;
    const std::int64_t width = 2 * n + 1;
    double u0 = 1.0;
    if (bridge) {
        // u[t*width + (x+n)] = P(X_n = 0 | X_t = x) for the +-1 base walk.
        u.assign(std::size_t((n + 1) * width), 0.0);
        u[std::size_t(n * width + n)] = 1.0;
        for (std::int64_t t = n - 1; t >= 0; --t) {
            double* row = u.data() + std::size_t(t * width);
            const double* next = u.data() + std::size_t((t + 1) * width);
            for (std::int64_t x = -n; x <= n; ++x) {
                const double left =
                    x - 1 >= -n ? next[std::size_t(x - 1 + n)] : 0.0;
                const double right =
                    x + 1 <= n ? next[std::size_t(x + 1 + n)] : 0.0;
                row[std::size_t(x + n)] = 0.5 * (left + right);
            }
        }
        u0 = u[std::size_t(n)];
        if (u0 == 0.0) return est;  // odd n: the SRW cannot return
    }

    const std::vector<double>* up = bridge ? &u : nullptr;
    Welford acc = parallel_samples(
        samples, workers, seed,
        [&](Rng& rng) { return sample_value(n, rng, up, width); });
    est.estimate = (bridge ? u0 : 1.0) * acc.mean;
    est.stderr_est = (bridge ? u0 : 1.0) * acc.stderr_of_mean();
    return est;
}

double lamplighter_line_return_exact(std::int64_t n) {
    return to_double(lamplighter_line_return_exact_rational(n));
}

Rational lamplighter_line_return_exact_rational(std::int64_t n) {
    if (n == 0) return 1;
    // State: (range minimum, range maximum, position), +-1 base steps.
    using State = std::array<std::int32_t, 3>;
    std::map<State, Rational> cur;
    cur[{0, 0, 0}] = 1;
    const Rational half = rational(1, 2);
    for (std::int64_t t = 0; t < n; ++t) {
        std::map<State, Rational> next;
        for (const auto& [st, p] : cur) {
            for (const std::int32_t d : {-1, +1}) {
                State ns = st;
                ns[2] = std::int32_t(st[2] + d);
                ns[0] = std::min(ns[0], ns[2]);
                ns[1] = std::max(ns[1], ns[2]);
                next[ns] += p * half;
            }
        }
        cur = std::move(next);
    }
    Rational total = 0;
    for (const auto& [st, p] : cur) {
        if (st[2] != 0) continue;
        // Every visited lamp gets at least two lazy steps, so each
        // contributes exactly 1/2.
        const std::int64_t visited = st[1] - st[0] + 1;
        Rational factor = 1;
        for (std::int64_t i = 0; i < visited; ++i) factor *= half;
        total += p * factor;
    }
    return total;
}

// --- Lazy walk on wreath products: holding decomposition ----------------

LazyWreathReturnEstimator LazyWreathReturnEstimator::ordinary(
    FiberFamily fibers, std::int64_t m_max) {
    LazyWreathReturnEstimator e;
    e.fibers_ = fibers;
    e.tables_.emplace(fibers, m_max, m_max);
    return e;
}

LazyWreathReturnEstimator LazyWreathReturnEstimator::generalized(
    const DyadicPartition& part, std::int64_t fiber_size,
    std::int64_t m_max) {
    LazyWreathReturnEstimator e;
    e.partition_ = &part;
    e.const_fiber_ = fiber_size;
    e.tables_.emplace(FiberFamily::constant(fiber_size), 1, m_max);
    return e;
}

std::int64_t LazyWreathReturnEstimator::lamp_of(std::int64_t x) const {
    return partition_ ? partition_->class_of(x) : x;
}

std::int64_t LazyWreathReturnEstimator::fiber_size_at(std::int64_t x) const {
    return partition_ ? const_fiber_ : fibers_->size_or_huge(x);
}

double LazyWreathReturnEstimator::hold_prob(std::int64_t x) const {
    const std::int64_t d = cycle_degree(fiber_size_at(x));
    return double(1 + d) / double(3 + d);
}

double LazyWreathReturnEstimator::sample_value(
    std::int64_t n, Rng& rng, const std::vector<double>* bridge_u,
    std::int64_t width) const {
    // Lamp clocks: ordinary mode keys by site, generalized by class; both
    // fit in a band-indexed array (class ids are dense and nonnegative).
    thread_local std::vector<std::int32_t> holds;
    thread_local std::vector<std::int64_t> touched;
    const std::int64_t lamp_span = 2 * n + 1 + 1;
    const std::int64_t lamp_cap =
        partition_ ? std::int64_t(partition_->class_count()) + n + 1
                   : lamp_span;
    if (std::int64_t(holds.size()) < lamp_cap)
        holds.assign(std::size_t(lamp_cap), 0);
    touched.clear();

    auto bump = [&](std::int64_t lamp) {
        const std::size_t il = std::size_t(partition_ ? lamp : lamp + n);
        if (holds[il]++ == 0) touched.push_back(lamp);
    };

    std::int64_t x = 0;
    bool returned;
    if (bridge_u == nullptr) {
        for (std::int64_t t = 0; t < n; ++t) {
            const double h = hold_prob(x);
            const double r = rng.unit();
            if (r < h)
                bump(lamp_of(x));
            else
                x += (r < h + 0.5 * (1.0 - h)) ? -1 : 1;
        }
        returned = x == 0;
    } else {
        for (std::int64_t t = 0; t < n; ++t) {
            const double* u_next =
                bridge_u->data() + std::size_t((t + 1) * width);
            const double h = hold_prob(x);
            const double mv = 0.5 * (1.0 - h);
            const double w_hold = h * u_next[std::size_t(x + n)];
            const double w_left =
                x - 1 >= -n ? mv * u_next[std::size_t(x - 1 + n)] : 0.0;
            const double w_right =
                x + 1 <= n ? mv * u_next[std::size_t(x + 1 + n)] : 0.0;
            const double r = rng.unit() * (w_hold + w_left + w_right);
            if (r < w_hold)
                bump(lamp_of(x));
            else if (r < w_hold + w_left)
                --x;
            else
                ++x;
        }
        returned = true;
    }

    double value = 0.0;
    if (returned) {
        value = 1.0;
        for (const std::int64_t lamp : touched) {
            const std::size_t il =
                std::size_t(partition_ ? lamp : lamp + n);
            const std::int64_t l =
                partition_ ? const_fiber_ : fibers_->size_or_huge(lamp);
            value *= tables_->value_by_size(l, holds[il]);
        }
    }
    for (const std::int64_t lamp : touched)
        holds[std::size_t(partition_ ? lamp : lamp + n)] = 0;
    return value;
}

ReturnEstimate LazyWreathReturnEstimator::estimate(std::int64_t n,
                                                   std::int64_t samples,
                                                   bool bridge,
                                                   std::uint64_t seed,
                                                   int workers) const {
    ReturnEstimate est;
    est.n = n;
    est.samples = samples;
    est.seed = seed;
    est.method = bridge ? "fait0-bridge" : "fait0-mc";
    if (n > tables_->m_max())
        throw BudgetExceeded("lazy wreath estimator: n exceeds table grid");

    const std::int64_t width = 2 * n + 1;
    std::vector<double> u;
    double u0 = 1.0;
    if (bridge) {
        u.assign(std::size_t((n + 1) * width), 0.0);
        u[std::size_t(n * width + n)] = 1.0;
        for (std::int64_t t = n - 1; t >= 0; --t) {
            double* row = u.data() + std::size_t(t * width);
            const double* next = u.data() + std::size_t((t + 1) * width);
            for (std::int64_t xx = -n; xx <= n; ++xx) {
                const double h = hold_prob(xx);
                const double mv = 0.5 * (1.0 - h);
                double acc = h * next[std::size_t(xx + n)];
                if (xx - 1 >= -n) acc += mv * next[std::size_t(xx - 1 + n)];
                if (xx + 1 <= n) acc += mv * next[std::size_t(xx + 1 + n)];
                row[std::size_t(xx + n)] = acc;
            }
        }
        u0 = u[std::size_t(n)];
        if (u0 == 0.0) return est;
    }

    const std::vector<double>* up = bridge ? &u : nullptr;
    Welford acc = parallel_samples(
        samples, workers, seed,
        [&](Rng& rng) { return sample_value(n, rng, up, width); });
    est.estimate = u0 * acc.mean;
    est.stderr_est = u0 * acc.stderr_of_mean();
    return est;
}

Rational LazyWreathReturnEstimator::exact_by_path_enumeration(
    std::int64_t n) const {
    ExactFiberTables tables(n);
    std::map<std::int64_t, std::int64_t> holds;
    Rational total = 0;

    std::function<void(std::int64_t, std::int64_t, Rational)> dfs =
        [&](std::int64_t x, std::int64_t depth, Rational prob) {
            if (depth == n) {
                if (x != 0) return;
                Rational term = prob;
                for (const auto& [lamp, h] : holds) {
                    std::int64_t l = partition_ ? const_fiber_
                                                : fibers_->size_or_huge(lamp);
                    if (l == FiberFamily::kHuge)
                        throw Overflow(
                            "exact path enumeration reached a fiber beyond "
                            "the size budget");
                    term *= tables.value(l, h);
                }
                total += term;
                return;
            }
            const std::int64_t d = cycle_degree(fiber_size_at(x));
            const Rational hold = prob * Rational(1 + d) / Rational(3 + d);
            const Rational move = prob / Rational(3 + d);
            const std::int64_t lamp = lamp_of(x);
            auto it = holds.emplace(lamp, 0).first;
            ++it->second;
            dfs(x, depth + 1, hold);
            if (--it->second == 0) holds.erase(it);
            dfs(x - 1, depth + 1, move);
            dfs(x + 1, depth + 1, move);
        };

    dfs(0, 0, Rational(1));
    return total;
}

}  // namespace graphwalk
