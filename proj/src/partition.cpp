#include "graphwalk/partition.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <memory>
#include <numeric>
#include <ostream>
#include <sstream>

namespace graphwalk {

GrowthFunction::GrowthFunction(std::string name,
                               std::function<std::int64_t(std::int64_t)> eval)
    : name_(std::move(name)), eval_(std::move(eval)) {}

std::int64_t GrowthFunction::operator()(std::int64_t x) const {
    if (x < 1) throw OutOfRange("growth function evaluated at x < 1");
    const std::size_t ix = std::size_t(x);
    if (cache_.size() <= ix) {
        std::size_t old = cache_.size();
        cache_.resize(ix + 1);
        for (std::size_t i = old; i <= ix; ++i)
            cache_[i] = i == 0 ? 0 : eval_(std::int64_t(i));
    }
    return cache_[ix];
}

GrowthFunction GrowthFunction::power(double beta) {
    std::ostringstream name;
    name << "x^" << beta;
    // Running maximum keeps g monotone after rounding.
    auto running = std::make_shared<std::int64_t>(0);
    auto last_x = std::make_shared<std::int64_t>(0);
    return GrowthFunction(
        name.str(), [beta, running, last_x](std::int64_t x) {
            if (x <= *last_x) {
                // Out-of-order evaluation: recompute from scratch.
                std::int64_t m = 1;
                for (std::int64_t t = 1; t <= x; ++t)
                    m = std::max<std::int64_t>(
                        m, std::int64_t(std::floor(
                               std::pow(double(t), beta) + 0.5)));
                return std::max<std::int64_t>(1, m);
            }
            const std::int64_t raw = std::max<std::int64_t>(
                1,
                std::int64_t(std::floor(std::pow(double(x), beta) + 0.5)));
            *running = std::max(*running, raw);
            *last_x = x;
            return *running;
        });
}

GrowthFunction GrowthFunction::identity() {
    return GrowthFunction("x", [](std::int64_t x) { return x; });
}

GrowthFunction GrowthFunction::constant_one() {
    return GrowthFunction("1", [](std::int64_t) { return std::int64_t(1); });
}

GrowthFunction GrowthFunction::from_table(const std::string& name,
                                          std::vector<std::int64_t> values) {
    auto table = std::make_shared<std::vector<std::int64_t>>(
        std::move(values));
    return GrowthFunction(name, [table](std::int64_t x) {
        if (x < 1 || std::size_t(x) > table->size())
            throw OutOfRange("growth table evaluated outside its range");
        return (*table)[std::size_t(x - 1)];
    });
}

void GrowthFunction::validate(std::int64_t limit) const {
    const auto& g = *this;
    if (g(1) != 1)
        throw InvalidGrowth("growth function must satisfy g(1) = 1");
    for (std::int64_t x = 1; x < limit; ++x)
        if (g(x + 1) < g(x))
            throw InvalidGrowth("growth function not monotone at x = " +
                                std::to_string(x));
    for (std::int64_t x = 1; 2 * x <= limit; ++x)
        if (g(2 * x) > 2 * g(x))
            throw InvalidGrowth("doubling condition fails at x = " +
                                std::to_string(x));
}

DyadicPartition DyadicPartition::build(const GrowthFunction& g, int levels) {
    const std::int64_t range = std::int64_t(1) << levels;
    g.validate(range);

    DyadicPartition part;
    part.levels_ = levels;
    part.half_range_ = range;
    part.class_of_pos_.assign(std::size_t(range) + 1, -1);
    part.class_of_pos_[1] = 0;

    std::vector<std::int64_t> sizes{1};  // sizes on the current [1, 2^s]

    for (int s = 0; s < levels; ++s) {
        const std::int64_t len = std::int64_t(1) << s;
        const std::int64_t delta = g(2 * len) - g(len);
        const std::int32_t count = std::int32_t(sizes.size());

        // Rank classes by decreasing cardinality; ties broken by ascending
        // creation index so the build is a pure function of (g, S).
        std::vector<std::int32_t> order(static_cast<std::size_t>(count));
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&sizes](std::int32_t a, std::int32_t b) {
                             return sizes[std::size_t(a)] >
                                    sizes[std::size_t(b)];
                         });
        std::vector<std::int64_t> rank_of(static_cast<std::size_t>(count));
        for (std::int64_t r = 0; r < count; ++r)
            rank_of[std::size_t(order[std::size_t(r)])] = r + 1;

        sizes.resize(std::size_t(count) + std::size_t(delta), 0);
        for (std::int64_t j = len + 1; j <= 2 * len; ++j) {
            const std::int32_t cls = part.class_of_pos_[std::size_t(j - len)];
            const std::int64_t k = rank_of[std::size_t(cls)];
            // Rank <= delta: the class spawns a new one, indexed densely in
            // rank order.  Otherwise the class doubles.
            const std::int32_t target =
                k <= delta ? std::int32_t(count + k - 1) : cls;
            part.class_of_pos_[std::size_t(j)] = target;
            ++sizes[std::size_t(target)];
        }
    }

    part.class_count_ = std::int32_t(sizes.size());
    return part;
}

std::int32_t DyadicPartition::class_of(std::int64_t j) const {
    const std::int64_t mapped = j >= 1 ? j : 1 - j;  // reflection rule
    if (mapped < 1 || mapped > half_range_)
        throw OutOfRange("class_of(" + std::to_string(j) +
                         "): outside the built range");
    return class_of_pos_[std::size_t(mapped)];
}

WindowStats DyadicPartition::window_stats(std::int64_t k,
                                          std::int64_t m) const {
    if (m < 1) throw OutOfRange("window_stats: m must be >= 1");
    WindowStats st;
    st.k = k;
    st.m = m;
    for (std::int64_t j = k; j < k + m; ++j) ++st.sizes[class_of(j)];
    st.classes_touched = std::int64_t(st.sizes.size());
    return st;
}

namespace {

struct SlidingCounts {
    std::vector<std::int64_t> count;
    std::int64_t nonzero = 0;

    explicit SlidingCounts(std::int32_t classes)
        : count(std::size_t(classes), 0) {}

    void add(std::int32_t c) {
        if (count[std::size_t(c)]++ == 0) ++nonzero;
    }
    void remove(std::int32_t c) {
        if (--count[std::size_t(c)] == 0) --nonzero;
    }
};

}  // namespace

RatioScanReport DyadicPartition::check_ratio(std::int64_t k_abs_max,
                                             std::int64_t m_max) const {
    RatioScanReport rep;

    auto consider = [&rep](std::int64_t si, std::int64_t sj, std::int64_t k,
                           std::int64_t m, std::int32_t i, std::int32_t j,
                           bool dyadic) {
        if (dyadic && si * rep.dyadic_den > rep.dyadic_num * sj) {
            rep.dyadic_num = si;
            rep.dyadic_den = sj;
        }
        if (si * rep.window_den > rep.window_num * sj) {
            rep.window_num = si;
            rep.window_den = sj;
            rep.worst_k = k;
            rep.worst_m = m;
            rep.worst_i = i;
            rep.worst_j = j;
        }
    };

    auto scan_window = [&](std::int64_t k, std::int64_t m,
                           const SlidingCounts& counts, bool dyadic) {
        std::int64_t mx = 0, mn = 0;
        std::int32_t arg_mx = 0, arg_mn = 0;
        for (std::int32_t c = 0; c < std::int32_t(counts.count.size()); ++c) {
            const std::int64_t v = counts.count[std::size_t(c)];
            if (v == 0) continue;
            if (v > mx) { mx = v; arg_mx = c; }
            if (mn == 0 || v < mn) { mn = v; arg_mn = c; }
        }
        if (mn > 0) consider(mx, mn, k, m, arg_mx, arg_mn, dyadic);
        ++rep.windows_scanned;
    };

    // Aligned dyadic blocks on both sides of the reflection.
    for (int s = 0; s <= levels_; ++s) {
        const std::int64_t len = std::int64_t(1) << s;
        for (std::int64_t A = 0; (A + 1) * len <= half_range_; ++A) {
            for (const std::int64_t start :
                 {A * len + 1, -(A + 1) * len + 1}) {
                SlidingCounts counts(class_count_);
                for (std::int64_t j = start; j < start + len; ++j)
                    counts.add(class_of(j));
                scan_window(start, len, counts, true);
            }
        }
    }

    // All windows of up to m_max points starting within |k| <= k_abs_max.
    for (std::int64_t m = 1; m <= m_max; ++m) {
        const std::int64_t k_lo = std::max(-k_abs_max, range_min());
        const std::int64_t k_hi = std::min(k_abs_max, range_max() - m + 1);
        if (k_lo > k_hi) continue;
        SlidingCounts counts(class_count_);
        for (std::int64_t j = k_lo; j < k_lo + m; ++j)
            counts.add(class_of(j));
        scan_window(k_lo, m, counts, false);
        for (std::int64_t k = k_lo + 1; k <= k_hi; ++k) {
            counts.remove(class_of(k - 1));
            counts.add(class_of(k + m - 1));
            scan_window(k, m, counts, false);
        }
    }
    return rep;
}

GrowthBoundsReport DyadicPartition::check_growth_bounds(
    const GrowthFunction& g, std::int64_t k_abs_max,
    std::int64_t m_max) const {
    GrowthBoundsReport rep;
    for (std::int64_t m = 1; m <= m_max; ++m) {
        const std::int64_t lower = m >= 4 ? g(m / 4) : 1;
        const std::int64_t upper = 2 * g(2 * m);
        const std::int64_t k_lo = std::max(-k_abs_max, range_min());
        const std::int64_t k_hi = std::min(k_abs_max, range_max() - m + 1);
        if (k_lo > k_hi) continue;
        SlidingCounts counts(class_count_);
        for (std::int64_t j = k_lo; j < k_lo + m; ++j)
            counts.add(class_of(j));
        for (std::int64_t k = k_lo;; ++k) {
            ++rep.windows_scanned;
            const std::int64_t n = counts.nonzero;
            if (n < lower || n > upper) {
                if (rep.ok) {
                    rep.ok = false;
                    rep.fail_k = k;
                    rep.fail_m = m;
                    rep.fail_n = n;
                    rep.fail_lower = lower;
                    rep.fail_upper = upper;
                }
            }
            if (k == k_hi) break;
            counts.remove(class_of(k));
            counts.add(class_of(k + m));
        }
    }
    return rep;
}

std::vector<std::int64_t> DyadicPartition::block_size_multiset(
    std::int64_t A, int level) const {
    const std::int64_t len = std::int64_t(1) << level;
    const auto st = window_stats(A * len + 1, len);
    std::vector<std::int64_t> sizes;
    sizes.reserve(st.sizes.size());
    for (const auto& [cls, sz] : st.sizes) sizes.push_back(sz);
    std::sort(sizes.begin(), sizes.end());
    return sizes;
}

void DyadicPartition::dump(std::ostream& os) const {
    for (std::int64_t j = range_min(); j <= range_max(); ++j)
        os << j << '\t' << class_of(j) << '\n';
}

std::vector<std::pair<std::int64_t, std::int32_t>>
DyadicPartition::load_table(std::istream& is) {
    std::vector<std::pair<std::int64_t, std::int32_t>> out;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::int64_t j;
        std::int32_t cls;
        if (!(ls >> j >> cls))
            throw Error("partition table: malformed line '" + line + "'");
        out.emplace_back(j, cls);
    }
    return out;
}

}  // namespace graphwalk
