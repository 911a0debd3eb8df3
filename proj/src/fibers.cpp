#include "graphwalk/fibers.hpp"

#include <cmath>
#include <set>

namespace graphwalk {

GrowthProfile GrowthProfile::from_alpha(double alpha) {
    GrowthProfile p;
    p.alpha = alpha;
    p.beta = 2.0 * alpha / (1.0 - alpha);
    return p;
}

double GrowthProfile::log_f(double x) const {
    return x <= 0.0 ? 0.0 : std::pow(x, beta);
}

FiberFamily FiberFamily::from_alpha(double alpha) {
    FiberFamily f;
    f.profile_ = GrowthProfile::from_alpha(alpha);
    return f;
}

FiberFamily FiberFamily::constant(std::int64_t l) {
    FiberFamily f;
    f.constant_l_ = l;
    return f;
}

namespace {
// exp(log-ratio) can exceed any integer type for large |z|; cap at 2^62.
constexpr double kMaxLogSize = 62.0 * 0.6931471805599453;
}  // namespace

std::int64_t FiberFamily::size_or_huge(std::int64_t z) const {
    if (constant_l_) return *constant_l_;
    const double az = double(z < 0 ? -z : z);
    const double dlog = profile_.log_f(az + 1.0) - profile_.log_f(az);
    if (dlog > kMaxLogSize) return kHuge;
    const std::int64_t rounded =
        std::int64_t(std::floor(std::exp(dlog) + 0.5));
    return rounded < 2 ? 2 : rounded;
}

std::int64_t FiberFamily::size(std::int64_t z) const {
    const std::int64_t l = size_or_huge(z);
    if (l == kHuge)
        throw Overflow("fiber_size: l(" + std::to_string(z) +
                       ") exceeds the representable budget");
    return l;
}

double FiberFamily::log2_size(std::int64_t z) const {
    if (constant_l_) return std::log2(double(*constant_l_));
    const double az = double(z < 0 ? -z : z);
    const double dlog = profile_.log_f(az + 1.0) - profile_.log_f(az);
    const double bits = dlog / 0.6931471805599453;
    return bits < 1.0 ? 1.0 : bits;  // clamp-at-2 floor
}

std::vector<double> cycle_return_table(std::int64_t l, std::int64_t m_max) {
    std::vector<double> out(std::size_t(m_max) + 1);
    out[0] = 1.0;
    if (l == 1) {
        for (std::int64_t m = 1; m <= m_max; ++m) out[std::size_t(m)] = 1.0;
        return out;
    }
    if (l == 2) {
        for (std::int64_t m = 1; m <= m_max; ++m) out[std::size_t(m)] = 0.5;
        return out;
    }
    std::vector<long double> p(std::size_t(l), 0.0L);
    std::vector<long double> q(p.size());
    p[0] = 1.0L;
    for (std::int64_t m = 1; m <= m_max; ++m) {
        for (std::int64_t j = 0; j < l; ++j) {
            const std::size_t left = std::size_t(j == 0 ? l - 1 : j - 1);
            const std::size_t right = std::size_t(j + 1 == l ? 0 : j + 1);
            q[std::size_t(j)] =
                (p[std::size_t(j)] + p[left] + p[right]) / 3.0L;
        }
        p.swap(q);
        out[std::size_t(m)] = double(p[0]);
    }
    return out;
}

std::vector<Rational> cycle_return_table_exact(std::int64_t l,
                                               std::int64_t m_max) {
    std::vector<Rational> out(std::size_t(m_max) + 1);
    out[0] = 1;
    if (l == 1) {
        for (std::int64_t m = 1; m <= m_max; ++m) out[std::size_t(m)] = 1;
        return out;
    }
    if (l == 2) {
        const Rational half = rational(1, 2);
        for (std::int64_t m = 1; m <= m_max; ++m) out[std::size_t(m)] = half;
        return out;
    }
    std::vector<Rational> p(std::size_t(l), Rational(0));
    std::vector<Rational> q(p.size());
    p[0] = 1;
    const Rational third = rational(1, 3);
    for (std::int64_t m = 1; m <= m_max; ++m) {
        for (std::int64_t j = 0; j < l; ++j) {
            const std::size_t left = std::size_t(j == 0 ? l - 1 : j - 1);
            const std::size_t right = std::size_t(j + 1 == l ? 0 : j + 1);
            q[std::size_t(j)] =
                (p[std::size_t(j)] + p[left] + p[right]) * third;
        }
        p.swap(q);
        out[std::size_t(m)] = p[0];
    }
    return out;
}

std::vector<double> line_return_table(std::int64_t m_max) {
    // Band DP on [-m_max, m_max]; only the origin entry is kept per step.
    std::vector<double> out(std::size_t(m_max) + 1);
    out[0] = 1.0;
    const std::size_t width = std::size_t(2 * m_max + 1);
    std::vector<long double> p(width, 0.0L), q(width);
    const std::size_t origin = std::size_t(m_max);
    p[origin] = 1.0L;
    for (std::int64_t m = 1; m <= m_max; ++m) {
        for (std::size_t j = 0; j < width; ++j) {
            long double acc = p[j];
            if (j > 0) acc += p[j - 1];
            if (j + 1 < width) acc += p[j + 1];
            q[j] = acc / 3.0L;
        }
        p.swap(q);
        out[std::size_t(m)] = double(p[origin]);
    }
    return out;
}

double fiber_return_prob(std::int64_t l, std::int64_t m) {
    return cycle_return_table(l, m)[std::size_t(m)];
}

Rational fiber_return_prob_exact(std::int64_t l, std::int64_t m) {
    return cycle_return_table_exact(l, m)[std::size_t(m)];
}

double fiber_return_prob_spectral(std::int64_t l, std::int64_t m) {
    if (l == 1) return 1.0;
    if (l == 2) return m == 0 ? 1.0 : 0.5;
    const long double two_pi = 6.283185307179586476925L;
    long double acc = 0.0L;
    for (std::int64_t k = 0; k < l; ++k) {
        const long double lam =
            (1.0L + 2.0L * std::cos(two_pi * (long double)(k) /
                                    (long double)(l))) /
            3.0L;
        acc += std::pow(lam, (long double)(m));
    }
    return double(acc / (long double)(l));
}

FiberReturnTable::FiberReturnTable(const FiberFamily& family,
                                   std::int64_t z_range, std::int64_t m_max)
    : family_(family), m_max_(m_max), line_(line_return_table(m_max)) {
    std::set<std::int64_t> sizes;
    for (std::int64_t z = 0; z <= z_range; ++z) {
        const std::int64_t l = family_.size_or_huge(z);
        if (l != FiberFamily::kHuge && l >= 3 && l <= m_max) sizes.insert(l);
        if (l == FiberFamily::kHuge) break;  // sizes only grow with |z|
    }
    for (const std::int64_t l : sizes)
        cycles_.emplace(l, cycle_return_table(l, m_max));
}

double FiberReturnTable::value_by_size(std::int64_t l, std::int64_t m) const {
    if (m == 0 || l == 1) return 1.0;
    if (l == 2) return 0.5;
    if (l == FiberFamily::kHuge || l > m) return line_[std::size_t(m)];
    const auto it = cycles_.find(l);
    if (it == cycles_.end())
        throw Error("FiberReturnTable: size " + std::to_string(l) +
                    " not in the eager cache");
    return it->second[std::size_t(m)];
}

double FiberReturnTable::value(std::int64_t z, std::int64_t m) const {
    return value_by_size(family_.size_or_huge(z), m);
}

std::vector<FiberFloorReport> fiber_return_lower_check(
    const std::vector<std::int64_t>& sizes, std::int64_t n_max) {
    std::vector<FiberFloorReport> reports;
    reports.reserve(sizes.size());
    for (const std::int64_t l : sizes) {
        FiberFloorReport rep;
        rep.l = l;
        const auto table = cycle_return_table(l, n_max);
        const double floor = 1.0 / double(l);
        rep.max_floor_gap = -1.0;
        rep.monotone = true;
        double fit_acc = 0.0;
        std::int64_t fit_count = 0;
        for (std::int64_t m = 0; m <= n_max; ++m) {
            const double p = table[std::size_t(m)];
            rep.max_floor_gap = std::max(rep.max_floor_gap, floor - p);
            if (rep.floor_attained_at < 0 && std::abs(p - floor) <= 1e-9)
                rep.floor_attained_at = m;
            if (m > 0 && p > table[std::size_t(m - 1)] + 1e-15)
                rep.monotone = false;
            if (m >= 1 && m < l * l) {
                fit_acc += -std::log(p) - 0.5 * std::log(double(m));
                ++fit_count;
            }
        }
        rep.floor_holds = rep.max_floor_gap <= 1e-15;
        rep.envelope_gap_at_n_max =
            std::abs(table[std::size_t(n_max)] - floor);
        rep.diffusive_c = fit_count > 0 ? fit_acc / double(fit_count) : 0.0;
        reports.push_back(rep);
    }
    return reports;
}

}  // namespace graphwalk
