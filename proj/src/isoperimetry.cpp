#include "graphwalk/isoperimetry.hpp"

#include <cmath>

namespace graphwalk {

WitnessBound wreath_interval_witness(const FiberFamily& fibers,
                                     std::int64_t n) {
    WitnessBound wb;
    wb.description = "U_n on Z wr B'_z, n = " + std::to_string(n);
    BigInt configs = 1;
    double log2_configs = 0.0;
    for (std::int64_t z = -n; z <= n; ++z) {
        log2_configs += fibers.log2_size(z);
        if (wb.size_exact) {
            const std::int64_t l = fibers.size_or_huge(z);
            if (l == FiberFamily::kHuge)
                wb.size_exact = false;
            else
                configs *= l;
        }
    }
    wb.log2_size = std::log2(double(2 * n + 1)) + log2_configs;
    if (wb.size_exact) {
        wb.set_size = BigInt(2 * n + 1) * configs;
        wb.boundary_size = 2 * configs;
        wb.ratio = Rational(wb.boundary_size) / Rational(wb.set_size);
        wb.max_k = (2 * n + 1) / 2;
    } else {
        // Ratio 2/(2n+1) holds regardless of the (huge) config count.
        wb.ratio = rational(2, 2 * n + 1);
        wb.max_k = (2 * n + 1) / 2;
    }
    return wb;
}

WitnessBound generalized_wreath_witness(const DyadicPartition& partition,
                                        std::int64_t fiber_size,
                                        std::int64_t n) {
    WitnessBound wb;
    wb.description = "U_n on Z wr_A B, n = " + std::to_string(n);
    const auto stats = partition.window_stats(-n, 2 * n + 1);
    const BigInt configs =
        pow(BigInt(fiber_size), unsigned(stats.classes_touched));
    wb.set_size = BigInt(2 * n + 1) * configs;
    wb.boundary_size = 2 * configs;
    wb.log2_size = std::log2(double(2 * n + 1)) +
                   double(stats.classes_touched) *
                       std::log2(double(fiber_size));
    wb.ratio = Rational(wb.boundary_size) / Rational(wb.set_size);
    wb.max_k = (2 * n + 1) / 2;
    return wb;
}

namespace {

// F^{-1}(y) = inf{x : F(x) >= y}, computed on logs by bisection.
double invert_log_f(const std::function<double(double)>& log_f,
                    double target_log, double x_max) {
    if (log_f(0.0) >= target_log) return 0.0;
    double hi = 1.0;
    while (log_f(hi) < target_log) {
        hi *= 2.0;
        if (hi > x_max)
            throw StiffnessFailure(
                "F^{-1} bracket exceeded x_max; F grows too slowly for the "
                "requested bound");
    }
    double lo = hi > 1.0 ? hi / 2.0 : 0.0;
    for (int it = 0; it < 200 && (hi - lo) > 1e-14 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (log_f(mid) >= target_log)
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

constexpr double kLog4 = 1.3862943611198906;

}  // namespace

std::vector<double> coulhon_bound(const OdeBoundSpec& spec,
                                  const std::vector<double>& t_grid) {
    if (spec.m0 <= 0.0) throw Error("coulhon_bound: m0 must be positive");

    // w = ln v; w' = -1 / (8 q(w)^2) with q(w) = F^{-1}(4 e^{-w}).
    auto slope = [&spec](double w) {
        const double q =
            invert_log_f(spec.log_f, kLog4 - w, spec.x_max);
        if (q <= 0.0)
            throw StiffnessFailure("coulhon_bound: F^{-1} hit zero");
        return -1.0 / (8.0 * q * q);
    };
    auto rk4 = [&slope](double w, double h) {
        const double k1 = slope(w);
        const double k2 = slope(w + 0.5 * h * k1);
        const double k3 = slope(w + 0.5 * h * k2);
        const double k4 = slope(w + h * k3);
        return w + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    };

    std::vector<double> out;
    out.reserve(t_grid.size());
    double t = 0.0;
    double w = -std::log(spec.m0);
    double h = 1e-3;
    double last_v = std::exp(w);

    for (const double target : t_grid) {
        if (target < t)
            throw Error("coulhon_bound: t_grid must be ascending");
        while (t < target) {
            double step = std::min(h, target - t);
            for (;;) {
                const double full = rk4(w, step);
                const double half1 = rk4(w, 0.5 * step);
                const double half2 = rk4(half1, 0.5 * step);
                const double err = std::abs(full - half2);
                const double tol =
                    spec.rel_tol * std::max(1.0, std::abs(w));
                if (err <= tol) {
                    w = half2;
                    t += step;
                    if (err < 0.25 * tol) h = step * 2.0;
                    else h = step;
                    break;
                }
                step *= 0.5;
                if (step < 1e-13 * std::max(1.0, target))
                    throw StiffnessFailure(
                        "coulhon_bound: step control underflow");
            }
        }
        // Guaranteed monotone non-increasing output.
        const double v = std::min(std::exp(w), last_v);
        last_v = v;
        out.push_back(v);
    }
    return out;
}

double coulhon_bound_at(const OdeBoundSpec& spec, double t) {
    return coulhon_bound(spec, {t}).front();
}

}  // namespace graphwalk
