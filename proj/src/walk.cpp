#include "graphwalk/walk.hpp"

#include <cmath>

#include "graphwalk/errors.hpp"

namespace graphwalk {

namespace {

template <class S>
S confinement_dp(std::int64_t n, std::int64_t r, S third) {
    const std::size_t width = std::size_t(2 * r + 1);
    std::vector<S> p(width, S(0)), q(width);
    p[std::size_t(r)] = S(1);
    for (std::int64_t t = 0; t < n; ++t) {
        for (std::size_t j = 0; j < width; ++j) {
            S acc = p[j];
            if (j > 0) acc += p[j - 1];
            if (j + 1 < width) acc += p[j + 1];
            q[j] = acc * third;
        }
        p.swap(q);
    }
    S total = S(0);
    for (const S& v : p) total += v;
    return total;
}

}  // namespace

double confinement_prob(std::int64_t n, std::int64_t r) {
    if (r < 1) throw OutOfRange("confinement_prob: r must be >= 1");
    if (r >= n) return 1.0;  // cannot exit
    return confinement_dp<double>(n, r, 1.0 / 3.0);
}

Rational confinement_prob_exact(std::int64_t n, std::int64_t r) {
    if (r < 1) throw OutOfRange("confinement_prob: r must be >= 1");
    if (r >= n) return 1;
    return confinement_dp<Rational>(n, r, rational(1, 3));
}

StretchedFit fit_stretched_exponent(const std::vector<SeriesPoint>& series) {
    if (series.size() < 4)
        throw DegenerateSeries("fit needs at least 4 points");

    std::vector<double> x, y, w;
    for (const auto& pt : series) {
        if (!(pt.estimate > 0.0) || !(pt.estimate < 1.0))
            throw DegenerateSeries("estimate outside (0,1) at n = " +
                                   std::to_string(pt.n));
        const double neg_log = -std::log(pt.estimate);
        x.push_back(std::log(pt.n));
        y.push_back(std::log(neg_log));
        // Propagated sigma of log(-log p); zero stderr points get weight 1.
        const double sy = pt.stderr_est / (pt.estimate * neg_log);
        w.push_back(sy > 0.0 ? 1.0 / (sy * sy) : 1.0);
    }

    const std::size_t k = x.size();
    double sw = 0, sx = 0, sy_ = 0;
    for (std::size_t i = 0; i < k; ++i) {
        sw += w[i];
        sx += w[i] * x[i];
        sy_ += w[i] * y[i];
    }
    const double xb = sx / sw, yb = sy_ / sw;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < k; ++i) {
        sxx += w[i] * (x[i] - xb) * (x[i] - xb);
        sxy += w[i] * (x[i] - xb) * (y[i] - yb);
        syy += w[i] * (y[i] - yb) * (y[i] - yb);
    }

    StretchedFit fit;
    fit.alpha_hat = sxy / sxx;
    fit.intercept = yb - fit.alpha_hat * xb;
    const double ss_res = syy - sxy * sxy / sxx;
    fit.r2 = syy > 0 ? 1.0 - ss_res / syy : 1.0;
    fit.alpha_stderr =
        k > 2 ? std::sqrt(std::max(0.0, ss_res / double(k - 2)) / sxx *
                          (sw / double(k)))
              : 0.0;

    // Quadratic term in centered log n; a clearly concave series with a
    // small slope is polynomial decay, not a stretched exponential.
    double s3 = 0, s4 = 0, sx2y = 0, s2 = 0, s2y = 0;
    for (std::size_t i = 0; i < k; ++i) {
        const double c = x[i] - xb;
        s2 += w[i] * c * c;
        s3 += w[i] * c * c * c;
        s4 += w[i] * c * c * c * c;
        s2y += w[i] * c * c * (y[i] - yb);
        sx2y += w[i] * c * (y[i] - yb);
    }
    // Solve the 2x2 normal equations for (slope, quad).
    const double det = s2 * s4 - s3 * s3;
    if (std::abs(det) > 1e-12) {
        fit.curvature = (s2 * s2y - s3 * sx2y) / det;
    }
    fit.polynomial_decay = fit.alpha_hat < 0.2 && fit.curvature < -0.003;
    return fit;
}

}  // namespace graphwalk
