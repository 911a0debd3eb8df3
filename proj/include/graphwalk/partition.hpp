#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "graphwalk/errors.hpp"

namespace graphwalk {

// Growth function g: N+ -> N+ with g(1) = 1, non-decreasing and
// g(2n) <= 2g(n); drives the recursive dyadic partition.
class GrowthFunction {
  public:
    GrowthFunction(std::string name,
                   std::function<std::int64_t(std::int64_t)> eval);

    // max(1, round(x^beta)) with a running maximum, so rounding never
    // breaks monotonicity.  The doubling condition is checked, not assumed.
    static GrowthFunction power(double beta);
    static GrowthFunction identity();
    static GrowthFunction constant_one();
    static GrowthFunction from_table(const std::string& name,
                                     std::vector<std::int64_t> values);

    std::int64_t operator()(std::int64_t x) const;
    const std::string& name() const { return name_; }

    // Throws InvalidGrowth on a violation within [1, limit].
    void validate(std::int64_t limit) const;

  private:
    std::string name_;
    std::function<std::int64_t(std::int64_t)> eval_;
    mutable std::vector<std::int64_t> cache_;
};

// Class counts and sizes over a window of m consecutive integers starting
// at k (the half-open [k, k+m[ of the S_j convention; it holds exactly m
// points, so the sizes sum to m).
struct WindowStats {
    std::int64_t k = 0;
    std::int64_t m = 0;
    std::int64_t classes_touched = 0;              // N
    std::map<std::int32_t, std::int64_t> sizes;    // nonzero classes only
};

struct RatioScanReport {
    // Largest S_i/S_j over aligned dyadic blocks (construction gives <= 2).
    std::int64_t dyadic_num = 1, dyadic_den = 1;
    // Largest S_i/S_j over all scanned windows, with its witness.
    std::int64_t window_num = 1, window_den = 1;
    std::int64_t worst_k = 0, worst_m = 0;
    std::int32_t worst_i = 0, worst_j = 0;
    std::int64_t windows_scanned = 0;

    double max_dyadic_ratio() const {
        return double(dyadic_num) / double(dyadic_den);
    }
    double max_window_ratio() const {
        return double(window_num) / double(window_den);
    }
    bool dyadic_within(std::int64_t bound) const {
        return dyadic_num <= bound * dyadic_den;
    }
    bool window_within(std::int64_t bound) const {
        return window_num <= bound * window_den;
    }
};

struct GrowthBoundsReport {
    bool ok = true;
    std::int64_t windows_scanned = 0;
    std::int64_t fail_k = 0, fail_m = 0, fail_n = 0;
    std::int64_t fail_lower = 0, fail_upper = 0;
};

// The recursive partition of Z from the dyadic construction: built on
// [1, 2^S] by level-by-level extension, then reflected to j <= 0 via
// class_of(j) = class_of(1-j).
class DyadicPartition {
  public:
    static DyadicPartition build(const GrowthFunction& g, int levels);

    int levels() const { return levels_; }
    std::int64_t range_min() const { return 1 - half_range_; }
    std::int64_t range_max() const { return half_range_; }
    std::int32_t class_count() const { return class_count_; }

    std::int32_t class_of(std::int64_t j) const;

    WindowStats window_stats(std::int64_t k, std::int64_t m) const;

    // Scans all aligned dyadic blocks plus every window with start
    // |k| <= k_abs_max and 1 <= m <= m_max that fits the built range.
    RatioScanReport check_ratio(std::int64_t k_abs_max,
                                std::int64_t m_max) const;

    // Proof-constant bounds g(floor(m/4)) <= N(k, m) <= 2 g(2m) over the
    // same window scan (the lower bound degrades to 1 for m < 4).
    GrowthBoundsReport check_growth_bounds(const GrowthFunction& g,
                                           std::int64_t k_abs_max,
                                           std::int64_t m_max) const;

    // Size multiset of the aligned block [A*2^s+1, (A+1)*2^s].
    std::vector<std::int64_t> block_size_multiset(std::int64_t A,
                                                  int level) const;

    // Flat text table `j<TAB>class`, one line per point of the built range.
    void dump(std::ostream& os) const;
    static std::vector<std::pair<std::int64_t, std::int32_t>> load_table(
        std::istream& is);

  private:
    int levels_ = 0;
    std::int64_t half_range_ = 0;
    std::int32_t class_count_ = 0;
    std::vector<std::int32_t> class_of_pos_;  // index j in [1, 2^S]
};

}  // namespace graphwalk
