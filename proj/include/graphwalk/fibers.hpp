#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "graphwalk/errors.hpp"
#include "graphwalk/numeric.hpp"

namespace graphwalk {

// Fiber growth profile: beta = 2*alpha/(1-alpha), F(x) = exp(x^beta).
// Fiber sizes are the consecutive ratios of F, so the product of sizes over
// a window telescopes back to F.
struct GrowthProfile {
    double alpha = 1.0 / 3.0;
    double beta = 1.0;

    static GrowthProfile from_alpha(double alpha);
    double log_f(double x) const;  // ln F(x) = x^beta
};

// Cyclic fibers B'_z = Z/l(z)Z with l(z) = round(F(|z|+1)/F(|z|)), clamped
// below at 2 so the fiber always has an edge.  l=1 only occurs through the
// constant override (trivial fiber); l=2 is a single edge.
class FiberFamily {
  public:
    static constexpr std::int64_t kHuge = -1;

    static FiberFamily from_alpha(double alpha);
    static FiberFamily constant(std::int64_t l);  // e.g. 2 for Z/2Z fibers

    // Exact rounded size; throws Overflow beyond the representable budget.
    std::int64_t size(std::int64_t z) const;

    // Size, or kHuge when it exceeds the budget (z out of simulable range
    // for table building; return probabilities then use the line regime).
    std::int64_t size_or_huge(std::int64_t z) const;

    // log2 of the (unclamped-above) fiber size; always representable.
    double log2_size(std::int64_t z) const;

    bool is_constant() const { return constant_l_.has_value(); }
    double alpha() const { return profile_.alpha; }
    const GrowthProfile& profile() const { return profile_; }

  private:
    GrowthProfile profile_;
    std::optional<std::int64_t> constant_l_;
};

// Degree of a vertex in the l-cycle (huge cycles are locally lines).
inline std::int64_t cycle_degree(std::int64_t l) {
    if (l == FiberFamily::kHuge) return 2;
    return l == 1 ? 0 : l == 2 ? 1 : 2;
}

// --- Return probabilities of the lazy walk on a cycle -------------------

// P(Y_m = 0), m = 0..m_max, by dynamic programming over the l states.
std::vector<double> cycle_return_table(std::int64_t l, std::int64_t m_max);
std::vector<Rational> cycle_return_table_exact(std::int64_t l,
                                               std::int64_t m_max);

// Lazy walk on Z (1/3 stay, 1/3 each side); equals the cycle value whenever
// m < l, since no path can wrap.
std::vector<double> line_return_table(std::int64_t m_max);

double fiber_return_prob(std::int64_t l, std::int64_t m);
Rational fiber_return_prob_exact(std::int64_t l, std::int64_t m);

// Spectral form (1/l) * sum_k lambda_k^m with lambda_k the lazy-cycle
// eigenvalues; cross-check for the DP.
double fiber_return_prob_spectral(std::int64_t l, std::int64_t m);

// Memoized per-(l, m-grid) tables; the fait0 estimator queries these
// millions of times.  Built eagerly, then shared read-only.
class FiberReturnTable {
  public:
    FiberReturnTable(const FiberFamily& family, std::int64_t z_range,
                     std::int64_t m_max);

    // P(Y^{B_z}_m = 0).
    double value(std::int64_t z, std::int64_t m) const;
    // Same, by fiber size (kHuge allowed).
    double value_by_size(std::int64_t l, std::int64_t m) const;

    std::int64_t m_max() const { return m_max_; }
    const FiberFamily& family() const { return family_; }

  private:
    FiberFamily family_;
    std::int64_t m_max_;
    std::vector<double> line_;
    std::map<std::int64_t, std::vector<double>> cycles_;
};

struct FiberFloorReport {
    std::int64_t l = 0;
    bool floor_holds = false;       // P(Y_m=0) >= 1/l for all m <= n_max
    double max_floor_gap = 0.0;     // max over m of 1/l - P (<=0 when holds)
    std::int64_t floor_attained_at = -1;  // first m with |P - 1/l| <= 1e-9
    double envelope_gap_at_n_max = 0.0;
    double diffusive_c = 0.0;       // -log P - 0.5 log m averaged over m<l^2
    bool monotone = false;          // P non-increasing in m over the grid
};

std::vector<FiberFloorReport> fiber_return_lower_check(
    const std::vector<std::int64_t>& sizes, std::int64_t n_max);

}  // namespace graphwalk
