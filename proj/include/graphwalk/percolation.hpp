#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "graphwalk/errors.hpp"
#include "graphwalk/graph.hpp"
#include "graphwalk/numeric.hpp"
#include "graphwalk/rng.hpp"
#include "graphwalk/walk.hpp"

namespace graphwalk {

// Bernoulli bond sample on the box [-n, n]^d: one bit per edge, drawn in a
// fixed edge order so the array is reproducible from the seed.
struct BondSample {
    int d = 2;
    std::int64_t radius = 0;
    double p = 0.5;
    std::uint64_t seed = 0;
    std::vector<std::uint8_t> bits;

    static BondSample draw(int d, std::int64_t radius, double p,
                           std::uint64_t seed);

    std::int64_t side() const { return 2 * radius + 1; }
    std::int64_t vertex_count() const;
    std::int64_t edge_count() const { return vertex_count() * d; }

    std::int64_t vertex_index(const std::array<std::int32_t, 3>& c) const;
    std::array<std::int32_t, 3> vertex_coord(std::int64_t idx) const;

    // Edge from vertex idx towards +e_axis; valid only when the neighbor
    // stays in the box.
    bool kept(std::int64_t vertex_idx, int axis) const {
        return bits[std::size_t(vertex_idx * d + axis)] != 0;
    }
};

// Origin-containing cluster restricted to the box, as a GraphView.
class ClusterGraph {
  public:
    using Vertex = std::int64_t;  // dense index into the cluster

    static ClusterGraph origin_cluster(const BondSample& sample);

    std::vector<Vertex> neighbors(Vertex v) const {
        return adj_[std::size_t(v)];
    }
    int valency_bound() const { return 2 * d_; }

    std::int64_t size() const { return std::int64_t(adj_.size()); }
    Vertex origin() const { return origin_; }
    bool touches_boundary() const { return touches_boundary_; }
    bool origin_isolated() const { return size() == 1; }
    int dimension() const { return d_; }
    std::int64_t box_radius() const { return box_radius_; }
    const std::array<std::int32_t, 3>& coord(Vertex v) const {
        return coords_[std::size_t(v)];
    }

    // Graph distances from the origin (BFS).
    std::vector<std::int32_t> distances_from_origin() const;
    // |B_m(C)| for m = 0..m_max.
    std::vector<std::int64_t> ball_volumes(std::int64_t m_max) const;

    // Edge list dump `x1 y1 z1 x2 y2 z2`, one retained edge per line.
    void dump_edges(std::ostream& os) const;

  private:
    int d_ = 2;
    std::int64_t box_radius_ = 0;
    Vertex origin_ = 0;
    bool touches_boundary_ = false;
    std::vector<std::array<std::int32_t, 3>> coords_;
    std::vector<std::vector<Vertex>> adj_;
};

// Throws OriginIsolated when the origin has no retained edge.
ClusterGraph sample_cluster(int d, std::int64_t radius, double p,
                            std::uint64_t seed);

// Resample until the cluster touches the box boundary (desk-scale proxy
// for conditioning on the infinite cluster); advances the seed in place.
ClusterGraph sample_cluster_conditioned(int d, std::int64_t radius, double p,
                                        std::uint64_t& seed, int max_tries);

// --- Local-time functionals ---------------------------------------------

// e^{-lambda * sum_x L_x^alpha} over visited x.
double functional_sum_alpha(const std::map<std::int64_t, std::int64_t>& L,
                            double alpha, double lambda);
// prod_x L_x^{-alpha}.
double functional_prod(const std::map<std::int64_t, std::int64_t>& L,
                       double alpha);

struct FunctionalSpec {
    enum class Kind { kSumAlpha, kProdAlpha, kVisited };
    Kind kind = Kind::kSumAlpha;
    double alpha = 0.0;
    double lambda = 1.0;
    bool with_indicator = false;  // multiply by 1{X_n = origin}

    std::string id() const;
};

struct FunctionalEstimate {
    std::string functional_id;
    bool with_indicator = false;
    std::int64_t n = 0;
    double estimate = 0.0;
    double stderr_est = 0.0;
    std::int64_t samples = 0;
    std::uint64_t seed = 0;
    std::int64_t cluster_size = 0;
    bool cluster_touches_boundary = false;
};

// Plain Monte Carlo over lazy walks started at the origin.
FunctionalEstimate estimate_functional(const ClusterGraph& cluster,
                                       const FunctionalSpec& spec,
                                       std::int64_t n, std::int64_t samples,
                                       std::uint64_t seed, int workers = 1);

// Sequential Monte Carlo (systematic-resampling particle population) for
// E[e^{-lambda sum L^alpha}]; plain sampling cannot see values of order
// e^{-n^{d/(d+2)}} at the n this is used for.
struct SmcResult {
    double estimate = 0.0;
    double log_estimate = 0.0;
    std::int64_t particles = 0;
    int resamples = 0;
};

SmcResult smc_sum_alpha(const ClusterGraph& cluster, double alpha,
                        double lambda, std::int64_t n, std::int64_t particles,
                        Rng& rng);

// --- Exact small-instance machinery --------------------------------------

// Joint law of (position, full visit-count vector) of the lazy walk from
// the origin; exact rationals.  Only for tiny clusters and horizons.
struct CountVectorDist {
    std::map<std::pair<std::int64_t, std::vector<std::uint8_t>>, Rational>
        states;
};

CountVectorDist count_vector_dp(const ClusterGraph& cluster, std::int64_t n,
                                std::size_t budget);
CountVectorDist count_vector_dp_continue(const ClusterGraph& cluster,
                                         CountVectorDist start,
                                         std::int64_t extra_steps,
                                         std::size_t budget);

// P(bucket(S_n) = m)^2 <= 2d (2m+1)^d P(S_{2n} <= 2m, X_{2n} = 0) for every
// achievable level m, with S the L^alpha sum (or log-local-time sum).
// Functional values are bucketed by ceiling on the unit grid so that the
// two-halves subadditivity argument stays valid; probabilities are exact.
struct BiduleReport {
    bool ok = true;
    double alpha = 0.0;
    bool log_variant = false;
    std::int64_t levels_checked = 0;
    std::int64_t fail_m = -1;
    double fail_lhs_sq = 0.0, fail_rhs_bound = 0.0;
    // Worst margin: min over m of (const * RHS - LHS^2), as a double.
    double min_margin = 0.0;
};

BiduleReport check_bidule(const ClusterGraph& cluster, std::int64_t n,
                          double alpha, std::size_t budget,
                          bool log_variant = false);

// E[e^{-l sum L^alpha}] >= e^{-l V(m)^{1-alpha} (n+1)^alpha} P(sup dist<=m)
// with V(m) counted exactly and the confinement probability by killed DP.
// The (n+1) uses this artifact's visit convention (L counts time 0).
struct LowerBoundReport {
    bool ok = false;
    double lhs = 0.0, lhs_stderr = 0.0;
    double rhs = 0.0;
    double conf_prob = 0.0;
    std::int64_t ball_volume = 0;
    double slack = 0.0;  // lhs / rhs
    bool exact = false;
};

LowerBoundReport check_lower_bound_sum(const ClusterGraph& cluster,
                                       std::int64_t n, double alpha,
                                       double lambda, std::int64_t m,
                                       bool exact_dp, std::int64_t samples,
                                       std::uint64_t seed);

// --- Exponent trend -------------------------------------------------------

struct TrendResult {
    double eta_hat = 0.0;
    double eta_stderr = 0.0;
    double target = 0.0;
    StretchedFit fit;
    std::vector<SeriesPoint> series;  // abscissa n+1 (visit-mass clock)
};

// Averages SMC estimates over boundary-touching clusters and fits the
// stretched exponent of -log E[e^{-lambda sum L^alpha}].  alpha = 1 is the
// deterministic anchor e^{-lambda (n+1)}.
TrendResult exponent_trend(int d, double p, double alpha, double lambda,
                           const std::vector<std::int64_t>& n_grid,
                           int replicates, std::int64_t particles,
                           std::uint64_t seed);

double trend_target_eta(int d, double alpha);

}  // namespace graphwalk
