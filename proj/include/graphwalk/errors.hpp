#pragma once

#include <stdexcept>
#include <string>

namespace graphwalk {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// State-space or path-enumeration budget blown; caller must shrink n or
// switch to Monte Carlo.
struct BudgetExceeded : Error { using Error::Error; };

// Query outside a built range (partition window, generalized-wreath base).
struct OutOfRange : Error { using Error::Error; };

// Growth function violates g(1)=1, monotonicity or g(2n) <= 2g(n).
struct InvalidGrowth : Error { using Error::Error; };

// Fiber size beyond the representable budget.
struct Overflow : Error { using Error::Error; };

// Product-kernel step from a base vertex with no neighbors.
struct IsolatedVertex : Error { using Error::Error; };

// Series unusable for a stretched-exponent fit (estimates outside (0,1)).
struct DegenerateSeries : Error { using Error::Error; };

// ODE step control underflowed.
struct StiffnessFailure : Error { using Error::Error; };

// No per-lamp step-count convention reproduces the exact product kernel.
struct NoConventionMatches : Error { using Error::Error; };

// No feasible set in the search window meets the isoperimetric constraint.
struct EmptyFeasible : Error { using Error::Error; };

// Estimator invoked before convention calibration, or with an unknown one.
struct InvalidConvention : Error { using Error::Error; };

// Origin cluster is {0} with no edges: a valid percolation sample, flagged
// so callers can resample conditioned on a large cluster.
struct OriginIsolated : Error { using Error::Error; };

}  // namespace graphwalk
