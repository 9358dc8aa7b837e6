#pragma once

#include <cstdint>
#include <span>

#include "qmcerr/core_types.hpp"

namespace qmcerr {

/// The regularity-one kernel: t when x >= t (including x = t), t - 1 when x < t.
double kernel(double x, double t);

/// sum over points of the product kernel on the axes in u, at t_u.
double kernel_sum(const PointSet& ps, SubsetId u, std::span<const double> t_u);

/// The same quantity assembled from local discrepancies of all nonempty
/// sub-projections; an independent evaluation route used for cross-checking.
double kernel_sum_via_discrepancy(const PointSet& ps, SubsetId u, std::span<const double> t_u);

struct WceLimits {
    std::int64_t cell_budget = 400'000;      // adaptive integration, per subset
    std::int64_t sup_op_budget = 200'000'000;  // exact corner enumeration for p* = inf
    int rounds = 4;
};

/// Worst-case quadrature error of the equal-weight rule on ps over the
/// gamma-weighted unit ball.  Exact for p* = 2 (pairwise closed form), for
/// p* = inf (grid corner sup, falling back to a bounded lower-bound scan when
/// the exact enumeration exceeds sup_op_budget), and for one-axis subsets;
/// otherwise certified adaptive quadrature within tol.
ErrorReport wce(const PointSet& ps, const Weights& w, PStar pstar, double tol = 1e-9,
                const WceLimits& limits = {});

}  // namespace qmcerr
