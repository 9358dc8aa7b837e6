#pragma once

#include <span>
#include <vector>

#include "qmcerr/core_types.hpp"

namespace qmcerr {

struct OracleValue {
    double value = 0.0;
    double mc_std_error = 0.0;  // 0 in tensor mode
};

/// Brute-force check of the worst-case error for finite p*: composite
/// midpoint-rule tensor quadrature of every subset integral (Monte Carlo with
/// a reported standard error for subsets of more than 4 axes).  Shares no code
/// with the adaptive engine; per-axis convergence is O(h^2) on smooth pieces.
OracleValue quadrature_oracle(const PointSet& ps, const Weights& w, PStar pstar,
                              int grid_points_per_axis);

/// Midpoint-rule tensor quadrature of the L_{p*} discrepancy (finite p*).
double discrepancy_quadrature_oracle(const PointSet& ps, PStar pstar, int grid_points_per_axis);

struct SearchOutcome {
    std::vector<double> points;
    double error = 0.0;
};

/// Exhaustive search for the best rule with at most n nodes (n <= 3), over
/// sorted tuples drawn from the uniform grid {i/resolution : i = 0..resolution}
/// with unit weight.  Ties break toward the lexicographically smallest tuple.
SearchOutcome optimality_search_1d(int n, PStar pstar, int grid_resolution);

/// True iff each interval [(j-1)/n, j/n) contains exactly one of the points.
bool one_point_per_interval_check(std::span<const double> pts, int n);

}  // namespace qmcerr
